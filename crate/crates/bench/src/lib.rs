//! Fixtures shared by the throughput benchmarks.

use qirange_core::{generate_streams, ClickStreams, Regime, Scenario, ShotModel, Target};

/// Reference-scenario streams with the object 10 bins away.
pub fn reference_streams(shots: u64, seed: u64) -> ClickStreams {
    let p = Scenario::reference()
        .click_probabilities(Regime::Qi, true)
        .expect("reference scenario is valid");
    generate_streams(&ShotModel::present(&p), Target::Present { delay: 10, onset: 0 }, shots, seed, 0)
        .expect("reference model is valid")
}

pub fn reference_model() -> ShotModel {
    ShotModel::present(
        &Scenario::reference()
            .click_probabilities(Regime::Qi, true)
            .expect("reference scenario is valid"),
    )
}
