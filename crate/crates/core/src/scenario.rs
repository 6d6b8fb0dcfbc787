//! Shared scenario description and the regime-specific view of the click
//! probabilities that the likelihood test consumes.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optics::{click_probabilities, ChannelParams, ClickProbabilities, DetectorParams, SourceParams};

/// Which illumination scheme a statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Classical illumination: thermal source, signal detector only.
    Ci,
    /// Quantum illumination: TMSV source with heralding idler detector.
    Qi,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Ci => "ci",
            Regime::Qi => "qi",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All physical knobs of one detection experiment.
///
/// The same mean photon number is used for the TMSV signal mode (QI) and for
/// the thermal probe (CI), so the two regimes are compared like for like.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mean_photons: f64,
    pub signal: DetectorParams,
    pub idler: DetectorParams,
    pub attenuation: f64,
}

impl Scenario {
    /// The parameter set used throughout the reference figures: Fig. 3 style,
    /// object at 3 m behind a unit-area Lambertian geometry.
    pub fn reference() -> Self {
        Self {
            mean_photons: 2.19e-2,
            signal: DetectorParams::new(0.5, 5.06e-2),
            idler: DetectorParams::new(0.5, 4.49e-4),
            attenuation: 8.84e-3,
        }
    }

    pub fn with_attenuation(mut self, attenuation: f64) -> Self {
        self.attenuation = attenuation;
        self
    }

    fn source(&self, regime: Regime) -> SourceParams {
        match regime {
            Regime::Ci => SourceParams::thermal(self.mean_photons),
            Regime::Qi => SourceParams::tmsv(self.mean_photons),
        }
    }

    /// Single-shot click probabilities for the regime's source.
    pub fn click_probabilities(&self, regime: Regime, object_present: bool) -> Result<ClickProbabilities> {
        click_probabilities(
            &self.source(regime),
            &self.signal,
            &self.idler,
            &ChannelParams::new(self.attenuation),
            object_present,
        )
    }

    /// The probabilities the likelihood test compares for `regime`.
    pub fn hypotheses(&self, regime: Regime) -> Result<HypothesisProbs> {
        Ok(HypothesisProbs::from_clicks(&self.click_probabilities(Regime::Qi, true)?, regime))
    }
}

/// Bernoulli parameters of the two hypotheses as seen by the likelihood test.
///
/// Shots are split by the herald (idler) outcome. In the classical regime every
/// shot counts as heralded (`herald = 1`) and only the coincidence channel is used,
/// which reduces the two-channel formulas to the single-channel ones exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisProbs {
    pub regime: Regime,
    /// Probability that a shot is heralded.
    pub herald: f64,
    /// Signal click probability on heralded shots, object present.
    pub h1_coinc: f64,
    /// Signal click probability on unheralded shots, object present.
    pub h1_noncoinc: f64,
    /// Signal click probability with the object absent (both channels).
    pub h0: f64,
}

impl HypothesisProbs {
    pub fn from_clicks(p: &ClickProbabilities, regime: Regime) -> Self {
        match regime {
            Regime::Qi => Self {
                regime,
                herald: p.p_i,
                h1_coinc: p.p_h1_i1,
                h1_noncoinc: p.p_h1_i0,
                h0: p.p_h0,
            },
            Regime::Ci => Self {
                regime,
                herald: 1.0,
                h1_coinc: p.p_h1_ci,
                h1_noncoinc: p.p_h1_ci,
                h0: p.p_h0,
            },
        }
    }

    /// Probabilities of the coincidence and non-coincidence channels under H1 or H0.
    pub fn channels(&self, object_present: bool) -> (f64, f64) {
        if object_present {
            (self.h1_coinc, self.h1_noncoinc)
        } else {
            (self.h0, self.h0)
        }
    }
}
