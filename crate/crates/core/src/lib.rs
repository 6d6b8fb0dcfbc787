//! Click-detector models, log-likelihood statistics and Monte-Carlo
//! rangefinding for quantum (TMSV + idler herald) and classical (thermal)
//! illumination.
//!
//! ```
//! use qirange_core::{quantum_advantage, Scenario};
//!
//! let qa = quantum_advantage(&Scenario::reference(), 0.8).unwrap();
//! assert!(qa.ratio > 20.0);
//! ```

pub mod detection;
pub mod error;
pub mod fom;
pub mod llv;
pub mod optics;
pub mod range;
pub mod scenario;
pub mod scene;
pub mod sim;

pub use detection::{
    average_distinguishability, discrepancy_ok, distinguishability, q_function, quantum_advantage, roc_curve,
    shots_to_threshold, threshold_grid, DiscrepancyReport, QuantumAdvantage, RocCurve, RocPoint, ThresholdShots,
    DEFAULT_PHI_T,
};
pub use error::{Error, Result};
pub use fom::{fom_crlb, fom_snr, Crlb};
pub use llv::{
    gaussian_regime_ok, llv_coefficients, llv_moments, llv_value, GaussianCheck, GaussianMoments, IdlerClicks,
    LlvCoefficients, LlvDistributionPair,
};
pub use optics::{
    click_probabilities, click_probability_coherent, planck_background, povm_noclick_weight, ChannelParams,
    ClickProbabilities, DetectorParams, SourceKind, SourceParams,
};
pub use range::{
    default_plan, p_correct_curve, rolling_llv_shots, run_rangefinding_trial, sample_rolling_mean, scan_decision,
    Decision, DistanceCurve, InspectionPlan, PCorrectCurve, RollingPoint, SampleSeries, TraceEvent, TrialRecord, Truth,
};
pub use scenario::{HypothesisProbs, Regime, Scenario};
pub use scene::{
    delay_shots, delay_shots_with, lambertian_attenuation, realistic_resolution, spatial_resolution,
    temporal_resolution, GeometryParams, RangeHypothesis, SPEED_OF_LIGHT, SPEED_OF_LIGHT_ROUNDED,
};
pub use sim::{
    count_window, generate_streams, sample_window_counts, trial_rng, BitStream, ClickStreams, ShotModel, Target,
    WindowCounts, GENERATOR_ID,
};
