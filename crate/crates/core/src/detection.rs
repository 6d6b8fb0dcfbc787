//! Decision statistics on Gaussian LLV distributions: detection and false-alarm
//! probabilities, distinguishability, ROC curves, and the number of shots
//! needed to reach a target distinguishability.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::{erf, erfc};

use crate::error::{check_finite, Error, Result};
use crate::llv::{gaussian_regime_ok, idler_extremes, llv_moments, GaussianCheck, IdlerClicks, LlvCoefficients, LlvDistributionPair};
use crate::scenario::{HypothesisProbs, Regime, Scenario};

/// Default threshold distinguishability.
pub const DEFAULT_PHI_T: f64 = 0.8;
/// Default bound on the relative distinguishability discrepancy across idler counts.
pub const DEFAULT_DISCREPANCY_TOL: f64 = 0.05;

/// Gaussian tail probability `P(Z > threshold)` for `Z ~ N(mean, std^2)`.
/// A zero `std` is treated as a point mass.
pub fn q_function(threshold: f64, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        return if mean > threshold {
            1.0
        } else if mean < threshold {
            0.0
        } else {
            0.5
        };
    }
    0.5 * erfc((threshold - mean) / (std * std::f64::consts::SQRT_2))
}

impl LlvDistributionPair {
    /// Probability of detection at LLV threshold `d`.
    pub fn p_detect(&self, d: f64) -> f64 {
        q_function(d, self.h1.mean, self.h1.std)
    }

    /// Probability of false alarm at LLV threshold `d`.
    pub fn p_false_alarm(&self, d: f64) -> f64 {
        q_function(d, self.h0.mean, self.h0.std)
    }

    /// Detection probability of the threshold whose false-alarm rate is `p_fa`.
    pub fn p_detect_at_false_alarm(&self, p_fa: f64) -> f64 {
        if p_fa <= 0.0 {
            return 0.0;
        }
        if p_fa >= 1.0 {
            return 1.0;
        }
        if self.h0.std == 0.0 {
            return self.p_detect(self.h0.mean);
        }
        let z = Normal::standard().inverse_cdf(1.0 - p_fa);
        self.p_detect(self.h0.mean + self.h0.std * z)
    }
}

/// `1 - [(1 - P_D(d)) + P_FA(d)]`, in [-1, 1].
pub fn distinguishability(pair: &LlvDistributionPair, d_llv: f64) -> f64 {
    1.0 - ((1.0 - pair.p_detect(d_llv)) + pair.p_false_alarm(d_llv))
}

/// Distinguishability at threshold 0 of the mean of `samples` independent LLVs.
pub fn average_distinguishability(pair: &LlvDistributionPair, samples: u32) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: 0.0,
            reason: "at least one sample is needed",
        });
    }
    Ok(distinguishability(&pair.averaged(samples as f64), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub p_d: f64,
    pub p_fa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Sorted by increasing threshold.
    pub points: Vec<RocPoint>,
    /// The self-calibrated operating point at threshold 0.
    pub operating_point: RocPoint,
}

fn roc_point(pair: &LlvDistributionPair, threshold: f64) -> RocPoint {
    RocPoint {
        threshold,
        p_d: pair.p_detect(threshold),
        p_fa: pair.p_false_alarm(threshold),
    }
}

/// Evaluates (P_D, P_FA) on each threshold. Non-finite thresholds are rejected;
/// the returned points are sorted by threshold.
pub fn roc_curve(pair: &LlvDistributionPair, thresholds: &[f64]) -> Result<RocCurve> {
    let mut ts = thresholds
        .iter()
        .map(|&t| check_finite("threshold", t))
        .collect::<Result<Vec<_>>>()?;
    ts.sort_by(f64::total_cmp);
    Ok(RocCurve {
        points: ts.into_iter().map(|t| roc_point(pair, t)).collect(),
        operating_point: roc_point(pair, 0.0),
    })
}

/// `count` evenly spaced thresholds covering both distributions out to six
/// standard deviations.
pub fn threshold_grid(pair: &LlvDistributionPair, count: usize) -> Vec<f64> {
    let lo = (pair.h0.mean - 6.0 * pair.h0.std).min(pair.h1.mean - 6.0 * pair.h1.std);
    let hi = (pair.h0.mean + 6.0 * pair.h0.std).max(pair.h1.mean + 6.0 * pair.h1.std);
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// Solution of the threshold-distinguishability equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdShots {
    pub regime: Regime,
    /// `N_t = int(N_I1 / Pr_I)` (at least one shot).
    pub shots: u64,
    /// Heralded shots `N_I1` solving the equation (all shots for CI).
    pub herald_shots: f64,
    /// Per-heralded-shot signal-to-spread ratio of the object-present LLV.
    pub g1: f64,
    /// Same for the object-absent LLV (negative).
    pub g0: f64,
    /// Skewness check on the click distributions at `shots`.
    pub gaussian: GaussianCheck,
}

impl ThresholdShots {
    /// Errors when the Gaussian treatment behind the solution does not hold.
    pub fn require_gaussian(self) -> Result<Self> {
        self.gaussian.require()?;
        Ok(self)
    }
}

fn g_ratio(coeffs: &LlvCoefficients, herald: f64, p_coinc: f64, p_noncoinc: f64) -> f64 {
    let unheralded = 1.0 / herald - 1.0;
    let num = coeffs.m1 * p_coinc + coeffs.c1 + unheralded * (coeffs.m2 * p_noncoinc + coeffs.c2);
    let var = coeffs.m1 * coeffs.m1 * p_coinc * (1.0 - p_coinc)
        + coeffs.m2 * coeffs.m2 * unheralded * p_noncoinc * (1.0 - p_noncoinc);
    if var <= 0.0 {
        return 0.0;
    }
    num / (std::f64::consts::SQRT_2 * var.sqrt())
}

const SOLVER_LO: f64 = 1e-6;
const SOLVER_HI: f64 = 1e14;
const SOLVER_RTOL: f64 = 1e-10;

/// Number of shots after which the mean-idler LLV distributions reach
/// distinguishability `phi_t`.
///
/// Solves `phi_t = (erf(-G0 sqrt(u)) + erf(G1 sqrt(u))) / 2` for the heralded
/// shot count `u` by bisection in `ln u`; the left side increases monotonically
/// in `u` whenever `G1 > 0 > G0`.
pub fn shots_to_threshold(probs: &HypothesisProbs, phi_t: f64) -> Result<ThresholdShots> {
    if !(phi_t > 0.0 && phi_t < 1.0) {
        return Err(Error::InvalidParameter {
            name: "phi_t",
            value: phi_t,
            reason: "must lie in (0, 1)",
        });
    }
    if !(probs.herald > 0.0 && probs.herald <= 1.0) {
        return Err(Error::Degenerate {
            name: "herald",
            value: probs.herald,
        });
    }
    let coeffs = LlvCoefficients::from_hypotheses(probs)?;
    let g1 = g_ratio(&coeffs, probs.herald, probs.h1_coinc, probs.h1_noncoinc);
    let g0 = g_ratio(&coeffs, probs.herald, probs.h0, probs.h0);
    if !(g1 > 0.0 && g0 < 0.0) {
        return Err(Error::Indistinguishable("no finite N_t: LLV means do not separate"));
    }

    let phi = |u: f64| 0.5 * (erf(-g0 * u.sqrt()) + erf(g1 * u.sqrt()));
    let (mut lo, mut hi) = (SOLVER_LO, SOLVER_HI);
    if phi(hi) < phi_t {
        return Err(Error::Indistinguishable("no finite N_t below 1e14 heralded shots"));
    }
    let herald_shots = if phi(lo) >= phi_t {
        lo
    } else {
        while hi / lo - 1.0 > SOLVER_RTOL {
            let mid = (lo * hi).sqrt();
            if phi(mid) < phi_t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let shots = ((herald_shots / probs.herald).trunc() as u64).max(1);
    Ok(ThresholdShots {
        regime: probs.regime,
        shots,
        herald_shots,
        g1,
        g0,
        gaussian: gaussian_regime_ok(shots as f64, probs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumAdvantage {
    pub shots_ci: u64,
    pub shots_qi: u64,
    /// `N_t:CI / N_t:QI`.
    pub ratio: f64,
}

/// Ratio of classical to quantum shots needed for distinguishability `phi_t`.
pub fn quantum_advantage(scenario: &Scenario, phi_t: f64) -> Result<QuantumAdvantage> {
    let ci = shots_to_threshold(&scenario.hypotheses(Regime::Ci)?, phi_t)?;
    let qi = shots_to_threshold(&scenario.hypotheses(Regime::Qi)?, phi_t)?;
    Ok(QuantumAdvantage {
        shots_ci: ci.shots,
        shots_qi: qi.shots,
        ratio: ci.shots as f64 / qi.shots as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub ok: bool,
    /// Distinguishability at the mean idler count.
    pub phi_mean: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub idler_min: i64,
    pub idler_max: i64,
}

/// Compares the distinguishability at the extreme plausible idler counts
/// `int(mu_I -/+ 4 sigma_I)` against the mean-idler value.
pub fn discrepancy_ok(probs: &HypothesisProbs, n: f64, tol: f64) -> Result<DiscrepancyReport> {
    let coeffs = LlvCoefficients::from_hypotheses(probs)?;
    let phi_mean = distinguishability(&llv_moments(probs, &coeffs, n, IdlerClicks::Mean)?, 0.0);
    if phi_mean == 0.0 {
        return Err(Error::Indistinguishable("distinguishability is zero at the mean idler count"));
    }
    let (idler_min, idler_max) = idler_extremes(n, probs.herald);
    let phi_at = |k: i64| -> Result<f64> {
        let k = (k.max(0) as f64).min(n);
        Ok(distinguishability(&llv_moments(probs, &coeffs, n, IdlerClicks::Exactly(k))?, 0.0))
    };
    let phi_min = phi_at(idler_min)?;
    let phi_max = phi_at(idler_max)?;
    let dev = |phi: f64| (phi_mean - phi).abs() / phi_mean;
    Ok(DiscrepancyReport {
        ok: dev(phi_min) <= tol && dev(phi_max) <= tol,
        phi_mean,
        phi_min,
        phi_max,
        idler_min,
        idler_max,
    })
}
