//! Log-likelihood values (LLVs) of click counts and their Gaussian moments.
//!
//! With binomial click counts the log ratio of the object-present and
//! object-absent likelihoods is linear in the counts:
//!
//! `LLV(x, y, k, N) = m1 * x + k * c1 + m2 * y + (N - k) * c2`
//!
//! where `x` are coincidence clicks among the `k` heralded shots and `y` are
//! signal clicks among the `N - k` unheralded shots. The classical regime is
//! the special case `m1 = m2`, `c1 = c2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::ClickProbabilities;
use crate::scenario::{HypothesisProbs, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlvCoefficients {
    pub regime: Regime,
    pub m1: f64,
    pub c1: f64,
    pub m2: f64,
    pub c2: f64,
}

impl LlvCoefficients {
    /// Coefficients for the hypothesis pair. Fails if any signal click
    /// probability sits on the boundary of (0, 1).
    pub fn from_hypotheses(p: &HypothesisProbs) -> Result<Self> {
        let h1_coinc = interior("h1_coinc", p.h1_coinc)?;
        let h1_noncoinc = interior("h1_noncoinc", p.h1_noncoinc)?;
        let h0 = interior("h0", p.h0)?;
        let (m1, c1) = channel_coefficients(h1_coinc, h0);
        let (m2, c2) = channel_coefficients(h1_noncoinc, h0);
        Ok(Self {
            regime: p.regime,
            m1,
            c1,
            m2,
            c2,
        })
    }

    /// Single-channel slope `M` (classical regime).
    pub fn m(&self) -> f64 {
        self.m1
    }

    /// Single-channel per-shot offset `C` (classical regime).
    pub fn c(&self) -> f64 {
        self.c1
    }

    /// LLV of the counts without bounds checking.
    #[inline]
    pub fn eval(&self, x: u64, y: u64, k: u64, n: u64) -> f64 {
        self.m1 * x as f64 + self.c1 * k as f64 + self.m2 * y as f64 + self.c2 * (n - k) as f64
    }
}

fn interior(name: &'static str, p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::Degenerate { name, value: p })
    }
}

/// `(ln[p1 (1 - p0) / (p0 (1 - p1))], ln[(1 - p1) / (1 - p0)])`
fn channel_coefficients(p1: f64, p0: f64) -> (f64, f64) {
    let slope = (p1.ln() - p0.ln()) + ((-p0).ln_1p() - (-p1).ln_1p());
    let offset = (-p1).ln_1p() - (-p0).ln_1p();
    (slope, offset)
}

/// LLV coefficients for `regime` from the single-shot click probabilities.
pub fn llv_coefficients(probs: &ClickProbabilities, regime: Regime) -> Result<LlvCoefficients> {
    LlvCoefficients::from_hypotheses(&HypothesisProbs::from_clicks(probs, regime))
}

/// Evaluates the LLV of `x` coincidence clicks, `y` non-coincidence clicks and
/// `k` idler clicks after `n` shots.
pub fn llv_value(coeffs: &LlvCoefficients, x: u64, y: u64, k: u64, n: u64) -> Result<f64> {
    if k > n || x > k || y > n - k {
        return Err(Error::Counts { x, y, k, n });
    }
    Ok(coeffs.eval(x, y, k, n))
}

/// Mean and standard deviation of a Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub mean: f64,
    /// Zero only when the LLV is deterministic (identical hypotheses).
    pub std: f64,
}

/// The number of heralded shots the LLV moments are conditioned on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdlerClicks {
    /// `k = N * Pr_I`, the mean of the idler click distribution.
    Mean,
    /// A fixed number of idler clicks.
    Exactly(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlvDistributionPair {
    pub h1: GaussianMoments,
    pub h0: GaussianMoments,
    pub shots: f64,
    pub idler_clicks: f64,
}

impl LlvDistributionPair {
    /// Scales the spread of both distributions by `1/sqrt(samples)`, as for the
    /// mean of `samples` independent LLVs.
    pub fn averaged(&self, samples: f64) -> Self {
        let f = samples.sqrt();
        Self {
            h1: GaussianMoments {
                mean: self.h1.mean,
                std: self.h1.std / f,
            },
            h0: GaussianMoments {
                mean: self.h0.mean,
                std: self.h0.std / f,
            },
            ..*self
        }
    }
}

fn moments_for(
    probs: &HypothesisProbs,
    coeffs: &LlvCoefficients,
    n: f64,
    k: Option<f64>,
    object_present: bool,
) -> Result<GaussianMoments> {
    let (p1, p0) = probs.channels(object_present);
    let v1 = p1 * (1.0 - p1);
    let v0 = p0 * (1.0 - p0);
    let LlvCoefficients { m1, c1, m2, c2, .. } = *coeffs;
    let (mean, var) = match k {
        None => {
            let pi = probs.herald;
            let mean = n * (pi * (m1 * p1 + c1 - m2 * p0 - c2) + m2 * p0 + c2);
            let var = n * (pi * (m1 * m1 * v1 - m2 * m2 * v0) + m2 * m2 * v0);
            (mean, var)
        }
        Some(k) => {
            let rest = n - k;
            let mean = m1 * k * p1 + c1 * k + m2 * rest * p0 + rest * c2;
            let var = m1 * m1 * k * v1 + m2 * m2 * rest * v0;
            (mean, var)
        }
    };
    if var < 0.0 {
        // Both channel variances are non-negative, so anything beyond rounding
        // noise of their scale is a genuine sign error.
        let scale = n * (m1 * m1 * v1 + m2 * m2 * v0);
        if var >= -1e-12 * scale {
            return Ok(GaussianMoments { mean, std: 0.0 });
        }
        return Err(Error::NegativeVariance(var));
    }
    Ok(GaussianMoments { mean, std: var.sqrt() })
}

/// Gaussian moments of the object-present and object-absent LLV distributions
/// after `n` shots, either at the mean idler count or at a fixed one.
///
/// No Gaussian-regime check happens here; see [`gaussian_regime_ok`].
pub fn llv_moments(
    probs: &HypothesisProbs,
    coeffs: &LlvCoefficients,
    n: f64,
    idler: IdlerClicks,
) -> Result<LlvDistributionPair> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: n,
            reason: "must be finite and non-negative",
        });
    }
    let k = match idler {
        IdlerClicks::Mean => None,
        IdlerClicks::Exactly(k) => {
            if !(0.0..=n).contains(&k) {
                return Err(Error::InvalidParameter {
                    name: "idler_clicks",
                    value: k,
                    reason: "must lie in [0, shots]",
                });
            }
            Some(k)
        }
    };
    let h1 = moments_for(probs, coeffs, n, k, true)?;
    let h0 = moments_for(probs, coeffs, n, k, false)?;
    Ok(LlvDistributionPair {
        h1,
        h0,
        shots: n,
        idler_clicks: k.unwrap_or(n * probs.herald),
    })
}

/// Outcome of the skewness criterion on the least Gaussian click distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCheck {
    pub ok: bool,
    /// `(1 - 2p) / sqrt(I_min p (1 - p))`; infinite when `I_min <= 0`.
    pub skew: f64,
    /// `I_min = int(mu_I - 4 sigma_I)`.
    pub trials: i64,
    pub p: f64,
}

/// Largest skewness allowed before the binomial-to-Gaussian step is rejected.
pub const MAX_SKEW: f64 = 0.3;

/// `(mu_I - 4 sigma_I, mu_I + 4 sigma_I)` truncated toward zero.
pub fn idler_extremes(n: f64, herald: f64) -> (i64, i64) {
    let mu = n * herald;
    let sigma = (n * herald * (1.0 - herald)).sqrt();
    ((mu - 4.0 * sigma).trunc() as i64, (mu + 4.0 * sigma).trunc() as i64)
}

/// Checks that the weakest binomial in play (object-absent coincidences after
/// the minimum plausible number of idler clicks) is close enough to Gaussian.
pub fn gaussian_regime_ok(n: f64, probs: &HypothesisProbs) -> GaussianCheck {
    let (trials, _) = idler_extremes(n, probs.herald);
    let p = probs.h0;
    let skew = if trials > 0 && p > 0.0 && p < 1.0 {
        (1.0 - 2.0 * p) / (trials as f64 * p * (1.0 - p)).sqrt()
    } else {
        f64::INFINITY
    };
    GaussianCheck {
        ok: skew < MAX_SKEW,
        skew,
        trials,
        p,
    }
}

impl GaussianCheck {
    pub fn require(&self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::GaussianRegime {
                skew: self.skew,
                trials: self.trials,
                p: self.p,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn identical_hypotheses_give_zero_coefficients() {
        let p = HypothesisProbs {
            regime: Regime::Qi,
            herald: 0.01,
            h1_coinc: 0.2,
            h1_noncoinc: 0.2,
            h0: 0.2,
        };
        let c = LlvCoefficients::from_hypotheses(&p).unwrap();
        assert_eq!((c.m1, c.c1, c.m2, c.c2), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(llv_value(&c, 3, 4, 10, 20).unwrap(), 0.0);
    }

    #[test]
    fn single_bernoulli_shot() {
        let p = HypothesisProbs {
            regime: Regime::Ci,
            herald: 1.0,
            h1_coinc: 0.6,
            h1_noncoinc: 0.6,
            h0: 0.5,
        };
        let c = LlvCoefficients::from_hypotheses(&p).unwrap();
        let v = llv_value(&c, 1, 0, 1, 1).unwrap();
        assert!((v - (0.6f64 / 0.5).ln()).abs() < 1e-15);
        let v = llv_value(&c, 0, 0, 1, 1).unwrap();
        assert!((v - (0.4f64 / 0.5).ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_data_is_neutral() {
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        assert_eq!(llv_value(&c, 0, 0, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn count_bounds() {
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        assert!(llv_value(&c, 5, 0, 4, 10).is_err());
        assert!(llv_value(&c, 0, 7, 4, 10).is_err());
        assert!(llv_value(&c, 0, 0, 11, 10).is_err());
    }

    #[test]
    fn boundary_probabilities_are_degenerate() {
        let p = HypothesisProbs {
            regime: Regime::Ci,
            herald: 1.0,
            h1_coinc: 1.0,
            h1_noncoinc: 1.0,
            h0: 0.5,
        };
        assert!(matches!(LlvCoefficients::from_hypotheses(&p), Err(Error::Degenerate { .. })));
        let p = HypothesisProbs { h0: 0.0, h1_coinc: 0.1, h1_noncoinc: 0.1, ..p };
        assert!(matches!(LlvCoefficients::from_hypotheses(&p), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn reference_coefficients() {
        // Frozen from the closed-form probabilities; the binomial log-ratio
        // cross-check lives in tests/oracles.rs.
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        assert!((c.m1 - 8.346_468_744_858_434e-2).abs() < 1e-12, "{}", c.m1);
        assert!((c.c1 + 4.183_668_667_973_717e-3).abs() < 1e-13, "{}", c.c1);
        assert!((c.m2 - 9.461_232_369_919_236e-4).abs() < 1e-14, "{}", c.m2);
        assert!((c.c2 + 4.558_861_455_461_178e-5).abs() < 1e-15, "{}", c.c2);
        assert!(c.m1 > 0.0);
    }

    #[test]
    fn degenerate_channel_moments_are_identical() {
        let h = Scenario::reference().with_attenuation(0.0).hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        let pair = llv_moments(&h, &c, 1.76e6, IdlerClicks::Mean).unwrap();
        assert!((pair.h1.mean - pair.h0.mean).abs() <= 1e-12 * pair.h0.mean.abs());
        assert!((pair.h1.std - pair.h0.std).abs() <= 1e-12 * pair.h0.std);
    }

    #[test]
    fn moments_scale_with_shots() {
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        let a = llv_moments(&h, &c, 1.76e6, IdlerClicks::Mean).unwrap();
        let b = llv_moments(&h, &c, 3.52e6, IdlerClicks::Mean).unwrap();
        assert!((b.h1.mean / a.h1.mean - 2.0).abs() < 1e-12);
        assert!((b.h0.mean / a.h0.mean - 2.0).abs() < 1e-12);
        assert!((b.h1.std / a.h1.std - 2f64.sqrt()).abs() < 1e-12);
        assert!((b.h0.std / a.h0.std - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mean_idler_equals_fixed_k_at_the_mean() {
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        let n = 1.76e6;
        let a = llv_moments(&h, &c, n, IdlerClicks::Mean).unwrap();
        let b = llv_moments(&h, &c, n, IdlerClicks::Exactly(n * h.herald)).unwrap();
        assert!((a.h1.mean - b.h1.mean).abs() < 1e-9);
        assert!((a.h0.std - b.h0.std).abs() < 1e-9);
    }

    #[test]
    fn reference_moments() {
        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let c = LlvCoefficients::from_hypotheses(&h).unwrap();
        let pair = llv_moments(&h, &c, 1.76e6, IdlerClicks::Mean).unwrap();
        assert!((pair.h1.mean - 3.366_481_670).abs() < 1e-6, "{}", pair.h1.mean);
        assert!((pair.h0.mean + 3.284_133_711).abs() < 1e-6, "{}", pair.h0.mean);
        assert!((pair.h1.std - 2.626_861_138).abs() < 1e-6, "{}", pair.h1.std);
        assert!((pair.h0.std - 2.531_064_420).abs() < 1e-6, "{}", pair.h0.std);
        assert!(pair.h1.mean > pair.h0.mean);
    }

    #[test]
    fn gaussian_criterion() {
        let half = HypothesisProbs {
            regime: Regime::Ci,
            herald: 1.0,
            h1_coinc: 0.5,
            h1_noncoinc: 0.5,
            h0: 0.5,
        };
        assert!(gaussian_regime_ok(1.0, &half).ok);
        let rare = HypothesisProbs { h0: 1e-4, ..half };
        let g = gaussian_regime_ok(10.0, &rare);
        assert!(!g.ok && g.skew > 30.0);
        assert!(g.require().is_err());

        let h = Scenario::reference().hypotheses(Regime::Qi).unwrap();
        let g = gaussian_regime_ok(1.76e6, &h);
        assert!(g.ok, "{g:?}");
        assert_eq!(g.trials, 19_275);
    }
}
