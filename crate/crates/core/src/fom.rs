//! Alternative figures of merit: coincidence SNR and the Cramér-Rao bound on
//! estimating the signal attenuation.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::scenario::{HypothesisProbs, Regime, Scenario};

/// `N_coincidences / N_noise`.
pub fn fom_snr(n_coincidences: u64, n_noise: u64) -> Result<f64> {
    if n_noise == 0 {
        return Err(Error::InvalidParameter {
            name: "n_noise",
            value: 0.0,
            reason: "SNR undefined without noise clicks",
        });
    }
    Ok(n_coincidences as f64 / n_noise as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crlb {
    /// Fisher information about the attenuation.
    pub fisher: f64,
    /// Lower bound on the estimator variance, `1 / fisher`.
    pub variance: f64,
    /// `10 log10(variance / xi_hat)`.
    pub db: f64,
}

/// Relative finite-difference step for the second derivative.
pub const CRLB_REL_STEP: f64 = 1e-4;

/// Expected log-likelihood of the counts generated at `truth` when evaluated
/// under the model at `model`, with each click channel treated as Gaussian:
/// `E[ln N(x; mu', s'^2)] = -ln(2 pi s'^2)/2 - (s^2 + (mu - mu')^2) / (2 s'^2)`.
fn expected_log_likelihood(truth: &HypothesisProbs, model: &HypothesisProbs, shots: f64) -> f64 {
    let heralded = shots * truth.herald;
    let channels = [
        (heralded, truth.h1_coinc, model.h1_coinc),
        (shots - heralded, truth.h1_noncoinc, model.h1_noncoinc),
    ];
    channels
        .iter()
        .filter(|(n, _, _)| *n > 0.0)
        .map(|&(n, p, q)| {
            let (mu, var) = (n * p, n * p * (1.0 - p));
            let (mu_m, var_m) = (n * q, n * q * (1.0 - q));
            -0.5 * (2.0 * std::f64::consts::PI * var_m).ln() - (var + (mu - mu_m).powi(2)) / (2.0 * var_m)
        })
        .sum()
}

/// Cramér-Rao bound on the attenuation `xi_hat` after `shots` shots, from a
/// central second difference of the expected Gaussian log-likelihood.
pub fn fom_crlb(scenario: &Scenario, regime: Regime, xi_hat: f64, shots: f64) -> Result<Crlb> {
    fom_crlb_with_step(scenario, regime, xi_hat, shots, CRLB_REL_STEP)
}

pub fn fom_crlb_with_step(scenario: &Scenario, regime: Regime, xi_hat: f64, shots: f64, rel_step: f64) -> Result<Crlb> {
    check_positive("xi_hat", xi_hat)?;
    check_positive("shots", shots)?;
    let h = rel_step * xi_hat;
    if xi_hat + h > 1.0 {
        return Err(Error::InvalidParameter {
            name: "xi_hat",
            value: xi_hat,
            reason: "finite-difference stencil leaves [0, 1]",
        });
    }
    let truth = scenario.with_attenuation(xi_hat).hypotheses(regime)?;
    let ell = |xi: f64| -> Result<f64> {
        let model = scenario.with_attenuation(xi).hypotheses(regime)?;
        Ok(expected_log_likelihood(&truth, &model, shots))
    };
    let second = (ell(xi_hat + h)? - 2.0 * ell(xi_hat)? + ell(xi_hat - h)?) / (h * h);
    let fisher = -second;
    if fisher.is_nan() || fisher <= 0.0 {
        return Err(Error::Indistinguishable("no Fisher information about the attenuation"));
    }
    let variance = 1.0 / fisher;
    Ok(Crlb {
        fisher,
        variance,
        db: 10.0 * (variance / xi_hat).log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_examples() {
        assert_eq!(fom_snr(10, 5).unwrap(), 2.0);
        assert_eq!(fom_snr(0, 5).unwrap(), 0.0);
        assert!(fom_snr(3, 0).is_err());
    }

    #[test]
    fn crlb_guards() {
        let s = Scenario::reference();
        assert!(fom_crlb(&s, Regime::Qi, 0.0, 1e6).is_err());
        assert!(fom_crlb(&s, Regime::Qi, 1e-3, 0.0).is_err());
    }

    #[test]
    fn more_shots_sharpen_the_bound() {
        let s = Scenario::reference();
        let a = fom_crlb(&s, Regime::Qi, s.attenuation, 1.76e6).unwrap();
        let b = fom_crlb(&s, Regime::Qi, s.attenuation, 1.76e7).unwrap();
        assert!(b.variance < a.variance);
        assert!((a.variance / b.variance - 10.0).abs() < 0.05);
    }

    #[test]
    fn classical_bound_matches_analytic_fisher() {
        // Thermal probe: p(xi) = 1 - 1/(1 + nB + nbar eta xi), so the Gaussian
        // Fisher information is closed form.
        let s = Scenario::reference();
        let n = 1.76e6;
        let xi = s.attenuation;
        let a = s.mean_photons * s.signal.efficiency;
        let d = 1.0 + s.signal.background_mean + a * xi;
        let p = 1.0 - 1.0 / d;
        let dp = a / (d * d);
        let v = p * (1.0 - p);
        let fisher = n * dp * dp / v + 0.5 * ((1.0 - 2.0 * p) * dp / v).powi(2);
        let c = fom_crlb(&s, Regime::Ci, xi, n).unwrap();
        assert!((c.fisher / fisher - 1.0).abs() < 1e-3, "{} vs {}", c.fisher, fisher);
    }

    #[test]
    fn step_sizes_agree() {
        let s = Scenario::reference();
        let a = fom_crlb_with_step(&s, Regime::Qi, s.attenuation, 1.76e6, 1e-4).unwrap();
        let b = fom_crlb_with_step(&s, Regime::Qi, s.attenuation, 1.76e6, 2e-4).unwrap();
        assert!((a.variance / b.variance - 1.0).abs() < 0.01);
        let ci = fom_crlb(&s, Regime::Ci, s.attenuation, 1.76e6).unwrap();
        assert!(a.variance < ci.variance, "heralding should sharpen the estimate");
    }
}
