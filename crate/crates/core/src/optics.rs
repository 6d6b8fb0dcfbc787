//! Single-shot click probabilities for threshold (Geiger-mode) detectors.
//!
//! Sources are diagonal in the Fock basis (thermal, two-mode squeezed vacuum,
//! and the coherent state with its off-diagonal elements dropped) and every
//! detector is a lossy, noisy no-click POVM that is also diagonal. All
//! probabilities therefore reduce to geometric or Poisson sums, which are
//! evaluated here in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, check_positive, check_unit, Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact to the quoted digits).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Tolerance inside which a computed probability is clamped back into [0, 1].
const CLAMP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum SourceKind {
    /// Single-mode thermal light (classical illumination).
    Thermal,
    /// Two-mode squeezed vacuum; photon-number correlated signal and idler.
    Tmsv,
    /// Coherent state, diagonal (Poisson) part only.
    Coherent { amplitude_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Mean photon number per mode and per shot.
    pub mean_photons: f64,
    pub kind: SourceKind,
}

impl SourceParams {
    pub fn tmsv(mean_photons: f64) -> Self {
        Self {
            mean_photons,
            kind: SourceKind::Tmsv,
        }
    }

    pub fn thermal(mean_photons: f64) -> Self {
        Self {
            mean_photons,
            kind: SourceKind::Thermal,
        }
    }

    pub fn coherent(amplitude_sq: f64) -> Self {
        Self {
            mean_photons: amplitude_sq,
            kind: SourceKind::Coherent { amplitude_sq },
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_nonneg("mean_photons", self.mean_photons)?;
        if let SourceKind::Coherent { amplitude_sq } = self.kind {
            check_nonneg("amplitude_sq", amplitude_sq)?;
        }
        Ok(())
    }
}

/// A threshold detector: system efficiency and measured background mean photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub efficiency: f64,
    pub background_mean: f64,
}

impl DetectorParams {
    pub fn new(efficiency: f64, background_mean: f64) -> Self {
        Self {
            efficiency,
            background_mean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("efficiency", self.efficiency)?;
        check_nonneg("background_mean", self.background_mean)?;
        Ok(())
    }
}

/// Round-trip signal attenuation of the probing channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub attenuation: f64,
}

impl ChannelParams {
    pub fn new(attenuation: f64) -> Self {
        Self { attenuation }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("attenuation", self.attenuation).map(|_| ())
    }
}

/// The per-shot Bernoulli probabilities that drive both hypotheses.
///
/// `p_h1_i1` and `p_h1_i0` are the signal click probabilities conditioned on an
/// idler click and an idler no-click. For sources without an idler (thermal,
/// coherent) `p_i` is zero and both conditionals equal `p_h1_ci`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    pub p_i: f64,
    pub p_h1_i1: f64,
    pub p_h1_i0: f64,
    pub p_h0: f64,
    pub p_h1_ci: f64,
}

/// Diagonal weight `<n| pi_x |n>` of the no-click POVM element of a detector with
/// total transmission `loss` (the product of all efficiencies on the path) and
/// measured background mean `background_mean`.
pub fn povm_noclick_weight(n: u32, loss: f64, background_mean: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&loss));
    debug_assert!(background_mean >= 0.0);
    let b1 = background_mean + 1.0;
    ((b1 - loss) / b1).powi(n as i32) / b1
}

/// Probability that a detector stays dark when fed a thermal state of mean `mean`.
///
/// Geometric sum of the thermal weights against [`povm_noclick_weight`]:
/// `1 / (1 + n_B + mean * loss)`.
fn thermal_noclick(mean: f64, loss: f64, background_mean: f64) -> f64 {
    1.0 / (1.0 + background_mean + mean * loss)
}

/// `1 - thermal_noclick`, without the cancellation for tiny means.
fn thermal_click(mean: f64, loss: f64, background_mean: f64) -> f64 {
    let lit = background_mean + mean * loss;
    lit / (1.0 + lit)
}

fn clamp_probability(name: &'static str, p: f64) -> Result<f64> {
    if p.is_nan() {
        return Err(Error::InvalidParameter {
            name,
            value: p,
            reason: "probability evaluated to NaN",
        });
    }
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else if p > -CLAMP_TOL && p < 1.0 + CLAMP_TOL {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::InvalidParameter {
            name,
            value: p,
            reason: "probability outside [0, 1]",
        })
    }
}

/// Click probabilities for one source, two detectors and a channel.
///
/// With `object_present == false` no signal returns: the signal detector only
/// sees its background, so every signal probability collapses to `p_h0`.
/// `idler_det` is ignored for sources without an idler mode.
pub fn click_probabilities(
    src: &SourceParams,
    signal_det: &DetectorParams,
    idler_det: &DetectorParams,
    chan: &ChannelParams,
    object_present: bool,
) -> Result<ClickProbabilities> {
    src.validate()?;
    signal_det.validate()?;
    chan.validate()?;

    let bg_s = signal_det.background_mean;
    let signal_loss = signal_det.efficiency * chan.attenuation;
    let p_h0 = clamp_probability("p_h0", thermal_click(0.0, 0.0, bg_s))?;

    let probs = match src.kind {
        SourceKind::Thermal => {
            let p_ci = if object_present {
                thermal_click(src.mean_photons, signal_loss, bg_s)
            } else {
                p_h0
            };
            let p_ci = clamp_probability("p_h1_ci", p_ci)?;
            ClickProbabilities {
                p_i: 0.0,
                p_h1_i1: p_ci,
                p_h1_i0: p_ci,
                p_h0,
                p_h1_ci: p_ci,
            }
        }
        SourceKind::Coherent { amplitude_sq } => {
            let p_ci = if object_present {
                click_probability_coherent(amplitude_sq, signal_det, chan)?
            } else {
                p_h0
            };
            ClickProbabilities {
                p_i: 0.0,
                p_h1_i1: p_ci,
                p_h1_i0: p_ci,
                p_h0,
                p_h1_ci: p_ci,
            }
        }
        SourceKind::Tmsv => {
            idler_det.validate()?;
            let nbar = src.mean_photons;
            let bg_i = idler_det.background_mean;
            let eta_i = idler_det.efficiency;

            let p_i = clamp_probability("p_i", thermal_click(nbar, eta_i, bg_i))?;
            let idler_dark = thermal_noclick(nbar, eta_i, bg_i);

            if !object_present {
                ClickProbabilities {
                    p_i,
                    p_h1_i1: p_h0,
                    p_h1_i0: p_h0,
                    p_h0,
                    p_h1_ci: p_h0,
                }
            } else {
                // Per-photon detection fractions once background dilution is
                // folded in: a = 1 - u, b = 1 - v in the joint no-click
                // 1 / [(1 + n_B,I)(1 + n_B,S)(nbar + 1 - nbar a b)].
                let u = eta_i / (1.0 + bg_i);
                let v = signal_loss / (1.0 + bg_s);
                let one_minus_ab = u + v - u * v;
                let both_dark = 1.0 / ((1.0 + bg_i) * (1.0 + bg_s) * (1.0 + nbar * one_minus_ab));
                // P(signal dark, idler click) = P(signal dark) - P(both dark),
                // expanded so that no two large terms cancel.
                let signal_dark_idler_click = (bg_i + nbar * (eta_i * (1.0 - v) + bg_i * v))
                    / ((1.0 + bg_s) * (1.0 + nbar * v) * (1.0 + bg_i) * (1.0 + nbar * one_minus_ab));

                let p_h1_ci = clamp_probability("p_h1_ci", thermal_click(nbar, signal_loss, bg_s))?;
                let p_h1_i1 = if p_i > 0.0 {
                    clamp_probability("p_h1_i1", 1.0 - signal_dark_idler_click / p_i)?
                } else {
                    p_h1_ci
                };
                let p_h1_i0 = if p_i < 1.0 {
                    clamp_probability("p_h1_i0", 1.0 - both_dark / idler_dark)?
                } else {
                    p_h1_ci
                };
                ClickProbabilities {
                    p_i,
                    p_h1_i1,
                    p_h1_i0,
                    p_h0,
                    p_h1_ci,
                }
            }
        }
    };
    Ok(probs)
}

/// Click probability of a coherent state `|alpha|^2` after the channel, using
/// only its Poisson diagonal.
pub fn click_probability_coherent(
    amplitude_sq: f64,
    det: &DetectorParams,
    chan: &ChannelParams,
) -> Result<f64> {
    check_nonneg("amplitude_sq", amplitude_sq)?;
    det.validate()?;
    chan.validate()?;
    let b1 = 1.0 + det.background_mean;
    let loss = det.efficiency * chan.attenuation;
    clamp_probability("p_coherent", 1.0 - (-amplitude_sq * loss / b1).exp() / b1)
}

/// Thermal occupation `1 / (exp(hbar w / k_B T) - 1)` of a mode at angular
/// frequency `angular_frequency` (rad/s) and temperature `temperature` (K).
pub fn planck_background(angular_frequency: f64, temperature: f64) -> Result<f64> {
    check_positive("angular_frequency", angular_frequency)?;
    check_positive("temperature", temperature)?;
    let x = HBAR * angular_frequency / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}
