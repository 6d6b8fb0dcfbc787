//! Geometry: Lambertian return attenuation, round-trip delay in shots, and
//! the range and time resolution that follow from the repetition rate.

use serde::{Deserialize, Serialize};

use crate::detection::shots_to_threshold;
use crate::error::{check_nonneg, check_positive, check_unit, Error, Result};
use crate::llv::LlvCoefficients;
use crate::scenario::{HypothesisProbs, Regime, Scenario};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Rounded value that reproduces reference delay tables bit for bit.
pub const SPEED_OF_LIGHT_ROUNDED: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Object distance from the (monostatic) transceiver, m.
    pub distance_m: f64,
    /// Intrinsic reflectivity of the object, 1 for a perfect scatterer.
    pub object_reflectivity: f64,
    /// Collecting area of the signal detector, m^2.
    pub detector_area_m2: f64,
    /// Pump repetition rate, Hz.
    pub rep_rate_hz: f64,
    /// Coincidence window for a CW pump; the shot duration is then this window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coincidence_window_s: Option<f64>,
}

impl GeometryParams {
    pub fn new(distance_m: f64) -> Self {
        Self {
            distance_m,
            ..Self::default()
        }
    }

    pub fn at(self, distance_m: f64) -> Self {
        Self { distance_m, ..self }
    }

    /// Effective shot rate: `1 / tau_c` for a CW pump, else the repetition rate.
    pub fn shot_rate_hz(&self) -> f64 {
        self.coincidence_window_s.map_or(self.rep_rate_hz, |tau| 1.0 / tau)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("distance_m", self.distance_m)?;
        check_unit("object_reflectivity", self.object_reflectivity)?;
        check_positive("detector_area_m2", self.detector_area_m2)?;
        check_positive("rep_rate_hz", self.rep_rate_hz)?;
        if let Some(tau) = self.coincidence_window_s {
            check_positive("coincidence_window_s", tau)?;
        }
        Ok(())
    }
}

impl Default for GeometryParams {
    /// Unit-area detector, perfect reflector, 0.5 GHz pump.
    fn default() -> Self {
        Self {
            distance_m: 3.0,
            object_reflectivity: 1.0,
            detector_area_m2: 1.0,
            rep_rate_hz: 0.5e9,
            coincidence_window_s: None,
        }
    }
}

/// `xi = xi_obj A_d / (4 pi D^2)`: diffuse reflection into a hemisphere and
/// inverse-square collection. Errors instead of clamping when the far-field
/// model would return more than unit transmission.
pub fn lambertian_attenuation(geom: &GeometryParams) -> Result<f64> {
    geom.validate()?;
    let xi = geom.object_reflectivity * geom.detector_area_m2
        / (4.0 * std::f64::consts::PI * geom.distance_m * geom.distance_m);
    if xi > 1.0 {
        return Err(Error::InvalidParameter {
            name: "distance_m",
            value: geom.distance_m,
            reason: "object too close for the far-field Lambertian model",
        });
    }
    Ok(xi)
}

/// Round-trip delay `2D/c` in seconds.
pub fn round_trip_time(distance_m: f64, c: f64) -> f64 {
    2.0 * distance_m / c
}

/// `int(2 D f_rep / c)` with the exact speed of light.
pub fn delay_shots(distance_m: f64, rep_rate_hz: f64) -> Result<u64> {
    delay_shots_with(distance_m, rep_rate_hz, SPEED_OF_LIGHT)
}

pub fn delay_shots_with(distance_m: f64, rep_rate_hz: f64, c: f64) -> Result<u64> {
    check_nonneg("distance_m", distance_m)?;
    check_positive("rep_rate_hz", rep_rate_hz)?;
    check_positive("speed_of_light", c)?;
    let shots = round_trip_time(distance_m, c) * rep_rate_hz;
    if shots >= u64::MAX as f64 {
        return Err(Error::InvalidParameter {
            name: "distance_m",
            value: distance_m,
            reason: "delay overflows the shot counter",
        });
    }
    Ok(shots.trunc() as u64)
}

/// Range bin width `c / (2 f_rep)`, m.
pub fn spatial_resolution(rep_rate_hz: f64) -> f64 {
    SPEED_OF_LIGHT / (2.0 * rep_rate_hz)
}

/// Time to collect `n_t` shots, s.
pub fn temporal_resolution(n_t: u64, rep_rate_hz: f64) -> f64 {
    n_t as f64 / rep_rate_hz
}

/// Time to collect `samples` LLV samples of `n_t` shots each, s.
pub fn realistic_resolution(samples: u32, n_t: u64, rep_rate_hz: f64) -> f64 {
    samples as f64 * temporal_resolution(n_t, rep_rate_hz)
}

/// One inspected distance with everything needed to test it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeHypothesis {
    pub distance_m: f64,
    /// `M_delay = int(2 D f_rep / c)`.
    pub delay_shots: u64,
    /// `xi(D)`.
    pub attenuation: f64,
    /// `N_t(D)` at the plan's threshold distinguishability.
    pub shots_required: u64,
    pub regime: Regime,
    pub probs: HypothesisProbs,
    pub coeffs: LlvCoefficients,
}

impl RangeHypothesis {
    /// Derives attenuation, delay and `N_t` for `geometry.distance_m`, using
    /// speed of light `c`. `scenario.attenuation` is replaced by the Lambertian value.
    pub fn build(scenario: &Scenario, geometry: &GeometryParams, regime: Regime, phi_t: f64, c: f64) -> Result<Self> {
        let attenuation = lambertian_attenuation(geometry)?;
        let probs = scenario.with_attenuation(attenuation).hypotheses(regime)?;
        let coeffs = LlvCoefficients::from_hypotheses(&probs)?;
        let shots_required = shots_to_threshold(&probs, phi_t)?.require_gaussian()?.shots;
        Ok(Self {
            distance_m: geometry.distance_m,
            delay_shots: delay_shots_with(geometry.distance_m, geometry.shot_rate_hz(), c)?,
            attenuation,
            shots_required,
            regime,
            probs,
            coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(d: f64) -> f64 {
        lambertian_attenuation(&GeometryParams::new(d)).unwrap()
    }

    #[test]
    fn reference_attenuations() {
        for (d, expected) in [(1.2, 5.53e-2), (3.0, 8.84e-3), (3.3, 7.31e-3), (6.0, 2.21e-3)] {
            let got = xi(d);
            assert!((got / expected - 1.0).abs() < 5e-3, "D={d}: {got:e}");
        }
        let black = GeometryParams {
            object_reflectivity: 0.0,
            ..GeometryParams::new(3.0)
        };
        assert_eq!(lambertian_attenuation(&black).unwrap(), 0.0);
        assert!(lambertian_attenuation(&GeometryParams::new(0.1)).is_err());
    }

    #[test]
    fn reference_delays() {
        for (d, m) in [(1.2, 4), (3.0, 10), (3.3, 11), (6.0, 20)] {
            assert_eq!(delay_shots_with(d, 0.5e9, SPEED_OF_LIGHT_ROUNDED).unwrap(), m);
            assert_eq!(delay_shots(d, 0.5e9).unwrap(), m);
        }
        assert_eq!(delay_shots(0.1, 0.5e9).unwrap(), 0);
    }

    #[test]
    fn resolutions() {
        assert!((spatial_resolution(0.5e9) - 0.299_792_458).abs() < 1e-12);
        assert!((temporal_resolution(1_760_000, 0.5e9) - 3.52e-3).abs() < 1e-15);
        assert_eq!(realistic_resolution(3, 1_760_000, 0.5e9), 3.0 * temporal_resolution(1_760_000, 0.5e9));
    }

    #[test]
    fn hypotheses_get_farther_and_slower() {
        let s = Scenario::reference();
        let build = |d| RangeHypothesis::build(&s, &GeometryParams::new(d), Regime::Qi, 0.8, SPEED_OF_LIGHT_ROUNDED).unwrap();
        let near = build(1.2);
        let far = build(6.0);
        assert!(near.attenuation > far.attenuation);
        assert!(near.delay_shots < far.delay_shots);
        assert!(near.shots_required < far.shots_required);
    }

    #[test]
    fn cw_shot_rate() {
        let g = GeometryParams {
            coincidence_window_s: Some(2e-9),
            ..GeometryParams::default()
        };
        assert!((g.shot_rate_hz() / 0.5e9 - 1.0).abs() < 1e-15);
    }
}
