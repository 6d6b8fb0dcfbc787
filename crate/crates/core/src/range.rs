//! Rolling-window detection and delay-scanning rangefinding over simulated
//! click streams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{shots_to_threshold, DEFAULT_PHI_T};
use crate::error::{Error, Result};
use crate::llv::LlvCoefficients;
use crate::scenario::{Regime, Scenario};
use crate::scene::{delay_shots_with, lambertian_attenuation, GeometryParams, RangeHypothesis};
use crate::sim::{count_window, generate_streams, ClickStreams, ShotModel, Target};

pub const DEFAULT_P_CORRECT: f64 = 0.95;
/// Fewer trials than this cannot resolve a 0.95 threshold.
pub const MIN_TRIALS: usize = 100;

/// Inspected distances, nearest first, with the test built for each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionPlan {
    pub scenario: Scenario,
    pub geometry: GeometryParams,
    pub regime: Regime,
    pub hypotheses: Vec<RangeHypothesis>,
    pub phi_t: f64,
    pub p_correct_threshold: f64,
    pub speed_of_light: f64,
}

impl InspectionPlan {
    /// Builds one hypothesis per distance. `geometry.distance_m` is ignored.
    pub fn new(
        scenario: &Scenario,
        geometry: &GeometryParams,
        distances_m: &[f64],
        regime: Regime,
        phi_t: f64,
        speed_of_light: f64,
    ) -> Result<Self> {
        if !(phi_t > 0.0 && phi_t < 1.0) {
            return Err(Error::InvalidParameter {
                name: "phi_t",
                value: phi_t,
                reason: "must lie in (0, 1)",
            });
        }
        if distances_m.is_empty() {
            return Err(Error::Setup("no inspected distances".into()));
        }
        if distances_m.windows(2).any(|w| w[0].is_nan() || w[0] >= w[1]) {
            return Err(Error::Setup("inspected distances must be strictly increasing".into()));
        }
        let hypotheses = distances_m
            .iter()
            .map(|&d| RangeHypothesis::build(scenario, &geometry.at(d), regime, phi_t, speed_of_light))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scenario: *scenario,
            geometry: *geometry,
            regime,
            hypotheses,
            phi_t,
            p_correct_threshold: DEFAULT_P_CORRECT,
            speed_of_light,
        })
    }

    pub fn with_p_correct_threshold(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "p_correct_threshold",
                value: p,
                reason: "must lie in (0, 1]",
            });
        }
        self.p_correct_threshold = p;
        Ok(self)
    }

    /// Shots after which the classical test at `distance_m` reaches `phi_t`.
    pub fn classical_shots(&self, distance_m: f64) -> Result<u64> {
        let xi = lambertian_attenuation(&self.geometry.at(distance_m))?;
        let probs = self.scenario.with_attenuation(xi).hypotheses(Regime::Ci)?;
        Ok(shots_to_threshold(&probs, self.phi_t)?.shots)
    }

    fn max_delay(&self) -> u64 {
        self.hypotheses.iter().map(|h| h.delay_shots).max().unwrap_or(0)
    }
}

/// Physical state of the scene in a simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum Truth {
    Absent,
    At { distance_m: f64 },
}

/// One rolling-window LLV value `R(z)` over shots `[z - n_t, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingPoint {
    pub z: u64,
    pub llv: f64,
}

/// `R(z) = Lambda(T(z) - T(z - n_t), T_I(z) - T_I(z - n_t))` for every
/// `z = n_t, n_t + stride, ...` the delayed signal stream can still cover.
///
/// Values with `z < n_t` are never produced: the window is still filling.
pub fn rolling_llv_shots(
    streams: &ClickStreams,
    coeffs: &LlvCoefficients,
    n_t: u64,
    delay: u64,
    stride: u64,
) -> Result<Vec<RollingPoint>> {
    if n_t == 0 || stride == 0 {
        return Err(Error::Setup("window length and stride must be positive".into()));
    }
    let last = streams.len().saturating_sub(delay);
    let mut out = Vec::new();
    if last < n_t {
        return Ok(out);
    }
    let (idler, signal) = (&streams.idler, &streams.signal);
    // Trailing-window counts, kept as differences of the cumulative counters.
    let mut w = count_window(streams, 0, n_t, delay)?;
    let mut z = n_t;
    loop {
        if (z - n_t).is_multiple_of(stride) {
            out.push(RollingPoint {
                z,
                llv: coeffs.eval(w.x, w.y, w.k, w.n),
            });
        }
        if z == last {
            break;
        }
        let (add, drop) = (z, z - n_t);
        let (ia, sa) = (idler.get(add), signal.get(add + delay));
        let (id, sd) = (idler.get(drop), signal.get(drop + delay));
        w.k = w.k + ia as u64 - id as u64;
        w.x = w.x + (ia && sa) as u64 - (id && sd) as u64;
        w.y = w.y + (!ia && sa) as u64 - (!id && sd) as u64;
        z += 1;
    }
    Ok(out)
}

/// LLV samples for one inspected distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSeries {
    pub distance_m: f64,
    pub delay_shots: u64,
    pub shots_per_sample: u64,
    pub samples: Vec<f64>,
    /// Elapsed shots at which each sample completed.
    pub timestamps: Vec<u64>,
}

impl SampleSeries {
    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// `mu_S` over all samples so far, `None` before the first one.
    pub fn mean(&self) -> Option<f64> {
        (!self.samples.is_empty()).then(|| self.samples.iter().sum::<f64>() / self.samples.len() as f64)
    }

    /// `mu_S` after each sample.
    pub fn running_means(&self) -> Vec<f64> {
        let mut sum = 0.0;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, v)| {
                sum += v;
                sum / (i + 1) as f64
            })
            .collect()
    }
}

/// Mean of samples `s_tilde - s + 1 ..= s_tilde` (1-based).
pub fn sample_rolling_mean(series: &SampleSeries, s: usize, s_tilde: usize) -> Result<f64> {
    if s == 0 || s > s_tilde || s_tilde > series.count() {
        return Err(Error::Setup(format!(
            "rolling mean needs 1 <= S <= s~ <= K, got S={s}, s~={s_tilde}, K={}",
            series.count()
        )));
    }
    Ok(series.samples[s_tilde - s..s_tilde].iter().sum::<f64>() / s as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "decision")]
pub enum Decision {
    Absent,
    Present { index: usize, distance_m: f64 },
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Absent => f.write_str("absent"),
            Decision::Present { distance_m, .. } => write!(f, "present@{distance_m}"),
        }
    }
}

/// The nearest distance with `mu_S > 0`, or absent. `means` follows the plan
/// order; a distance without samples yet is skipped.
pub fn scan_decision(plan: &InspectionPlan, means: &[Option<f64>]) -> Decision {
    plan.hypotheses
        .iter()
        .zip(means)
        .enumerate()
        .find(|(_, (_, m))| m.is_some_and(|m| m > 0.0))
        .map_or(Decision::Absent, |(index, (h, _))| Decision::Present {
            index,
            distance_m: h.distance_m,
        })
}

/// A sample arrival and the decision right after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub elapsed_shots: u64,
    pub index: usize,
    pub mu_s: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub truth: Truth,
    pub horizon: u64,
    pub series: Vec<SampleSeries>,
    pub trace: Vec<TraceEvent>,
}

fn truth_target(plan: &InspectionPlan, truth: Truth) -> Result<(ShotModel, Target)> {
    match truth {
        Truth::Absent => {
            let p = plan.scenario.click_probabilities(Regime::Qi, false)?;
            Ok((ShotModel::absent(&p), Target::Absent))
        }
        Truth::At { distance_m } => {
            let g = plan.geometry.at(distance_m);
            let xi = lambertian_attenuation(&g)?;
            let p = plan.scenario.with_attenuation(xi).click_probabilities(Regime::Qi, true)?;
            let delay = delay_shots_with(distance_m, g.shot_rate_hz(), plan.speed_of_light)?;
            Ok((ShotModel::present(&p), Target::Present { delay, onset: 0 }))
        }
    }
}

/// Horizon used when none is given: `N_t(CI)` at the true distance, or the
/// slowest inspected distance's `N_t` when nothing is there.
pub fn default_horizon(plan: &InspectionPlan, truth: Truth) -> Result<u64> {
    match truth {
        Truth::At { distance_m } => plan.classical_shots(distance_m),
        Truth::Absent => Ok(plan.hypotheses.iter().map(|h| h.shots_required).max().unwrap_or(0)),
    }
}

/// One simulated scan.
///
/// The streams always come from the TMSV source at the true distance; the
/// classical test ignores the idler and the TMSV signal marginal is thermal,
/// so a classical plan sees the statistics of a thermal probe.
pub fn run_rangefinding_trial(
    plan: &InspectionPlan,
    truth: Truth,
    seed: u64,
    trial: u64,
    horizon: Option<u64>,
) -> Result<TrialRecord> {
    let horizon = match horizon {
        Some(h) => h,
        None => default_horizon(plan, truth)?,
    };
    let (model, target) = truth_target(plan, truth)?;
    let mut streams = generate_streams(&model, target, horizon + plan.max_delay(), seed, trial)?;
    if let Truth::At { distance_m } = truth {
        streams.distance_m = Some(distance_m);
    }
    let series = plan
        .hypotheses
        .iter()
        .map(|h| {
            let n_t = h.shots_required;
            let count = horizon / n_t;
            let mut samples = Vec::with_capacity(count as usize);
            let mut timestamps = Vec::with_capacity(count as usize);
            for j in 0..count {
                let w = count_window(&streams, j * n_t, n_t, h.delay_shots)?;
                samples.push(h.coeffs.eval(w.x, w.y, w.k, w.n));
                timestamps.push((j + 1) * n_t);
            }
            Ok(SampleSeries {
                distance_m: h.distance_m,
                delay_shots: h.delay_shots,
                shots_per_sample: n_t,
                samples,
                timestamps,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut events: Vec<(u64, usize, usize)> = series
        .iter()
        .enumerate()
        .flat_map(|(d, s)| s.timestamps.iter().enumerate().map(move |(i, &t)| (t, d, i)))
        .collect();
    events.sort_unstable();
    let running: Vec<Vec<f64>> = series.iter().map(SampleSeries::running_means).collect();
    let mut means = vec![None; series.len()];
    let trace = events
        .into_iter()
        .map(|(t, d, i)| {
            means[d] = Some(running[d][i]);
            TraceEvent {
                elapsed_shots: t,
                index: d,
                mu_s: running[d][i],
                decision: scan_decision(plan, &means),
            }
        })
        .collect();
    Ok(TrialRecord {
        truth,
        horizon,
        series,
        trace,
    })
}

/// Monte-Carlo correctness of the per-distance test for one inspected distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCurve {
    pub distance_m: f64,
    pub shots_per_sample: u64,
    /// Fraction of trials whose `mu_S` after `S = i + 1` samples gives the
    /// right answer for this distance.
    pub p_correct: Vec<f64>,
    /// Smallest `S` with `p_correct >= threshold`.
    pub samples_to_threshold: Option<usize>,
    /// Trial average of the final `mu_S`.
    pub mean_final_mu: f64,
}

impl DistanceCurve {
    pub fn elapsed_shots(&self, s: usize) -> u64 {
        s as u64 * self.shots_per_sample
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCorrectCurve {
    pub truth: Truth,
    pub trials: usize,
    pub horizon: u64,
    pub distances: Vec<DistanceCurve>,
    /// Fraction of trials whose final scan decision was right.
    pub final_decision_correct: f64,
}

fn decision_correct(plan: &InspectionPlan, truth: Truth, decision: Decision, true_delay: Option<u64>) -> bool {
    match (truth, decision) {
        (Truth::Absent, Decision::Absent) => true,
        (Truth::At { .. }, Decision::Present { index, .. }) => Some(plan.hypotheses[index].delay_shots) == true_delay,
        _ => false,
    }
}

/// Runs `trials` independent scans (trial `i` uses stream `i` of `seed`) and
/// tallies how often each distance's test is right after every sample.
///
/// A distance is right when it reports `mu_S > 0` and its delay matches the
/// true delay, or reports `mu_S <= 0` otherwise.
pub fn p_correct_curve(
    plan: &InspectionPlan,
    truth: Truth,
    trials: usize,
    seed: u64,
    horizon: Option<u64>,
) -> Result<PCorrectCurve> {
    if trials < MIN_TRIALS {
        return Err(Error::Setup(format!("{trials} trials is fewer than the minimum {MIN_TRIALS}")));
    }
    let horizon = match horizon {
        Some(h) => h,
        None => default_horizon(plan, truth)?,
    };
    let true_delay = match truth_target(plan, truth)?.1 {
        Target::Present { delay, .. } => Some(delay),
        Target::Absent => None,
    };
    let records = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_rangefinding_trial(plan, truth, seed, t, Some(horizon)))
        .collect::<Result<Vec<_>>>()?;

    let distances = plan
        .hypotheses
        .iter()
        .enumerate()
        .map(|(d, h)| {
            let should_fire = Some(h.delay_shots) == true_delay;
            let len = (horizon / h.shots_required) as usize;
            let mut hits = vec![0usize; len];
            let mut final_sum = 0.0;
            for r in &records {
                let means = r.series[d].running_means();
                for (hit, &m) in hits.iter_mut().zip(&means) {
                    *hit += ((m > 0.0) == should_fire) as usize;
                }
                final_sum += means.last().copied().unwrap_or(f64::NAN);
            }
            let p_correct: Vec<f64> = hits.iter().map(|&c| c as f64 / trials as f64).collect();
            let samples_to_threshold = p_correct.iter().position(|&p| p >= plan.p_correct_threshold).map(|i| i + 1);
            DistanceCurve {
                distance_m: h.distance_m,
                shots_per_sample: h.shots_required,
                p_correct,
                samples_to_threshold,
                mean_final_mu: final_sum / trials as f64,
            }
        })
        .collect();
    let final_ok = records
        .iter()
        .filter(|r| {
            let d = r.trace.last().map_or(Decision::Absent, |e| e.decision);
            decision_correct(plan, truth, d, true_delay)
        })
        .count();
    Ok(PCorrectCurve {
        truth,
        trials,
        horizon,
        distances,
        final_decision_correct: final_ok as f64 / trials as f64,
    })
}

pub fn default_plan(scenario: &Scenario, geometry: &GeometryParams, distances_m: &[f64], regime: Regime) -> Result<InspectionPlan> {
    InspectionPlan::new(
        scenario,
        geometry,
        distances_m,
        regime,
        DEFAULT_PHI_T,
        crate::scene::SPEED_OF_LIGHT_ROUNDED,
    )
}
