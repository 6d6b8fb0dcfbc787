use std::io::Write;

use anyhow::Context;
use qirange_core::{
    delay_shots_with, generate_streams, lambertian_attenuation, llv_moments, p_correct_curve, quantum_advantage,
    realistic_resolution, roc_curve, rolling_llv_shots, run_rangefinding_trial, shots_to_threshold, threshold_grid,
    DetectorParams, Error, IdlerClicks, InspectionPlan, LlvCoefficients, Regime, Scenario, ShotModel, Target, Truth,
    GENERATOR_ID,
};

use crate::config::ScenarioConfig;

/// Metadata lines (written with a `#` prefix), then the CSV header and rows.
pub struct Table {
    pub meta: Vec<String>,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &'static [&'static str]) -> Self {
        Self {
            meta: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    fn meta(&mut self, line: impl Into<String>) {
        self.meta.push(line.into());
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn write<W: Write>(&self, mut out: W) -> anyhow::Result<()> {
        for m in &self.meta {
            writeln!(out, "# {m}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn header_meta(t: &mut Table, command: &str, cfg: &ScenarioConfig) -> anyhow::Result<()> {
    t.meta(format!("qirange {} {command}", env!("CARGO_PKG_VERSION")));
    t.meta(format!("config {}", serde_json::to_string(cfg)?));
    Ok(())
}

fn sim_meta(t: &mut Table, seed: u64) {
    t.meta(format!("generator {GENERATOR_ID}"));
    t.meta(format!("seed {seed}"));
}

pub fn probs(cfg: &ScenarioConfig) -> anyhow::Result<Table> {
    let s = cfg.scenario()?;
    let p = s.click_probabilities(Regime::Qi, true)?;
    if p.p_h1_ci == p.p_h0 {
        return Err(Error::Indistinguishable(
            "object-present and object-absent click probabilities coincide; raise xi, eta_s or mean_photons",
        )
        .into());
    }
    let qi = LlvCoefficients::from_hypotheses(&s.hypotheses(Regime::Qi)?)?;
    let ci = LlvCoefficients::from_hypotheses(&s.hypotheses(Regime::Ci)?)?;
    let mut t = Table::new(&["quantity", "value"]);
    header_meta(&mut t, "probs", cfg)?;
    for (name, v) in [
        ("xi", s.attenuation),
        ("p_i", p.p_i),
        ("p_h1_i1", p.p_h1_i1),
        ("p_h1_i0", p.p_h1_i0),
        ("p_h0", p.p_h0),
        ("p_h1_ci", p.p_h1_ci),
        ("qi_m1", qi.m1),
        ("qi_c1", qi.c1),
        ("qi_m2", qi.m2),
        ("qi_c2", qi.c2),
        ("ci_m", ci.m()),
        ("ci_c", ci.c()),
    ] {
        t.row(vec![name.into(), num(v)]);
    }
    Ok(t)
}

pub fn nt(cfg: &ScenarioConfig, allow_non_gaussian: bool) -> anyhow::Result<Table> {
    let base = cfg.scenario()?;
    let geom = cfg.geometry();
    let mut t = Table::new(&["distance_m", "regime", "xi", "m_delay", "n_t"]);
    header_meta(&mut t, "nt", cfg)?;
    for &d in &cfg.protocol.distances_m {
        let xi = lambertian_attenuation(&geom.at(d))?;
        let m = delay_shots_with(d, cfg.timing.rep_rate_hz, cfg.timing.speed_of_light)?;
        for regime in [Regime::Qi, Regime::Ci] {
            let mut sol = shots_to_threshold(&base.with_attenuation(xi).hypotheses(regime)?, cfg.protocol.phi_t)?;
            if allow_non_gaussian {
                if !sol.gaussian.ok {
                    t.meta(format!("warning Gaussian regime violated at {d} m ({regime}): skew {}", sol.gaussian.skew));
                }
            } else {
                sol = sol.require_gaussian()?;
            }
            t.row(vec![num(d), regime.to_string(), num(xi), m.to_string(), sol.shots.to_string()]);
        }
    }
    Ok(t)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub struct GridSpec {
    pub nbar: (f64, f64),
    pub bg_s: (f64, f64),
    pub size: usize,
}

pub fn qa_grid(cfg: &ScenarioConfig, g: &GridSpec) -> anyhow::Result<Table> {
    for (name, (lo, hi)) in [("n_bar", g.nbar), ("bg_s", g.bg_s)] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(crate::config::ConfigError(format!("{name} range: need 0 < min <= max, got {lo}..{hi}")).into());
        }
    }
    let base = cfg.scenario()?;
    let mut t = Table::new(&["n_bar", "bg_s", "qa"]);
    header_meta(&mut t, "qa-grid", cfg)?;
    for &bg in &log_space(g.bg_s.0, g.bg_s.1, g.size) {
        for &nbar in &log_space(g.nbar.0, g.nbar.1, g.size) {
            let s = Scenario {
                mean_photons: nbar,
                signal: DetectorParams::new(base.signal.efficiency, bg),
                ..base
            };
            let qa = quantum_advantage(&s, cfg.protocol.phi_t)?;
            t.row(vec![num(nbar), num(bg), num(qa.ratio)]);
        }
    }
    Ok(t)
}

pub fn roc(cfg: &ScenarioConfig, thresholds: usize, shots: Option<f64>) -> anyhow::Result<Table> {
    let s = cfg.scenario()?;
    let n = match shots {
        Some(n) => n,
        None => shots_to_threshold(&s.hypotheses(Regime::Qi)?, cfg.protocol.phi_t)?.shots as f64,
    };
    let mut t = Table::new(&["d_llv", "p_d", "p_fa", "regime"]);
    header_meta(&mut t, "roc", cfg)?;
    t.meta(format!("shots {n}"));
    for regime in [Regime::Qi, Regime::Ci] {
        let h = s.hypotheses(regime)?;
        let c = LlvCoefficients::from_hypotheses(&h)?;
        let pair = llv_moments(&h, &c, n, IdlerClicks::Mean)?;
        let mut grid = threshold_grid(&pair, thresholds);
        if !grid.contains(&0.0) {
            grid.push(0.0);
        }
        let curve = roc_curve(&pair, &grid)?;
        let op = curve.operating_point;
        t.meta(format!("operating_point {regime} d_llv=0 p_d={} p_fa={}", op.p_d, op.p_fa));
        for p in curve.points {
            t.row(vec![num(p.threshold), num(p.p_d), num(p.p_fa), regime.to_string()]);
        }
    }
    Ok(t)
}

pub struct DetectSpec {
    pub windows: u64,
    pub onset_windows: u64,
    pub stride: Option<u64>,
}

pub fn detect_sim(cfg: &ScenarioConfig, spec: &DetectSpec) -> anyhow::Result<Table> {
    let seed = cfg.seed()?;
    let s = cfg.scenario()?;
    let regime = cfg.protocol.regime;
    let h = s.hypotheses(regime)?;
    let coeffs = LlvCoefficients::from_hypotheses(&h)?;
    let n_t = shots_to_threshold(&h, cfg.protocol.phi_t)?.require_gaussian()?.shots;
    let delay = match cfg.object_distance() {
        Some(d) => delay_shots_with(d, cfg.timing.rep_rate_hz, cfg.timing.speed_of_light)?,
        None => 0,
    };
    if spec.windows < 1 {
        return Err(crate::config::ConfigError("--windows: must be at least 1".into()).into());
    }
    let stride = spec.stride.unwrap_or((n_t / 100).max(1));
    let onset = spec.onset_windows * n_t;
    let p = s.click_probabilities(Regime::Qi, true)?;
    let streams = generate_streams(
        &ShotModel::present(&p),
        Target::Present { delay, onset },
        spec.windows * n_t + delay,
        seed,
        0,
    )?;
    let trace = rolling_llv_shots(&streams, &coeffs, n_t, delay, stride)?;
    let mut t = Table::new(&["z", "llv"]);
    header_meta(&mut t, "detect-sim", cfg)?;
    sim_meta(&mut t, seed);
    t.meta(format!("regime {regime} n_t {n_t} delay {delay} onset {onset} stride {stride}"));
    for pt in trace {
        t.row(vec![pt.z.to_string(), num(pt.llv)]);
    }
    Ok(t)
}

/// `absent`, or a distance in metres.
pub fn parse_truth(s: &str) -> anyhow::Result<Truth> {
    if s.eq_ignore_ascii_case("absent") {
        return Ok(Truth::Absent);
    }
    let d: f64 = s
        .parse()
        .map_err(|_| crate::config::ConfigError(format!("--truth: expected `absent` or a distance in m, got `{s}`")))?;
    if !(d.is_finite() && d > 0.0) {
        return Err(crate::config::ConfigError(format!("--truth: distance must be positive, got {d}")).into());
    }
    Ok(Truth::At { distance_m: d })
}

fn plan(cfg: &ScenarioConfig) -> anyhow::Result<InspectionPlan> {
    let p = InspectionPlan::new(
        &cfg.scenario()?,
        &cfg.geometry(),
        &cfg.protocol.distances_m,
        cfg.protocol.regime,
        cfg.protocol.phi_t,
        cfg.timing.speed_of_light,
    )?;
    Ok(p.with_p_correct_threshold(cfg.protocol.p_correct_t)?)
}

fn resolve_truth(cfg: &ScenarioConfig, truth: Option<Truth>) -> Truth {
    truth.unwrap_or(match cfg.object_distance() {
        Some(distance_m) => Truth::At { distance_m },
        None => Truth::Absent,
    })
}

fn truth_label(t: Truth) -> String {
    match t {
        Truth::Absent => "absent".into(),
        Truth::At { distance_m } => format!("{distance_m} m"),
    }
}

pub fn rangefind(cfg: &ScenarioConfig, truth: Option<Truth>, trial: u64) -> anyhow::Result<Table> {
    let seed = cfg.seed()?;
    let plan = plan(cfg)?;
    let truth = resolve_truth(cfg, truth);
    let record = run_rangefinding_trial(&plan, truth, seed, trial, cfg.protocol.horizon_shots)
        .context("running the rangefinding trial")?;
    let mut t = Table::new(&["elapsed_shots", "distance_m", "mu_s", "decision"]);
    header_meta(&mut t, "rangefind", cfg)?;
    sim_meta(&mut t, seed);
    t.meta(format!("truth {} trial {trial} horizon {}", truth_label(truth), record.horizon));
    for s in &record.series {
        t.meta(format!(
            "series distance_m={} delay={} shots_per_sample={} samples={} mu_s={}",
            s.distance_m,
            s.delay_shots,
            s.shots_per_sample,
            s.count(),
            s.mean().map_or("none".into(), num)
        ));
    }
    for e in &record.trace {
        t.row(vec![
            e.elapsed_shots.to_string(),
            num(plan.hypotheses[e.index].distance_m),
            num(e.mu_s),
            e.decision.to_string(),
        ]);
    }
    Ok(t)
}

pub fn pcorrect(cfg: &ScenarioConfig, truth: Option<Truth>) -> anyhow::Result<Table> {
    let seed = cfg.seed()?;
    let plan = plan(cfg)?;
    let truth = resolve_truth(cfg, truth);
    let curve = p_correct_curve(&plan, truth, cfg.protocol.trials, seed, cfg.protocol.horizon_shots)?;
    let mut t = Table::new(&["elapsed_shots", "distance_m", "p_correct"]);
    header_meta(&mut t, "pcorrect", cfg)?;
    sim_meta(&mut t, seed);
    t.meta(format!(
        "truth {} trials {} horizon {} final_decision_correct {}",
        truth_label(truth),
        curve.trials,
        curve.horizon,
        curve.final_decision_correct
    ));
    for d in &curve.distances {
        let s_star = d.samples_to_threshold.map_or("none".into(), |s| {
            format!(
                "{s} t_realistic_s={}",
                realistic_resolution(s as u32, d.shots_per_sample, cfg.timing.rep_rate_hz)
            )
        });
        t.meta(format!(
            "distance_m={} shots_per_sample={} mean_final_mu_s={} s_star={s_star}",
            d.distance_m, d.shots_per_sample, d.mean_final_mu
        ));
    }
    for d in &curve.distances {
        for (i, p) in d.p_correct.iter().enumerate() {
            t.row(vec![d.elapsed_shots(i + 1).to_string(), num(d.distance_m), num(*p)]);
        }
    }
    Ok(t)
}
