//! Scenario configuration file and `--set path=value` overrides.

use std::path::Path;

use anyhow::Context;
use qirange_core::{
    lambertian_attenuation, DetectorParams, GeometryParams, Regime, Scenario, SPEED_OF_LIGHT_ROUNDED,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A configuration problem, reported with the offending field path.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKindName {
    Tmsv,
    Thermal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub mean_photons: f64,
    /// Informational; every command evaluates both regimes or the plan's regime.
    pub kind: SourceKindName,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorsConfig {
    pub eta_s: f64,
    pub eta_i: f64,
    pub bg_s: f64,
    pub bg_i: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub xi_obj: f64,
    pub area_m2: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    pub rep_rate_hz: f64,
    /// Used for the delay in shots; defaults to the rounded 3e8 m/s.
    pub speed_of_light: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub regime: Regime,
    pub phi_t: f64,
    pub p_correct_t: f64,
    pub distances_m: Vec<f64>,
    pub trials: usize,
    pub seed: Option<u64>,
    pub horizon_shots: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub source: SourceConfig,
    pub detectors: DetectorsConfig,
    pub channel: ChannelConfig,
    pub timing: TimingConfig,
    pub protocol: ProtocolConfig,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mean_photons: 2.19e-2,
            kind: SourceKindName::Tmsv,
        }
    }
}

impl Default for DetectorsConfig {
    fn default() -> Self {
        Self {
            eta_s: 0.5,
            eta_i: 0.5,
            bg_s: 5.06e-2,
            bg_i: 4.49e-4,
        }
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            xi_obj: 1.0,
            area_m2: 1.0,
            distance_m: 3.0,
        }
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            xi: None,
            geometry: Some(GeometryConfig::default()),
        }
    }
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            rep_rate_hz: 0.5e9,
            speed_of_light: SPEED_OF_LIGHT_ROUNDED,
        }
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Qi,
            phi_t: 0.8,
            p_correct_t: 0.95,
            distances_m: vec![1.2, 3.0, 3.3, 6.0],
            trials: 200,
            seed: None,
            horizon_shots: None,
        }
    }
}

fn require(cond: bool, path: &str, msg: &str) -> anyhow::Result<()> {
    if cond {
        Ok(())
    } else {
        Err(config_err(format!("{path}: {msg}")))
    }
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

fn nonneg(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl ScenarioConfig {
    /// Loads `path` (or the built-in defaults) and applies the overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| config_err(format!("{}: invalid JSON: {e}", p.display())))?
            }
            None => serde_json::to_value(Self::default())?,
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| config_err(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        require(positive(self.source.mean_photons), "source.mean_photons", "must be positive")?;
        require(unit(self.detectors.eta_s), "detectors.eta_s", "must lie in [0, 1]")?;
        require(unit(self.detectors.eta_i), "detectors.eta_i", "must lie in [0, 1]")?;
        require(nonneg(self.detectors.bg_s), "detectors.bg_s", "must be non-negative")?;
        require(nonneg(self.detectors.bg_i), "detectors.bg_i", "must be non-negative")?;
        match (&self.channel.xi, &self.channel.geometry) {
            (Some(xi), None) => require(unit(*xi), "channel.xi", "must lie in [0, 1]")?,
            (None, Some(g)) => {
                require(unit(g.xi_obj), "channel.geometry.xi_obj", "must lie in [0, 1]")?;
                require(positive(g.area_m2), "channel.geometry.area_m2", "must be positive")?;
                require(positive(g.distance_m), "channel.geometry.distance_m", "must be positive")?;
            }
            _ => return Err(config_err("channel: exactly one of `xi` or `geometry` must be given")),
        }
        require(positive(self.timing.rep_rate_hz), "timing.rep_rate_hz", "must be positive")?;
        require(positive(self.timing.speed_of_light), "timing.speed_of_light", "must be positive")?;
        let p = &self.protocol;
        require(p.phi_t > 0.0 && p.phi_t < 1.0, "protocol.phi_t", "must lie in (0, 1)")?;
        require(p.p_correct_t > 0.0 && p.p_correct_t <= 1.0, "protocol.p_correct_t", "must lie in (0, 1]")?;
        require(!p.distances_m.is_empty(), "protocol.distances_m", "must not be empty")?;
        require(p.distances_m.iter().all(|&d| positive(d)), "protocol.distances_m", "must be positive")?;
        require(
            p.distances_m.windows(2).all(|w| w[0] < w[1]),
            "protocol.distances_m",
            "must be strictly increasing",
        )?;
        require(p.horizon_shots != Some(0), "protocol.horizon_shots", "must be positive")?;
        Ok(())
    }

    /// Geometry for the Lambertian model; unit reflector and area when the
    /// channel gives `xi` directly.
    pub fn geometry(&self) -> GeometryParams {
        let g = self.channel.geometry.clone().unwrap_or_default();
        GeometryParams {
            distance_m: g.distance_m,
            object_reflectivity: g.xi_obj,
            detector_area_m2: g.area_m2,
            rep_rate_hz: self.timing.rep_rate_hz,
            coincidence_window_s: None,
        }
    }

    /// Object distance named by the channel, if any.
    pub fn object_distance(&self) -> Option<f64> {
        self.channel.geometry.as_ref().map(|g| g.distance_m)
    }

    pub fn attenuation(&self) -> anyhow::Result<f64> {
        match self.channel.xi {
            Some(xi) => Ok(xi),
            None => Ok(lambertian_attenuation(&self.geometry())?),
        }
    }

    pub fn scenario(&self) -> anyhow::Result<Scenario> {
        Ok(Scenario {
            mean_photons: self.source.mean_photons,
            signal: DetectorParams::new(self.detectors.eta_s, self.detectors.bg_s),
            idler: DetectorParams::new(self.detectors.eta_i, self.detectors.bg_i),
            attenuation: self.attenuation()?,
        })
    }

    pub fn seed(&self) -> anyhow::Result<u64> {
        self.protocol
            .seed
            .ok_or_else(|| config_err("protocol.seed: required for simulation commands (use --seed or --set protocol.seed=N)"))
    }
}

/// Applies `a.b.c=value`. The value is parsed as JSON when possible, else
/// taken as a string. Missing intermediate objects are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> anyhow::Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set {assignment}: expected path=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_err(format!("--set {assignment}: empty path segment")));
    }
    let mut node = &mut *root;
    for key in &keys[..keys.len() - 1] {
        if node.get(*key).is_none_or(Value::is_null) {
            node[*key] = Value::Object(Default::default());
        }
        node = node.get_mut(*key).unwrap();
        if !node.is_object() {
            return Err(config_err(format!("--set {assignment}: `{key}` is not an object")));
        }
    }
    node[keys[keys.len() - 1]] = value;
    // Setting one channel form replaces the other.
    if keys.first() == Some(&"channel") && keys.len() >= 2 {
        let other = match keys[1] {
            "xi" => Some("geometry"),
            "geometry" => Some("xi"),
            _ => None,
        };
        if let (Some(other), Some(channel)) = (other, root.get_mut("channel").and_then(Value::as_object_mut)) {
            channel.remove(other);
        }
    }
    Ok(())
}
