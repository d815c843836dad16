//! Run configuration: flat `key = value` text.
//!
//! ```text
//! # comment
//! scenario = classical-simul
//! cost = exp
//! beta = -30dB        # any value ending in dB is dBW: 10^(x/10) W
//! d1 = 3              # metres; gains are h = d^-alpha
//! ```
//!
//! Keys not given fall back to the reference set (logistic rectifier with
//! q1 = 1500, q2 = 0.0022, 24 mW ceiling; d1 = d2 = 3 m, alpha = 2;
//! P1 = P2 = 0.5 W; N = -60 dBW, N_p = -30 dBW). `scenario` and `cost` are
//! always required.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use swipt_mac::{ClassicalParams, CoopParams, CostModel, EhModel, IdNoise, ScanConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ClassicalSimul,
    ClassicalSic,
    Coop,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ClassicalSimul => "classical-simul",
            Scenario::ClassicalSic => "classical-sic",
            Scenario::Coop => "coop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Classical(ClassicalParams),
    Coop(CoopParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoopMethod {
    General,
    ClosedForm,
}

/// Grid sizes of the sweeps and oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub region_points: usize,
    pub rho_points: usize,
    pub weights: usize,
    pub oracle_step: f64,
    pub oracle_grid: usize,
    pub scan: ScanConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub channel: Channel,
    pub coop_method: CoopMethod,
    pub sweep: Sweep,
    pub output: Option<PathBuf>,
}

/// Coarse outer scan for the cooperative solver; the bracketed refinement
/// after it sets the accuracy.
pub const DEFAULT_SCAN_POINTS: usize = 257;

const KEYS: &[&str] = &[
    "scenario",
    "eh",
    "q1",
    "q2",
    "p_max_dc",
    "eta",
    "cost",
    "beta",
    "phi0",
    "user_cost",
    "user_beta",
    "user_phi0",
    "alpha",
    "d1",
    "d2",
    "d12",
    "d21",
    "h1",
    "h2",
    "h12",
    "h21",
    "p1",
    "p2",
    "p_u1",
    "p_u2",
    "n",
    "n_p",
    "n1",
    "n2",
    "id_noise",
    "coop_method",
    "region_points",
    "rho_points",
    "weights",
    "oracle_step",
    "oracle_grid",
    "scan_points",
    "output",
];

const PRESETS: &[(&str, &str)] = &[
    (
        "fig3a",
        "scenario = classical-sic\ncost = exp\nbeta = -30dB\n",
    ),
    (
        "fig3b",
        "scenario = classical-sic\ncost = log\nbeta = -30dB\n",
    ),
    (
        "fig3c",
        "scenario = classical-sic\ncost = lin\nbeta = -30dB\n",
    ),
    (
        "fig3d",
        "scenario = classical-sic\ncost = const\nphi0 = 0.013\n",
    ),
    (
        "fig4",
        "scenario = classical-simul\ncost = exp\nbeta = 0.1\nrho_points = 1001\n",
    ),
    (
        "fig5a",
        "scenario = coop\ncost = exp\nbeta = -30dB\nh12 = 0.008\nh21 = 0.008\n",
    ),
    (
        "fig5b",
        "scenario = coop\ncost = exp\nbeta = -27dB\nh12 = 0.008\nh21 = 0.008\n",
    ),
    (
        "fig5c",
        "scenario = coop\ncost = exp\nbeta = -24dB\nh12 = 0.008\nh21 = 0.008\n",
    ),
    (
        "fig5d",
        "scenario = coop\ncost = exp\nbeta = -21dB\nh12 = 0.008\nh21 = 0.008\n",
    ),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// Splits config text into key/value pairs. Later layers override earlier
/// ones, duplicates within one text are an error.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.trim().to_string(),
            });
        };
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.trim().to_string(),
            });
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::Duplicate(key));
        }
    }
    Ok(map)
}

/// Parses a number; a trailing `dB` (or `dBW`) means decibels relative to 1 W.
pub fn parse_value(key: &str, value: &str) -> Result<f64, ConfigError> {
    let invalid = |reason: String| ConfigError::Invalid {
        key: key.to_string(),
        reason,
    };
    let lower = value.to_ascii_lowercase();
    let (number, db) = match lower
        .strip_suffix("dbw")
        .or_else(|| lower.strip_suffix("db"))
    {
        Some(n) => (n.trim(), true),
        None => (lower.as_str(), false),
    };
    let x: f64 = number
        .parse()
        .map_err(|_| invalid(format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(format!("`{value}` is not finite")));
    }
    Ok(if db { 10f64.powf(x / 10.0) } else { x })
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn text(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.text(key).map(|v| parse_value(key, v)).transpose()
    }

    fn num_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn required(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.num(key)?.ok_or(ConfigError::Missing(key))
    }

    fn count(&self, key: &'static str, default: usize, min: usize) -> Result<usize, ConfigError> {
        let Some(v) = self.text(key) else {
            return Ok(default);
        };
        let n: usize = v.parse().map_err(|_| ConfigError::Invalid {
            key: key.to_string(),
            reason: format!("`{v}` is not a whole number"),
        })?;
        if n < min {
            return Err(ConfigError::Invalid {
                key: key.to_string(),
                reason: format!("must be at least {min}"),
            });
        }
        Ok(n)
    }

    /// Amplitude gain from an explicit `h` key or a distance `d`.
    fn gain(
        &self,
        h: &'static str,
        d: &'static str,
        alpha: f64,
        default_d: Option<f64>,
    ) -> Result<f64, ConfigError> {
        if let Some(g) = self.num(h)? {
            return Ok(g);
        }
        let dist = match (self.num(d)?, default_d) {
            (Some(x), _) | (None, Some(x)) => x,
            (None, None) => return Err(ConfigError::Missing(h)),
        };
        if !(dist > 0.0) {
            return Err(ConfigError::Invalid {
                key: d.to_string(),
                reason: "distance must be positive".into(),
            });
        }
        Ok(dist.powf(-alpha))
    }

    fn cost(
        &self,
        family: &'static str,
        beta: &'static str,
        phi0: &'static str,
    ) -> Result<CostModel, ConfigError> {
        let name = self.text(family).ok_or(ConfigError::Missing(family))?;
        let built = match name.to_ascii_lowercase().as_str() {
            "exp" => CostModel::exp(self.required(beta)?),
            "log" => CostModel::log(self.required(beta)?),
            "lin" => CostModel::lin(self.required(beta)?),
            "const" => CostModel::constant(self.required(phi0)?),
            other => {
                return Err(ConfigError::Invalid {
                    key: family.to_string(),
                    reason: format!("unknown cost family `{other}` (exp, log, lin, const)"),
                })
            }
        };
        built.map_err(|e| ConfigError::Invalid {
            key: if name == "const" { phi0 } else { beta }.to_string(),
            reason: e.to_string(),
        })
    }

    fn eh(&self) -> Result<EhModel, ConfigError> {
        let invalid = |key: &str, e: swipt_mac::Error| ConfigError::Invalid {
            key: key.to_string(),
            reason: e.to_string(),
        };
        match self
            .text("eh")
            .unwrap_or("logistic")
            .to_ascii_lowercase()
            .as_str()
        {
            "logistic" => EhModel::logistic(
                self.num_or("q1", 1500.0)?,
                self.num_or("q2", 0.0022)?,
                self.num_or("p_max_dc", 0.024)?,
            )
            .map_err(|e| invalid("eh", e)),
            "linear" => EhModel::linear(self.num_or("eta", 1.0)?).map_err(|e| invalid("eta", e)),
            other => Err(ConfigError::Invalid {
                key: "eh".into(),
                reason: format!("unknown harvester `{other}` (logistic, linear)"),
            }),
        }
    }
}

/// Parses config text layered over an optional preset.
pub fn parse_config(text: &str, preset: Option<&str>) -> Result<RunConfig, ConfigError> {
    let mut map = match preset {
        Some(name) => {
            let (_, body) = PRESETS
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
            parse_pairs(body)?
        }
        None => BTreeMap::new(),
    };
    map.extend(parse_pairs(text)?);
    let v = Values(map);

    let scenario = match v.text("scenario").ok_or(ConfigError::Missing("scenario"))? {
        "classical-simul" => Scenario::ClassicalSimul,
        "classical-sic" => Scenario::ClassicalSic,
        "coop" => Scenario::Coop,
        other => {
            return Err(ConfigError::Invalid {
                key: "scenario".into(),
                reason: format!(
                    "unknown scenario `{other}` (classical-simul, classical-sic, coop)"
                ),
            })
        }
    };
    let alpha = v.num_or("alpha", 2.0)?;
    let eh = v.eh()?;
    let cost = v.cost("cost", "beta", "phi0")?;
    let h1 = v.gain("h1", "d1", alpha, Some(3.0))?;
    let h2 = v.gain("h2", "d2", alpha, Some(3.0))?;
    let n = v.num_or("n", 1e-6)?;
    let n_p = v.num_or("n_p", 1e-3)?;
    let invalid = |e: swipt_mac::Error| ConfigError::Invalid {
        key: "parameters".into(),
        reason: e.to_string(),
    };

    let channel = match scenario {
        Scenario::Coop => {
            let user_cost = if v.text("user_cost").is_some() {
                v.cost("user_cost", "user_beta", "user_phi0")?
            } else {
                cost
            };
            let params = CoopParams {
                h1,
                h2,
                h12: v.gain("h12", "d12", alpha, None)?,
                h21: v.gain("h21", "d21", alpha, None)?,
                n1: v.num_or("n1", n)?,
                n2: v.num_or("n2", n)?,
                n,
                n_p,
                p_u1_budget: v.num_or("p_u1", 0.5)?,
                p_u2_budget: v.num_or("p_u2", 0.5)?,
                eh,
                cost_dest: cost,
                cost_user1: user_cost,
                cost_user2: user_cost,
            };
            params.validate().map_err(invalid)?;
            Channel::Coop(params)
        }
        _ => {
            let id_noise = match v.text("id_noise").unwrap_or("full") {
                "full" => IdNoise::AntennaAndProcessing,
                "processing-only" => IdNoise::ProcessingOnly,
                other => {
                    return Err(ConfigError::Invalid {
                        key: "id_noise".into(),
                        reason: format!("unknown mode `{other}` (full, processing-only)"),
                    })
                }
            };
            let params = ClassicalParams::new(
                h1 * h1,
                h2 * h2,
                v.num_or("p1", 0.5)?,
                v.num_or("p2", 0.5)?,
                n,
                n_p,
                eh,
                cost,
            )
            .map_err(invalid)?
            .with_id_noise(id_noise);
            Channel::Classical(params)
        }
    };

    let coop_method = match v.text("coop_method").unwrap_or("general") {
        "general" => CoopMethod::General,
        "closed-form" => CoopMethod::ClosedForm,
        other => {
            return Err(ConfigError::Invalid {
                key: "coop_method".into(),
                reason: format!("unknown method `{other}` (general, closed-form)"),
            })
        }
    };
    let oracle_step = v.num_or("oracle_step", 1e-5)?;
    if !(oracle_step > 0.0 && oracle_step <= 1e-3) {
        return Err(ConfigError::Invalid {
            key: "oracle_step".into(),
            reason: "must lie in (0, 1e-3]".into(),
        });
    }
    let sweep = Sweep {
        region_points: v.count("region_points", 256, 2)?,
        rho_points: v.count("rho_points", 1001, 2)?,
        weights: v.count("weights", 21, 2)?,
        oracle_step,
        oracle_grid: v.count("oracle_grid", 201, 2)?,
        scan: ScanConfig::with_grid(v.count("scan_points", DEFAULT_SCAN_POINTS, 3)?),
    };
    Ok(RunConfig {
        scenario,
        channel,
        coop_method,
        sweep,
        output: v.text("output").map(PathBuf::from),
    })
}

/// Reads and parses a config file.
pub fn ingest_config(path: &Path, preset: Option<&str>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    parse_config(&text, preset)
}
