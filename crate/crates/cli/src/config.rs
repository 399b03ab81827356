//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use kgman_core::evolve::{SchemeConfig, SchemeOrder};
use kgman_core::manifolds::TruncationConfig;
use kgman_core::{ManifoldKind, ModelParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<kgman_core::Error> for ConfigError {
    fn from(e: kgman_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

/// Every key the runner understands.
pub const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "model.m",
    "model.p",
    "model.n",
    "model.manifold",
    "scheme.order",
    "scheme.dt",
    "scheme.t_end",
    "scheme.drift_tolerance",
    "scheme.sample_every",
    "trunc.epsilon",
    "trunc.epsilon_sq",
    "trunc.r",
    "trunc.t_horizon",
    "trunc.center_window",
    "trunc.fp_tol",
    "trunc.shoot_tol",
    "trunc.dt",
    "trunc.center_dt",
    "trunc.max_iter",
    "phase.etas",
    "phase.t_end",
    "phase.dt",
    "phase.samples",
    "phase.return_tol",
    "track.dts",
    "track.t_fit",
    "track.tolerance",
    "scatter.modes",
    "scatter.a0",
    "scatter.b0",
    "scatter.t_trunc",
    "scatter.dt",
    "scatter.checkpoints",
    "basis.t_max",
    "basis.dt",
    "basis.fit_start",
    "basis.fit_end",
    "basis.sample_every",
    "bound.modes",
    "bound.t_end",
    "bound.dt",
    "bound.empirical_max",
    "bound.sample_every",
    "shadow.method",
    "shadow.samples",
    "shadow.data_fraction",
    "shadow.stable_fraction",
    "shadow.window_h",
    "shadow.window_c",
    "shadow.c_bound",
    "shadow.scan_points",
    "shadow.sample_every",
    "psi.scales",
    "psi.min_slope",
    "psi.lyapunov_norm",
    "psi.lyapunov_horizon",
    "psi.lyapunov_factor",
    "psi.j_drift",
    "heteroclinic.mode",
    "heteroclinic.norms",
    "heteroclinic.segment",
    "heteroclinic.tolerance",
    "heteroclinic.sample_every",
    "converge.data_fraction",
    "converge.stable_fraction",
    "converge.margin",
    "converge.samples",
    "converge.c_bound",
    "converge.tolerance",
];

/// Parsed file: keys in sorted order with their raw values and line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {line_no}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError(format!("line {line_no}: empty key")));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!("line {line_no}: unknown key `{key}`")));
            }
            if entries
                .insert(key.to_string(), (value.to_string(), line_no))
                .is_some()
            {
                return Err(ConfigError(format!("line {line_no}: duplicate key `{key}`")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| ConfigError(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("line {line}: cannot parse `{key} = {v}`"))),
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => {
                let items: std::result::Result<Vec<T>, _> = v
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect();
                let items = items
                    .map_err(|_| ConfigError(format!("line {line}: cannot parse list `{key} = {v}`")))?;
                if items.is_empty() {
                    return Err(ConfigError(format!("line {line}: `{key}` is empty")));
                }
                Ok(items)
            }
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v: f64 = self.get(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError(format!("`{key}` must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v: usize = self.get(key, default)?;
        if v == 0 {
            return Err(ConfigError(format!("`{key}` must be at least 1")));
        }
        Ok(v)
    }
}

/// Validated settings shared by all experiments.
#[derive(Debug, Clone)]
pub struct Settings {
    pub raw: RawConfig,
    pub params: ModelParams,
    pub scheme: SchemeConfig,
    pub t_end: f64,
    pub seed: u64,
}

impl Settings {
    pub fn from_raw(raw: RawConfig, experiment: &str) -> Result<Self> {
        if let Some(name) = raw.raw("experiment") {
            if name != experiment {
                return Err(ConfigError(format!(
                    "config is for experiment `{name}`, not `{experiment}`"
                )));
            }
        }
        let manifold = match raw.raw("model.manifold").unwrap_or("circle") {
            "circle" => ManifoldKind::Circle,
            "torus2" | "torus" => ManifoldKind::Torus2,
            other => return Err(ConfigError(format!("unknown manifold `{other}`"))),
        };
        let params = ModelParams::on(
            manifold,
            raw.get("model.m", 0.5)?,
            raw.get("model.p", 1)?,
            raw.get("model.n", 8)?,
        )?;
        let order = SchemeOrder::from_order(raw.get("scheme.order", 4)?)?;
        let mut scheme = SchemeConfig::new(order, raw.get("scheme.dt", 1e-3)?)?
            .with_sample_every(raw.count("scheme.sample_every", 1)?);
        if let Some(tol) = raw.opt::<f64>("scheme.drift_tolerance")? {
            scheme = scheme.with_drift_tolerance(tol);
        }
        scheme.validate()?;
        let t_end = raw.positive("scheme.t_end", 20.0)?;
        let seed = raw.get("seed", 0u64)?;
        Ok(Settings {
            raw,
            params,
            scheme,
            t_end,
            seed,
        })
    }

    /// Truncation parameters; `default_eps_sq` applies when neither
    /// `trunc.epsilon` nor `trunc.epsilon_sq` is given.
    pub fn truncation(&self, default_eps_sq: f64) -> Result<TruncationConfig> {
        let raw = &self.raw;
        let m = self.params.m;
        let mut cfg = match (raw.opt::<f64>("trunc.epsilon")?, raw.opt::<f64>("trunc.epsilon_sq")?) {
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "give either trunc.epsilon or trunc.epsilon_sq, not both".into(),
                ))
            }
            (Some(e), None) => TruncationConfig::new(e, m)?,
            (None, Some(e2)) => TruncationConfig::from_epsilon_sq(e2, m)?,
            (None, None) => TruncationConfig::from_epsilon_sq(default_eps_sq, m)?,
        };
        cfg.r = raw.get("trunc.r", cfg.r)?;
        cfg.t_horizon = raw.get("trunc.t_horizon", cfg.t_horizon)?;
        cfg.center_window = raw.get("trunc.center_window", cfg.center_window)?;
        cfg.fp_tol = raw.get("trunc.fp_tol", cfg.fp_tol)?;
        cfg.shoot_tol = raw.get("trunc.shoot_tol", cfg.shoot_tol)?;
        cfg.dt = raw.get("trunc.dt", cfg.dt)?;
        cfg.center_dt = raw.get("trunc.center_dt", cfg.center_dt)?;
        cfg.max_iter = raw.get("trunc.max_iter", cfg.max_iter)?;
        cfg.validate(m)?;
        Ok(cfg)
    }

    pub fn horizon_given(&self) -> bool {
        self.raw.contains("trunc.t_horizon")
    }
}
