//! Flat `key = value` study configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Result, WgError};
use crate::solvers::{InitialMode, ParabolicProblem, TimeGrid};
use crate::wgspace::{Stabilizer, WgConfig};

/// How the time step follows the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    Fixed(f64),
    /// `τ = h^{γ+1}`, rounded so that `T/τ` is an integer.
    Coupled(u32),
    /// `τ = 1e-3` for `k ≤ 2`, `τ = h^k` above.
    Auto,
}

impl TauMode {
    pub fn grid(&self, k: usize, n: usize, t_final: f64) -> Result<TimeGrid> {
        let coupled = |power: u32| {
            let steps = (t_final * (n as f64).powi(power as i32)).round().max(1.0) as usize;
            TimeGrid::new(t_final, steps)
        };
        match *self {
            TauMode::Fixed(tau) => TimeGrid::from_tau(t_final, tau),
            TauMode::Coupled(gamma) => coupled(gamma + 1),
            TauMode::Auto if k <= 2 => TimeGrid::from_tau(t_final, 1e-3),
            TauMode::Auto => coupled(k as u32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(WgError::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// What `export-surface` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfaceSource {
    #[default]
    Discrete,
    Projection,
    Exact,
}

impl FromStr for SurfaceSource {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "discrete" | "wg" => Ok(SurfaceSource::Discrete),
            "projection" => Ok(SurfaceSource::Projection),
            "exact" => Ok(SurfaceSource::Exact),
            other => Err(WgError::Config(format!("unknown surface source '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub order: f64,
    /// Multiplicative magnitude tolerance; `None` compares rates only.
    pub magnitude: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            order: 0.25,
            magnitude: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub k: Vec<usize>,
    pub j: Vec<usize>,
    pub l: Vec<usize>,
    pub stabilizers: Vec<Stabilizer>,
    pub ladder: Vec<usize>,
    pub tau: TauMode,
    pub t_final: f64,
    pub problem: String,
    pub initial: InitialMode,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub surface_samples: usize,
    pub surface_level: Option<usize>,
    pub surface_source: SurfaceSource,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            k: vec![2],
            j: vec![1],
            l: vec![1],
            stabilizers: vec![Stabilizer::Projected],
            ladder: vec![4, 8, 16, 32],
            tau: TauMode::Auto,
            t_final: 1.0,
            problem: "paper_sec5".into(),
            initial: InitialMode::Ritz,
            format: OutputFormat::Csv,
            output: None,
            tolerances: Tolerances::default(),
            surface_samples: 33,
            surface_level: None,
            surface_source: SurfaceSource::Discrete,
        }
    }
}

/// `(k, j, l, stabilizer)` identifying one convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Combination {
    pub k: usize,
    pub j: usize,
    pub l: usize,
    pub stabilizer: Stabilizer,
}

impl Combination {
    pub fn new(k: usize, j: usize, l: usize, stabilizer: Stabilizer) -> Self {
        Combination { k, j, l, stabilizer }
    }

    pub fn config(&self) -> Result<WgConfig> {
        WgConfig::new(self.k, self.j, self.l, self.stabilizer)
    }
}

impl std::fmt::Display for Combination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{}) {}", self.k, self.j, self.l, self.stabilizer)
    }
}

impl StudySpec {
    /// Parses a config file body; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| WgError::Config(format!("line {}: expected key = value", no + 1)))?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        let mut spec = StudySpec::default();
        spec.apply(&pairs)?;
        Ok(spec)
    }

    /// Applies overrides in order; later keys win. `tau` and `gamma` replace
    /// each other.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (key, value) in pairs {
            seen.insert(key.as_str(), value.as_str());
            self.set(key, value)?;
        }
        if seen.contains_key("tau") && seen.contains_key("gamma") {
            return Err(WgError::Config("tau and gamma are mutually exclusive".into()));
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| WgError::Config(format!("invalid {key} '{value}': {what}"));
        match key {
            "k" => self.k = parse_indices(value).map_err(|e| bad(&e))?,
            "j" => self.j = parse_indices(value).map_err(|e| bad(&e))?,
            "l" => self.l = parse_indices(value).map_err(|e| bad(&e))?,
            "stabilizer" | "stabilizers" => {
                self.stabilizers = value.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?
            }
            "n_levels" | "levels" => self.ladder = parse_list(value).map_err(|e| bad(&e))?,
            "tau" => {
                self.tau = match value {
                    "auto" => TauMode::Auto,
                    v => TauMode::Fixed(v.parse().map_err(|_| bad("not a number"))?),
                }
            }
            "gamma" => self.tau = TauMode::Coupled(value.parse().map_err(|_| bad("not a non-negative integer"))?),
            "T" | "t_final" => self.t_final = value.parse().map_err(|_| bad("not a number"))?,
            "problem" => self.problem = value.to_string(),
            "initial" => {
                self.initial = match value {
                    "ritz" => InitialMode::Ritz,
                    "projection" => InitialMode::Projection,
                    _ => return Err(bad("expected ritz or projection")),
                }
            }
            "format" => self.format = value.parse()?,
            "output" => self.output = Some(PathBuf::from(value)),
            "order_tol" => self.tolerances.order = value.parse().map_err(|_| bad("not a number"))?,
            "mag_tol" => {
                self.tolerances.magnitude = match value {
                    "none" => None,
                    v => Some(v.parse().map_err(|_| bad("not a number"))?),
                }
            }
            "samples" => self.surface_samples = value.parse().map_err(|_| bad("not an integer"))?,
            "surface_level" => self.surface_level = Some(value.parse().map_err(|_| bad("not an integer"))?),
            "surface" => self.surface_source = value.parse()?,
            other => return Err(WgError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(WgError::Config(m));
        if self.k.is_empty() || self.j.is_empty() || self.l.is_empty() || self.stabilizers.is_empty() {
            return cfg_err("k, j, l and stabilizer must be non-empty".into());
        }
        if self.ladder.is_empty() || self.ladder.contains(&0) {
            return cfg_err("n_levels must list positive resolutions".into());
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return cfg_err("n_levels must be strictly refining".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return cfg_err(format!("T = {} must be positive", self.t_final));
        }
        if ParabolicProblem::by_name(&self.problem).is_none() {
            return cfg_err(format!(
                "unknown problem '{}' (known: {})",
                self.problem,
                ParabolicProblem::registered_names().join(", ")
            ));
        }
        if self.surface_samples < 2 {
            return cfg_err("samples must be at least 2".into());
        }
        if !(self.tolerances.order >= 0.0) || self.tolerances.magnitude.is_some_and(|m| !(m >= 1.0)) {
            return cfg_err("order_tol must be >= 0 and mag_tol >= 1".into());
        }
        for c in self.combinations() {
            c.config()?;
            for &n in &self.ladder {
                self.tau.grid(c.k, n, self.t_final)?;
            }
        }
        Ok(())
    }

    /// All combinations in `(k, j, l, stabilizer)` order.
    pub fn combinations(&self) -> Vec<Combination> {
        let mut out = Vec::new();
        for &k in &self.k {
            for &j in &self.j {
                for &l in &self.l {
                    for &s in &self.stabilizers {
                        out.push(Combination::new(k, j, l, s));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// `2`, `0,1,3`, `0..4` or `0..=4` (both ranges inclusive).
fn parse_indices(s: &str) -> std::result::Result<Vec<usize>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let b = b.trim_start_matches('=');
        let a: usize = a.trim().parse().map_err(|_| "bad range start".to_string())?;
        let b: usize = b.trim().parse().map_err(|_| "bad range end".to_string())?;
        if b < a {
            return Err("empty range".into());
        }
        return Ok((a..=b).collect());
    }
    parse_list(s)
}

fn parse_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| format!("'{}' is not a non-negative integer", v.trim())))
        .collect()
}
