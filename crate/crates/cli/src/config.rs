use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use pesinlab::dynsys::{CompositeDef, StatePoint, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Map, Value};

/// System given by name, translation vector or formulas.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SystemConfig {
    Name(String),
    Translation { translation: Vec<f64> },
    Composite { composite: CompositeDef },
}

impl SystemConfig {
    pub fn build(&self) -> pesinlab::Result<SystemSpec> {
        match self {
            SystemConfig::Name(n) => SystemSpec::from_name(n),
            SystemConfig::Translation { translation } => SystemSpec::translation(translation),
            SystemConfig::Composite { composite } => SystemSpec::composite(composite.clone()),
        }
    }
}

/// A segment `{x, n}` given in a config.
#[derive(Clone, Debug, Deserialize)]
pub struct SegmentConfig {
    pub x: Vec<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub input: Option<PathBuf>,

    /// Explicit sample points; otherwise `samples` random points.
    pub points: Option<Vec<Vec<f64>>>,
    pub samples: usize,
    /// Fixes the circle coordinate of product-system sample points.
    pub fiber: Option<f64>,
    pub grid: Option<usize>,

    pub horizon: Option<usize>,
    #[serde(rename = "K")]
    pub k_block: usize,
    pub zeta: f64,
    pub k: usize,
    pub ks: Vec<usize>,
    pub n: Option<usize>,
    pub n_max: usize,

    pub delta: f64,
    pub eps: f64,
    pub tol: f64,
    pub max_iter: usize,

    pub deltas: Vec<f64>,
    pub trials: usize,
    pub len_range: (usize, usize),
    pub segment_count: usize,

    pub mesh: f64,
    pub min_transit: Option<usize>,
    pub transit_horizon: usize,
    pub orbit_len: usize,
    pub segments: Option<Vec<SegmentConfig>>,
    pub lengths: Vec<usize>,
    pub budgets: Vec<usize>,
    pub segment_len: usize,
    pub degree: usize,

    pub geometry_output: Option<PathBuf>,
    pub pseudo_output: Option<PathBuf>,
    pub table_output: Option<PathBuf>,
    pub measure_output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemConfig::Name("cat".into()),
            seed: 0,
            output: None,
            input: None,
            points: None,
            samples: 1,
            fiber: None,
            grid: None,
            horizon: None,
            k_block: 1,
            zeta: 0.4,
            k: 1,
            ks: vec![1, 2, 5, 10, 20],
            n: None,
            n_max: 30,
            delta: 1e-8,
            eps: 1e-2,
            tol: 1e-12,
            max_iter: 50,
            deltas: vec![1e-4, 1e-6, 1e-8],
            trials: 20,
            len_range: (10, 30),
            segment_count: 5,
            mesh: 0.05,
            min_transit: None,
            transit_horizon: 1000,
            orbit_len: 20_000,
            segments: None,
            lengths: vec![20, 35, 50],
            budgets: vec![10_000, 30_000, 100_000],
            segment_len: 100,
            degree: 3,
            geometry_output: None,
            pseudo_output: None,
            table_output: None,
            measure_output: None,
        }
    }
}

/// Reads the config file (if any), applies `key=value` overrides (values
/// parsed as JSON, else taken as strings) and deserializes.
pub fn load(path: Option<&Path>, overrides: &[(String, Value)]) -> anyhow::Result<RunConfig> {
    let mut obj = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            match serde_json::from_str::<Value>(&text).with_context(|| format!("parsing {}", p.display()))? {
                Value::Object(m) => m,
                _ => bail!("{}: config must be a JSON object", p.display()),
            }
        }
        None => Map::new(),
    };
    for (k, v) in overrides {
        obj.insert(k.clone(), v.clone());
    }
    let cfg: RunConfig = serde_json::from_value(Value::Object(obj)).context("invalid configuration")?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_override(s: &str) -> anyhow::Result<(String, Value)> {
    let (k, v) = s.split_once('=').with_context(|| format!("expected key=value, got {s:?}"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

impl RunConfig {
    fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [("delta", self.delta), ("eps", self.eps), ("tol", self.tol), ("mesh", self.mesh)] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.deltas.iter().any(|d| !(*d > 0.0)) {
            bail!("deltas must be positive");
        }
        if self.horizon == Some(0) {
            bail!("horizon must be positive");
        }
        Ok(())
    }

    pub fn system(&self) -> pesinlab::Result<SystemSpec> {
        self.system.build()
    }

    pub fn shadow_options(&self) -> pesinlab::shadow::ShadowOptions {
        pesinlab::shadow::ShadowOptions { tol: self.tol, max_iter: self.max_iter }
    }

    /// Sample points: explicit, a product-system x-grid, or seeded random points.
    pub fn sample_points(&self, system: &SystemSpec) -> pesinlab::Result<Vec<StatePoint>> {
        let dim = system.dim();
        let mut pts = if let Some(list) = &self.points {
            list.iter().map(|c| StatePoint::new(c)).collect::<pesinlab::Result<Vec<_>>>()?
        } else {
            (0..self.samples)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    rng.set_stream(i as u64);
                    let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                    StatePoint::new(&c)
                })
                .collect::<pesinlab::Result<Vec<_>>>()?
        };
        if let Some(f) = self.fiber {
            for p in &mut pts {
                let mut c = p.coords().to_vec();
                c[0] = f;
                *p = StatePoint::new(&c)?;
            }
        }
        Ok(pts)
    }
}
