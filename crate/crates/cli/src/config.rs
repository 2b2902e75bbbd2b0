//! Optional TOML defaults. A value given on the command line always wins over the
//! file, and the file wins over the built-in default.

use std::path::Path;

use anyhow::Context;
use eventsampling_core::{GridSpec, OptimizerConfig, SeriesConfig, SimConfig};
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub pde: GridSection,
    #[serde(default)]
    pub dp: GridSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub antithetic: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub abs_tol: Option<f64>,
    pub max_terms: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m_time: Option<usize>,
    pub x_half_width: Option<f64>,
    pub n_x: Option<usize>,
}

impl GridSection {
    fn apply(&self, mut g: GridSpec) -> GridSpec {
        if let Some(v) = self.m_time {
            g.m_time = v;
        }
        if let Some(v) = self.x_half_width {
            g.x_half_width = v;
        }
        if let Some(v) = self.n_x {
            g.n_x = v;
        }
        g
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_DT: f64 = 1e-3;

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
            .context("loading configuration")
    }

    pub fn sim(&self, seed: Option<u64>, paths: Option<usize>, dt: Option<f64>, antithetic: bool) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            n_paths: paths.or(s.paths).unwrap_or(DEFAULT_PATHS),
            dt: dt.or(s.dt).unwrap_or(DEFAULT_DT),
            seed: seed.or(s.seed).unwrap_or(DEFAULT_SEED),
            antithetic: antithetic || s.antithetic.unwrap_or(false),
        }
    }

    pub fn series(&self) -> SeriesConfig {
        let d = SeriesConfig::default();
        SeriesConfig {
            abs_tol: self.series.abs_tol.unwrap_or(d.abs_tol),
            max_terms: self.series.max_terms.unwrap_or(d.max_terms),
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        let d = OptimizerConfig::default();
        let o = &self.optimizer;
        OptimizerConfig {
            lambda_min: o.lambda_min.unwrap_or(d.lambda_min),
            lambda_max: o.lambda_max.unwrap_or(d.lambda_max),
            grid_points: o.grid_points.unwrap_or(d.grid_points),
            rel_tol: o.rel_tol.unwrap_or(d.rel_tol),
        }
    }

    pub fn pde_grid(&self) -> GridSpec {
        self.pde.apply(GridSpec::pde_default())
    }

    pub fn dp_grid(&self, a_bar: f64) -> GridSpec {
        self.dp.apply(GridSpec::dp_default(a_bar))
    }
}
