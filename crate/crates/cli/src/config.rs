use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Reduced,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    Rk4,
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gradient {
    Dual,
    Fd,
}

/// Every setting of every subcommand. Flags and the `--config` file use the
/// same names; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub q: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub method: Option<Method>,
    pub integrator: Option<Stepper>,
    pub max_order: Option<u32>,
    pub gradient: Option<Gradient>,
    pub fd_step: Option<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub zeta: Option<f64>,
    pub pi: Option<Vec<f64>>,
    pub t_grid: Option<Vec<f64>>,
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let top = self;
        overlay!(top, base; n, alpha, x, y, seed, format, output, samples, tol, q, p, t_max, dt, method,
            integrator, max_order, gradient, fd_step, xi, eta, zeta, pi, t_grid)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(2)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.5)
    }

    pub fn x(&self) -> f64 {
        self.x.unwrap_or(1.0)
    }

    pub fn y(&self) -> f64 {
        self.y.unwrap_or(1.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
