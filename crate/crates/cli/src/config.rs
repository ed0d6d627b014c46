use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tempered_core::basis::{binomial, MAX_QUAD_NODES};
use tempered_core::stochastic::Covariation;

/// Solution methods for `solve` and `residual-heat`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Spectral,
    Mc,
    ConvReference,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Mc => "mc",
            Method::ConvReference => "conv-reference",
        }
    }
}

/// Verdict thresholds. Every pass/fail decision reads from here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Allowed excess of the fitted translation exponent over `2([|p|]+1)`.
    pub degree_slack: f64,
    /// At `p = 0` translation is an isometry; `|slope|` must stay below this.
    pub isometry_slope: f64,
    /// Continuity slope must lie in `1 +- continuity_slope_tol`.
    pub continuity_slope_tol: f64,
    pub ito_order_min: f64,
    pub ito_order_max: f64,
    /// Relative change of the monotonicity supremum under `N`-doubling.
    pub monotonicity_stability: f64,
    /// Distance between deterministic methods, `||.||_0`.
    pub deterministic_distance: f64,
    /// Monte Carlo distance must stay within this many aggregate SEs.
    pub mc_se_factor: f64,
    /// Per-doubling order of the heat residual must lie in `2 +- heat_order_tol`.
    pub heat_order_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            degree_slack: 0.5,
            isometry_slope: 0.05,
            continuity_slope_tol: 0.1,
            ito_order_min: 0.3,
            ito_order_max: 0.7,
            monotonicity_stability: 0.1,
            deterministic_distance: 1e-6,
            mc_se_factor: 3.0,
            heat_order_tol: 0.2,
        }
    }
}

/// Settings of the Ito refinement scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItoSettings {
    pub finest_steps: usize,
    pub halvings: usize,
    pub paths: usize,
    pub covariation: Covariation,
    pub drift: Option<Vec<f64>>,
}

impl Default for ItoSettings {
    fn default() -> Self {
        Self { finest_steps: 1 << 14, halvings: 8, paths: 16, covariation: Covariation::Brownian, drift: None }
    }
}

/// One run, as read from `--config` and overridden by flags. The merged
/// value is echoed into every bundle; `out` and `threads` are execution
/// settings and are not echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Quadrature nodes per axis; defaults depend on the operation.
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    pub p: f64,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: Option<u64>,
    pub input: String,
    pub method: Method,
    pub compare: bool,
    /// Translation scan radii; default is a log grid up to the envelope.
    pub radii: Option<Vec<f64>>,
    pub directions: usize,
    pub draws: usize,
    pub ito: ItoSettings,
    /// Interval counts for `residual-heat`.
    pub intervals: Vec<usize>,
    pub thresholds: Thresholds,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 1,
            n: 32,
            q: None,
            p: 0.0,
            t: None,
            t_grid: None,
            m: 10_000,
            seed: None,
            input: "hermite@0".into(),
            method: Method::Spectral,
            compare: false,
            radii: None,
            directions: 16,
            draws: 50,
            ito: ItoSettings::default(),
            intervals: vec![64, 128, 256],
            thresholds: Thresholds::default(),
            out: None,
            threads: None,
        }
    }
}

/// Largest basis the runner accepts.
pub const MAX_BASIS: usize = 200_000;
pub const MAX_SAMPLES: usize = 10_000_000;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn basis_len(&self) -> usize {
        binomial(self.n + self.d, self.d)
    }

    /// Rejects settings outside what the modules can honour.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            bail!("d = {} outside the supported range 1..=3", self.d);
        }
        if self.basis_len() > MAX_BASIS {
            bail!("basis of {} functions exceeds the limit {MAX_BASIS}", self.basis_len());
        }
        if let Some(q) = self.q {
            if q == 0 || q > MAX_QUAD_NODES {
                bail!("Q = {q} outside 1..={MAX_QUAD_NODES}");
            }
        }
        if !self.p.is_finite() {
            bail!("p must be finite");
        }
        for &t in self.t.iter().chain(self.t_grid.iter().flatten()) {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("times must be finite and non-negative, got {t}");
            }
        }
        if self.m == 0 || self.m > MAX_SAMPLES {
            bail!("M = {} outside 1..={MAX_SAMPLES}", self.m);
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.context("this command is stochastic and needs a seed (--seed or \"seed\" in the config)")
    }

    /// The time grid: `t_grid` if given, else `[t]`, else `default`.
    pub fn times(&self, default: &[f64]) -> Vec<f64> {
        match (&self.t_grid, self.t) {
            (Some(grid), _) => grid.clone(),
            (None, Some(t)) => vec![t],
            (None, None) => default.to_vec(),
        }
    }
}
