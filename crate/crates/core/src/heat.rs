//! The heat semigroup `T_t phi = phi * p_t`, the multiplier operator
//! `S_t = F (T_t - I) F^{-1}`, a physical-space convolution oracle, and the
//! strong-continuity and integrated-equation checks.
//!
//! `T_t` is applied as `F^{-1} M_t F` with `M_t` multiplication by
//! `e^{-t|x|^2/2}`. Its matrix in the Hermite basis is evaluated on a
//! Gauss-Hermite grid rescaled to the width of the product
//! `e^{-t x^2/2} h_j h_k`, which makes the rule exact with `N + 1` nodes.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{hermite_functions_into, QuadGrid};
use crate::error::{Error, Result};
use crate::sobolev::{apply_laplacian, fourier, sobolev_norm, Direction, HermiteCoeffs, SobolevOrder};
use crate::stats::log_log_slope;
use crate::tensor::contract_all;
use crate::translation::ScanEcho;

/// Gaussian density `p_t(x) = (2 pi t)^{-d/2} e^{-|x|^2 / 2t}`.
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((2.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (2.0 * t)).exp())
}

fn kernel_1d(x: f64, t: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Row-major `(n+1) x (n+1)` matrix of `int e^{-a x^2} h_j(x) h_k(x) dx`.
fn gaussian_multiplier(n: usize, a: f64) -> Result<Vec<f64>> {
    let grid = QuadGrid::new(n + 2, 1)?;
    let sigma2 = 1.0 + a;
    let sigma = sigma2.sqrt();
    let shrink = 1.0 - 1.0 / sigma2;
    let mut table = vec![0.0; n + 1];
    let mut m = vec![0.0; (n + 1) * (n + 1)];
    for (&y, &w) in grid.nodes().iter().zip(grid.weights()) {
        hermite_functions_into(y / sigma, &mut table);
        let weight = w * (-y * y * shrink).exp() / sigma;
        for j in 0..=n {
            let wj = weight * table[j];
            for k in 0..=n {
                m[j * (n + 1) + k] += wj * table[k];
            }
        }
    }
    Ok(m)
}

fn apply_separable(phi: &HermiteCoeffs, matrix: &[f64]) -> HermiteCoeffs {
    let n = phi.degree();
    let mats = vec![(matrix, n + 1); phi.dim()];
    let mut shape = vec![n + 1; phi.dim()];
    phi.from_box(&contract_all(phi.to_box(), &mut shape, &mats))
}

fn strip_imaginary_if_real(input: &HermiteCoeffs, mut out: HermiteCoeffs) -> HermiteCoeffs {
    if input.is_real_valued() {
        for c in out.coeffs_mut() {
            c.im = 0.0;
        }
    }
    out
}

/// Multiplication by `e^{-t|x|^2/2}` on the truncated space.
pub fn gaussian_multiply(phi: &HermiteCoeffs, t: f64) -> Result<HermiteCoeffs> {
    Ok(apply_separable(phi, &gaussian_multiplier(phi.degree(), t / 2.0)?))
}

/// `T_t phi = F^{-1} (e^{-t|x|^2/2} F phi)`; `T_0` is the identity.
pub fn heat_apply(phi: &HermiteCoeffs, t: f64) -> Result<HermiteCoeffs> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("heat time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(phi.clone());
    }
    let forward = fourier(phi, Direction::Forward);
    let damped = gaussian_multiply(&forward, t)?;
    Ok(strip_imaginary_if_real(phi, fourier(&damped, Direction::Inverse)))
}

/// `S_t phi = (e^{-t|x|^2/2} - 1) phi`; `S_0 = 0`.
pub fn st_operator(phi: &HermiteCoeffs, t: f64) -> Result<HermiteCoeffs> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(HermiteCoeffs::zeros_on(phi.basis().clone()));
    }
    Ok(&gaussian_multiply(phi, t)? - phi)
}

/// Row-major `Q x (n+1)` matrix of `(h_l * p_t)(x_a)`, each entry by a
/// Gauss-Hermite rule centred at `x_a / (1 + t)` with the width of the
/// integrand `h_l(y) p_t(x_a - y)`.
fn convolved_basis(nodes_out: &[f64], n: usize, t: f64, inner: &QuadGrid) -> Vec<f64> {
    let gamma = (1.0 + t) / (2.0 * t);
    let scale = 1.0 / gamma.sqrt();
    let mut table = vec![0.0; n + 1];
    let mut out = vec![0.0; nodes_out.len() * (n + 1)];
    for (row, &x) in out.chunks_mut(n + 1).zip(nodes_out) {
        let centre = x / (1.0 + t);
        for (&u, &w) in inner.nodes().iter().zip(inner.weights()) {
            let y = centre + u * scale;
            hermite_functions_into(y, &mut table);
            let weight = w * scale * kernel_1d(x - y, t);
            for (r, h) in row.iter_mut().zip(&table) {
                *r += weight * h;
            }
        }
    }
    out
}

/// Physical-space convolution `phi * p_t`, re-projected: every inner
/// integral `int phi(y) p_t(x - y) dy` and the outer projection are Gauss-Hermite
/// rules placed on the support of their integrands. Exact once
/// `nodes_per_dim >= N + 1`; smaller grids are a coverage violation.
pub fn convolution_reference(phi: &HermiteCoeffs, t: f64, nodes_per_dim: usize) -> Result<HermiteCoeffs> {
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    let n = phi.degree();
    if nodes_per_dim < n + 1 {
        return Err(Error::QuadratureTooSmall { required: n + 1, found: nodes_per_dim });
    }
    let grid = QuadGrid::new(nodes_per_dim, 1)?;
    let q = grid.size();
    // (phi * p_t) h_k decays like e^{-beta x^2}
    let beta = (2.0 + t) / (2.0 * (1.0 + t));
    let s = beta.sqrt();
    let out_nodes: Vec<f64> = grid.nodes().iter().map(|z| z / s).collect();
    let out_weights: Vec<f64> = grid.weights().iter().map(|w| w / s).collect();

    let synth = convolved_basis(&out_nodes, n, t, &grid);
    let mut table = vec![0.0; n + 1];
    let mut analysis = vec![0.0; (n + 1) * q];
    for (i, (&x, &w)) in out_nodes.iter().zip(&out_weights).enumerate() {
        hermite_functions_into(x, &mut table);
        for k in 0..=n {
            analysis[k * q + i] = w * table[k];
        }
    }
    let mut shape = vec![n + 1; phi.dim()];
    let on_grid = contract_all(phi.to_box(), &mut shape, &vec![(synth.as_slice(), q); phi.dim()]);
    let dense = contract_all(on_grid, &mut shape, &vec![(analysis.as_slice(), n + 1); phi.dim()]);
    Ok(strip_imaginary_if_real(phi, phi.from_box(&dense)))
}

/// `||T_t phi - phi||_p` over a time grid, with its log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub p: SobolevOrder,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub fitted_slope: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub config: ScanEcho,
}

/// Default half-width of the accepted slope band around 1.
pub const CONTINUITY_TOLERANCE: f64 = 0.1;

pub fn strong_continuity_scan(
    phi: &HermiteCoeffs,
    p: impl Into<SobolevOrder>,
    times: &[f64],
    tolerance: f64,
) -> Result<ContinuityReport> {
    let p = p.into();
    if times.len() < 2 || times[0] <= 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("time grid must be positive and strictly increasing".into()));
    }
    let distances = times
        .par_iter()
        .map(|&t| Ok(sobolev_norm(&(&heat_apply(phi, t)? - phi), p)))
        .collect::<Result<Vec<f64>>>()?;
    if distances.iter().any(|&d| d <= 0.0) {
        return Err(Error::ZeroNorm);
    }
    let fitted_slope = log_log_slope(times, &distances);
    Ok(ContinuityReport {
        p,
        times: times.to_vec(),
        distances,
        fitted_slope,
        tolerance,
        passed: (fitted_slope - 1.0).abs() <= tolerance,
        config: ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: None },
    })
}

/// Residual of `phi_t = phi + int_0^t (1/2) Delta phi_s ds` on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatResidualReport {
    pub p: SobolevOrder,
    pub horizon: f64,
    /// Residual norms `||.||_{p-1}` at the grid times of the finest level.
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub refinement: Vec<RefinementRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub intervals: usize,
    pub step: f64,
    pub terminal_residual: f64,
    /// `log2(previous / current)`, absent on the first row.
    pub order: Option<f64>,
}

/// Trapezoidal residual of the integrated heat equation for a family of
/// solutions `solve(phi, t)` (spectral or convolution based).
pub fn heat_equation_residual<S>(
    phi: &HermiteCoeffs,
    horizon: f64,
    p: impl Into<SobolevOrder>,
    intervals: &[usize],
    solve: S,
) -> Result<HeatResidualReport>
where
    S: Fn(&HermiteCoeffs, f64) -> Result<HermiteCoeffs> + Sync,
{
    let p = p.into();
    let content = phi.content_degree().unwrap_or(0);
    if phi.degree() < content + 2 {
        return Err(Error::Margin { required: content + 2, available: phi.degree() });
    }
    if intervals.is_empty() || intervals.contains(&0) || horizon < 0.0 {
        return Err(Error::InvalidArgument("need at least one positive interval count".into()));
    }
    let q = p.value() - 1.0;
    let mut refinement = Vec::with_capacity(intervals.len());
    let mut finest = (Vec::new(), Vec::new());
    for &n in intervals {
        let h = horizon / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let states = times.par_iter().map(|&t| solve(phi, t)).collect::<Result<Vec<_>>>()?;
        let half_laplacians: Vec<HermiteCoeffs> = states.iter().map(|s| &apply_laplacian(s) * 0.5).collect();
        let mut integral = HermiteCoeffs::zeros_on(phi.basis().clone());
        let mut residuals = vec![0.0];
        for i in 1..=n {
            let step = &(&half_laplacians[i - 1] + &half_laplacians[i]) * (0.5 * h);
            integral = &integral + &step;
            let r = &(&states[i] - phi) - &integral;
            residuals.push(sobolev_norm(&r, q));
        }
        let terminal = residuals[n];
        let order = refinement.last().map(|prev: &RefinementRow| (prev.terminal_residual / terminal).log2());
        refinement.push(RefinementRow { intervals: n, step: h, terminal_residual: terminal, order });
        finest = (times, residuals);
    }
    Ok(HeatResidualReport { p, horizon, times: finest.0, residuals: finest.1, refinement })
}

impl QuadGrid {
    /// `int f(y) dy` in one dimension on the grid rescaled by `1 / scale`,
    /// exact when `f(y) e^{scale^2 y^2}` is a polynomial of degree `<= 2Q - 1`.
    pub fn integrate_scaled(&self, f: impl Fn(f64) -> f64, scale: f64) -> f64 {
        self.nodes().iter().zip(self.weights()).map(|(&z, &w)| w / scale * f(z / scale)).sum()
    }
}
