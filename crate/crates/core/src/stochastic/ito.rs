use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sobolev::{apply_derivative, apply_second_derivative, sobolev_norm, HermiteCoeffs, SobolevOrder};
use crate::stats::log_log_slope;
use crate::translation::{ScanEcho, Translator};

use super::mc::chunked_moments;
use super::path::{sample_brownian_stream, BrownianPath};
use super::rng::{gaussian_vector, stream_rng};

/// Which `d<X^i, X^j>` enters the second-order term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Covariation {
    /// `delta_ij ds`, the quadratic variation of standard Brownian motion.
    Brownian,
    /// `dX^i dX^j` from the sampled increments; zero on finite-variation paths.
    Realized,
}

/// Accepted empirical order band for the Ito residual.
pub const ITO_ORDER_RANGE: (f64, f64) = (0.3, 0.7);
/// Relative increase tolerated between successive refinement levels.
pub const MONOTONE_SLACK: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoRefinementRow {
    pub step: f64,
    pub terminal_residual: f64,
    /// `log2(previous / current)`, absent on the coarsest row.
    pub order: Option<f64>,
}

/// Residual of the Ito formula for `tau_{X_t} phi` along one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoResidualReport {
    pub step: f64,
    pub p: SobolevOrder,
    pub covariation: Covariation,
    pub times: Vec<f64>,
    /// `||R_{t_i}||_{p-1}`.
    pub residuals: Vec<f64>,
    pub terminal: f64,
    /// Coarsest first; the last row is the path's own resolution.
    pub refinement: Vec<ItoRefinementRow>,
    pub config: ScanEcho,
}

fn check_margin(phi: &HermiteCoeffs) -> Result<()> {
    let content = phi.content_degree().unwrap_or(0);
    if phi.degree() < content + 2 {
        return Err(Error::Margin { required: content + 2, available: phi.degree() });
    }
    Ok(())
}

fn check_path(phi: &HermiteCoeffs, path: &BrownianPath) -> Result<()> {
    if path.d != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: path.d });
    }
    Ok(())
}

/// `tau_{X_{t_i}} phi` at every grid time of `path`.
fn translate_along(phi: &HermiteCoeffs, path: &BrownianPath, translator: &Translator) -> Result<Vec<HermiteCoeffs>> {
    path.positions.iter().map(|x| translator.apply(phi, x)).collect()
}

/// `||R||_q` at the grid times of the sub-path with the given stride, where
/// `R_t = Y_t - phi + sign sum grad Y . dX - 1/2 sum d2 Y d<X>` with `Y`
/// sampled at every grid point in `states`.
fn residual_series(
    phi: &HermiteCoeffs,
    path: &BrownianPath,
    states: &[HermiteCoeffs],
    stride: usize,
    covariation: Covariation,
    sign: f64,
    q: f64,
) -> Result<Vec<f64>> {
    let d = phi.dim();
    let coarse = path.subsample(stride)?;
    let mut acc = HermiteCoeffs::zeros_on(Arc::clone(phi.basis()));
    let mut out = Vec::with_capacity(coarse.times.len());
    out.push(sobolev_norm(&(&states[0] - phi), q));
    for m in 0..coarse.steps() {
        let y = &states[m * stride];
        let dx = coarse.increment(m);
        let h = coarse.times[m + 1] - coarse.times[m];
        for i in 0..d {
            if dx[i] != 0.0 {
                acc = &acc + &(&apply_derivative(y, i)? * (sign * dx[i]));
            }
            for j in 0..d {
                let dc = match covariation {
                    Covariation::Brownian => {
                        if i == j {
                            h
                        } else {
                            0.0
                        }
                    }
                    Covariation::Realized => dx[i] * dx[j],
                };
                if dc != 0.0 {
                    acc = &acc - &(&apply_second_derivative(y, i, j)? * (0.5 * dc));
                }
            }
        }
        let r = &(&states[(m + 1) * stride] - phi) + &acc;
        out.push(sobolev_norm(&r, q));
    }
    Ok(out)
}

fn refinement_rows(steps: &[f64], terminals: &[f64]) -> Vec<ItoRefinementRow> {
    let mut rows: Vec<ItoRefinementRow> = Vec::with_capacity(steps.len());
    for (&step, &terminal_residual) in steps.iter().zip(terminals) {
        let order = rows.last().map(|prev| (prev.terminal_residual / terminal_residual).log2());
        rows.push(ItoRefinementRow { step, terminal_residual, order });
    }
    rows
}

/// Ito residual of `tau_{X_t} phi` along `path` in `||.||_{p-1}`, with a
/// refinement table over `halvings` coarsenings of the same path.
pub fn ito_residual(
    phi: &HermiteCoeffs,
    path: &BrownianPath,
    p: impl Into<SobolevOrder>,
    covariation: Covariation,
    halvings: usize,
) -> Result<ItoResidualReport> {
    let p = p.into();
    check_margin(phi)?;
    check_path(phi, path)?;
    let q = p.value() - 1.0;
    let states = translate_along(phi, path, &Translator::for_coeffs(phi)?)?;
    let residuals = residual_series(phi, path, &states, 1, covariation, 1.0, q)?;
    let mut steps = Vec::new();
    let mut terminals = Vec::new();
    for level in (0..=halvings).rev() {
        let stride = 1usize << level;
        let series = residual_series(phi, path, &states, stride, covariation, 1.0, q)?;
        steps.push(path.horizon() / (path.steps() / stride) as f64);
        terminals.push(*series.last().expect("non-empty"));
    }
    Ok(ItoResidualReport {
        step: path.horizon() / path.steps() as f64,
        p,
        covariation,
        times: path.times.clone(),
        terminal: *residuals.last().expect("non-empty"),
        residuals,
        refinement: refinement_rows(&steps, &terminals),
        config: ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: None },
    })
}

/// Settings of a multi-path refinement study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoScanConfig {
    pub horizon: f64,
    /// Steps of the finest level; must be divisible by `2^halvings`.
    pub finest_steps: usize,
    pub halvings: usize,
    pub paths: usize,
    pub seed: u64,
    pub covariation: Covariation,
    pub drift: Option<Vec<f64>>,
}

impl Default for ItoScanConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            finest_steps: 1 << 14,
            halvings: 8,
            paths: 16,
            seed: 0,
            covariation: Covariation::Brownian,
            drift: None,
        }
    }
}

/// Root-mean-square terminal residual over an ensemble of paths, per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoConvergenceReport {
    pub p: SobolevOrder,
    pub rows: Vec<ItoRefinementRow>,
    /// Least-squares slope of `log rms` against `log h`.
    pub fitted_order: f64,
    pub order_range: (f64, f64),
    pub monotone: bool,
    pub passed: bool,
    pub scan: ItoScanConfig,
    pub config: ScanEcho,
}

fn convergence(
    phi: &HermiteCoeffs,
    p: SobolevOrder,
    scan: &ItoScanConfig,
    negate: bool,
    sign: f64,
) -> Result<ItoConvergenceReport> {
    check_margin(phi)?;
    if scan.paths == 0 || !scan.finest_steps.is_multiple_of(1usize << scan.halvings) {
        return Err(Error::InvalidArgument("finest step count must be divisible by 2^halvings".into()));
    }
    let q = p.value() - 1.0;
    let translator = Translator::for_coeffs(phi)?;
    let strides: Vec<usize> = (0..=scan.halvings).rev().map(|l| 1usize << l).collect();
    let per_path = (0..scan.paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_brownian_stream(phi.dim(), scan.horizon, scan.finest_steps, scan.seed, i, scan.drift.as_deref())?;
            let path = if negate { path.negated() } else { path };
            let states = translate_along(phi, &path, &translator)?;
            strides
                .iter()
                .map(|&s| Ok(*residual_series(phi, &path, &states, s, scan.covariation, sign, q)?.last().expect("non-empty")))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = strides.iter().map(|&s| scan.horizon * s as f64 / scan.finest_steps as f64).collect();
    let rms: Vec<f64> = (0..strides.len())
        .map(|l| (per_path.iter().map(|r| r[l] * r[l]).sum::<f64>() / scan.paths as f64).sqrt())
        .collect();
    let fitted_order = log_log_slope(&steps, &rms);
    let monotone = rms.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK));
    Ok(ItoConvergenceReport {
        p,
        rows: refinement_rows(&steps, &rms),
        fitted_order,
        order_range: ITO_ORDER_RANGE,
        monotone,
        passed: monotone && (ITO_ORDER_RANGE.0..=ITO_ORDER_RANGE.1).contains(&fitted_order),
        scan: scan.clone(),
        config: ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: Some(scan.seed) },
    })
}

/// Ito-residual refinement study for `tau_{X_t} phi` over sampled paths.
pub fn ito_convergence(phi: &HermiteCoeffs, p: impl Into<SobolevOrder>, scan: &ItoScanConfig) -> Result<ItoConvergenceReport> {
    convergence(phi, p.into(), scan, false, 1.0)
}

/// `sum_s grad(tau_{X_s} phi) . dX_s` with left-endpoint sums.
pub fn stochastic_integral(phi: &HermiteCoeffs, path: &BrownianPath) -> Result<HermiteCoeffs> {
    check_path(phi, path)?;
    let translator = Translator::for_coeffs(phi)?;
    let mut acc = HermiteCoeffs::zeros_on(Arc::clone(phi.basis()));
    for m in 0..path.steps() {
        let dx = path.increment(m);
        if dx.iter().all(|&v| v == 0.0) {
            continue;
        }
        let y = translator.apply(phi, &path.positions[m])?;
        for (i, &dxi) in dx.iter().enumerate() {
            acc = &acc + &(&apply_derivative(&y, i)? * dxi);
        }
    }
    Ok(acc)
}

/// Martingale property and Ito isometry of the stochastic-integral term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub p: SobolevOrder,
    pub t: f64,
    #[serde(rename = "M")]
    pub samples: usize,
    pub steps: usize,
    /// `||mean I||_{p-1}`.
    pub mean_norm: f64,
    /// Triangle-inequality aggregate of the coefficient standard errors.
    pub aggregate_se: f64,
    pub mean_within_3se: bool,
    /// `E ||I||^2_{p-1}`.
    pub second_moment: f64,
    /// `E sum_s sum_i ||d_i tau_{X_s} phi||^2_{p-1} h`.
    pub isometry_rhs: f64,
    pub isometry_ratio: f64,
    pub isometry_tolerance: f64,
    pub passed: bool,
    pub config: ScanEcho,
}

pub const ISOMETRY_TOLERANCE: f64 = 0.2;

/// Monte Carlo over `samples` paths of `steps` steps on `[0, t]`.
pub fn martingale_check(
    phi: &HermiteCoeffs,
    t: f64,
    samples: usize,
    steps: usize,
    seed: u64,
    p: impl Into<SobolevOrder>,
) -> Result<MartingaleReport> {
    let p = p.into();
    check_margin(phi)?;
    let q = p.value() - 1.0;
    let echo = ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: Some(seed) };
    if t == 0.0 {
        return Ok(MartingaleReport {
            p,
            t,
            samples,
            steps,
            mean_norm: 0.0,
            aggregate_se: 0.0,
            mean_within_3se: true,
            second_moment: 0.0,
            isometry_rhs: 0.0,
            isometry_ratio: 1.0,
            isometry_tolerance: ISOMETRY_TOLERANCE,
            passed: true,
            config: echo,
        });
    }
    if samples < 2 || t < 0.0 || steps == 0 {
        return Err(Error::InvalidArgument("need t > 0, two samples and one step".into()));
    }
    let translator = Translator::for_coeffs(phi)?;
    let len = phi.len();
    let fill = |i: u64, buf: &mut Vec<Complex64>| {
        let path = sample_brownian_stream(phi.dim(), t, steps, seed, i, None).expect("validated arguments");
        let mut integral = HermiteCoeffs::zeros_on(Arc::clone(phi.basis()));
        let mut energy = 0.0;
        for m in 0..path.steps() {
            let dx = path.increment(m);
            let h = path.times[m + 1] - path.times[m];
            let y = translator.apply(phi, &path.positions[m]).expect("matching basis");
            for (axis, &dxi) in dx.iter().enumerate() {
                let dy = apply_derivative(&y, axis).expect("axis in range");
                energy += sobolev_norm(&dy, q).powi(2) * h;
                integral = &integral + &(&dy * dxi);
            }
        }
        buf.clear();
        buf.extend_from_slice(integral.coeffs());
        buf.push(Complex64::new(sobolev_norm(&integral, q).powi(2), 0.0));
        buf.push(Complex64::new(energy, 0.0));
    };
    let moments = chunked_moments(samples, len + 2, fill);
    let se = moments.std_errors();
    let mean = HermiteCoeffs::from_vec(Arc::clone(phi.basis()), moments.mean[..len].to_vec())?;
    let basis = phi.basis();
    let aggregate_se: f64 = (0..len).map(|pos| basis.eigenvalue(pos).powf(q) * se[pos]).sum();
    let mean_norm = sobolev_norm(&mean, q);
    let second_moment = moments.mean[len].re;
    let isometry_rhs = moments.mean[len + 1].re;
    let isometry_ratio = second_moment / isometry_rhs;
    let mean_within_3se = mean_norm <= 3.0 * aggregate_se;
    Ok(MartingaleReport {
        p,
        t,
        samples,
        steps,
        mean_norm,
        aggregate_se,
        mean_within_3se,
        second_moment,
        isometry_rhs,
        isometry_ratio,
        isometry_tolerance: ISOMETRY_TOLERANCE,
        passed: mean_within_3se && (isometry_ratio - 1.0).abs() <= ISOMETRY_TOLERANCE,
        config: echo,
    })
}

/// Solution check for `dY = 1/2 Delta Y dt + grad Y . dX`, `Y_0 = phi`.
///
/// Since `tau_{X_t} phi` carries `- grad . dX` in its Ito formula, the
/// solution with a `+` drive is `Y_t = tau_{-X_t} phi`. The opposite-sign
/// candidate is evaluated too and reported for contrast.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeReport {
    /// `phi` is taken in `S'_p = S_{-p}`.
    pub p: f64,
    pub horizon: f64,
    pub residual: Option<ItoConvergenceReport>,
    /// Finest-level RMS residual of `tau_{X_t} phi` in the same equation.
    pub opposite_sign_terminal: Option<f64>,
    /// Time-averaged `E ||tau_{X_t} phi||^2_{-p}` at `M` and `4M` samples.
    pub energy: Vec<EnergyEstimate>,
    pub energy_relative_change: f64,
    pub energy_tolerance: f64,
    pub passed: bool,
    pub config: ScanEcho,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    #[serde(rename = "M")]
    pub samples: usize,
    pub value: f64,
    pub std_error: f64,
}

pub const ENERGY_TOLERANCE: f64 = 0.05;

/// `(1/T) int_0^T E ||tau_{X_t} phi||^2_{-p} dt` from draws `t ~ U(0, T)`,
/// `X_t ~ N(0, t I)`.
pub fn time_averaged_energy(phi: &HermiteCoeffs, p: f64, horizon: f64, samples: usize, seed: u64) -> Result<EnergyEstimate> {
    let translator = Translator::for_coeffs(phi)?;
    let moments = chunked_moments(samples, 1, |i, buf| {
        let mut rng = stream_rng(seed, i);
        let t = horizon * rng.random::<f64>();
        let x = gaussian_vector(&mut rng, phi.dim(), t.sqrt());
        let y = translator.apply(phi, &x).expect("matching basis");
        buf.clear();
        buf.push(Complex64::new(sobolev_norm(&y, -p).powi(2), 0.0));
    });
    Ok(EnergyEstimate { samples, value: moments.mean[0].re, std_error: moments.std_errors()[0] })
}

pub fn sde_solution_check(phi: &HermiteCoeffs, p: f64, scan: &ItoScanConfig, energy_samples: usize) -> Result<SdeReport> {
    let echo = ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: Some(scan.seed) };
    if scan.horizon == 0.0 {
        let e = sobolev_norm(phi, -p).powi(2);
        return Ok(SdeReport {
            p,
            horizon: 0.0,
            residual: None,
            opposite_sign_terminal: None,
            energy: vec![EnergyEstimate { samples: energy_samples, value: e, std_error: 0.0 }],
            energy_relative_change: 0.0,
            energy_tolerance: ENERGY_TOLERANCE,
            passed: true,
            config: echo,
        });
    }
    let order = SobolevOrder::new(-p)?;
    // residual of tau_{-X} phi in the +grad equation equals the Ito residual along -X
    let residual = convergence(phi, order, scan, true, 1.0)?;
    let opposite = convergence(phi, order, &ItoScanConfig { halvings: 0, ..scan.clone() }, false, -1.0)?;
    let energy = vec![
        time_averaged_energy(phi, p, scan.horizon, energy_samples, scan.seed)?,
        time_averaged_energy(phi, p, scan.horizon, 4 * energy_samples, scan.seed)?,
    ];
    let energy_relative_change = (energy[0].value - energy[1].value).abs() / energy[1].value;
    let finite = energy.iter().all(|e| e.value.is_finite());
    Ok(SdeReport {
        p,
        horizon: scan.horizon,
        opposite_sign_terminal: Some(opposite.rows[0].terminal_residual),
        passed: residual.passed && finite && energy_relative_change <= ENERGY_TOLERANCE,
        residual: Some(residual),
        energy,
        energy_relative_change,
        energy_tolerance: ENERGY_TOLERANCE,
        config: echo,
    })
}
