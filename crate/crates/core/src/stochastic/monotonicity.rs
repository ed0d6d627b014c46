use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{IndexSet, MultiIndex};
use crate::error::{Error, Result};
use crate::sobolev::{apply_derivative, apply_laplacian, margin_ensemble, sobolev_inner, sobolev_norm, HermiteCoeffs};
use crate::translation::ScanEcho;

/// Default ensemble size.
pub const MONOTONICITY_DRAWS: usize = 50;

fn check_order(p: f64) -> Result<()> {
    if !(p < 0.0) {
        return Err(Error::InvalidArgument(format!("the monotonicity scan needs p < 0, got {p}")));
    }
    Ok(())
}

/// `(2 <Delta phi / 2, phi>_{p-1} + sum_i ||d_i phi||^2_{p-1}) / ||phi||^2_{p-1}`.
pub fn monotonicity_ratio(phi: &HermiteCoeffs, p: f64) -> Result<f64> {
    let content = phi.content_degree().ok_or(Error::ZeroNorm)?;
    if phi.degree() < content + 2 {
        return Err(Error::Margin { required: content + 2, available: phi.degree() });
    }
    let q = p - 1.0;
    let mut numerator = sobolev_inner(&apply_laplacian(phi), phi, q)?.re;
    for axis in 0..phi.dim() {
        numerator += sobolev_norm(&apply_derivative(phi, axis)?, q).powi(2);
    }
    Ok(numerator / sobolev_norm(phi, q).powi(2))
}

/// Supremum of [`monotonicity_ratio`] over every `phi` with content on
/// `|k| <= N/2`: the top eigenvalue of `W^{-1/2} S W^{-1/2}`, where `S` is the
/// symmetric form of the numerator and `W` the diagonal `||.||_{p-1}` weights.
pub fn monotonicity_supremum(dim: usize, degree: usize, p: f64) -> Result<f64> {
    check_order(p)?;
    let basis = std::sync::Arc::new(IndexSet::new(dim, degree)?);
    let content = (0..basis.len()).take_while(|&pos| basis.degree_at(pos) <= degree / 2).count();
    let q = p - 1.0;
    let weight = |pos: usize| basis.eigenvalue(pos).powf(2.0 * q);
    let columns: Vec<(HermiteCoeffs, Vec<HermiteCoeffs>)> = (0..content)
        .map(|a| {
            let e = HermiteCoeffs::basis_vector(dim, degree, basis.get(a))?;
            let grads = (0..dim).map(|i| apply_derivative(&e, i)).collect::<Result<Vec<_>>>()?;
            Ok((apply_laplacian(&e), grads))
        })
        .collect::<Result<_>>()?;
    let mut s = DMatrix::<f64>::zeros(content, content);
    for a in 0..content {
        for b in 0..content {
            // <Delta e_a, e_b>_{q}, symmetrized below
            let lap = columns[a].0.coeffs()[b].re * weight(b);
            let mut grad = 0.0;
            for i in 0..dim {
                let (ga, gb) = (columns[a].1[i].coeffs(), columns[b].1[i].coeffs());
                grad += (0..basis.len()).map(|k| ga[k].re * gb[k].re * weight(k)).sum::<f64>();
            }
            s[(a, b)] += 0.5 * lap + grad;
            s[(b, a)] += 0.5 * lap;
        }
    }
    for a in 0..content {
        for b in 0..content {
            s[(a, b)] /= (weight(a) * weight(b)).sqrt();
        }
    }
    Ok(SymmetricEigen::new(s).eigenvalues.max())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub p: f64,
    pub draws: usize,
    pub ensemble_max: f64,
    /// Supremum over the whole margin subspace.
    pub exact_sup: f64,
    /// Ratio at `h_0`.
    pub ground_state: f64,
    pub bounded: bool,
    pub config: ScanEcho,
}

/// Maximum ratio over `draws` Gaussian draws with content on `|k| <= N/2`.
pub fn monotonicity_scan(p: f64, draws: usize, dim: usize, degree: usize, seed: u64) -> Result<MonotonicityReport> {
    check_order(p)?;
    let ensemble = margin_ensemble(dim, degree, draws, seed)?;
    let ratios = ensemble.par_iter().map(|phi| monotonicity_ratio(phi, p)).collect::<Result<Vec<f64>>>()?;
    let ensemble_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exact_sup = monotonicity_supremum(dim, degree, p)?;
    let e0 = HermiteCoeffs::basis_vector(dim, degree, &MultiIndex::zero(dim))?;
    Ok(MonotonicityReport {
        p,
        draws,
        ensemble_max,
        exact_sup,
        ground_state: monotonicity_ratio(&e0, p)?,
        bounded: exact_sup.is_finite() && ensemble_max <= exact_sup * (1.0 + 1e-10),
        config: ScanEcho { d: dim, n: degree, q: None, seed: Some(seed) },
    })
}
