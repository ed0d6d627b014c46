use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sobolev::HermiteCoeffs;
use crate::tensor::contract_all;

use super::eval::{axis_tables, hermite_functions_into};
use super::{projection_nodes, IndexSet, QuadGrid};

/// Row-major `nodes.len() x (n + 1)` matrix of `h_l(y_i)`.
pub(crate) fn eval_matrix(nodes: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len() * (n + 1)];
    for (row, &y) in out.chunks_mut(n + 1).zip(nodes) {
        hermite_functions_into(y, row);
    }
    out
}

/// Row-major `(n + 1) x nodes.len()` matrix of `W_i h_l(y_i)`.
pub(crate) fn analysis_matrix(nodes: &[f64], weights: &[f64], n: usize) -> Vec<f64> {
    let q = nodes.len();
    let eval = eval_matrix(nodes, n);
    let mut out = vec![0.0; (n + 1) * q];
    for i in 0..q {
        for l in 0..=n {
            out[l * q + i] = weights[i] * eval[i * (n + 1) + l];
        }
    }
    out
}

/// Values of `sum_k c_k h_k` on every tensor node of `grid`, row-major.
pub fn synthesize_on_grid(phi: &HermiteCoeffs, grid: &QuadGrid) -> Result<Vec<Complex64>> {
    if grid.dim() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: grid.dim() });
    }
    let n = phi.degree();
    let eval = eval_matrix(grid.nodes(), n);
    let mut shape = vec![n + 1; phi.dim()];
    let mats = vec![(eval.as_slice(), grid.size()); phi.dim()];
    Ok(contract_all(phi.to_box(), &mut shape, &mats))
}

/// Projects tensor-grid values (row-major, as produced by
/// [`synthesize_on_grid`]) onto `basis`.
pub fn project_grid_values(values: Vec<Complex64>, grid: &QuadGrid, basis: Arc<IndexSet>) -> Result<HermiteCoeffs> {
    if grid.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: grid.dim() });
    }
    if values.len() != grid.total_points() {
        return Err(Error::Length { expected: grid.total_points(), found: values.len() });
    }
    let n = basis.degree();
    let analysis = analysis_matrix(grid.nodes(), grid.weights(), n);
    let mut shape = vec![grid.size(); grid.dim()];
    let mats = vec![(analysis.as_slice(), n + 1); grid.dim()];
    let dense = contract_all(values, &mut shape, &mats);
    Ok(HermiteCoeffs::zeros_on(basis).from_box(&dense))
}

/// `c_k = <f, h_k>` for all `|k| <= degree`, by tensor Gauss-Hermite quadrature
/// with `nodes_per_dim` nodes per axis.
///
/// Requires `nodes_per_dim >= 2 * degree + 16`.
pub fn project_function<F, T>(f: F, dim: usize, degree: usize, nodes_per_dim: usize) -> Result<HermiteCoeffs>
where
    F: Fn(&[f64]) -> T,
    T: Into<Complex64>,
{
    let required = projection_nodes(degree);
    if nodes_per_dim < required {
        return Err(Error::QuadratureTooSmall { required, found: nodes_per_dim });
    }
    let basis = Arc::new(IndexSet::new(dim, degree)?);
    let grid = QuadGrid::new(nodes_per_dim, dim)?;
    let mut point = vec![0.0; dim];
    let mut values = Vec::with_capacity(grid.total_points());
    for flat in 0..grid.total_points() {
        grid.point(flat, &mut point);
        let v: Complex64 = f(&point).into();
        if !v.is_finite() {
            return Err(Error::NonFinite(point));
        }
        values.push(v);
    }
    project_grid_values(values, &grid, basis)
}

/// Partial sum `sum_{|k| <= N} c_k h_k(x)`.
pub fn synthesize(phi: &HermiteCoeffs, x: &[f64]) -> Result<Complex64> {
    if x.len() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: x.len() });
    }
    let tables = axis_tables(phi.degree(), x);
    Ok(phi
        .iter()
        .map(|(k, c)| {
            let h: f64 = k.entries().iter().enumerate().map(|(j, &kj)| tables[j][kj]).product();
            c * h
        })
        .sum())
}
