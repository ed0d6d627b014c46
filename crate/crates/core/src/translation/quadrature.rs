use crate::basis::{analysis_matrix, eval_matrix, QuadGrid};
use crate::error::{Error, Result};
use crate::sobolev::HermiteCoeffs;
use crate::tensor::contract_all;

/// `c'_k = int phi(y - x) h_k(y) dy` by Gauss-Hermite quadrature.
///
/// Along each axis the grid is centred at `x_j / 2`, where
/// `phi(y - x) h_k(y) e^{|y - x/2|^2}` is a polynomial, so the rule is exact
/// once it has `N + 1` nodes. The result is the `L^2` projection of the
/// shifted partial sum, independent of the truncated generator.
pub fn translate_quadrature(phi: &HermiteCoeffs, shift: &[f64], nodes_per_dim: usize) -> Result<HermiteCoeffs> {
    if shift.len() != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: shift.len() });
    }
    let n = phi.degree();
    if nodes_per_dim < n + 1 {
        return Err(Error::QuadratureTooSmall { required: n + 1, found: nodes_per_dim });
    }
    let grid = QuadGrid::new(nodes_per_dim, 1)?;
    let q = grid.size();
    let matrices: Vec<Vec<f64>> = shift
        .iter()
        .map(|&x| {
            let half = 0.5 * x;
            let target: Vec<f64> = grid.nodes().iter().map(|y| y + half).collect();
            let source: Vec<f64> = grid.nodes().iter().map(|y| y - half).collect();
            // (N+1) x Q times Q x (N+1)
            let analysis = analysis_matrix(&target, grid.weights(), n);
            let eval = eval_matrix(&source, n);
            let mut m = vec![0.0; (n + 1) * (n + 1)];
            for k in 0..=n {
                for l in 0..=n {
                    m[k * (n + 1) + l] = (0..q).map(|i| analysis[k * q + i] * eval[i * (n + 1) + l]).sum();
                }
            }
            m
        })
        .collect();
    let mats: Vec<(&[f64], usize)> = matrices.iter().map(|m| (m.as_slice(), n + 1)).collect();
    let mut shape = vec![n + 1; phi.dim()];
    let dense = contract_all(phi.to_box(), &mut shape, &mats);
    Ok(phi.from_box(&dense))
}
