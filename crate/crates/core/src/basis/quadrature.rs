use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::eval::hermite_functions_into;

/// Largest supported node count per dimension. Beyond this the outermost
/// nodes approach the underflow range of `h_0` and the dense Jacobi
/// eigenproblem becomes the dominant cost.
pub const MAX_QUAD_NODES: usize = 512;

/// Tensorized Gauss-Hermite rule.
///
/// `weights` are the Hermite-function weights `W_i = w_i e^{y_i^2}`, so that
/// `sum_i W_i f(y_i) g(y_i)` equals `int f g dy` exactly whenever
/// `f g e^{y^2}` is a polynomial of degree `<= 2Q - 1`. They are computed as
/// `1 / sum_{l<Q} h_l(y_i)^2` and stay finite for every supported `Q`, unlike
/// the classical weights `w_i`, which underflow for `Q` in the hundreds.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadGrid {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadGrid {
    pub fn new(nodes_per_dim: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if nodes_per_dim == 0 || nodes_per_dim > MAX_QUAD_NODES {
            return Err(Error::QuadratureSize(nodes_per_dim));
        }
        let nodes = hermite_nodes(nodes_per_dim);
        let mut table = vec![0.0; nodes_per_dim];
        let weights = nodes
            .iter()
            .map(|&y| {
                hermite_functions_into(y, &mut table);
                1.0 / table.iter().map(|h| h * h).sum::<f64>()
            })
            .collect();
        Ok(Self { dim, nodes, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per dimension.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// 1-D abscissae, strictly increasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// 1-D Hermite-function weights `W_i`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Classical weight `w_i` for integrals against `e^{-y^2}`.
    pub fn gauss_weight(&self, i: usize) -> f64 {
        let y = self.nodes[i];
        self.weights[i] * (-y * y).exp()
    }

    /// Number of tensor nodes, `Q^d`.
    pub fn total_points(&self) -> usize {
        self.size().pow(self.dim as u32)
    }

    /// Writes the tensor node with row-major linear index `flat` into `point`
    /// and returns its tensor weight `prod_j W_{i_j}`.
    pub fn point(&self, mut flat: usize, point: &mut [f64]) -> f64 {
        let q = self.size();
        let mut w = 1.0;
        for j in (0..self.dim).rev() {
            let i = flat % q;
            flat /= q;
            point[j] = self.nodes[i];
            w *= self.weights[i];
        }
        w
    }

    /// `int f(y) dy` over `R^d` for `f` decaying like a Gaussian.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut point = vec![0.0; self.dim];
        (0..self.total_points())
            .map(|flat| {
                let w = self.point(flat, &mut point);
                w * f(&point)
            })
            .sum()
    }

    /// `int f(y) e^{-|y|^2} dy` using the classical weights.
    pub fn integrate_gaussian(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.integrate(|y| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            f(y) * (-r2).exp()
        })
    }
}

/// Builds the tensor rule with `nodes_per_dim` nodes per axis.
pub fn build_quad_grid(nodes_per_dim: usize, dim: usize) -> Result<QuadGrid> {
    QuadGrid::new(nodes_per_dim, dim)
}

/// Minimum node count for projecting onto `|k| <= degree`.
pub fn projection_nodes(degree: usize) -> usize {
    2 * degree + 16
}

// Golub-Welsch eigenvalues, then Newton on h_Q with the recurrence.
fn hermite_nodes(q: usize) -> Vec<f64> {
    if q == 1 {
        return vec![0.0];
    }
    let mut jacobi = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let mut table = vec![0.0; q + 1];
    let scale = (2.0 * q as f64).sqrt();
    for y in nodes.iter_mut() {
        for _ in 0..4 {
            hermite_functions_into(*y, &mut table);
            let value = table[q];
            let slope = scale * table[q - 1] - *y * value;
            if slope == 0.0 {
                break;
            }
            let step = value / slope;
            *y -= step;
            if step.abs() <= 1e-16 * y.abs().max(1.0) {
                break;
            }
        }
    }
    // Exact symmetry about the origin.
    for i in 0..q / 2 {
        let m = 0.5 * (nodes[q - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[q - 1 - i] = m;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval::hermite_functions;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn single_node_rule() {
        let g = build_quad_grid(1, 1).unwrap();
        assert_eq!(g.nodes(), &[0.0]);
        assert_abs_diff_eq!(g.gauss_weight(0), PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_moments() {
        let g = build_quad_grid(20, 1).unwrap();
        assert_abs_diff_eq!(g.integrate_gaussian(|_| 1.0), PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(g.integrate_gaussian(|y| y[0] * y[0]), PI.sqrt() / 2.0, epsilon = 1e-13);
        // int y^{2n} e^{-y^2} = Gamma(n + 1/2)
        let g6 = 15.0 / 8.0 * PI.sqrt();
        assert_abs_diff_eq!(g.integrate_gaussian(|y| y[0].powi(6)), g6, epsilon = 1e-12);
    }

    #[test]
    fn orthonormality_q40() {
        let g = build_quad_grid(40, 1).unwrap();
        let tables: Vec<Vec<f64>> = g.nodes().iter().map(|&y| hermite_functions(30, y)).collect();
        for j in 0..=30 {
            for k in 0..=30 {
                let ip: f64 = tables.iter().zip(g.weights()).map(|(t, w)| w * t[j] * t[k]).sum();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn nodes_and_weights_well_formed() {
        for q in [2, 3, 17, 64, 200, MAX_QUAD_NODES] {
            let g = build_quad_grid(q, 1).unwrap();
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]), "q = {q}");
            assert!(g.weights().iter().all(|&w| w > 0.0 && w.is_finite()), "q = {q}");
            let total: f64 = (0..q).map(|i| g.gauss_weight(i)).sum();
            assert_abs_diff_eq!(total, PI.sqrt(), epsilon = 1e-13);
        }
    }

    #[test]
    fn tensor_rule() {
        let g = build_quad_grid(12, 2).unwrap();
        let v = g.integrate_gaussian(|y| y[0] * y[0] * y[1] * y[1]);
        assert_abs_diff_eq!(v, PI / 4.0, epsilon = 1e-13);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(build_quad_grid(0, 1), Err(Error::QuadratureSize(0))));
        assert!(matches!(build_quad_grid(MAX_QUAD_NODES + 1, 1), Err(Error::QuadratureSize(_))));
        assert!(matches!(build_quad_grid(4, 0), Err(Error::ZeroDimension)));
    }
}
