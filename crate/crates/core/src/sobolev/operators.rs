use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{axis_tables, IndexSet};
use crate::error::{Error, Result};

use super::coeffs::{HermiteCoeffs, ZERO};

/// Order `p` of the Hermite-Sobolev norm `||.||_p`. Negative orders are the
/// distribution side, `S'_p = S_{-p}`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SobolevOrder(f64);

impl SobolevOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidArgument(format!("Sobolev order must be finite, got {p}")));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The degree `2([|p|] + 1)` of the polynomial translation bound.
    pub fn translation_degree(self) -> u32 {
        2 * (self.0.abs().floor() as u32 + 1)
    }
}

impl From<f64> for SobolevOrder {
    fn from(p: f64) -> Self {
        debug_assert!(p.is_finite());
        Self(p)
    }
}

impl fmt::Display for SobolevOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis-wise direction of the Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

fn weight(basis: &IndexSet, pos: usize, p: f64) -> f64 {
    basis.eigenvalue(pos).powf(p)
}

/// `||phi||_p = sqrt(sum_k (2|k| + d)^{2p} |c_k|^2)`.
pub fn sobolev_norm(phi: &HermiteCoeffs, p: impl Into<SobolevOrder>) -> f64 {
    let p = p.into().0;
    let basis = phi.basis();
    phi.coeffs()
        .iter()
        .enumerate()
        .map(|(pos, c)| weight(basis, pos, 2.0 * p) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `<phi, psi>_p = sum_k (2|k| + d)^{2p} c_k conj(d_k)`.
pub fn sobolev_inner(phi: &HermiteCoeffs, psi: &HermiteCoeffs, p: impl Into<SobolevOrder>) -> Result<Complex64> {
    phi.check_compatible(psi)?;
    let p = p.into().0;
    let basis = phi.basis();
    Ok(phi
        .coeffs()
        .iter()
        .zip(psi.coeffs())
        .enumerate()
        .map(|(pos, (a, b))| a * b.conj() * weight(basis, pos, 2.0 * p))
        .sum())
}

/// `H^p`: `c_k -> (2|k| + d)^p c_k`. An isometry `S_q -> S_{q-p}`.
pub fn apply_hp(phi: &HermiteCoeffs, p: f64) -> HermiteCoeffs {
    let basis = phi.basis();
    phi.with_coeffs(phi.coeffs().iter().enumerate().map(|(pos, c)| c * weight(basis, pos, p)).collect())
}

/// `H^z` for complex `z`; purely imaginary `z` preserves `||.||_0`.
pub fn apply_complex_power(phi: &HermiteCoeffs, z: Complex64) -> HermiteCoeffs {
    let basis = phi.basis();
    phi.with_coeffs(
        phi.coeffs()
            .iter()
            .enumerate()
            .map(|(pos, c)| c * (z * basis.eigenvalue(pos).ln()).exp())
            .collect(),
    )
}

fn check_axis(phi: &HermiteCoeffs, axis: usize) -> Result<()> {
    if axis >= phi.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: phi.dim() });
    }
    Ok(())
}

/// `a * A_axis phi + b * A_axis^+ phi` in one pass, with
/// `A^+ h_k = sqrt(2(k_j + 1)) h_{k + e_j}` and `A h_k = sqrt(2 k_j) h_{k - e_j}`.
/// Mass pushed past degree `N` is dropped and flagged.
fn ladder_combination(phi: &HermiteCoeffs, axis: usize, lower: f64, raise: f64) -> HermiteCoeffs {
    let basis = phi.basis();
    let mut out = vec![ZERO; phi.len()];
    let mut dropped = false;
    for (pos, &c) in phi.coeffs().iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let kj = basis.get(pos).entries()[axis] as f64;
        if lower != 0.0 {
            if let Some(down) = basis.lowered(axis, pos) {
                out[down] += c * (lower * (2.0 * kj).sqrt());
            }
        }
        if raise != 0.0 {
            match basis.raised(axis, pos) {
                Some(up) => out[up] += c * (raise * (2.0 * (kj + 1.0)).sqrt()),
                None => dropped = true,
            }
        }
    }
    let mut result = phi.with_coeffs(out);
    if dropped {
        result.mark_shell_touched();
    }
    result
}

/// Creation operator `A_j^+ = x_j - d/dx_j` (axes are zero-based).
pub fn apply_raise(phi: &HermiteCoeffs, axis: usize) -> Result<HermiteCoeffs> {
    check_axis(phi, axis)?;
    Ok(ladder_combination(phi, axis, 0.0, 1.0))
}

/// Annihilation operator `A_j = x_j + d/dx_j`.
pub fn apply_lower(phi: &HermiteCoeffs, axis: usize) -> Result<HermiteCoeffs> {
    check_axis(phi, axis)?;
    Ok(ladder_combination(phi, axis, 1.0, 0.0))
}

/// `d/dx_j = (A_j - A_j^+) / 2`.
pub fn apply_derivative(phi: &HermiteCoeffs, axis: usize) -> Result<HermiteCoeffs> {
    check_axis(phi, axis)?;
    Ok(ladder_combination(phi, axis, 0.5, -0.5))
}

/// Multiplication by `x_j = (A_j + A_j^+) / 2`.
pub fn apply_position(phi: &HermiteCoeffs, axis: usize) -> Result<HermiteCoeffs> {
    check_axis(phi, axis)?;
    Ok(ladder_combination(phi, axis, 0.5, 0.5))
}

/// `d^2 / dx_i dx_j`.
pub fn apply_second_derivative(phi: &HermiteCoeffs, i: usize, j: usize) -> Result<HermiteCoeffs> {
    apply_derivative(&apply_derivative(phi, j)?, i)
}

/// `Delta = sum_j d^2/dx_j^2`.
pub fn apply_laplacian(phi: &HermiteCoeffs) -> HermiteCoeffs {
    let mut acc = HermiteCoeffs::zeros_on(phi.basis().clone());
    for axis in 0..phi.dim() {
        let d1 = ladder_combination(phi, axis, 0.5, -0.5);
        let d2 = ladder_combination(&d1, axis, 0.5, -0.5);
        let touched = d2.shell_touched();
        acc = &acc + &d2;
        if touched {
            acc.mark_shell_touched();
        }
    }
    acc
}

/// Unitary Fourier transform, diagonal in the Hermite basis:
/// `F h_k = (-i)^{|k|} h_k`.
pub fn fourier(phi: &HermiteCoeffs, direction: Direction) -> HermiteCoeffs {
    let unit = match direction {
        Direction::Forward => Complex64::new(0.0, -1.0),
        Direction::Inverse => Complex64::new(0.0, 1.0),
    };
    let basis = phi.basis();
    phi.with_coeffs(
        phi.coeffs()
            .iter()
            .enumerate()
            .map(|(pos, c)| c * unit.powu((basis.degree_at(pos) % 4) as u32))
            .collect(),
    )
}

/// Coefficients of the Dirac mass at `x`: `c_k = <delta_x, h_k> = h_k(x)`.
pub fn delta_coeffs(x: &[f64], dim: usize, degree: usize) -> Result<HermiteCoeffs> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("delta location must be finite".into()));
    }
    let mut out = HermiteCoeffs::zeros(dim, degree)?;
    let tables = axis_tables(degree, x);
    let values = out
        .iter()
        .map(|(k, _)| {
            let v: f64 = k.entries().iter().enumerate().map(|(j, &kj)| tables[j][kj]).product();
            Complex64::new(v, 0.0)
        })
        .collect::<Vec<_>>();
    out.coeffs_mut().copy_from_slice(&values);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{MultiIndex, H0_AT_ZERO};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn e(dim: usize, n: usize, k: &[usize]) -> HermiteCoeffs {
        HermiteCoeffs::basis_vector(dim, n, &MultiIndex::from(k)).unwrap()
    }

    fn assert_close(a: &HermiteCoeffs, b: &HermiteCoeffs, tol: f64) {
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn norm_of_basis_vector() {
        let v = e(2, 6, &[2, 1]);
        for p in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            assert_abs_diff_eq!(sobolev_norm(&v, p), 8f64.powf(p), epsilon = 1e-12 * 8f64.powf(p));
        }
        assert_eq!(sobolev_norm(&HermiteCoeffs::zeros(1, 4).unwrap(), 1.0), 0.0);
    }

    #[test]
    fn zero_order_is_euclidean() {
        let basis = e(1, 3, &[0]).basis().clone();
        let v = HermiteCoeffs::from_real(basis, &[3.0, 0.0, 4.0, 0.0]).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&v, 0.0), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn hp_eigenvalues() {
        let v = e(2, 5, &[1, 2]);
        assert_close(&apply_hp(&v, 1.0), &(&v * 8.0), 1e-14);
        assert_close(&apply_hp(&v, 0.0), &v, 0.0);
    }

    #[test]
    fn complex_power_identity() {
        let v = e(1, 5, &[3]);
        assert_close(&apply_complex_power(&v, Complex64::new(0.0, 0.0)), &v, 0.0);
    }

    #[test]
    fn ladder_on_ground_state() {
        let e0 = e(2, 4, &[0, 0]);
        let up = apply_raise(&e0, 0).unwrap();
        assert_close(&up, &(&e(2, 4, &[1, 0]) * SQRT_2), 1e-15);
        assert!(apply_lower(&e0, 0).unwrap().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn derivative_and_position_of_ground_state() {
        let e0 = e(1, 4, &[0]);
        assert_close(&apply_derivative(&e0, 0).unwrap(), &(&e(1, 4, &[1]) * (-1.0 / SQRT_2)), 1e-15);
        assert_close(&apply_position(&e0, 0).unwrap(), &(&e(1, 4, &[1]) * (1.0 / SQRT_2)), 1e-15);
    }

    #[test]
    fn commutator_is_twice_identity() {
        for k in 0..6 {
            let v = e(1, 10, &[k]);
            let ab = apply_lower(&apply_raise(&v, 0).unwrap(), 0).unwrap();
            let ba = apply_raise(&apply_lower(&v, 0).unwrap(), 0).unwrap();
            assert_close(&(&ab - &ba), &(&v * 2.0), 1e-13);
        }
    }

    #[test]
    fn oscillator_from_position_and_derivative() {
        // H = |x|^2 - Delta away from the two outer shells.
        let n = 8;
        for k in [[0, 0], [1, 2], [3, 1], [2, 4]] {
            let v = e(2, n, &k);
            let mut h = HermiteCoeffs::zeros(2, n).unwrap();
            for axis in 0..2 {
                let xx = apply_position(&apply_position(&v, axis).unwrap(), axis).unwrap();
                let dd = apply_derivative(&apply_derivative(&v, axis).unwrap(), axis).unwrap();
                h = &h + &(&xx - &dd);
            }
            let lambda = (2 * (k[0] + k[1]) + 2) as f64;
            assert_close(&h, &(&v * lambda), 1e-13);
        }
    }

    #[test]
    fn raise_at_shell_is_flagged() {
        let v = e(1, 3, &[3]);
        let up = apply_raise(&v, 0).unwrap();
        assert!(up.shell_touched());
        assert!(up.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(!apply_lower(&v, 0).unwrap().shell_touched());
    }

    #[test]
    fn axis_checked() {
        let v = e(2, 3, &[0, 0]);
        assert!(matches!(apply_raise(&v, 2), Err(Error::AxisOutOfRange { axis: 2, dim: 2 })));
    }

    #[test]
    fn fourier_basics() {
        let e1 = e(1, 4, &[1]);
        let f = fourier(&e1, Direction::Forward);
        assert_eq!(f.coeffs()[1], Complex64::new(0.0, -1.0));
        let basis = e1.basis().clone();
        let v = HermiteCoeffs::from_real(basis, &[1.0, -2.0, 0.5, 3.0, 0.25]).unwrap();
        let mut w = v.clone();
        for _ in 0..4 {
            w = fourier(&w, Direction::Forward);
        }
        assert_close(&w, &v, 0.0);
        assert_close(&fourier(&fourier(&v, Direction::Forward), Direction::Inverse), &v, 0.0);
    }

    #[test]
    fn delta_at_origin() {
        let d = delta_coeffs(&[0.0], 1, 12).unwrap();
        assert_abs_diff_eq!(d.coeffs()[0].re, H0_AT_ZERO, epsilon = 1e-16);
        for k in (1..=12).step_by(2) {
            assert_eq!(d.coeffs()[k].re, 0.0);
        }
        assert!(delta_coeffs(&[0.0, 1.0], 1, 4).is_err());
    }

    #[test]
    fn translation_degree_formula() {
        assert_eq!(SobolevOrder::from(0.0).translation_degree(), 2);
        assert_eq!(SobolevOrder::from(1.0).translation_degree(), 4);
        assert_eq!(SobolevOrder::from(-2.0).translation_degree(), 6);
        assert_eq!(SobolevOrder::from(1.5).translation_degree(), 4);
    }
}
