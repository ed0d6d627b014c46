use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{IndexSet, MultiIndex};
use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Imaginary parts below this are treated as rounding noise.
pub const REAL_TOLERANCE: f64 = 1e-12;

/// A truncated Hermite expansion `sum_{|k| <= N} c_k h_k` standing in for a
/// tempered distribution.
///
/// Coefficients follow the graded order of [`IndexSet`]. Two flags ride along
/// as metadata: `real_valued` asserts every imaginary part is below
/// [`REAL_TOLERANCE`], and `shell_touched` records that some operator pushed
/// non-zero mass past degree `N` and it was dropped.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(into = "super::io::CoeffFile", try_from = "super::io::CoeffFile")]
pub struct HermiteCoeffs {
    basis: Arc<IndexSet>,
    coeffs: Vec<Complex64>,
    real_valued: bool,
    shell_touched: bool,
}

impl PartialEq for HermiteCoeffs {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.degree() == other.degree() && self.coeffs == other.coeffs
    }
}

impl HermiteCoeffs {
    pub fn zeros(dim: usize, degree: usize) -> Result<Self> {
        Ok(Self::zeros_on(Arc::new(IndexSet::new(dim, degree)?)))
    }

    pub fn zeros_on(basis: Arc<IndexSet>) -> Self {
        let coeffs = vec![ZERO; basis.len()];
        Self { basis, coeffs, real_valued: true, shell_touched: false }
    }

    /// The unit vector `e_k`, i.e. the coefficients of `h_k`.
    pub fn basis_vector(dim: usize, degree: usize, k: &MultiIndex) -> Result<Self> {
        let mut out = Self::zeros(dim, degree)?;
        let pos = out.position_of(k)?;
        out.coeffs[pos] = Complex64::new(1.0, 0.0);
        Ok(out)
    }

    pub fn from_vec(basis: Arc<IndexSet>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Length { expected: basis.len(), found: coeffs.len() });
        }
        if let Some(bad) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient at position {bad}")));
        }
        let mut out = Self { basis, coeffs, real_valued: false, shell_touched: false };
        out.refresh_real_flag();
        Ok(out)
    }

    pub fn from_real(basis: Arc<IndexSet>, coeffs: &[f64]) -> Result<Self> {
        Self::from_vec(basis, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Same basis, new coefficients. Flags are recomputed, except that the
    /// shell flag is carried.
    pub(crate) fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        let mut out = Self {
            basis: Arc::clone(&self.basis),
            coeffs,
            real_valued: false,
            shell_touched: self.shell_touched,
        };
        out.refresh_real_flag();
        out
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Truncation degree `N`.
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn basis(&self) -> &Arc<IndexSet> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn shell_touched(&self) -> bool {
        self.shell_touched
    }

    pub(crate) fn mark_shell_touched(&mut self) {
        self.shell_touched = true;
    }

    /// Clears the shell flag, e.g. after the caller has accounted for it.
    pub fn clear_shell_flag(&mut self) {
        self.shell_touched = false;
    }

    pub fn position_of(&self, k: &MultiIndex) -> Result<usize> {
        if k.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: k.dim() });
        }
        self.basis.position(k).ok_or_else(|| {
            Error::InvalidArgument(format!("index {k} exceeds truncation degree {}", self.degree()))
        })
    }

    pub fn get(&self, k: &MultiIndex) -> Result<Complex64> {
        Ok(self.coeffs[self.position_of(k)?])
    }

    pub fn set(&mut self, k: &MultiIndex, value: Complex64) -> Result<()> {
        let pos = self.position_of(k)?;
        self.coeffs[pos] = value;
        self.refresh_real_flag();
        Ok(())
    }

    /// Iterates `(k, c_k)` in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, Complex64)> + '_ {
        self.basis.indices().iter().zip(self.coeffs.iter().copied())
    }

    /// Largest `|k|` carrying a non-zero coefficient, `None` for the zero vector.
    pub fn content_degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(pos, _)| self.basis.degree_at(pos))
            .max()
    }

    /// Maximum absolute imaginary part.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    fn refresh_real_flag(&mut self) {
        self.real_valued = self.max_imag() <= REAL_TOLERANCE;
    }

    /// Re-expresses the vector on truncation `degree`, zero-padding or
    /// dropping the shells above it. Dropping non-zero mass sets the shell flag.
    pub fn retruncate(&self, degree: usize) -> Result<Self> {
        let basis = Arc::new(IndexSet::new(self.dim(), degree)?);
        let n = basis.len().min(self.len());
        let mut coeffs = vec![ZERO; basis.len()];
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        let dropped = self.coeffs[n..].iter().any(|c| c.norm_sqr() > 0.0);
        let mut out = Self { basis, coeffs, real_valued: false, shell_touched: self.shell_touched || dropped };
        out.refresh_real_flag();
        Ok(out)
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if self.degree() != other.degree() {
            return Err(Error::InvalidArgument(format!(
                "truncation mismatch: N = {} vs N = {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(())
    }

    /// Linear combination `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        let mut out = self.with_coeffs(coeffs);
        out.shell_touched = self.shell_touched || other.shell_touched;
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Dense embedding into the box `[0, N]^d` (row-major, side `N + 1`).
    pub(crate) fn to_box(&self) -> Vec<Complex64> {
        let side = self.degree() + 1;
        let mut dense = vec![ZERO; side.pow(self.dim() as u32)];
        for (offset, c) in self.basis.box_offsets(side).into_iter().zip(&self.coeffs) {
            dense[offset] = *c;
        }
        dense
    }

    /// Restriction of a box array back to `|k| <= N`.
    pub(crate) fn from_box(&self, dense: &[Complex64]) -> Self {
        let side = self.degree() + 1;
        let coeffs = self.basis.box_offsets(side).into_iter().map(|o| dense[o]).collect();
        self.with_coeffs(coeffs)
    }
}

impl Add for &HermiteCoeffs {
    type Output = HermiteCoeffs;

    fn add(self, rhs: Self) -> HermiteCoeffs {
        self.combine(Complex64::new(1.0, 0.0), rhs, Complex64::new(1.0, 0.0))
            .expect("adding incompatible coefficient vectors")
    }
}

impl Sub for &HermiteCoeffs {
    type Output = HermiteCoeffs;

    fn sub(self, rhs: Self) -> HermiteCoeffs {
        self.combine(Complex64::new(1.0, 0.0), rhs, Complex64::new(-1.0, 0.0))
            .expect("subtracting incompatible coefficient vectors")
    }
}

impl Neg for &HermiteCoeffs {
    type Output = HermiteCoeffs;

    fn neg(self) -> HermiteCoeffs {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &HermiteCoeffs {
    type Output = HermiteCoeffs;

    fn mul(self, rhs: f64) -> HermiteCoeffs {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Mul<Complex64> for &HermiteCoeffs {
    type Output = HermiteCoeffs;

    fn mul(self, rhs: Complex64) -> HermiteCoeffs {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_checked() {
        let basis = Arc::new(IndexSet::new(2, 3).unwrap());
        let err = HermiteCoeffs::from_real(basis, &[1.0; 9]).unwrap_err();
        assert!(matches!(err, Error::Length { expected: 10, found: 9 }));
    }

    #[test]
    fn real_flag_tracks_imaginary_parts() {
        let basis = Arc::new(IndexSet::new(1, 2).unwrap());
        let mut v = HermiteCoeffs::from_real(basis, &[1.0, 0.0, 2.0]).unwrap();
        assert!(v.is_real_valued());
        v.set(&MultiIndex::axis(1, 0, 1), Complex64::new(0.0, 1e-13)).unwrap();
        assert!(v.is_real_valued());
        v.set(&MultiIndex::axis(1, 0, 1), Complex64::new(0.0, 1e-9)).unwrap();
        assert!(!v.is_real_valued());
    }

    #[test]
    fn retruncation_pads_and_flags() {
        let e3 = HermiteCoeffs::basis_vector(1, 3, &MultiIndex::axis(1, 0, 3)).unwrap();
        let wide = e3.retruncate(6).unwrap();
        assert_eq!(wide.len(), 7);
        assert!(!wide.shell_touched());
        let narrow = e3.retruncate(2).unwrap();
        assert!(narrow.shell_touched());
        assert!(narrow.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn box_round_trip() {
        let basis = Arc::new(IndexSet::new(2, 4).unwrap());
        let vals: Vec<f64> = (0..basis.len()).map(|i| i as f64 + 1.0).collect();
        let v = HermiteCoeffs::from_real(basis, &vals).unwrap();
        assert_eq!(v.from_box(&v.to_box()), v);
    }
}
