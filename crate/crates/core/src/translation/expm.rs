use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{eval_matrix, IndexSet, QuadGrid};
use crate::error::{Error, Result};
use crate::sobolev::HermiteCoeffs;

use super::generator::{expm_pade, DerivativeStencil};

/// Shifts up to `0.5 sqrt(2N)` are treated as resolvable at truncation `N`.
pub const ENVELOPE_FACTOR: f64 = 0.5;

pub fn accuracy_envelope(degree: usize) -> f64 {
    ENVELOPE_FACTOR * (2.0 * degree as f64).sqrt()
}

/// `tau_x = exp(-sum_j x_j D_j)` on the truncated space `|k| <= N`.
///
/// In one dimension the truncated derivative is `D = i F^{-1} X F`, where
/// `X` is the truncated position (Jacobi) matrix and `F` the diagonal Fourier
/// phase, so `tau_x = F^{-1} V e^{-i x Lambda} V^T F` with `X = V Lambda V^T`
/// from the `(N+1)`-point Gauss-Hermite rule. In higher dimensions the
/// exponential is applied by scaled Taylor steps on the sparse generator.
#[derive(Clone, Debug)]
pub struct Translator {
    basis: Arc<IndexSet>,
    stencil: DerivativeStencil,
    spectral: Option<Spectral1d>,
}

#[derive(Clone, Debug)]
struct Spectral1d {
    nodes: Vec<f64>,
    // row-major (N+1) x (N+1): vectors[k * (N+1) + i] = h_k(y_i) sqrt(W_i)
    vectors: Vec<f64>,
}

impl Spectral1d {
    fn new(degree: usize) -> Result<Self> {
        let q = degree + 1;
        let grid = QuadGrid::new(q, 1)?;
        let eval = eval_matrix(grid.nodes(), degree);
        let mut vectors = vec![0.0; q * q];
        for i in 0..q {
            let s = grid.weights()[i].sqrt();
            for k in 0..q {
                vectors[k * q + i] = eval[i * q + k] * s;
            }
        }
        Ok(Self { nodes: grid.nodes().to_vec(), vectors })
    }

    fn apply(&self, shift: f64, v: &mut [Complex64], scratch: &mut [Complex64]) {
        let q = self.nodes.len();
        // F: c_k (-i)^k
        for (k, c) in v.iter_mut().enumerate() {
            *c *= phase(k, false);
        }
        for (i, s) in scratch.iter_mut().enumerate() {
            *s = (0..q).map(|k| v[k] * self.vectors[k * q + i]).sum::<Complex64>()
                * Complex64::from_polar(1.0, -shift * self.nodes[i]);
        }
        for (k, c) in v.iter_mut().enumerate() {
            let row = &self.vectors[k * q..(k + 1) * q];
            *c = row.iter().zip(scratch.iter()).map(|(a, b)| b * *a).sum::<Complex64>() * phase(k, true);
        }
    }
}

fn phase(k: usize, inverse: bool) -> Complex64 {
    match (k % 4, inverse) {
        (0, _) => Complex64::new(1.0, 0.0),
        (2, _) => Complex64::new(-1.0, 0.0),
        (1, false) | (3, true) => Complex64::new(0.0, -1.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

impl Translator {
    pub fn new(basis: Arc<IndexSet>) -> Result<Self> {
        let spectral = if basis.dim() == 1 { Some(Spectral1d::new(basis.degree())?) } else { None };
        let stencil = DerivativeStencil::new(&basis);
        Ok(Self { basis, stencil, spectral })
    }

    pub fn for_coeffs(phi: &HermiteCoeffs) -> Result<Self> {
        Self::new(Arc::clone(phi.basis()))
    }

    pub fn basis(&self) -> &Arc<IndexSet> {
        &self.basis
    }

    fn check(&self, phi: &HermiteCoeffs, shift: &[f64]) -> Result<()> {
        if shift.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch { expected: self.basis.dim(), found: shift.len() });
        }
        if phi.dim() != self.basis.dim() || phi.degree() != self.basis.degree() {
            return Err(Error::InvalidArgument("coefficients do not match the translator basis".into()));
        }
        Ok(())
    }

    /// In-place `tau_shift` on a raw coefficient slice. `scratch` must hold
    /// `N + 1` entries in one dimension and is unused otherwise.
    pub fn apply_slice(&self, shift: &[f64], v: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        if shift.iter().all(|&s| s == 0.0) {
            return;
        }
        match &self.spectral {
            Some(spec) => {
                scratch.resize(v.len(), Complex64::new(0.0, 0.0));
                spec.apply(shift[0], v, scratch);
            }
            None => self.stencil.expm_action(shift, v),
        }
    }

    /// `tau_shift phi` on the truncated space.
    pub fn apply(&self, phi: &HermiteCoeffs, shift: &[f64]) -> Result<HermiteCoeffs> {
        self.check(phi, shift)?;
        let mut v = phi.coeffs().to_vec();
        let mut scratch = Vec::new();
        self.apply_slice(shift, &mut v, &mut scratch);
        let mut out = phi.with_coeffs(v);
        if phi.is_real_valued() {
            // translation is a real operator; drop rounding-level imaginary parts
            for c in out.coeffs_mut() {
                c.im = 0.0;
            }
        }
        Ok(out)
    }

    /// Dense truncated translation matrix by Pade scaling and squaring.
    pub fn matrix(&self, shift: &[f64]) -> Result<DMatrix<f64>> {
        if shift.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch { expected: self.basis.dim(), found: shift.len() });
        }
        Ok(expm_pade(&self.stencil.generator_dense(shift)))
    }

    pub fn stencil(&self) -> &DerivativeStencil {
        &self.stencil
    }
}

/// Result of [`translate_expm`] with its accuracy diagnostics.
#[derive(Clone, Debug)]
pub struct Translation {
    pub coeffs: HermiteCoeffs,
    /// `|x| <= 0.5 sqrt(2N)`.
    pub within_envelope: bool,
    /// Fraction of `||.||_0` on the outer shells of the result; large values
    /// mean the shifted mass is reaching the truncation boundary.
    pub shell_leakage: f64,
}

impl Translation {
    pub fn warning(&self) -> Option<String> {
        (!self.within_envelope).then(|| {
            format!("shift outside the accuracy envelope; outer-shell leakage {:.3e}", self.shell_leakage)
        })
    }
}

/// Width of the outer band used for the leakage estimate.
fn leakage_band(degree: usize) -> usize {
    (degree / 8).max(2)
}

/// Norm fraction carried by shells `|k| > N - band`.
pub fn shell_leakage(phi: &HermiteCoeffs) -> f64 {
    let n = phi.degree();
    let band = leakage_band(n);
    let cut = n.saturating_sub(band);
    let (mut outer, mut total) = (0.0, 0.0);
    for (pos, c) in phi.coeffs().iter().enumerate() {
        let m = c.norm_sqr();
        total += m;
        if phi.basis().degree_at(pos) > cut {
            outer += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (outer / total).sqrt()
    }
}

/// `tau_x phi` through the exponential of the truncated generator.
pub fn translate_expm(phi: &HermiteCoeffs, shift: &[f64]) -> Result<Translation> {
    let translator = Translator::for_coeffs(phi)?;
    let coeffs = translator.apply(phi, shift)?;
    let radius = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(Translation {
        within_envelope: radius <= accuracy_envelope(phi.degree()),
        shell_leakage: shell_leakage(&coeffs),
        coeffs,
    })
}
