use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::IndexSet;
use crate::error::Result;

use super::coeffs::{HermiteCoeffs, ZERO};

/// Real i.i.d. standard normal coefficients on `|k| <= content`, zero above,
/// on truncation `degree`.
pub fn random_coeffs<R: Rng + ?Sized>(basis: &Arc<IndexSet>, content: usize, rng: &mut R) -> HermiteCoeffs {
    let coeffs = (0..basis.len())
        .map(|pos| {
            if basis.degree_at(pos) <= content {
                Complex64::new(rng.sample(StandardNormal), 0.0)
            } else {
                ZERO
            }
        })
        .collect();
    HermiteCoeffs::from_vec(Arc::clone(basis), coeffs).expect("finite by construction")
}

/// `count` seeded draws with content on `|k| <= degree / 2`, the default
/// ensemble for operator tests. Zero-norm draws are redrawn.
pub fn margin_ensemble(dim: usize, degree: usize, count: usize, seed: u64) -> Result<Vec<HermiteCoeffs>> {
    let basis = Arc::new(IndexSet::new(dim, degree)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = random_coeffs(&basis, degree / 2, &mut rng);
        if v.coeffs().iter().any(|c| c.norm_sqr() > 0.0) {
            out.push(v);
        }
    }
    Ok(out)
}
