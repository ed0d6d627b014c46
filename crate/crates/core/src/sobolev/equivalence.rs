use serde::{Deserialize, Serialize};

use crate::basis::enumerate_indices;
use crate::error::{Error, Result};

use super::coeffs::HermiteCoeffs;
use super::operators::{apply_derivative, apply_position, sobolev_norm};

/// The two sides of the norm equivalence
/// `||f||_m <~ sum_{|a|+|b| <= 2m} ||x^a d^b f||_0 <~ ||f||_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub m: usize,
    pub sobolev: f64,
    pub moment_sum: f64,
    /// Individual `||x^a d^b f||_0`, with `(a, b)` flattened as `a ++ b`.
    pub terms: Vec<(Vec<usize>, f64)>,
    /// `||f||_m / sum`.
    pub lower_ratio: f64,
    /// `sum / ||f||_m`.
    pub upper_ratio: f64,
}

/// Evaluates every `||x^a d^b phi||_0` with `|a| + |b| <= 2m` by ladder
/// arithmetic. Needs `N >= content degree + 2m` so no term reaches the shell.
pub fn norm_equivalence_check(phi: &HermiteCoeffs, m: usize) -> Result<NormEquivalence> {
    let content = phi.content_degree().ok_or(Error::ZeroNorm)?;
    let required = content + 2 * m;
    if phi.degree() < required {
        return Err(Error::Margin { required, available: phi.degree() });
    }
    let d = phi.dim();
    let mut terms = Vec::new();
    for ab in enumerate_indices(2 * d, 2 * m)? {
        let (a, b) = ab.entries().split_at(d);
        let mut v = phi.clone();
        for (axis, &power) in b.iter().enumerate() {
            for _ in 0..power {
                v = apply_derivative(&v, axis)?;
            }
        }
        for (axis, &power) in a.iter().enumerate() {
            for _ in 0..power {
                v = apply_position(&v, axis)?;
            }
        }
        debug_assert!(!v.shell_touched());
        terms.push((ab.entries().to_vec(), sobolev_norm(&v, 0.0)));
    }
    let sobolev = sobolev_norm(phi, m as f64);
    let moment_sum: f64 = terms.iter().map(|(_, v)| v).sum();
    Ok(NormEquivalence {
        m,
        sobolev,
        moment_sum,
        terms,
        lower_ratio: sobolev / moment_sum,
        upper_ratio: moment_sum / sobolev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::MultiIndex;
    use crate::sobolev::margin_ensemble;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_zero_is_trivial() {
        let v = margin_ensemble(2, 8, 1, 3).unwrap().remove(0);
        let r = norm_equivalence_check(&v, 0).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert_abs_diff_eq!(r.lower_ratio, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.upper_ratio, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ground_state_moments() {
        // Oracle: d h0 = -x h0, d^2 h0 = (x^2 - 1) h0, x d h0 = -x^2 h0 and
        // int x^{2n} h0^2 = (2n-1)!! / 2^n.
        let e0 = HermiteCoeffs::basis_vector(1, 6, &MultiIndex::zero(1)).unwrap();
        let r = norm_equivalence_check(&e0, 1).unwrap();
        let expected = [
            (vec![0, 0], 1.0),
            (vec![0, 1], 0.5f64.sqrt()),
            (vec![1, 0], 0.5f64.sqrt()),
            (vec![0, 2], 0.75f64.sqrt()),
            (vec![1, 1], 0.75f64.sqrt()),
            (vec![2, 0], 0.75f64.sqrt()),
        ];
        assert_eq!(r.terms.len(), expected.len());
        for ((ab, v), (eab, ev)) in r.terms.iter().zip(expected.iter()) {
            assert_eq!(ab, eab);
            assert_abs_diff_eq!(*v, *ev, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(r.sobolev, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn margin_enforced() {
        let v = HermiteCoeffs::basis_vector(1, 5, &MultiIndex::axis(1, 0, 4)).unwrap();
        assert!(matches!(norm_equivalence_check(&v, 1), Err(Error::Margin { required: 6, available: 5 })));
    }

    #[test]
    fn ensemble_ratios_bounded() {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for seed in [1, 2] {
            for v in margin_ensemble(1, 24, 20, seed).unwrap() {
                let r = norm_equivalence_check(&v, 1).unwrap();
                lo = lo.min(r.lower_ratio);
                hi = hi.max(r.lower_ratio);
            }
        }
        assert!(lo > 0.0 && hi.is_finite() && hi / lo < 10.0, "{lo} {hi}");
    }
}
