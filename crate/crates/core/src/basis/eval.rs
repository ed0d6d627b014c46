use crate::error::{Error, Result};

use super::MultiIndex;

/// `pi^{-1/4}`, the value of `h_0(0)`.
pub const H0_AT_ZERO: f64 = 0.751_125_544_464_942_5;

/// Writes `h_0(s), ..., h_n(s)` into `out` (which must hold `n + 1` values).
///
/// Uses the normalized recurrence
/// `h_{l+1} = s sqrt(2/(l+1)) h_l - sqrt(l/(l+1)) h_{l-1}`,
/// which never forms `H_l(s)` or `l!`. For `|s| > ~38` the Gaussian factor
/// underflows and every value is returned as zero.
pub fn hermite_functions_into(s: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = H0_AT_ZERO * (-0.5 * s * s).exp();
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * s * out[0];
    for l in 1..out.len() - 1 {
        let lf = l as f64;
        out[l + 1] = s * (2.0 / (lf + 1.0)).sqrt() * out[l] - (lf / (lf + 1.0)).sqrt() * out[l - 1];
    }
}

/// `[h_0(s), ..., h_n(s)]`.
pub fn hermite_functions(n: usize, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    hermite_functions_into(s, &mut out);
    out
}

/// The 1-D Hermite function `h_l(s)`.
pub fn hermite_eval_1d(l: usize, s: f64) -> f64 {
    hermite_functions(l, s)[l]
}

/// `h_k(x) = h_{k_1}(x_1) ... h_{k_d}(x_d)`.
pub fn hermite_eval_nd(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    if k.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: x.len() });
    }
    Ok(k.entries().iter().zip(x).map(|(&kj, &xj)| hermite_eval_1d(kj, xj)).product())
}

/// Per-axis tables `tables[j][l] = h_l(x_j)` for `l <= n`.
pub(crate) fn axis_tables(n: usize, x: &[f64]) -> Vec<Vec<f64>> {
    x.iter().map(|&xj| hermite_functions(n, xj)).collect()
}
