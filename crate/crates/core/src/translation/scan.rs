use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sobolev::{sobolev_norm, HermiteCoeffs, SobolevOrder};
use crate::stats::log_log_slope;

use super::expm::{accuracy_envelope, Translator};

/// Default slack on the fitted exponent.
pub const DEGREE_SLACK: f64 = 0.5;

/// Default number of sampled shift directions.
pub const SCAN_DIRECTIONS: usize = 16;

/// Configuration echo attached to serialized scan reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanEcho {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    pub seed: Option<u64>,
}

/// Growth of `sup_dir ||tau_x phi||_p / ||phi||_p` with `|x|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    pub p: SobolevOrder,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of `ln ratio` against `ln r` over the top decade.
    pub fitted_slope: f64,
    /// `2([|p|] + 1)`.
    pub theoretical_degree: u32,
    /// `max_r ratio(r) / (1 + r)^k`, reported only.
    pub envelope_constant: f64,
    pub slack: f64,
    pub passed: bool,
    pub config: ScanEcho,
}

/// `count` unit vectors spread over the sphere in `dim` dimensions. In 1-D the
/// two directions alternate; in 2-D and 3-D they are equispaced angles or a
/// Fibonacci lattice with a seeded offset; higher dimensions use seeded
/// Gaussian draws.
pub fn spread_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.random();
    match dim {
        1 => (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + offset) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64 + std::f64::consts::TAU * offset;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => (0..count)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / n).collect()
            })
            .collect(),
    }
}

/// Measures `ratio(r) = max_dir ||tau_{r dir} phi||_p / ||phi||_p` and fits the
/// growth exponent over the largest decade of radii. Passes when the exponent
/// stays below `2([|p|] + 1) + slack`.
pub fn norm_bound_scan(
    phi: &HermiteCoeffs,
    p: impl Into<SobolevOrder>,
    radii: &[f64],
    directions: &[Vec<f64>],
    slack: f64,
) -> Result<TranslationReport> {
    let p = p.into();
    let base = sobolev_norm(phi, p);
    if base == 0.0 {
        return Err(Error::ZeroNorm);
    }
    if radii.len() < 2 || radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be positive and strictly increasing".into()));
    }
    let envelope = accuracy_envelope(phi.degree());
    if radii[radii.len() - 1] > envelope {
        return Err(Error::InvalidArgument(format!(
            "largest radius {} exceeds the accuracy envelope {envelope:.4}",
            radii[radii.len() - 1]
        )));
    }
    if directions.is_empty() || directions.iter().any(|d| d.len() != phi.dim()) {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: directions.first().map_or(0, Vec::len) });
    }
    let translator = Translator::for_coeffs(phi)?;
    let ratios: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            directions
                .iter()
                .map(|dir| {
                    let shift: Vec<f64> = dir.iter().map(|u| u * r).collect();
                    let moved = translator.apply(phi, &shift).expect("dimensions checked");
                    sobolev_norm(&moved, p) / base
                })
                .fold(0.0, f64::max)
        })
        .collect();

    let top = radii[radii.len() - 1] / 10.0;
    let first = radii.iter().position(|&r| r >= top * (1.0 - 1e-12)).unwrap_or(0).min(radii.len() - 2);
    let fitted_slope = log_log_slope(&radii[first..], &ratios[first..]);
    let k = p.translation_degree();
    let envelope_constant =
        radii.iter().zip(&ratios).map(|(r, q)| q / (1.0 + r).powi(k as i32)).fold(0.0, f64::max);
    Ok(TranslationReport {
        p,
        radii: radii.to_vec(),
        ratios,
        fitted_slope,
        theoretical_degree: k,
        envelope_constant,
        slack,
        passed: fitted_slope <= k as f64 + slack,
        config: ScanEcho { d: phi.dim(), n: phi.degree(), q: None, seed: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::MultiIndex;
    use crate::stats::log_grid;

    #[test]
    fn isometry_case() {
        let e0 = HermiteCoeffs::basis_vector(1, 48, &MultiIndex::zero(1)).unwrap();
        let radii = log_grid(0.3, 3.0, 8);
        let r = norm_bound_scan(&e0, 0.0, &radii, &spread_directions(1, 16, 0), DEGREE_SLACK).unwrap();
        assert!(r.ratios.iter().all(|q| (q - 1.0).abs() < 1e-12));
        assert!(r.fitted_slope.abs() < 1e-10);
        assert!(r.passed);
    }

    #[test]
    fn first_order_degree_bound() {
        let e0 = HermiteCoeffs::basis_vector(1, 48, &MultiIndex::zero(1)).unwrap();
        let radii = log_grid(0.45, 4.5, 10);
        let r = norm_bound_scan(&e0, 1.0, &radii, &spread_directions(1, 16, 0), DEGREE_SLACK).unwrap();
        assert_eq!(r.theoretical_degree, 4);
        assert!(r.fitted_slope <= 4.0, "slope {}", r.fitted_slope);
        assert!(r.passed);
    }

    #[test]
    fn directions_are_unit() {
        for d in 1..=4 {
            for v in spread_directions(d, 16, 3) {
                assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let e0 = HermiteCoeffs::basis_vector(1, 8, &MultiIndex::zero(1)).unwrap();
        let dirs = spread_directions(1, 2, 0);
        assert!(norm_bound_scan(&e0, 1.0, &[1.0, 0.5], &dirs, 0.5).is_err());
        assert!(norm_bound_scan(&e0, 1.0, &[1.0, 10.0], &dirs, 0.5).is_err());
        let zero = HermiteCoeffs::zeros(1, 8).unwrap();
        assert!(matches!(norm_bound_scan(&zero, 1.0, &[0.5, 1.0], &dirs, 0.5), Err(Error::ZeroNorm)));
    }
}
