use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sobolev::{HermiteCoeffs, SobolevOrder};
use crate::translation::Translator;

use super::rng::{gaussian_vector, stream_rng};

/// Samples per reduction chunk. Chunk boundaries depend only on the sample
/// count, so the merged result is independent of the worker count.
pub const MC_CHUNK: usize = 512;

/// Running mean and summed squared deviations of complex vectors.
#[derive(Clone, Debug)]
pub(crate) struct Moments {
    pub count: usize,
    pub mean: Vec<Complex64>,
    pub m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { count: 0, mean: vec![Complex64::new(0.0, 0.0); len], m2: vec![0.0; len] }
    }

    fn push(&mut self, x: &[Complex64]) {
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let before = v - *m;
            *m += before * inv;
            *s += (before * (v - *m).conj()).re;
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * (nb / n);
            self.m2[i] += other.m2[i] + delta.norm_sqr() * na * nb / n;
        }
        self.count += other.count;
    }

    /// Standard error of the mean per component; zero for a single sample.
    pub fn std_errors(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.m2.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

/// Moments of `fill(i, out)` over samples `0..samples`, reduced chunk by
/// chunk in index order.
pub(crate) fn chunked_moments<F>(samples: usize, len: usize, fill: F) -> Moments
where
    F: Fn(u64, &mut Vec<Complex64>) + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::new(len);
            let mut buf = Vec::with_capacity(len);
            for i in c * MC_CHUNK..samples.min((c + 1) * MC_CHUNK) {
                fill(i as u64, &mut buf);
                m.push(&buf);
            }
            m
        })
        .collect();
    let mut total = Moments::new(len);
    for m in &partial {
        total.merge(m);
    }
    total
}

/// Sample mean of `tau_{X_t} phi` over `X_t ~ N(0, t I)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: HermiteCoeffs,
    pub std_errors: Vec<f64>,
    #[serde(rename = "M")]
    pub samples: usize,
    pub seed: u64,
    pub t: f64,
}

impl MCEstimate {
    /// `sum_k (2|k|+d)^p se_k`, an upper bound for the `||.||_p` error scale
    /// by the triangle inequality.
    pub fn aggregate_se(&self, p: impl Into<SobolevOrder>) -> f64 {
        let p = p.into().value();
        let basis = self.mean.basis();
        self.std_errors.iter().enumerate().map(|(pos, se)| basis.eigenvalue(pos).powf(p) * se).sum()
    }

    /// `(sum_k (2|k|+d)^{2p} se_k^2)^{1/2}`, the typical size of the error.
    pub fn rss_se(&self, p: impl Into<SobolevOrder>) -> f64 {
        let p = p.into().value();
        let basis = self.mean.basis();
        self.std_errors
            .iter()
            .enumerate()
            .map(|(pos, se)| (basis.eigenvalue(pos).powf(p) * se).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Monte Carlo `E tau_{X_t} phi` from `samples` direct draws of `X_t`; sample
/// `i` uses stream `i` of `seed`.
pub fn mc_expectation(phi: &HermiteCoeffs, t: f64, samples: usize, seed: u64) -> Result<MCEstimate> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if t == 0.0 {
        return Ok(MCEstimate {
            mean: phi.clone(),
            std_errors: vec![0.0; phi.len()],
            samples,
            seed,
            t,
        });
    }
    let translator = Translator::for_coeffs(phi)?;
    let (d, scale, real) = (phi.dim(), t.sqrt(), phi.is_real_valued());
    let moments = chunked_moments(samples, phi.len(), |i, buf| {
        let x = gaussian_vector(&mut stream_rng(seed, i), d, scale);
        buf.clear();
        buf.extend_from_slice(phi.coeffs());
        let mut scratch = Vec::new();
        translator.apply_slice(&x, buf, &mut scratch);
        if real {
            buf.iter_mut().for_each(|c| c.im = 0.0);
        }
    });
    let std_errors = moments.std_errors();
    Ok(MCEstimate {
        mean: HermiteCoeffs::from_vec(std::sync::Arc::clone(phi.basis()), moments.mean)?,
        std_errors,
        samples,
        seed,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::MultiIndex;
    use crate::heat::heat_apply;
    use crate::sobolev::sobolev_norm;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<Vec<Complex64>> =
            (0..37).map(|i| vec![Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())]).collect();
        let mut seq = Moments::new(1);
        xs.iter().for_each(|x| seq.push(x));
        let chunked = chunked_moments(xs.len(), 1, |i, buf| {
            buf.clear();
            buf.extend_from_slice(&xs[i as usize]);
        });
        assert!((seq.mean[0] - chunked.mean[0]).norm() < 1e-15);
        assert!((seq.m2[0] - chunked.m2[0]).abs() < 1e-13);
        let mean: Complex64 = xs.iter().map(|x| x[0]).sum::<Complex64>() / 37.0;
        let m2: f64 = xs.iter().map(|x| (x[0] - mean).norm_sqr()).sum();
        assert!((m2 - seq.m2[0]).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_exact() {
        let e0 = HermiteCoeffs::basis_vector(1, 8, &MultiIndex::zero(1)).unwrap();
        let est = mc_expectation(&e0, 0.0, 100, 1).unwrap();
        assert_eq!(est.mean, e0);
        assert!(est.std_errors.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn matches_heat_semigroup() {
        let e0 = HermiteCoeffs::basis_vector(1, 32, &MultiIndex::zero(1)).unwrap();
        let est = mc_expectation(&e0, 0.5, 20_000, 3).unwrap();
        let exact = heat_apply(&e0, 0.5).unwrap();
        for (k, (m, e)) in est.mean.coeffs().iter().zip(exact.coeffs()).enumerate() {
            assert!((m - e).norm() <= 4.0 * est.std_errors[k] + 1e-12, "k = {k}");
        }
        assert!(sobolev_norm(&(&est.mean - &exact), 0.0) <= 3.0 * est.aggregate_se(0.0));
    }

    #[test]
    fn reproducible() {
        let e0 = HermiteCoeffs::basis_vector(2, 6, &MultiIndex::zero(2)).unwrap();
        let a = mc_expectation(&e0, 0.3, 1500, 11).unwrap();
        let b = mc_expectation(&e0, 0.3, 1500, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.std_errors, b.std_errors);
    }
}
