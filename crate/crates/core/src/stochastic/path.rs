use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::rng::{gaussian_vector, stream_rng};

/// A sampled path `0 = t_0 < ... < t_n = T` with `X_0 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    pub d: usize,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub drift: Option<Vec<f64>>,
}

fn uniform_times(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::NonPositiveTime(horizon));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("a path needs at least one step".into()));
    }
    let h = horizon / steps as f64;
    Ok((0..=steps).map(|i| if i == steps { horizon } else { i as f64 * h }).collect())
}

impl BrownianPath {
    pub fn new(times: Vec<f64>, positions: Vec<Vec<f64>>, drift: Option<Vec<f64>>) -> Result<Self> {
        let d = positions.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if times.len() != positions.len() || times.len() < 2 {
            return Err(Error::Length { expected: times.len(), found: positions.len() });
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("times must start at 0 and increase strictly".into()));
        }
        if positions[0].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidArgument("paths start at the origin".into()));
        }
        for x in &positions {
            if x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(x.clone()));
            }
        }
        if let Some(b) = &drift {
            if b.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: b.len() });
            }
        }
        Ok(Self { d, times, positions, drift })
    }

    /// The constant path `X = 0` on a uniform grid.
    pub fn constant(d: usize, horizon: f64, steps: usize) -> Result<Self> {
        Self::linear(&vec![0.0; d], horizon, steps)
    }

    /// `X_t = v t`, a path of zero quadratic variation.
    pub fn linear(velocity: &[f64], horizon: f64, steps: usize) -> Result<Self> {
        let times = uniform_times(horizon, steps)?;
        let positions = times.iter().map(|&t| velocity.iter().map(|v| v * t).collect()).collect();
        Self::new(times, positions, None)
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn terminal(&self) -> &[f64] {
        self.positions.last().expect("non-empty")
    }

    pub fn increment(&self, i: usize) -> Vec<f64> {
        self.positions[i + 1].iter().zip(&self.positions[i]).map(|(b, a)| b - a).collect()
    }

    /// Every `factor`-th grid point; `factor` must divide the step count.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps().is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!("{factor} does not divide {} steps", self.steps())));
        }
        Ok(Self {
            d: self.d,
            times: self.times.iter().step_by(factor).copied().collect(),
            positions: self.positions.iter().step_by(factor).cloned().collect(),
            drift: self.drift.clone(),
        })
    }

    /// `t -> -X_t`.
    pub fn negated(&self) -> Self {
        Self {
            d: self.d,
            times: self.times.clone(),
            positions: self.positions.iter().map(|x| x.iter().map(|v| -v).collect()).collect(),
            drift: self.drift.as_ref().map(|b| b.iter().map(|v| -v).collect()),
        }
    }
}

/// Path number `stream` of the family indexed by `seed`.
pub fn sample_brownian_stream(
    d: usize,
    horizon: f64,
    steps: usize,
    seed: u64,
    stream: u64,
    drift: Option<&[f64]>,
) -> Result<BrownianPath> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if let Some(b) = drift {
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.len() });
        }
    }
    let times = uniform_times(horizon, steps)?;
    let mut rng = stream_rng(seed, stream);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut x = vec![0.0; d];
    positions.push(x.clone());
    for w in times.windows(2) {
        let h = w[1] - w[0];
        let dx = gaussian_vector(&mut rng, d, h.sqrt());
        for j in 0..d {
            x[j] += dx[j] + drift.map_or(0.0, |b| b[j] * h);
        }
        positions.push(x.clone());
    }
    BrownianPath::new(times, positions, drift.map(<[f64]>::to_vec))
}

/// Brownian motion with optional drift `b`: increments `N(b h, h I)`.
pub fn sample_brownian(d: usize, horizon: f64, steps: usize, seed: u64, drift: Option<&[f64]>) -> Result<BrownianPath> {
    sample_brownian_stream(d, horizon, steps, seed, 0, drift)
}

/// Paths `0..count` of the family indexed by `seed`.
pub fn brownian_ensemble(
    d: usize,
    horizon: f64,
    steps: usize,
    count: usize,
    seed: u64,
    drift: Option<&[f64]>,
) -> Result<Vec<BrownianPath>> {
    (0..count as u64).into_par_iter().map(|i| sample_brownian_stream(d, horizon, steps, seed, i, drift)).collect()
}

/// Cumulative `sum_{s <= t} dX^i dX^j`, one row-major `d x d` matrix per
/// grid time.
pub fn realized_covariation(path: &BrownianPath) -> Vec<Vec<f64>> {
    let d = path.d;
    let mut acc = vec![0.0; d * d];
    let mut out = Vec::with_capacity(path.times.len());
    out.push(acc.clone());
    for i in 0..path.steps() {
        let dx = path.increment(i);
        for a in 0..d {
            for b in 0..d {
                acc[a * d + b] += dx[a] * dx[b];
            }
        }
        out.push(acc.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = sample_brownian(2, 1.0, 100, 42, None).unwrap();
        let b = sample_brownian(2, 1.0, 100, 42, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.positions[0], vec![0.0, 0.0]);
        assert_eq!(a.horizon(), 1.0);
    }

    #[test]
    fn terminal_mean_clt() {
        let paths = brownian_ensemble(2, 1.0, 4, 10_000, 1, None).unwrap();
        for axis in 0..2 {
            let mean = paths.iter().map(|p| p.terminal()[axis]).sum::<f64>() / 1e4;
            assert!(mean.abs() < 3.0 * (1.0f64 / 1e4).sqrt(), "{mean}");
        }
    }

    #[test]
    fn quadratic_variation_concentrates() {
        let (t, n) = (1.0, 10_000);
        let h = t / n as f64;
        let path = sample_brownian(2, t, n, 9, None).unwrap();
        let cov = realized_covariation(&path);
        let last = cov.last().unwrap();
        let band = 3.0 * (2.0 * t * h).sqrt();
        assert!((last[0] - t).abs() < band && (last[3] - t).abs() < band);
        // off-diagonal: sum of n products with variance h^2 each
        assert!(last[1].abs() < 3.0 * (n as f64).sqrt() * h);
        assert_eq!(last[1], last[2]);
        assert!((last[0] - 1.0).abs() < 0.05);
    }

    #[test]
    fn linear_path_has_vanishing_covariation() {
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1000] {
            let cov = realized_covariation(&BrownianPath::linear(&[2.0], 1.0, n).unwrap());
            let v = cov.last().unwrap()[0];
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn drift_shifts_mean() {
        let paths = brownian_ensemble(1, 2.0, 8, 4000, 1, Some(&[1.5])).unwrap();
        let mean = paths.iter().map(|p| p.terminal()[0]).sum::<f64>() / 4000.0;
        assert!((mean - 3.0).abs() < 3.0 * (2.0f64 / 4000.0).sqrt());
    }

    #[test]
    fn subsample_and_validation() {
        let p = sample_brownian(1, 1.0, 8, 3, None).unwrap();
        let q = p.subsample(4).unwrap();
        assert_eq!(q.steps(), 2);
        assert_eq!(q.terminal(), p.terminal());
        assert!(p.subsample(3).is_err());
        assert!(sample_brownian(1, 0.0, 8, 3, None).is_err());
        assert!(sample_brownian(1, 1.0, 0, 3, None).is_err());
        assert!(BrownianPath::new(vec![0.0, 1.0], vec![vec![1.0], vec![0.0]], None).is_err());
    }
}
