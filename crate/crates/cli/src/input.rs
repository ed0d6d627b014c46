use std::path::Path;

use anyhow::{bail, Context, Result};
use tempered_core::basis::{project_function, projection_nodes, MultiIndex};
use tempered_core::sobolev::{delta_coeffs, HermiteCoeffs};

/// A parsed input distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    Delta(Vec<f64>),
    Hermite(Vec<usize>),
    /// Isotropic normal density with the given mean and variance.
    Gaussian { mean: Vec<f64>, var: f64 },
    File(String),
}

fn numbers(text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
    inner
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("not a number: {s:?}")))
        .collect()
}

fn broadcast(values: Vec<f64>, d: usize, what: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; d]),
        n if n == d => Ok(values),
        n => bail!("{what} has {n} entries for d = {d}"),
    }
}

impl InputSpec {
    /// `delta@x`, `hermite@k`, `gaussian@(mean,var)` or a coefficient file
    /// path. Points and indices are scalars (broadcast to all axes) or
    /// parenthesized lists of length `d`; a Gaussian takes one mean per axis
    /// or a single shared mean, then the variance.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let Some((kind, arg)) = text.split_once('@') else {
            return Ok(InputSpec::File(text.to_owned()));
        };
        match kind {
            "delta" => Ok(InputSpec::Delta(broadcast(numbers(arg)?, d, "delta point")?)),
            "hermite" => {
                let raw = numbers(arg)?;
                if raw.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                    bail!("hermite index must be non-negative integers: {arg}");
                }
                if raw.len() != d {
                    bail!("hermite index needs {d} entries, got {}", raw.len());
                }
                let k = raw.into_iter().map(|v| v as usize).collect();
                Ok(InputSpec::Hermite(k))
            }
            "gaussian" => {
                let mut v = numbers(arg)?;
                if v.len() < 2 {
                    bail!("gaussian@(mean,var) needs a mean and a variance");
                }
                let var = v.pop().expect("len >= 2");
                if !(var > 0.0) {
                    bail!("gaussian variance must be positive");
                }
                Ok(InputSpec::Gaussian { mean: broadcast(v, d, "gaussian mean")?, var })
            }
            other => bail!("unknown input kind {other:?}; expected delta, hermite, gaussian or a file path"),
        }
    }

    /// Coefficients on `|k| <= n` in `d` dimensions. Projections use `q`
    /// nodes per axis, defaulting to the projection rule.
    pub fn build(&self, d: usize, n: usize, q: Option<usize>) -> Result<HermiteCoeffs> {
        Ok(match self {
            InputSpec::Delta(x) => delta_coeffs(x, d, n)?,
            InputSpec::Hermite(k) => HermiteCoeffs::basis_vector(d, n, &MultiIndex::new(k.clone())?)?,
            InputSpec::Gaussian { mean, var } => {
                let norm = (2.0 * std::f64::consts::PI * var).powf(-(d as f64) / 2.0);
                let density = |x: &[f64]| {
                    let r2: f64 = x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
                    norm * (-r2 / (2.0 * var)).exp()
                };
                project_function(density, d, n, q.unwrap_or_else(|| projection_nodes(n)))?
            }
            InputSpec::File(path) => {
                let text = std::fs::read_to_string(Path::new(path))
                    .with_context(|| format!("reading coefficient file {path:?}"))?;
                let phi = HermiteCoeffs::from_json(&text).with_context(|| format!("parsing {path:?}"))?;
                if phi.dim() != d {
                    bail!("coefficient file has d = {}, config has d = {d}", phi.dim());
                }
                if phi.degree() == n {
                    phi
                } else {
                    phi.retruncate(n)?
                }
            }
        })
    }
}
