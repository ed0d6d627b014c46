use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::IndexSet;

/// Sparse rows of the truncated derivatives `D_j = (A_j - A_j^+) / 2`,
/// stacked over all axes. Restricted to `|k| <= N` each `D_j` is exactly
/// skew-symmetric, so `exp(-sum_j x_j D_j)` is exactly orthogonal.
#[derive(Clone, Debug)]
pub struct DerivativeStencil {
    len: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    axes: Vec<usize>,
    values: Vec<f64>,
}

impl DerivativeStencil {
    pub fn new(basis: &IndexSet) -> Self {
        let len = basis.len();
        let mut row_start = Vec::with_capacity(len + 1);
        let mut cols = Vec::new();
        let mut axes = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for row in 0..len {
            let k = basis.get(row).entries();
            for (axis, &kj) in k.iter().enumerate() {
                // <h_row, D h_{row - e_j}> = -sqrt(k_j / 2)
                if let Some(col) = basis.lowered(axis, row) {
                    cols.push(col);
                    axes.push(axis);
                    values.push(-(kj as f64 / 2.0).sqrt());
                }
                // <h_row, D h_{row + e_j}> = +sqrt((k_j + 1) / 2)
                if let Some(col) = basis.raised(axis, row) {
                    cols.push(col);
                    axes.push(axis);
                    values.push(((kj + 1) as f64 / 2.0).sqrt());
                }
            }
            row_start.push(cols.len());
        }
        Self { len, row_start, cols, axes, values }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `out = G v` with `G = -sum_j shift_j D_j`.
    pub fn apply_generator(&self, shift: &[f64], v: &[Complex64], out: &mut [Complex64]) {
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for e in self.row_start[row]..self.row_start[row + 1] {
                acc += v[self.cols[e]] * (-shift[self.axes[e]] * self.values[e]);
            }
            *o = acc;
        }
    }

    /// Max absolute row sum of `G`, an upper bound for its 2-norm.
    pub fn generator_norm_bound(&self, shift: &[f64]) -> f64 {
        (0..self.len)
            .map(|row| {
                (self.row_start[row]..self.row_start[row + 1])
                    .map(|e| (shift[self.axes[e]] * self.values[e]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn generator_dense(&self, shift: &[f64]) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.len, self.len);
        for row in 0..self.len {
            for e in self.row_start[row]..self.row_start[row + 1] {
                g[(row, self.cols[e])] += -shift[self.axes[e]] * self.values[e];
            }
        }
        g
    }

    /// `v <- exp(G) v` by scaled Taylor steps: the step count makes
    /// `||G|| / steps <= 1`, and each step is summed until the terms fall
    /// below rounding.
    pub fn expm_action(&self, shift: &[f64], v: &mut [Complex64]) {
        let norm = self.generator_norm_bound(shift);
        if norm == 0.0 {
            return;
        }
        let steps = norm.ceil().max(1.0) as usize;
        let inv_steps = 1.0 / steps as f64;
        let mut term = vec![Complex64::new(0.0, 0.0); self.len];
        let mut next = term.clone();
        for _ in 0..steps {
            term.copy_from_slice(v);
            let scale = v.iter().fold(0.0f64, |m, c| m.max(c.norm()));
            for order in 1..=40 {
                self.apply_generator(shift, &term, &mut next);
                let factor = inv_steps / order as f64;
                let mut largest = 0.0f64;
                for ((t, n), acc) in term.iter_mut().zip(&next).zip(v.iter_mut()) {
                    *t = n * factor;
                    *acc += *t;
                    largest = largest.max(t.norm());
                }
                if largest <= 1e-17 * scale {
                    break;
                }
            }
        }
    }
}

const PADE_ORDER: usize = 8;
const PADE_THETA: f64 = 0.5;

/// `exp(a)` by scaling and squaring with a diagonal `[8/8]` Pade
/// approximant, after scaling `||a||_1 <= 0.5`. Diagonal Pade of a skew
/// matrix is orthogonal, and squaring keeps it so.
pub fn expm_pade(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let squarings = if norm > PADE_THETA { (norm / PADE_THETA).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);

    let m = PADE_ORDER;
    let mut coeff = 1.0;
    let mut numer = DMatrix::<f64>::identity(n, n);
    let mut denom = DMatrix::<f64>::identity(n, n);
    let mut power = DMatrix::<f64>::identity(n, n);
    for k in 1..=m {
        // c_k = c_{k-1} (m - k + 1) / (k (2m - k + 1))
        coeff *= (m - k + 1) as f64 / (k * (2 * m - k + 1)) as f64;
        power = &power * &scaled;
        numer += &power * coeff;
        if k % 2 == 0 {
            denom += &power * coeff;
        } else {
            denom -= &power * coeff;
        }
    }
    let mut result = denom.lu().solve(&numer).expect("Pade denominator is well conditioned for ||a|| <= 0.5");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
