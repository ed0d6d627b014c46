//! Dense row-major tensors over the Hermite box `[0, N]^d` or a quadrature
//! grid, and axis-wise contraction with real matrices.

use num_complex::Complex64;

/// Contracts `axis` of the row-major array `data` (with `shape`) against the
/// row-major `rows x shape[axis]` matrix. Returns the new data; the caller
/// updates `shape[axis] = rows`.
pub(crate) fn contract_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    matrix: &[f64],
    rows: usize,
) -> Vec<Complex64> {
    let cols = shape[axis];
    debug_assert_eq!(matrix.len(), rows * cols);
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        let src = &data[o * cols * inner..(o + 1) * cols * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let row = &matrix[r * cols..(r + 1) * cols];
            let target = &mut dst[r * inner..(r + 1) * inner];
            for (c, &m) in row.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let line = &src[c * inner..(c + 1) * inner];
                for (t, s) in target.iter_mut().zip(line) {
                    *t += s * m;
                }
            }
        }
    }
    out
}

/// Applies the same matrix (or one per axis) along every axis in turn.
pub(crate) fn contract_all(
    mut data: Vec<Complex64>,
    shape: &mut [usize],
    matrices: &[(&[f64], usize)],
) -> Vec<Complex64> {
    for (axis, &(m, rows)) in matrices.iter().enumerate() {
        data = contract_axis(&data, shape, axis, m, rows);
        shape[axis] = rows;
    }
    data
}
