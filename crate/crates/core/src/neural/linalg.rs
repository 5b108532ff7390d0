//! Thin wrappers over `matrixmultiply::dgemm` for row-major operands.

/// `C (m×n) = beta·C + A·B` with `A` m×k and `B` k×n, both row-major.
pub(crate) fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), n as isize, 1,
            beta, c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `C (m×n) = beta·C + A·Bᵀ` with `A` m×k and `B` n×k.
pub(crate) fn gemm_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), 1, k as isize,
            beta, c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `C (m×n) = beta·C + Aᵀ·B` with `A` k×m and `B` k×n.
pub(crate) fn gemm_tn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), 1, m as isize,
            b.as_ptr(), n as isize, 1,
            beta, c.as_mut_ptr(), n as isize, 1,
        );
    }
}

pub(crate) fn add_row_bias(rows: usize, bias: &[f64], c: &mut [f64]) {
    let n = bias.len();
    for r in 0..rows {
        for (x, b) in c[r * n..(r + 1) * n].iter_mut().zip(bias) {
            *x += b;
        }
    }
}

pub(crate) fn sum_rows(rows: usize, x: &[f64], out: &mut [f64]) {
    let n = out.len();
    for r in 0..rows {
        for (o, v) in out.iter_mut().zip(&x[r * n..(r + 1) * n]) {
            *o += v;
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax of one row.
pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}
