use std::f64::consts::PI;

/// Orthonormal DCT-II, `n_out × n_in`, keeping the first `n_out` basis rows.
pub fn dct_matrix(n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    let n = n_in as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            (0..n_in).map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()).collect()
        })
        .collect()
}

pub(crate) fn apply(dct: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    dct.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}
