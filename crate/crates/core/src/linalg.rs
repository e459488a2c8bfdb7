//! Conversions between the real picture `R^2n` and the complex picture `C^n`.
//!
//! Real vectors use the interleaved layout `(x_1, y_1, ..., x_n, y_n)`. A real
//! `2n x 2n` matrix that commutes with `J_st` is complex linear; one that
//! anticommutes with it is anti-linear and acts as `w -> A conj(w)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// The standard structure: block-diagonal rotations by a quarter turn.
pub fn j_st(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn cnorm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex matrix `A` of the anti-linear part of a real matrix, `M w = A conj(w)`
/// when `M` is exactly anti-linear.
pub fn antilinear_part(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |j, k| {
        let (a, b) = (m[(2 * j, 2 * k)], m[(2 * j, 2 * k + 1)]);
        let (c, d) = (m[(2 * j + 1, 2 * k)], m[(2 * j + 1, 2 * k + 1)]);
        Complex64::new(0.5 * (a - d), 0.5 * (b + c))
    })
}

/// Complex matrix of the complex-linear part of a real matrix.
pub fn linear_part(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |j, k| {
        let (a, b) = (m[(2 * j, 2 * k)], m[(2 * j, 2 * k + 1)]);
        let (c, d) = (m[(2 * j + 1, 2 * k)], m[(2 * j + 1, 2 * k + 1)]);
        Complex64::new(0.5 * (a + d), 0.5 * (c - b))
    })
}

/// Real matrix of `w -> A conj(w)`.
pub fn antilinear_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let c = a[(j, k)];
            m[(2 * j, 2 * k)] = c.re;
            m[(2 * j, 2 * k + 1)] = c.im;
            m[(2 * j + 1, 2 * k)] = c.im;
            m[(2 * j + 1, 2 * k + 1)] = -c.re;
        }
    }
    m
}

/// Real matrix of `w -> A w`.
pub fn linear_matrix(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let c = a[(j, k)];
            m[(2 * j, 2 * k)] = c.re;
            m[(2 * j, 2 * k + 1)] = -c.im;
            m[(2 * j + 1, 2 * k)] = c.im;
            m[(2 * j + 1, 2 * k + 1)] = c.re;
        }
    }
    m
}

/// `A conj(w)`.
pub fn apply_conj(a: &DMatrix<Complex64>, w: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|j| (0..a.ncols()).map(|k| a[(j, k)] * w[k].conj()).sum())
        .collect()
}

pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}
