//! Thin helpers over `faer` for dense complex matrices.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};

use crate::error::{Result, TopoError};

pub use faer::c64;

/// Dense complex matrix.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn cis(phi: f64) -> c64 {
    c64::new(phi.cos(), phi.sin())
}

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

/// Builds a matrix from row-major `(re, im)` pairs.
pub fn from_rows(rows: &[&[(f64, f64)]]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| c64::new(rows[i][j].0, rows[i][j].1))
}

pub fn from_real(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| c64::new(rows[i][j], 0.0))
}

pub fn scale(a: &CMat, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    a + b
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    a.conjugate().to_owned()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

pub fn trace(a: &CMat) -> c64 {
    (0..a.nrows().min(a.ncols())).fold(ZERO, |s, i| s + a[(i, i)])
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Spectral norm.
pub fn op_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| TopoError::ConvergenceFailure(format!("{e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// `max |A - A*|`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b))
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| TopoError::ConvergenceFailure(format!("{e:?}")))?;
    let vals = e.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigvalsh(a: &CMat) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| TopoError::ConvergenceFailure(format!("{e:?}")))
}

/// Full SVD `A = U diag(s) V*` with non-increasing `s`.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let s = a
        .svd()
        .map_err(|e| TopoError::ConvergenceFailure(format!("{e:?}")))?;
    let vals = s.S().column_vector().iter().map(|x| x.re).collect();
    Ok((s.U().to_owned(), vals, s.V().to_owned()))
}

pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| TopoError::ConvergenceFailure(format!("{e:?}")))
}

pub fn inverse(a: &CMat) -> CMat {
    a.partial_piv_lu().inverse()
}

pub fn determinant(a: &CMat) -> c64 {
    a.determinant()
}

/// `V diag(w) V*`.
pub fn spectral_sum(v: &CMat, w: &[c64]) -> CMat {
    let vw = Mat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * w[k]);
    &vw * v.adjoint()
}

/// `V diag(w) V*` for real weights.
pub fn spectral_sum_real(v: &CMat, w: &[f64]) -> CMat {
    let wc: Vec<c64> = w.iter().map(|&x| c64::new(x, 0.0)).collect();
    spectral_sum(v, &wc)
}

/// Columns `cols` of `v`.
pub fn select_columns(v: &CMat, cols: &[usize]) -> CMat {
    Mat::from_fn(v.nrows(), cols.len(), |i, k| v[(i, cols[k])])
}

/// Principal submatrix on `idx`.
pub fn principal(a: &CMat, idx: &[usize]) -> CMat {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Multiplies every entry `(i, j)` by `f(i, j)`.
pub fn hadamard_with(a: &CMat, f: impl Fn(usize, usize) -> c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * f(i, j))
}

/// `D A` for diagonal `D`.
pub fn diag_left(d: &[c64], a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| d[i] * a[(i, j)])
}

/// `A D` for diagonal `D`.
pub fn diag_right(a: &CMat, d: &[c64]) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * d[j])
}

pub fn diag(d: &[c64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { ZERO })
}

/// Pauli matrices sigma_0..sigma_3.
pub fn pauli(k: usize) -> CMat {
    match k {
        0 => from_real(&[&[1.0, 0.0], &[0.0, 1.0]]),
        1 => from_real(&[&[0.0, 1.0], &[1.0, 0.0]]),
        2 => from_rows(&[&[(0.0, 0.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, 0.0)]]),
        3 => from_real(&[&[1.0, 0.0], &[0.0, -1.0]]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// Polar unitary factor `A |A|^{-1}` together with the smallest singular value.
pub fn polar_unitary(a: &CMat) -> Result<(CMat, f64)> {
    let (u, s, v) = svd(a)?;
    let smin = s.last().copied().unwrap_or(0.0);
    Ok((&u * v.adjoint(), smin))
}

/// Matrix power for small positive exponents.
pub fn powi(a: &CMat, k: u32) -> CMat {
    let mut r = a.clone();
    for _ in 1..k {
        r = &r * a;
    }
    r
}

pub fn to_vec_row_major(a: &CMat) -> Vec<c64> {
    let mut out = Vec::with_capacity(a.nrows() * a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}
