//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `a ⊗ a ⊗ ... ⊗ a` with `n >= 1` factors.
pub fn kron_power(a: &CMatrix, n: usize) -> CMatrix {
    assert!(n >= 1);
    (1..n).fold(a.clone(), |acc, _| acc.kronecker(a))
}

pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("at least one factor")).clone();
    iter.fold(first, |acc, f| acc.kronecker(*f))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `tr(A^† B)` for equally shaped matrices.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * scale
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let m = random_complex_gaussian(rng, d, d, 1.0);
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Haar-ish random unitary from the QR factorization of a Gaussian matrix,
/// with the phases of R's diagonal folded back into Q.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let m = random_complex_gaussian(rng, d, d, 1.0);
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Closest unitary in Frobenius norm: `U V^†` from `M = U Σ V^†`.
pub fn closest_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    u * v_t
}

/// Orthonormal basis of the column space, using singular values above `tol`.
pub fn column_space(m: &CMatrix, tol: f64) -> CMatrix {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(i, _)| i)
        .collect();
    CMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Maximum of `‖U^† U − I‖` entries; zero for matrices with orthonormal columns.
pub fn isometry_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}
