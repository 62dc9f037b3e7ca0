//! Small dense helpers shared by the modules.

use nalgebra::DMatrix;

use crate::{CMat, CVec, C64};

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Tr(AB) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Hilbert-Schmidt inner product Tr(A†B).
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermiticity_error(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && hermiticity_error(a) <= tol * (1.0 + a.norm())
}

/// (A + A†)/2
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::from(0.5)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix: U f(Λ) U†.
pub fn hermitian_fn(h: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let eig = hermitian_part(h).symmetric_eigen();
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(f));
    u * d * u.adjoint()
}

/// exp(-i t H) for Hermitian H.
pub fn unitary_exp(h: &CMat, t: f64) -> CMat {
    hermitian_fn(h, |e| C64::from_polar(1.0, -t * e))
}

/// exp(t H) for Hermitian H.
pub fn hermitian_exp(h: &CMat, t: f64) -> CMat {
    hermitian_fn(h, |e| C64::from((t * e).exp()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(h).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// |ψ⟩⟨ψ|
pub fn outer(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(C64::from)
}

/// Pairwise (cascade) summation for reproducible reductions.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_helpers_agree() {
        let a = CMat::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMat::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 1.0 - i as f64));
        assert!((trace_prod(&a, &b) - (&a * &b).trace()).norm() < 1e-12);
        assert!((hs_inner(&a, &b) - (a.adjoint() * &b).trace()).norm() < 1e-12);
    }

    #[test]
    fn exponentials() {
        let h = CMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0].map(C64::from));
        let u = unitary_exp(&h, 0.3);
        assert!((u[(0, 0)] - C64::from_polar(1.0, -0.3)).norm() < 1e-15);
        let b = hermitian_exp(&h, 0.3);
        assert!((b[(1, 1)].re - (-0.3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert!((pairwise_sum(&xs) - xs.iter().sum::<f64>()).abs() < 1e-12);
    }
}
