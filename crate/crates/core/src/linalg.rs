//! Small dense complex matrix helpers shared by the numerical modules.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &Mat4) -> C64 {
    m.trace()
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &Mat4, b: &Mat4) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix, symmetrized first.
///
/// Eigenvalues are returned in ascending order; column `k` of the second
/// value is the eigenvector for eigenvalue `k`.
pub fn eigh(m: &Mat4) -> ([f64; 4], Mat4) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = [0.0; 4];
    let mut vectors = Mat4::zeros();
    for (k, &src) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[src];
        vectors.set_column(k, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Mat4) -> f64 {
    eigh(m).0[0]
}

/// `|v⟩⟨v|`.
pub fn projector(v: &Vec4) -> Mat4 {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs_hermitian_input() {
        let m = Mat4::new(
            c(2.0, 0.0),
            c(0.3, -0.1),
            c(0.0, 0.2),
            c(0.1, 0.0),
            c(0.3, 0.1),
            c(1.0, 0.0),
            c(0.05, 0.0),
            c(0.0, -0.4),
            c(0.0, -0.2),
            c(0.05, 0.0),
            c(0.5, 0.0),
            c(0.2, 0.2),
            c(0.1, 0.0),
            c(0.0, 0.4),
            c(0.2, -0.2),
            c(-1.0, 0.0),
        );
        let (vals, vecs) = eigh(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = Mat4::from_diagonal(&Vec4::from_iterator(vals.iter().map(|&v| c(v, 0.0))));
        let back = vecs * diag * vecs.adjoint();
        assert!(max_abs(&(back - m)) < 1e-13);
        assert!(max_abs(&(vecs.adjoint() * vecs - Mat4::identity())) < 1e-13);
    }

    #[test]
    fn trace_product_matches_product_trace() {
        let a = Mat4::from_fn(|i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = Mat4::from_fn(|i, j| c((i * j) as f64, 0.25 * i as f64));
        assert!((trace_product(&a, &b) - (a * b).trace()).norm() < 1e-12);
    }
}
