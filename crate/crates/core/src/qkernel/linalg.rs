//! Dense Hermitian helpers on top of nalgebra.

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V diag(f(λ)) V†`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> CMat<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let s = Complex::from_real(f(v));
            for r in 0..n {
                scaled[(r, k)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_defect<T: Real>(m: &CMat<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()).scale(T::lit(0.5))
}

/// Eigen-decomposition of a Hermitian matrix. Fails if `m` deviates from
/// Hermiticity by more than `tol`.
pub fn eig_hermitian<T: Real>(m: &CMat<T>, tol: T) -> Result<HermitianEigen<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("expected square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NonHermitian(defect.as_f64()));
    }
    Ok(eig_unchecked(m))
}

pub(crate) fn eig_unchecked<T: Real>(m: &CMat<T>) -> HermitianEigen<T> {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues of a Hermitian matrix, ascending. Closed form for 2x2.
pub fn hermitian_eigenvalues<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 2 {
        let (lo, hi) = eigvals_2x2(m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
        return vec![lo, hi];
    }
    let mut v: Vec<T> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Eigenvalues of `[[a, b], [b*, d]]` with `a`, `d` real.
#[inline]
pub fn eigvals_2x2<T: Real>(a: T, d: T, b: Complex<T>) -> (T, T) {
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let gap = ((a - d) * half).hypot(b.modulus());
    (mean - gap, mean + gap)
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(m: &CMat<T>) -> T {
    m.singular_values().iter().fold(T::zero(), |acc, &s| acc + s)
}

/// `exp(i H)` for Hermitian `H`; exact closed form in dimension 2.
pub fn expm_i_hermitian<T: Real>(h: &CMat<T>) -> CMat<T> {
    let n = h.nrows();
    if n == 2 {
        let half = T::lit(0.5);
        let h0 = (h[(0, 0)].re + h[(1, 1)].re) * half;
        let hz = (h[(0, 0)].re - h[(1, 1)].re) * half;
        let hx = h[(1, 0)].re;
        let hy = h[(1, 0)].im;
        let norm = (hx * hx + hy * hy + hz * hz).sqrt();
        let (cos, sinc) = if norm > T::lit(1e-20) { (norm.cos(), norm.sin() / norm) } else { (T::one(), T::one()) };
        let phase = Complex::new(h0.cos(), h0.sin());
        let i = Complex::new(T::zero(), T::one());
        let s = i * Complex::from_real(sinc);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::from_real(cos) + s * Complex::from_real(hz),
                s * Complex::new(hx, -hy),
                s * Complex::new(hx, hy),
                Complex::from_real(cos) - s * Complex::from_real(hz),
            ],
        );
        return m * phase;
    }
    let eig = eig_unchecked(h);
    let mut scaled = eig.vectors.clone();
    for (k, &v) in eig.values.iter().enumerate() {
        let s = Complex::new(v.cos(), v.sin());
        for r in 0..n {
            scaled[(r, k)] *= s;
        }
    }
    &scaled * eig.vectors.adjoint()
}

/// `I_left ⊗ op ⊗ I_right` where `op` acts on the contiguous subsystems
/// `first .. first + count`.
pub fn embed<T: Real>(op: &CMat<T>, dims: &[usize], first: usize, count: usize) -> CMat<T> {
    let left: usize = dims[..first].iter().product();
    let right: usize = dims[first + count..].iter().product();
    let mut out = op.clone();
    if left > 1 {
        out = CMat::<T>::identity(left, left).kronecker(&out);
    }
    if right > 1 {
        out = out.kronecker(&CMat::<T>::identity(right, right));
    }
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

/// Largest deviation of `U† U` from the identity.
pub fn unitarity_defect<T: Real>(u: &CMat<T>) -> T {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &CMat::<T>::identity(n, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn sigma_x() -> CMat<f64> {
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn diagonal_input_keeps_basis() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.75, 0.), c(0., 0.), c(0., 0.), c(0.25, 0.)]);
        let eig = eig_hermitian(&m, 1e-9).unwrap();
        assert!((eig.values[0] - 0.25).abs() < 1e-15);
        assert!((eig.values[1] - 0.75).abs() < 1e-15);
        assert!((eig.vectors[(1, 0)].modulus() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(0, 1)].modulus() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let eig = eig_hermitian(&sigma_x(), 1e-9).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        // |-> for -1: components of opposite sign
        let v = eig.vectors.column(0);
        assert!(((v[0] + v[1]).modulus()) < 1e-12);
        let w = eig.vectors.column(1);
        assert!(((w[0] - w[1]).modulus()) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(eig_hermitian(&m, 1e-9), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn closed_form_exp_matches_spectral_route() {
        let h = DMatrix::from_row_slice(2, 2, &[c::<f64>(0.3, 0.), c(0.2, -0.7), c(0.2, 0.7), c(-1.1, 0.)]);
        let closed = expm_i_hermitian(&h);
        let eig = eig_unchecked(&h);
        let mut scaled = eig.vectors.clone();
        for k in 0..2 {
            let s = Complex::new(eig.values[k].cos(), eig.values[k].sin());
            for r in 0..2 {
                scaled[(r, k)] *= s;
            }
        }
        let spectral = &scaled * eig.vectors.adjoint();
        assert!(max_abs_diff(&closed, &spectral) < 1e-13);
        assert!(unitarity_defect(&closed) < 1e-13);
    }

    #[test]
    fn trace_norm_of_difference_of_orthogonal_pures_is_two() {
        let mut m = CMat::<f64>::zeros(2, 2);
        m[(0, 0)] = c(1., 0.);
        m[(1, 1)] = c(-1., 0.);
        assert!((trace_norm(&m) - 2.0).abs() < 1e-14);
    }
}
