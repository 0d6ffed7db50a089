use nalgebra::{Complex, ComplexField};

use super::linalg::unitarity_defect;
use crate::error::{Error, Result};
use crate::scalar::{CMat, CVec, Real};

/// Ordered orthonormal basis of one subsystem, stored as the columns of a
/// unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis<T: Real> {
    columns: CMat<T>,
}

impl<T: Real> ProjectiveBasis<T> {
    pub fn from_vectors(vectors: &[CVec<T>]) -> Result<Self> {
        let d = vectors.len();
        if d < 2 {
            return Err(Error::InvalidBasis(format!("need at least 2 vectors, got {d}")));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::InvalidBasis(format!("vector of length {} in dimension {d}", v.len())));
        }
        Self::from_unitary(CMat::from_columns(vectors))
    }

    /// Columns of `u` become the basis vectors.
    pub fn from_unitary(u: CMat<T>) -> Result<Self> {
        Self::from_unitary_with_tol(u, T::default_tol())
    }

    pub fn from_unitary_with_tol(u: CMat<T>, tol: T) -> Result<Self> {
        if !u.is_square() || u.nrows() < 2 {
            return Err(Error::InvalidBasis(format!("expected square matrix, got {}x{}", u.nrows(), u.ncols())));
        }
        let defect = unitarity_defect(&u);
        if defect > tol {
            return Err(Error::InvalidBasis(format!("vectors not orthonormal (defect {:.3e})", defect.as_f64())));
        }
        Ok(Self { columns: u })
    }

    pub(crate) fn from_unitary_unchecked(u: CMat<T>) -> Self {
        Self { columns: u }
    }

    pub fn computational(d: usize) -> Self {
        Self { columns: CMat::<T>::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn vector(&self, i: usize) -> CVec<T> {
        self.columns.column(i).into_owned()
    }

    pub fn vectors(&self) -> Vec<CVec<T>> {
        (0..self.dim()).map(|i| self.vector(i)).collect()
    }

    pub fn projector(&self, i: usize) -> CMat<T> {
        let v = self.columns.column(i);
        v * v.adjoint()
    }

    pub fn as_unitary(&self) -> &CMat<T> {
        &self.columns
    }

    /// Tensor product basis, ordered lexicographically (`self` index major).
    pub fn tensor(&self, other: &Self) -> Self {
        Self { columns: self.columns.kronecker(&other.columns) }
    }

    /// Largest `|<v_i|w_j>|^2` deviation from a permutation matrix, i.e. zero
    /// iff the two bases define the same set of rank-one projectors.
    pub fn projector_mismatch(&self, other: &Self) -> T {
        let overlap = self.columns.adjoint() * &other.columns;
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            let best = (0..d).map(|j| overlap[(i, j)].modulus_squared()).fold(T::zero(), |a, b| a.max(b));
            worst = worst.max(T::one() - best);
        }
        worst
    }

    /// Multiplies basis vector `i` by `exp(i phase_i)`; projectors unchanged.
    pub fn rephase(&self, phases: &[T]) -> Self {
        let mut cols = self.columns.clone();
        for (i, &p) in phases.iter().enumerate() {
            let ph = Complex::new(p.cos(), p.sin());
            for r in 0..self.dim() {
                cols[(r, i)] *= ph;
            }
        }
        Self { columns: cols }
    }
}
