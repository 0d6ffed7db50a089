use nalgebra::{Complex, ComplexField};

use super::linalg::{self, hermiticity_defect};
use crate::error::{Error, Result};
use crate::scalar::{CMat, CVec, Real};

/// Hermitian, unit-trace, positive semidefinite matrix on a tensor product
/// of subsystems with the given dimensions.
///
/// Every constructor validates the invariants within `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    dims: Vec<usize>,
    data: CMat<T>,
    tol: T,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(dims: Vec<usize>, data: CMat<T>) -> Result<Self> {
        Self::with_tol(dims, data, T::default_tol())
    }

    pub fn with_tol(dims: Vec<usize>, data: CMat<T>, tol: T) -> Result<Self> {
        let state = Self { dims, data, tol };
        state.validate()?;
        Ok(state)
    }

    /// Skips validation; for internal results that are valid by construction
    /// up to round-off.
    pub(crate) fn from_parts(dims: Vec<usize>, data: CMat<T>, tol: T) -> Self {
        debug_assert_eq!(data.nrows(), dims.iter().product::<usize>());
        Self { dims, data, tol }
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn from_pure(dims: Vec<usize>, psi: &CVec<T>) -> Result<Self> {
        let norm = psi.norm();
        if norm <= T::eig_floor() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(dims, &v * v.adjoint())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        let data = CMat::<T>::identity(n, n).unscale(T::from_usize(n).unwrap());
        Self::new(dims, data)
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::InvalidState(format!("basis index {index} out of range {n}")));
        }
        let mut data = CMat::<T>::zeros(n, n);
        data[(index, index)] = Complex::from_real(T::one());
        Self::new(dims, data)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidState(format!("subsystem dimensions must each be >= 2, got {:?}", self.dims)));
        }
        let side: usize = self.dims.iter().product();
        if self.data.nrows() != side || self.data.ncols() != side {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{} but dims {:?} require side {side}",
                self.data.nrows(),
                self.data.ncols(),
                self.dims
            )));
        }
        if self.tol < T::zero() {
            return Err(Error::InvalidState("negative tolerance".into()));
        }
        let defect = hermiticity_defect(&self.data);
        if defect > self.tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {:.3e})", defect.as_f64())));
        }
        let tr = self.data.trace().re;
        if (tr - T::one()).abs() > self.tol {
            return Err(Error::InvalidState(format!("trace {:.12} != 1", tr.as_f64())));
        }
        let min_eig = linalg::hermitian_eigenvalues(&self.data)[0];
        if min_eig < -self.tol {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {:.3e})",
                min_eig.as_f64()
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat<T> {
        &self.data
    }

    pub fn into_data(self) -> CMat<T> {
        self.data
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn set_tol(&mut self, tol: T) {
        self.tol = tol;
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::hermitian_eigenvalues(&self.data)
    }

    pub fn purity(&self) -> T {
        (&self.data * &self.data).trace().re
    }

    /// Regroups the subsystems into `[prod(dims[..split]), prod(dims[split..])]`
    /// without touching the matrix.
    pub fn bipartition(&self, split: usize) -> Result<Self> {
        if split == 0 || split >= self.dims.len() {
            return Err(Error::InvalidSubsystems(format!(
                "split {split} must lie strictly inside 0..{}",
                self.dims.len()
            )));
        }
        let a = self.dims[..split].iter().product();
        let b = self.dims[split..].iter().product();
        Ok(Self::from_parts(vec![a, b], self.data.clone(), self.tol))
    }

    /// `U rho U†` for a unitary acting on the full space.
    pub fn conjugate(&self, u: &CMat<T>) -> Result<Self> {
        if u.nrows() != self.side() || u.ncols() != self.side() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state side {}",
                u.nrows(),
                u.ncols(),
                self.side()
            )));
        }
        Self::with_tol(self.dims.clone(), u * &self.data * u.adjoint(), self.tol)
    }

    /// `sum_k w_k rho_k`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(T, &Self)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?.1;
        let mut data = CMat::<T>::zeros(first.side(), first.side());
        let mut tol = T::zero();
        for (w, s) in parts {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch("mixture of states with different dims".into()));
            }
            data += s.data.scale(*w);
            tol = tol.max(s.tol);
        }
        Self::with_tol(first.dims.clone(), data, tol)
    }
}
