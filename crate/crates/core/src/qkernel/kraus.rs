use super::linalg::max_abs_diff;
use crate::error::{Error, Result};
use crate::scalar::{CMat, Real};

/// Trace-preserving Kraus map acting on the contiguous subsystems
/// `target .. target + span` of a composite state.
#[derive(Debug, Clone)]
pub struct KrausMap<T: Real> {
    operators: Vec<CMat<T>>,
    target: usize,
    span: usize,
}

impl<T: Real> KrausMap<T> {
    /// Map on the single subsystem `target`.
    pub fn new(operators: Vec<CMat<T>>, target: usize) -> Result<Self> {
        Self::on_subsystems(operators, target, 1)
    }

    pub fn on_subsystems(operators: Vec<CMat<T>>, target: usize, span: usize) -> Result<Self> {
        Self::on_subsystems_with_tol(operators, target, span, T::default_tol())
    }

    pub fn on_subsystems_with_tol(operators: Vec<CMat<T>>, target: usize, span: usize, tol: T) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::InvalidState("Kraus map without operators".into()))?;
        let d = first.nrows();
        if span == 0 || operators.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch("Kraus operators must share one square shape".into()));
        }
        let completeness = operators.iter().fold(CMat::<T>::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs_diff(&completeness, &CMat::<T>::identity(d, d));
        if defect > tol {
            return Err(Error::NotTracePreserving(defect.as_f64()));
        }
        Ok(Self { operators, target, span })
    }

    pub fn identity(d: usize, target: usize) -> Self {
        Self { operators: vec![CMat::<T>::identity(d, d)], target, span: 1 }
    }

    /// Single unitary operator.
    pub fn unitary(u: CMat<T>, target: usize, span: usize) -> Result<Self> {
        Self::on_subsystems(vec![u], target, span)
    }

    pub fn operators(&self) -> &[CMat<T>] {
        &self.operators
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }
}
