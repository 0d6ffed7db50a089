//! Distances between states and the distance-based coherence
//! `C(rho, basis) = D(rho, dephase(rho, basis))`.

use std::fmt;
use std::str::FromStr;

use nalgebra::ComplexField;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::{linalg, DensityMatrix, ProjectiveBasis};
use crate::scalar::{entropy_term, CMat, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceKind {
    /// Quantum relative entropy `S(rho || sigma)` in bits.
    #[serde(rename = "r")]
    RelativeEntropy,
    /// Entrywise l1 norm in the computational basis of the stored matrix.
    #[serde(rename = "l1")]
    L1,
    /// Trace norm `tr|rho - sigma|` (no factor 1/2).
    #[serde(rename = "t")]
    TraceNorm,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [DistanceKind::RelativeEntropy, DistanceKind::L1, DistanceKind::TraceNorm];

    pub fn short_name(self) -> &'static str {
        match self {
            DistanceKind::RelativeEntropy => "r",
            DistanceKind::L1 => "l1",
            DistanceKind::TraceNorm => "t",
        }
    }

    /// Whether `coherence` accepts this kind in dimension `dim`. The trace
    /// norm fails monotonicity under selective measurements in general, but
    /// coincides with l1 on a qubit.
    pub fn valid_for_coherence(self, dim: usize) -> bool {
        match self {
            DistanceKind::RelativeEntropy | DistanceKind::L1 => true,
            DistanceKind::TraceNorm => dim == 2,
        }
    }

    /// Unitarily invariant kinds, the only ones admissible for MID.
    pub fn valid_for_mid(self) -> bool {
        !matches!(self, DistanceKind::L1)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DistanceKind::RelativeEntropy => "relative-entropy",
            DistanceKind::L1 => "l1",
            DistanceKind::TraceNorm => "trace-norm",
        };
        f.write_str(name)
    }
}

impl FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "r" | "relative-entropy" => Ok(DistanceKind::RelativeEntropy),
            "l1" => Ok(DistanceKind::L1),
            "t" | "trace-norm" => Ok(DistanceKind::TraceNorm),
            other => Err(format!("unknown distance kind `{other}` (expected r, l1 or t)")),
        }
    }
}

pub fn distance<T: Real>(kind: DistanceKind, rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!("dims {:?} vs {:?}", rho.dims(), sigma.dims())));
    }
    matrix_distance(kind, rho.data(), sigma.data())
}

pub(crate) fn matrix_distance<T: Real>(kind: DistanceKind, rho: &CMat<T>, sigma: &CMat<T>) -> Result<T> {
    match kind {
        DistanceKind::RelativeEntropy => relative_entropy(rho, sigma),
        DistanceKind::L1 => Ok(rho.iter().zip(sigma.iter()).fold(T::zero(), |acc, (a, b)| acc + (*a - *b).modulus())),
        DistanceKind::TraceNorm => Ok(linalg::trace_norm(&(rho - sigma))),
    }
}

/// `tr(rho log2 rho) - tr(rho log2 sigma)` through both spectral
/// decompositions.
pub fn relative_entropy<T: Real>(rho: &CMat<T>, sigma: &CMat<T>) -> Result<T> {
    let er = linalg::eig_unchecked(rho);
    let es = linalg::eig_unchecked(sigma);
    let floor = T::eig_floor();
    let leak = floor * T::lit(1e3);
    let neg_entropy = -er.values.iter().fold(T::zero(), |a, &x| a + entropy_term(x));
    // <w_j| rho |w_j> for each eigenvector of sigma
    let rho_in_sigma = es.vectors.adjoint() * rho * &es.vectors;
    let mut cross = T::zero();
    for (j, &mu) in es.values.iter().enumerate() {
        let weight = rho_in_sigma[(j, j)].re;
        if mu <= floor {
            if weight > leak {
                return Err(Error::InfiniteDivergence);
            }
            continue;
        }
        cross += weight * mu.log2();
    }
    Ok((neg_entropy - cross).max(T::zero()))
}

/// `D(rho, dephase(rho, basis))` with `basis` spanning the whole space of
/// `rho` (a product basis for composite states). Matrix entries are read in
/// the frame of `basis`, which matters for the entrywise l1 distance.
pub fn coherence<T: Real>(kind: DistanceKind, rho: &DensityMatrix<T>, basis: &ProjectiveBasis<T>) -> Result<T> {
    let n = rho.side();
    if basis.dim() != n {
        return Err(Error::DimensionMismatch(format!("basis dimension {} for state of side {n}", basis.dim())));
    }
    if !kind.valid_for_coherence(n) {
        return Err(Error::CoherenceInvalid { kind, dim: n });
    }
    let u = basis.as_unitary();
    let in_frame = u.adjoint() * rho.data() * u;
    let dephased = CMat::from_diagonal(&in_frame.diagonal());
    matrix_distance(kind, &in_frame, &dephased)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::{dephase, DensityMatrix};
    use crate::scalar::{c, CVec};
    use nalgebra::DVector;

    fn ket(amps: &[f64]) -> CVec<f64> {
        DVector::from_iterator(amps.len(), amps.iter().map(|&r| c(r, 0.)))
    }

    fn plus() -> DensityMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(vec![2], &ket(&[s, s])).unwrap()
    }

    fn phi_plus() -> DensityMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(vec![2, 2], &ket(&[s, 0., 0., s])).unwrap()
    }

    #[test]
    fn distance_examples() {
        let rho = phi_plus();
        assert_eq!(distance(DistanceKind::RelativeEntropy, &rho, &rho).unwrap(), 0.0);

        let deph = dephase(&rho, &ProjectiveBasis::computational(2), 1).unwrap();
        let d = distance(DistanceKind::RelativeEntropy, &rho, &deph).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        let half = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!((distance(DistanceKind::L1, &plus(), &half).unwrap() - 1.0).abs() < 1e-15);

        let zero = DensityMatrix::basis_state(vec![2], 0).unwrap();
        let one = DensityMatrix::basis_state(vec![2], 1).unwrap();
        assert!((distance::<f64>(DistanceKind::TraceNorm, &zero, &one).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn support_violation_is_signalled() {
        let zero = DensityMatrix::<f64>::basis_state(vec![2], 0).unwrap();
        let one = DensityMatrix::basis_state(vec![2], 1).unwrap();
        assert!(matches!(distance(DistanceKind::RelativeEntropy, &zero, &one), Err(Error::InfiniteDivergence)));
        // the other direction of an embedded support is finite
        let half = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!((distance(DistanceKind::RelativeEntropy, &zero, &half).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn l1_coherence_is_read_in_the_reference_frame() {
        let a = std::f64::consts::PI / 8.0;
        let tilted = ProjectiveBasis::from_vectors(&[ket(&[a.cos(), a.sin()]), ket(&[-a.sin(), a.cos()])]).unwrap();
        let zero = DensityMatrix::<f64>::basis_state(vec![2], 0).unwrap();
        let expected = (2.0 * a).sin();
        assert!((coherence(DistanceKind::L1, &zero, &tilted).unwrap() - expected).abs() < 1e-12);
        assert!((coherence(DistanceKind::TraceNorm, &zero, &tilted).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn coherence_examples() {
        let z = ProjectiveBasis::computational(2);
        assert!((coherence(DistanceKind::RelativeEntropy, &plus(), &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((coherence(DistanceKind::L1, &plus(), &z).unwrap() - 1.0).abs() < 1e-15);
        let mut m = CMat::<f64>::zeros(2, 2);
        m[(0, 0)] = c(0.3, 0.);
        m[(1, 1)] = c(0.7, 0.);
        let incoherent = DensityMatrix::new(vec![2], m).unwrap();
        assert_eq!(coherence(DistanceKind::L1, &incoherent, &z).unwrap(), 0.0);
        assert!(coherence(DistanceKind::RelativeEntropy, &incoherent, &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn trace_norm_coherence_only_on_qubits() {
        let qutrit = DensityMatrix::<f64>::maximally_mixed(vec![3]).unwrap();
        assert!(matches!(
            coherence(DistanceKind::TraceNorm, &qutrit, &ProjectiveBasis::computational(3)),
            Err(Error::CoherenceInvalid { dim: 3, .. })
        ));
        assert!(coherence(DistanceKind::TraceNorm, &plus(), &ProjectiveBasis::computational(2)).is_ok());
    }

    #[test]
    fn kind_parsing() {
        for k in DistanceKind::ALL {
            assert_eq!(k.short_name().parse::<DistanceKind>().unwrap(), k);
        }
        assert!("fidelity".parse::<DistanceKind>().is_err());
    }
}
