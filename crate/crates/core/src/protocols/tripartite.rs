use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::measures::relative_entropy;
use crate::optim::{best_index, pattern_minimize, run_starts, stream_rng, Budget};
use crate::qkernel::{
    apply_kraus, linalg, partial_trace, steer, tensor_product, von_neumann_entropy, DensityMatrix, KrausMap,
    ProjectiveBasis,
};
use crate::scalar::CMat;

/// A steered state counts as pure when its top eigenvalue reaches `1 - PURE_TOL`.
pub const PURE_TOL: f64 = 1e-9;
const REE_STARTS: usize = 16;
const REE_TERMS: usize = 8;
const ABSENT_LOGIT: f64 = -40.0;

/// Weight and local vectors of one product term.
type ProductTerm = (f64, DVector<Complex<f64>>, DVector<Complex<f64>>);

/// `|j>_B |k>_C -> |j>_B |k + j mod d_C>_C` acting on subsystems 1 and 2
/// of an A, B, C state.
pub fn incoherent_cnot(db: usize, dc: usize) -> Result<KrausMap<f64>> {
    if dc < db {
        return Err(Error::DimensionMismatch(format!("ancilla dimension {dc} below system dimension {db}")));
    }
    let n = db * dc;
    let mut u = CMat::zeros(n, n);
    for j in 0..db {
        for k in 0..dc {
            u[(j * dc + (k + j) % dc, j * dc + k)] = Complex::new(1.0, 0.0);
        }
    }
    KrausMap::unitary(u, 1, 2)
}

/// `I_A ⊗ U_BC (ϱ ⊗ |0><0|_C)` with Bob first rotated into the eigenbasis of
/// `ϱ_B`, so that the copy acts in that basis.
pub fn prepare_protocol_state(varrho: &DensityMatrix<f64>, dc: usize) -> Result<DensityMatrix<f64>> {
    let (da, db) = crate::correlations::check_bipartite(varrho)?;
    let frame = linalg::eig_hermitian(partial_trace(varrho, &[1])?.data(), varrho.tol())?.vectors;
    let aligned = varrho.conjugate(&linalg::embed(&frame.adjoint(), &[da, db], 1, 1))?;
    let ancilla = DensityMatrix::basis_state(vec![dc], 0)?;
    apply_kraus(&tensor_product(&aligned, &ancilla)?, &incoherent_cnot(db, dc)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEntanglement {
    pub prob: f64,
    pub entanglement: f64,
    /// Entanglement entropy of a pure steered state rather than a
    /// feasible-point upper bound.
    pub exact: bool,
    pub negligible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringEntanglement {
    pub average: f64,
    pub outcomes: Vec<OutcomeEntanglement>,
    pub exact: bool,
    pub converged: bool,
}

/// Alice measures subsystem 0 of an A, B, C state; each steered B, C state
/// is scored by its entanglement entropy when pure and by [`ree_numeric`]
/// otherwise.
pub fn steering_induced_entanglement(
    rho_abc: &DensityMatrix<f64>,
    alice: &ProjectiveBasis<f64>,
    budget: &Budget,
) -> Result<SteeringEntanglement> {
    if rho_abc.dims().len() != 3 {
        return Err(Error::InvalidSubsystems(format!("expected three subsystems, got {:?}", rho_abc.dims())));
    }
    let mut outcomes = Vec::new();
    let (mut average, mut exact, mut converged) = (0.0, true, true);
    for o in steer(rho_abc, alice)?.outcomes {
        if o.negligible {
            outcomes.push(OutcomeEntanglement { prob: o.prob, entanglement: 0.0, exact: true, negligible: true });
            continue;
        }
        let top = o.state.eigenvalues().into_iter().fold(f64::NEG_INFINITY, f64::max);
        let (e, is_exact) = if top >= 1.0 - PURE_TOL {
            (von_neumann_entropy(&partial_trace(&o.state, &[0])?), true)
        } else {
            let ree = ree_numeric(&o.state, budget)?;
            converged &= ree.converged;
            (ree.value, false)
        };
        exact &= is_exact;
        average += o.prob * e;
        outcomes.push(OutcomeEntanglement { prob: o.prob, entanglement: e, exact: is_exact, negligible: false });
    }
    Ok(SteeringEntanglement { average, outcomes, exact, converged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ree {
    /// `S(rho || sigma)` at the best separable `sigma` found; an upper bound
    /// on the relative entropy of entanglement.
    pub value: f64,
    /// Value at the classical-classical candidate dephased in both marginal
    /// eigenbases.
    pub candidate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct SeparableChart {
    dims: [usize; 2],
    terms: usize,
}

impl SeparableChart {
    fn param_len(&self) -> usize {
        self.terms * (1 + 2 * (self.dims[0] + self.dims[1]))
    }

    fn unit(x: &[f64]) -> DVector<Complex<f64>> {
        let v = DVector::from_iterator(x.len() / 2, x.chunks(2).map(|p| Complex::new(p[0], p[1])));
        let n = v.norm();
        if n < 1e-300 {
            let mut e = DVector::zeros(v.len());
            e[0] = Complex::new(1.0, 0.0);
            e
        } else {
            v.unscale(n)
        }
    }

    fn sigma(&self, x: &[f64]) -> CMat<f64> {
        let [da, db] = self.dims;
        let (logits, rest) = x.split_at(self.terms);
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut out = CMat::zeros(da * db, da * db);
        for (k, chunk) in rest.chunks(2 * (da + db)).enumerate() {
            let (xa, xb) = chunk.split_at(2 * da);
            let psi = Self::unit(xa).kronecker(&Self::unit(xb));
            out += (&psi * psi.adjoint()).scale(w[k] / total);
        }
        out
    }

    fn encode(&self, terms: &[ProductTerm]) -> Vec<f64> {
        let mut logits = vec![ABSENT_LOGIT; self.terms];
        let mut vecs = Vec::with_capacity(self.param_len() - self.terms);
        for (k, logit) in logits.iter_mut().enumerate() {
            let (a, b) = match terms.get(k) {
                Some((w, a, b)) => {
                    *logit = w.max(1e-300).ln();
                    (a.clone(), b.clone())
                }
                None => {
                    let mut a = DVector::zeros(self.dims[0]);
                    let mut b = DVector::zeros(self.dims[1]);
                    a[0] = Complex::new(1.0, 0.0);
                    b[0] = Complex::new(1.0, 0.0);
                    (a, b)
                }
            };
            for z in a.iter().chain(b.iter()) {
                vecs.push(z.re);
                vecs.push(z.im);
            }
        }
        logits.extend(vecs);
        logits
    }
}

/// Feasible-point minimization of `S(rho || sigma)` over separable
/// `sigma = sum_k p_k |a_k><a_k| ⊗ |b_k><b_k|`, seeded with the
/// classical-classical candidate and random mixtures.
pub fn ree_numeric(rho: &DensityMatrix<f64>, budget: &Budget) -> Result<Ree> {
    let (da, db) = crate::correlations::check_bipartite(rho)?;
    let chart = SeparableChart { dims: [da, db], terms: REE_TERMS.max(da * db) };
    let fa = linalg::eig_hermitian(partial_trace(rho, &[0])?.data(), rho.tol())?.vectors;
    let fb = linalg::eig_hermitian(partial_trace(rho, &[1])?.data(), rho.tol())?.vectors;
    let mut terms = Vec::new();
    for i in 0..da {
        for j in 0..db {
            let (a, b) = (fa.column(i).into_owned(), fb.column(j).into_owned());
            let psi = a.kronecker(&b);
            let w = (psi.adjoint() * rho.data() * &psi)[(0, 0)].re.max(0.0);
            terms.push((w, a, b));
        }
    }
    let candidate_x = chart.encode(&terms);
    let objective = |x: &[f64]| relative_entropy(rho.data(), &chart.sigma(x)).unwrap_or(f64::INFINITY);
    let candidate = objective(&candidate_x);
    let opts = budget.search_options();
    let runs = run_starts(REE_STARTS, |s| {
        let x0 = if s == 0 {
            candidate_x.clone()
        } else {
            let mut rng = stream_rng(budget.seed, 0x5245_4500 + s as u64);
            (0..chart.param_len()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect()
        };
        pattern_minimize(objective, x0, opts)
    });
    let best = best_index(runs.iter().map(|r| r.value), false).expect("at least one start");
    Ok(Ree {
        value: runs[best].value.min(candidate).max(0.0),
        candidate,
        converged: runs[best].converged,
        evaluations: runs.iter().map(|r| r.evals).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{coherence, DistanceKind};
    use crate::protocols::{bell, random, rho_x, werner};
    use crate::qkernel::linalg::max_abs_diff;

    fn quick() -> Budget {
        Budget { evals_per_start: 1500, ..Budget::default() }
    }

    #[test]
    fn cnot_is_the_textbook_matrix() {
        let map = incoherent_cnot(2, 2).unwrap();
        let expected = [[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]];
        let u = &map.operators()[0];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(u[(r, c)].re, expected[r][c]);
            }
        }
        assert!(incoherent_cnot(3, 2).is_err());
    }

    #[test]
    fn cnot_copies_amplitudes_and_keeps_diagonals() {
        let map = incoherent_cnot(2, 3).unwrap();
        let u = &map.operators()[0];
        let (al, be) = (Complex::new(0.6, 0.0), Complex::new(0.0, 0.8));
        let mut input = DVector::zeros(6);
        input[0] = al;
        input[3] = be;
        let out = u * input;
        assert_eq!(out[0], al);
        assert_eq!(out[4], be);
        let diag = CMat::from_diagonal(&DVector::from_fn(6, |i, _| Complex::new((i + 1) as f64 / 21.0, 0.0)));
        let moved = u * diag * u.adjoint();
        assert!(max_abs_diff(&moved, &CMat::from_diagonal(&moved.diagonal())) < 1e-15);
    }

    #[test]
    fn rho_x_reaches_one_ebit() {
        let out = steering_induced_entanglement(&rho_x(), &ProjectiveBasis::computational(2), &quick()).unwrap();
        assert!(out.exact);
        assert!((out.average - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_with_classical_pair_has_no_entanglement() {
        let mut rng = stream_rng(2, 0);
        let a = random::random_hs(&[2], &mut rng).unwrap();
        let bc = DensityMatrix::basis_state(vec![2, 2], 1).unwrap();
        let state = tensor_product(&a, &bc).unwrap();
        let out = steering_induced_entanglement(&state, &ProjectiveBasis::computational(2), &quick()).unwrap();
        assert!(out.average.abs() < 1e-9);
    }

    #[test]
    fn pure_input_gives_pure_steered_states() {
        let mut rng = stream_rng(4, 0);
        let varrho = random::random_pure(&[2, 2], &mut rng).unwrap();
        let abc = prepare_protocol_state(&varrho, 2).unwrap();
        for o in steer(&abc, &crate::correlations::fourier_basis(2)).unwrap().outcomes {
            assert!(o.state.purity() >= 1.0 - 1e-9);
        }
        let out = steering_induced_entanglement(&abc, &crate::correlations::fourier_basis(2), &quick()).unwrap();
        assert!(out.exact);
    }

    #[test]
    fn ree_of_separable_and_bell() {
        let classical = DensityMatrix::mixture(&[
            (0.3, &DensityMatrix::basis_state(vec![2, 2], 0).unwrap()),
            (0.7, &DensityMatrix::basis_state(vec![2, 2], 3).unwrap()),
        ])
        .unwrap();
        assert!(ree_numeric(&classical, &quick()).unwrap().value < 1e-6);
        let b = ree_numeric(&bell(), &quick()).unwrap();
        assert!(b.value <= 1.0 + 1e-3 && b.value >= 0.0, "{}", b.value);
    }

    #[test]
    fn ree_below_dephased_bound() {
        let w = werner(0.9).unwrap();
        let ree = ree_numeric(&w, &quick()).unwrap();
        let bound = coherence(DistanceKind::RelativeEntropy, &w, &ProjectiveBasis::computational(4)).unwrap();
        assert!(ree.value <= bound + 1e-9);
        assert!(ree.value <= ree.candidate + 1e-9);
        assert!(ree.value >= 0.0);
    }
}
