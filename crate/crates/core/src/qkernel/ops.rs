use nalgebra::{Complex, ComplexField};

use super::basis::ProjectiveBasis;
use super::kraus::KrausMap;
use super::linalg::{self, embed};
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::scalar::{entropy_term, CMat, Real};

/// Outcomes whose probability falls below this are excluded from averages.
pub const NEGLIGIBLE_PROB: f64 = 1e-12;

pub fn tensor_product<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    let dims = a.dims().iter().chain(b.dims()).copied().collect();
    DensityMatrix::with_tol(dims, a.data().kronecker(b.data()), a.tol().max(b.tol()))
}

/// Reduced state on the subsystems listed in `keep` (any order; output keeps
/// the original subsystem order).
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    let dims = rho.dims();
    let n = dims.len();
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= n) {
        return Err(Error::InvalidSubsystems(format!("{keep:?} for {n} subsystems")));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_side: usize = kept_dims.iter().product();
    let t_side: usize = traced_dims.iter().product();

    // stride of each subsystem in the full (row-major, subsystem 0 major) index
    let mut stride = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }
    let offset = |multi_src: usize, which: &[usize], which_dims: &[usize]| -> usize {
        let mut rem = multi_src;
        let mut idx = 0;
        for (pos, &k) in which.iter().enumerate().rev() {
            let d = which_dims[pos];
            idx += (rem % d) * stride[k];
            rem /= d;
        }
        idx
    };
    let kept_off: Vec<usize> = (0..out_side).map(|r| offset(r, &kept, &kept_dims)).collect();
    let traced_off: Vec<usize> = (0..t_side).map(|t| offset(t, &traced, &traced_dims)).collect();

    let data = rho.data();
    let mut out = CMat::<T>::zeros(out_side, out_side);
    for r in 0..out_side {
        for c in 0..out_side {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &t in &traced_off {
                acc += data[(kept_off[r] + t, kept_off[c] + t)];
            }
            out[(r, c)] = acc;
        }
    }
    DensityMatrix::with_tol(kept_dims, out, rho.tol())
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> T {
    matrix_entropy(rho.data())
}

/// `-tr(m log2 m)` of a Hermitian PSD matrix, eigenvalues below the floor
/// dropped. Works on unnormalized matrices too.
pub fn matrix_entropy<T: Real>(m: &CMat<T>) -> T {
    linalg::hermitian_eigenvalues(m).into_iter().fold(T::zero(), |acc, x| acc + entropy_term(x))
}

/// One branch of Alice's selective measurement.
#[derive(Debug, Clone)]
pub struct SteeredState<T: Real> {
    pub prob: T,
    /// Conditional state of the remaining subsystems. Maximally mixed
    /// placeholder when `negligible` is set.
    pub state: DensityMatrix<T>,
    /// Probability below [`NEGLIGIBLE_PROB`]; excluded from averages.
    pub negligible: bool,
}

#[derive(Debug, Clone)]
pub struct SteeringEnsemble<T: Real> {
    pub outcomes: Vec<SteeredState<T>>,
}

impl<T: Real> SteeringEnsemble<T> {
    pub fn total_probability(&self) -> T {
        self.outcomes.iter().fold(T::zero(), |a, o| a + o.prob)
    }

    /// `sum_i p_i rho_i` over non-negligible outcomes.
    pub fn average(&self) -> Result<DensityMatrix<T>> {
        let parts: Vec<(T, &DensityMatrix<T>)> =
            self.outcomes.iter().filter(|o| !o.negligible).map(|o| (o.prob, &o.state)).collect();
        let first = parts[0].1;
        let mut data = CMat::<T>::zeros(first.side(), first.side());
        for (p, s) in &parts {
            data += s.data().scale(*p);
        }
        DensityMatrix::with_tol(first.dims().to_vec(), data, first.tol())
    }
}

/// Unnormalized conditional operator `<xi| rho |xi>` on subsystems `1..`
/// for a vector `xi` on subsystem 0.
pub fn conditional_operator<T: Real>(rho: &CMat<T>, dim_a: usize, xi: &[Complex<T>]) -> CMat<T> {
    let rest = rho.nrows() / dim_a;
    let mut m = CMat::<T>::zeros(rest, rest);
    for a in 0..dim_a {
        for ap in 0..dim_a {
            let w = xi[a].conj() * xi[ap];
            if w.modulus() == T::zero() {
                continue;
            }
            let block = rho.view((a * rest, ap * rest), (rest, rest));
            m += block * w;
        }
    }
    m
}

/// Alice (subsystem 0) measures in `basis`; returns the probabilities and
/// conditional states of the remaining subsystems.
pub fn steer<T: Real>(rho: &DensityMatrix<T>, basis: &ProjectiveBasis<T>) -> Result<SteeringEnsemble<T>> {
    let dims = rho.dims();
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch("steering needs at least two subsystems".into()));
    }
    if basis.dim() != dims[0] {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} but subsystem 0 has dimension {}",
            basis.dim(),
            dims[0]
        )));
    }
    let rest_dims: Vec<usize> = dims[1..].to_vec();
    let negligible = T::lit(NEGLIGIBLE_PROB);
    let mut outcomes = Vec::with_capacity(basis.dim());
    for i in 0..basis.dim() {
        let xi: Vec<Complex<T>> = basis.vector(i).iter().copied().collect();
        let m = conditional_operator(rho.data(), dims[0], &xi);
        let p = m.trace().re;
        if p < negligible {
            outcomes.push(SteeredState {
                prob: p.max(T::zero()),
                state: DensityMatrix::maximally_mixed(rest_dims.clone())?,
                negligible: true,
            });
        } else {
            // hermitize: round-off in the block sum is not symmetric
            let data = linalg::hermitian_part(&m.unscale(p));
            outcomes.push(SteeredState {
                prob: p,
                state: DensityMatrix::with_tol(rest_dims.clone(), data, rho.tol())?,
                negligible: false,
            });
        }
    }
    Ok(SteeringEnsemble { outcomes })
}

/// Projective dephasing of subsystem `target` in `basis`:
/// `sum_i P_i rho P_i` with `P_i` embedded on `target`.
pub fn dephase<T: Real>(rho: &DensityMatrix<T>, basis: &ProjectiveBasis<T>, target: usize) -> Result<DensityMatrix<T>> {
    let dims = rho.dims();
    if target >= dims.len() {
        return Err(Error::InvalidSubsystems(format!("target {target} for {} subsystems", dims.len())));
    }
    if basis.dim() != dims[target] {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} but subsystem {target} has dimension {}",
            basis.dim(),
            dims[target]
        )));
    }
    let data = dephase_matrix(rho.data(), dims, basis.as_unitary(), target);
    DensityMatrix::with_tol(dims.to_vec(), data, rho.tol())
}

/// Matrix-level dephasing; `basis` holds the basis vectors as columns.
pub(crate) fn dephase_matrix<T: Real>(rho: &CMat<T>, dims: &[usize], basis: &CMat<T>, target: usize) -> CMat<T> {
    // rotate target into the basis frame, zero its off-diagonal blocks, rotate back
    let v = embed(basis, dims, target, 1);
    let rotated = v.adjoint() * rho * &v;
    let right: usize = dims[target + 1..].iter().product();
    let d = dims[target];
    let side = rho.nrows();
    let mut kept = rotated;
    for r in 0..side {
        for c in 0..side {
            if (r / right) % d != (c / right) % d {
                kept[(r, c)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    &v * kept * v.adjoint()
}

/// Non-selective application `sum_n K_n rho K_n†`.
pub fn apply_kraus<T: Real>(rho: &DensityMatrix<T>, map: &KrausMap<T>) -> Result<DensityMatrix<T>> {
    let embedded = embedded_operators(rho, map)?;
    let side = rho.side();
    let mut out = CMat::<T>::zeros(side, side);
    for k in &embedded {
        out += k * rho.data() * k.adjoint();
    }
    DensityMatrix::with_tol(rho.dims().to_vec(), linalg::hermitian_part(&out), rho.tol())
}

/// One outcome of a selective Kraus measurement.
#[derive(Debug, Clone)]
pub struct KrausOutcome<T: Real> {
    pub prob: T,
    /// `K_n rho K_n† / p_n`; `None` when `p_n` is negligible.
    pub state: Option<DensityMatrix<T>>,
}

/// Selective application: `(p_n, K_n rho K_n† / p_n)` for each operator.
pub fn apply_kraus_selective<T: Real>(rho: &DensityMatrix<T>, map: &KrausMap<T>) -> Result<Vec<KrausOutcome<T>>> {
    let embedded = embedded_operators(rho, map)?;
    let negligible = T::lit(NEGLIGIBLE_PROB);
    embedded
        .iter()
        .map(|k| {
            let m = k * rho.data() * k.adjoint();
            let p = m.trace().re;
            if p < negligible {
                return Ok(KrausOutcome { prob: p.max(T::zero()), state: None });
            }
            let data = linalg::hermitian_part(&m.unscale(p));
            Ok(KrausOutcome { prob: p, state: Some(DensityMatrix::with_tol(rho.dims().to_vec(), data, rho.tol())?) })
        })
        .collect()
}

fn embedded_operators<T: Real>(rho: &DensityMatrix<T>, map: &KrausMap<T>) -> Result<Vec<CMat<T>>> {
    let dims = rho.dims();
    let end = map.target() + map.span();
    if end > dims.len() {
        return Err(Error::InvalidSubsystems(format!(
            "map on subsystems {}..{end} of a {}-partite state",
            map.target(),
            dims.len()
        )));
    }
    let local: usize = dims[map.target()..end].iter().product();
    if local != map.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map dimension {} but target subsystems have dimension {local}",
            map.dim()
        )));
    }
    Ok(map.operators().iter().map(|k| embed(k, dims, map.target(), map.span())).collect())
}

/// `(I ⊗ U ⊗ I) rho (I ⊗ U ⊗ I)†` with `U` on subsystem `target`.
pub fn apply_local_unitary<T: Real>(rho: &DensityMatrix<T>, u: &CMat<T>, target: usize) -> Result<DensityMatrix<T>> {
    let map = KrausMap::unitary(u.clone(), target, 1)?;
    apply_kraus(rho, &map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{c, CVec};
    use nalgebra::DVector;

    fn ket(amps: &[(f64, f64)]) -> CVec<f64> {
        DVector::from_iterator(amps.len(), amps.iter().map(|&(r, i)| c(r, i)))
    }

    fn phi_plus() -> DensityMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(vec![2, 2], &ket(&[(s, 0.), (0., 0.), (0., 0.), (s, 0.)])).unwrap()
    }

    fn plus() -> DensityMatrix<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(vec![2], &ket(&[(s, 0.), (s, 0.)])).unwrap()
    }

    fn gap_example() -> DensityMatrix<f64> {
        let ket01 = DensityMatrix::basis_state(vec![2, 2], 1).unwrap();
        DensityMatrix::mixture(&[(0.5, &phi_plus()), (0.5, &ket01)]).unwrap()
    }

    fn diag(vals: &[f64]) -> DensityMatrix<f64> {
        let n = vals.len();
        let mut m = CMat::<f64>::zeros(n, n);
        for (i, &v) in vals.iter().enumerate() {
            m[(i, i)] = c(v, 0.);
        }
        DensityMatrix::new(vec![n], m).unwrap()
    }

    #[test]
    fn tensor_of_pure_zeros() {
        let zero = DensityMatrix::<f64>::basis_state(vec![2], 0).unwrap();
        let t = tensor_product(&zero, &zero).unwrap();
        assert_eq!(t.dims(), &[2, 2]);
        assert_eq!(t, DensityMatrix::basis_state(vec![2, 2], 0).unwrap());
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let h = DensityMatrix::<f64>::maximally_mixed(vec![2]).unwrap();
        let t = tensor_product(&h, &h).unwrap();
        assert!(linalg::max_abs_diff(t.data(), DensityMatrix::maximally_mixed(vec![2, 2]).unwrap().data()) < 1e-15);
    }

    #[test]
    fn tensor_entry_hand_expanded() {
        // diag(0.9, 0.1) ⊗ |+><+| : entry (0,1) = 0.9 * 0.5
        let t = tensor_product(&diag(&[0.9, 0.1]), &plus()).unwrap();
        assert!((t.data()[(0, 1)].re - 0.45).abs() < 1e-15);
        assert!((t.data()[(2, 3)].re - 0.05).abs() < 1e-15);
        assert_eq!(t.data()[(0, 2)], c(0., 0.));
    }

    #[test]
    fn partial_trace_examples() {
        let rb = partial_trace(&phi_plus(), &[1]).unwrap();
        assert!(linalg::max_abs_diff(rb.data(), DensityMatrix::maximally_mixed(vec![2]).unwrap().data()) < 1e-15);

        let a = diag(&[0.9, 0.1]);
        let b = plus();
        let ab = tensor_product(&a, &b).unwrap();
        assert!(linalg::max_abs_diff(partial_trace(&ab, &[1]).unwrap().data(), b.data()) < 1e-15);
        assert!(linalg::max_abs_diff(partial_trace(&ab, &[0]).unwrap().data(), a.data()) < 1e-15);

        let g = partial_trace(&gap_example(), &[1]).unwrap();
        assert!(linalg::max_abs_diff(g.data(), diag(&[0.25, 0.75]).data()) < 1e-15);
    }

    #[test]
    fn partial_trace_middle_of_three() {
        let a = diag(&[0.9, 0.1]);
        let b = diag(&[0.2, 0.3, 0.5]);
        let abc = tensor_product(&tensor_product(&a, &b).unwrap(), &plus()).unwrap();
        assert!(linalg::max_abs_diff(partial_trace(&abc, &[1]).unwrap().data(), b.data()) < 1e-15);
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        assert!(linalg::max_abs_diff(ac.data(), tensor_product(&a, &plus()).unwrap().data()) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let r = phi_plus();
        assert!(partial_trace(&r, &[]).is_err());
        assert!(partial_trace(&r, &[2]).is_err());
        assert!(partial_trace(&r, &[0, 0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&phi_plus()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::<f64>::maximally_mixed(vec![2]).unwrap()) - 1.0).abs() < 1e-14);
        let h = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        let s = von_neumann_entropy(&diag(&[0.9, 0.1]));
        assert!((s - 0.4690).abs() < 1e-4);
        assert!((s - h).abs() < 1e-14);
    }

    #[test]
    fn steering_bell_state() {
        let z = steer(&phi_plus(), &ProjectiveBasis::computational(2)).unwrap();
        for (i, o) in z.outcomes.iter().enumerate() {
            assert!((o.prob - 0.5).abs() < 1e-15);
            let expected = DensityMatrix::basis_state(vec![2], i).unwrap();
            assert!(linalg::max_abs_diff(o.state.data(), expected.data()) < 1e-15);
        }

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x_basis = ProjectiveBasis::from_vectors(&[ket(&[(s, 0.), (s, 0.)]), ket(&[(s, 0.), (-s, 0.)])]).unwrap();
        let x = steer(&phi_plus(), &x_basis).unwrap();
        let minus = DensityMatrix::from_pure(vec![2], &ket(&[(s, 0.), (-s, 0.)])).unwrap();
        assert!((x.outcomes[0].prob - 0.5).abs() < 1e-15);
        assert!(linalg::max_abs_diff(x.outcomes[0].state.data(), plus().data()) < 1e-15);
        assert!(linalg::max_abs_diff(x.outcomes[1].state.data(), minus.data()) < 1e-15);
    }

    #[test]
    fn steering_product_state_leaves_bob_unchanged() {
        let rb = diag(&[0.3, 0.7]);
        let rho = tensor_product(&plus(), &rb).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = ProjectiveBasis::from_vectors(&[ket(&[(s, 0.), (0., s)]), ket(&[(s, 0.), (0., -s)])]).unwrap();
        for o in steer(&rho, &basis).unwrap().outcomes {
            assert!(linalg::max_abs_diff(o.state.data(), rb.data()) < 1e-14);
        }
    }

    #[test]
    fn steering_flags_zero_probability_branch() {
        let rho = DensityMatrix::<f64>::basis_state(vec![2, 2], 0).unwrap();
        let z = steer(&rho, &ProjectiveBasis::computational(2)).unwrap();
        assert!(!z.outcomes[0].negligible);
        assert!(z.outcomes[1].negligible);
        assert!(
            linalg::max_abs_diff(z.average().unwrap().data(), DensityMatrix::basis_state(vec![2], 0).unwrap().data())
                < 1e-15
        );
    }

    #[test]
    fn steering_dimension_mismatch() {
        assert!(steer(&phi_plus(), &ProjectiveBasis::computational(3)).is_err());
    }

    #[test]
    fn dephase_examples() {
        let out = dephase(&plus(), &ProjectiveBasis::computational(2), 0).unwrap();
        assert!(linalg::max_abs_diff(out.data(), DensityMatrix::maximally_mixed(vec![2]).unwrap().data()) < 1e-15);

        let d = diag(&[0.2, 0.8]);
        assert!(
            linalg::max_abs_diff(dephase(&d, &ProjectiveBasis::computational(2), 0).unwrap().data(), d.data()) < 1e-15
        );

        let g = dephase(&gap_example(), &ProjectiveBasis::computational(2), 1).unwrap();
        let mut expected = CMat::<f64>::zeros(4, 4);
        expected[(0, 0)] = c(0.25, 0.);
        expected[(1, 1)] = c(0.5, 0.);
        expected[(3, 3)] = c(0.25, 0.);
        assert!(linalg::max_abs_diff(g.data(), &expected) < 1e-15);
    }

    #[test]
    fn kraus_examples() {
        let id = KrausMap::<f64>::identity(2, 0);
        assert_eq!(apply_kraus(&plus(), &id).unwrap(), plus());

        let p0 = ProjectiveBasis::<f64>::computational(2).projector(0);
        let p1 = ProjectiveBasis::<f64>::computational(2).projector(1);
        let deph = KrausMap::new(vec![p0, p1], 0).unwrap();
        let mixed = apply_kraus(&plus(), &deph).unwrap();
        assert!(linalg::max_abs_diff(mixed.data(), DensityMatrix::maximally_mixed(vec![2]).unwrap().data()) < 1e-15);

        let sel = apply_kraus_selective(&plus(), &deph).unwrap();
        for (i, o) in sel.iter().enumerate() {
            assert!((o.prob - 0.5).abs() < 1e-15);
            let expected = DensityMatrix::basis_state(vec![2], i).unwrap();
            assert!(linalg::max_abs_diff(o.state.as_ref().unwrap().data(), expected.data()) < 1e-15);
        }
    }

    #[test]
    fn kraus_rejects_non_trace_preserving() {
        let p0 = ProjectiveBasis::<f64>::computational(2).projector(0);
        assert!(matches!(KrausMap::new(vec![p0], 0), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn single_precision_kernel_route() {
        let a = DensityMatrix::<f32>::basis_state(vec![2], 0).unwrap();
        let b = DensityMatrix::<f32>::maximally_mixed(vec![2]).unwrap();
        let ab = tensor_product(&a, &b).unwrap();
        let back = partial_trace(&ab, &[1]).unwrap();
        assert!(linalg::max_abs_diff(back.data(), b.data()) < 1e-6);
        assert!((von_neumann_entropy(&ab) - 1.0).abs() < 1e-5);
    }
}
