//! Pauli coefficient matrix of two-qubit states and the closed form of the
//! l1 steering-induced coherence.
//!
//! A local unitary pair `(U_A, U_B)` acts on `Θ = (1 bᵀ; a T)` through the
//! rotations `(R_A, R_B)` as `a -> R_A a`, `b -> R_B b`, `T -> R_A T R_Bᵀ`.

use nalgebra::{Complex, Matrix3, Matrix4, UnitQuaternion, Vector3};

use crate::correlations::{b_side_mid, sic, DEGENERACY_GAP};
use crate::error::{Error, Result};
use crate::measures::DistanceKind;
use crate::optim::Budget;
use crate::qkernel::DensityMatrix;
use crate::report::VerificationReport;
use crate::scalar::{c, CMat, Real};

/// Agreement required between the closed form and both numerical values.
pub const THEOREM3_TOL: f64 = 1e-5;

/// `σ_0 = I, σ_1 = X, σ_2 = Y, σ_3 = Z`.
pub fn pauli<T: Real>(i: usize) -> CMat<T> {
    let (z, o) = (c::<T>(0.0, 0.0), c::<T>(1.0, 0.0));
    let e = match i {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        3 => [o, z, z, -o],
        _ => panic!("Pauli index {i} out of range"),
    };
    CMat::from_row_slice(2, 2, &e)
}

/// `Θ_ij = tr(ρ σ_i ⊗ σ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTheta<T: Real> {
    pub theta: Matrix4<T>,
}

impl<T: Real> PauliTheta<T> {
    pub fn from_blocks(a: Vector3<T>, b: Vector3<T>, t: Matrix3<T>) -> Self {
        let mut theta = Matrix4::zeros();
        theta[(0, 0)] = T::one();
        theta.fixed_view_mut::<3, 1>(1, 0).copy_from(&a);
        theta.fixed_view_mut::<1, 3>(0, 1).copy_from(&b.transpose());
        theta.fixed_view_mut::<3, 3>(1, 1).copy_from(&t);
        Self { theta }
    }

    /// Alice's Bloch vector.
    pub fn a(&self) -> Vector3<T> {
        self.theta.fixed_view::<3, 1>(1, 0).into_owned()
    }

    /// Bob's Bloch vector.
    pub fn b(&self) -> Vector3<T> {
        self.theta.fixed_view::<1, 3>(0, 1).transpose()
    }

    /// Correlation block, `t()[(i, j)] = Θ_{i+1, j+1}`.
    pub fn t(&self) -> Matrix3<T> {
        self.theta.fixed_view::<3, 3>(1, 1).into_owned()
    }

    pub fn rotated(&self, rot_a: &Matrix3<T>, rot_b: &Matrix3<T>) -> Self {
        Self::from_blocks(rot_a * self.a(), rot_b * self.b(), rot_a * self.t() * rot_b.transpose())
    }

    /// `ρ = ¼ sum_ij Θ_ij σ_i ⊗ σ_j`.
    pub fn reconstruct(&self) -> Result<DensityMatrix<T>> {
        let mut data = CMat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let w = self.theta[(i, j)] / T::lit(4.0);
                if w != T::zero() {
                    data += pauli::<T>(i).kronecker(&pauli::<T>(j)).scale(w);
                }
            }
        }
        DensityMatrix::new(vec![2, 2], data)
    }
}

pub fn pauli_decompose<T: Real>(rho: &DensityMatrix<T>) -> Result<PauliTheta<T>> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!("Pauli decomposition needs dims [2, 2], got {:?}", rho.dims())));
    }
    let theta = Matrix4::from_fn(|i, j| {
        let op = pauli::<T>(i).kronecker(&pauli::<T>(j));
        (rho.data() * op).trace().re
    });
    Ok(PauliTheta { theta })
}

/// SU(2) element implementing the Bloch rotation `r`: `U (n·σ) U† = (r n)·σ`.
pub fn rotation_unitary<T: Real>(r: &Matrix3<T>) -> CMat<T> {
    let q = UnitQuaternion::from_matrix(r);
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    CMat::from_row_slice(2, 2, &[Complex::new(w, -z), Complex::new(-y, -x), Complex::new(y, -x), Complex::new(w, z)])
}

/// Form reached by local rotations, with the rotations used.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForm<T: Real> {
    pub theta: PauliTheta<T>,
    pub rot_a: Matrix3<T>,
    pub rot_b: Matrix3<T>,
}

impl<T: Real> LocalForm<T> {
    /// The state `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†` for the rotations' SU(2)
    /// lifts.
    pub fn apply_to(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        let u = rotation_unitary(&self.rot_a).kronecker(&rotation_unitary(&self.rot_b));
        rho.conjugate(&u)
    }
}

/// Proper rotation taking the unit vector `v` to `+z`.
fn rotation_to_z<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = Vector3::z();
    let axis = v.cross(&z);
    let sin = axis.norm();
    let cos = v.dot(&z);
    if sin < T::lit(1e-14) {
        return if cos > T::zero() {
            Matrix3::identity()
        } else {
            Matrix3::from_diagonal(&Vector3::new(T::one(), -T::one(), -T::one()))
        };
    }
    let k = axis / sin;
    let kx = k.cross_matrix();
    Matrix3::identity() + kx * sin + kx * kx * (T::one() - cos)
}

/// Unit vector orthogonal to the (non-zero members of) `vs`.
fn orthogonal_to<T: Real>(vs: &[Vector3<T>]) -> Vector3<T> {
    let tiny = T::lit(1e-12);
    let live: Vec<Vector3<T>> = vs.iter().filter(|v| v.norm() > tiny).copied().collect();
    for (i, u) in live.iter().enumerate() {
        for w in &live[i + 1..] {
            let n = u.cross(w);
            if n.norm() > tiny * u.norm() * w.norm() {
                return n.normalize();
            }
        }
    }
    let seed = live.first().map(|v| v.normalize());
    let candidates = [Vector3::x(), Vector3::y(), Vector3::z()];
    match seed {
        None => candidates[0],
        Some(u) => {
            let e = candidates.iter().min_by(|p, q| u.dot(p).abs().partial_cmp(&u.dot(q).abs()).unwrap()).unwrap();
            (e - u * u.dot(e)).normalize()
        }
    }
}

/// Sign choice `v[axis] >= 0`, so canonical input maps to the identity.
fn oriented<T: Real>(v: Vector3<T>, axis: usize) -> Vector3<T> {
    if v[axis] < T::zero() {
        -v
    } else {
        v
    }
}

/// Bob's Bloch vector along `+z` and `T_11 = T_12 = T_21 = 0`.
pub fn canonical_form<T: Real>(theta: &PauliTheta<T>) -> Result<LocalForm<T>> {
    let b = theta.b();
    if b.norm().as_f64() < DEGENERACY_GAP {
        return Err(Error::DegenerateBranch);
    }
    let rot_b = rotation_to_z(&b.normalize());
    let t = theta.t() * rot_b.transpose();
    let (cx, cy) = (t.column(0).into_owned(), t.column(1).into_owned());
    let r1 = oriented(orthogonal_to(&[cx, cy]), 0);
    let r2 = oriented(orthogonal_to(&[r1, cx]), 1);
    let r3 = r1.cross(&r2);
    let rot_a = Matrix3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    Ok(LocalForm { theta: theta.rotated(&rot_a, &rot_b), rot_a, rot_b })
}

/// `T` diagonal with `|T_11| >= |T_22| >= |T_33|`, using proper rotations.
pub fn diagonal_form<T: Real>(theta: &PauliTheta<T>) -> LocalForm<T> {
    let svd = theta.t().svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let mut u_sorted = Matrix3::from_columns(&order.map(|k| u.column(k).into_owned()));
    let mut v_sorted = Matrix3::from_columns(&order.map(|k| v_t.row(k).transpose()));
    if u_sorted.determinant() < T::zero() {
        u_sorted.column_mut(2).neg_mut();
    }
    if v_sorted.determinant() < T::zero() {
        v_sorted.column_mut(2).neg_mut();
    }
    let (rot_a, rot_b) = (u_sorted.transpose(), v_sorted.transpose());
    let mut rotated = theta.rotated(&rot_a, &rot_b);
    for i in 1..4 {
        for j in 1..4 {
            if i != j {
                rotated.theta[(i, j)] = T::zero();
            }
        }
    }
    LocalForm { theta: rotated, rot_a, rot_b }
}

fn is_canonical<T: Real>(theta: &PauliTheta<T>) -> bool {
    let (b, t) = (theta.b(), theta.t());
    let tol = T::default_tol();
    b[0].abs() <= tol
        && b[1].abs() <= tol
        && b[2] > T::zero()
        && [t[(0, 0)], t[(0, 1)], t[(1, 0)]].iter().all(|x| x.abs() <= tol)
}

fn is_sorted_diagonal<T: Real>(theta: &PauliTheta<T>) -> bool {
    let t = theta.t();
    let tol = T::default_tol();
    let off_ok = (0..3).all(|i| (0..3).all(|j| i == j || t[(i, j)].abs() <= tol));
    off_ok && t[(0, 0)].abs() + tol >= t[(1, 1)].abs() && t[(1, 1)].abs() + tol >= t[(2, 2)].abs()
}

/// Closed form of `sic^{l1} = Q_B^t` for a Θ already in canonical form
/// (`b ≠ 0`) or sorted diagonal form (`b = 0`).
pub fn closed_form_sic_l1<T: Real>(theta: &PauliTheta<T>) -> Result<T> {
    let t = theta.t();
    if theta.b().norm().as_f64() < DEGENERACY_GAP {
        if !is_sorted_diagonal(theta) {
            return Err(Error::NotCanonical("b = 0 branch needs the sorted diagonal form".into()));
        }
        return Ok(t[(1, 1)].abs());
    }
    if !is_canonical(theta) {
        return Err(Error::NotCanonical("b ≠ 0 branch needs b along +z and T11 = T12 = T21 = 0".into()));
    }
    let (t22, t31, t32) = (t[(1, 1)].powi(2), t[(2, 0)].powi(2), t[(2, 1)].powi(2));
    let half = T::lit(0.5);
    let disc = (t32 + t22).powi(2) + T::lit(2.0) * t31 * (t32 - t22) + t31 * t31;
    let inner = (t22 + t31 + t32) * half + disc.max(T::zero()).sqrt() * half;
    Ok(inner.max(T::zero()).sqrt())
}

/// Decomposes, brings to the appropriate form and evaluates the closed form.
pub fn sic_l1_closed<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let theta = pauli_decompose(rho)?;
    match canonical_form(&theta) {
        Ok(form) => closed_form_sic_l1(&form.theta),
        Err(Error::DegenerateBranch) => closed_form_sic_l1(&diagonal_form(&theta).theta),
        Err(e) => Err(e),
    }
}

/// Closed form against numerical `sic^{l1}` and numerical `Q_B^t`. The
/// margin is minus the larger of the two disagreements.
pub fn verify_theorem3(rho: &DensityMatrix<f64>, budget: &Budget) -> Result<VerificationReport> {
    let closed = sic_l1_closed(rho)?;
    let numeric = sic(rho, DistanceKind::L1, budget)?;
    let qbt = b_side_mid(rho, DistanceKind::TraceNorm, budget)?;
    let worst = (closed - numeric.value).abs().max((closed - qbt.value).abs());
    let mut report =
        VerificationReport::equality("theorem3", Some(DistanceKind::L1), closed, numeric.value, THEOREM3_TOL);
    report.margin = -worst;
    report.verdict = if worst <= THEOREM3_TOL { crate::report::Verdict::Pass } else { crate::report::Verdict::Fail };
    Ok(report
        .with_seed(budget.seed)
        .with_converged(numeric.converged && qbt.converged)
        .with_note(format!("Q_B^t = {:.12}", qbt.value)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::stream_rng;
    use crate::protocols::{bell, bell_diagonal, gap_example, random, werner};
    use crate::qkernel::linalg::max_abs_diff;
    use approx::assert_abs_diff_eq;

    fn random_rotation(seed: u64) -> Matrix3<f64> {
        let mut rng = stream_rng(seed, 77);
        let u = random::haar_unitary(2, &mut rng);
        // Bloch rotation of U: R_ij = ½ tr(σ_i U σ_j U†)
        Matrix3::from_fn(|i, j| (pauli::<f64>(i + 1) * &u * pauli::<f64>(j + 1) * u.adjoint()).trace().re / 2.0)
    }

    #[test]
    fn maximally_mixed_has_zero_blocks() {
        let th = pauli_decompose(&DensityMatrix::<f64>::maximally_mixed(vec![2, 2]).unwrap()).unwrap();
        assert_eq!(th.theta[(0, 0)], 1.0);
        assert!(th.a().norm() < 1e-15 && th.b().norm() < 1e-15 && th.t().norm() < 1e-15);
    }

    #[test]
    fn bell_theta() {
        let th = pauli_decompose(&bell()).unwrap();
        assert_abs_diff_eq!(th.t(), Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)), epsilon = 1e-14);
        assert!(th.a().norm() < 1e-15 && th.b().norm() < 1e-15);
    }

    #[test]
    fn gap_example_theta() {
        let th = pauli_decompose(&gap_example()).unwrap();
        assert_abs_diff_eq!(th.a(), Vector3::new(0.0, 0.0, 0.5), epsilon = 1e-14);
        assert_abs_diff_eq!(th.b(), Vector3::new(0.0, 0.0, -0.5), epsilon = 1e-14);
        assert_abs_diff_eq!(th.t(), Matrix3::from_diagonal(&Vector3::new(0.5, -0.5, 0.0)), epsilon = 1e-14);
    }

    #[test]
    fn round_trip() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let rho = random::random_hs(&[2, 2], &mut rng).unwrap();
            let back = pauli_decompose(&rho).unwrap().reconstruct().unwrap();
            assert!(max_abs_diff(back.data(), rho.data()) < 1e-10);
        }
    }

    #[test]
    fn rotation_lift_matches_bloch_action() {
        for seed in 0..20 {
            let r = random_rotation(seed);
            let u = rotation_unitary(&r);
            for j in 1..4 {
                let lhs = &u * pauli::<f64>(j) * u.adjoint();
                let mut rhs = CMat::zeros(2, 2);
                for i in 1..4 {
                    rhs += pauli::<f64>(i).scale(r[(i - 1, j - 1)]);
                }
                assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_form_contract() {
        let mut rng = stream_rng(5, 0);
        for _ in 0..50 {
            let rho = random::random_hs(&[2, 2], &mut rng).unwrap();
            let theta = pauli_decompose(&rho).unwrap();
            let form = canonical_form(&theta).unwrap();
            let (b, t) = (form.theta.b(), form.theta.t());
            assert!(b[0].abs() < 1e-12 && b[1].abs() < 1e-12 && b[2] > 0.0);
            assert!(t[(0, 0)].abs() < 1e-10 && t[(0, 1)].abs() < 1e-10 && t[(1, 0)].abs() < 1e-10);
            for r in [form.rot_a, form.rot_b] {
                assert!((r.determinant() - 1.0).abs() < 1e-12);
                assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-12);
            }
            let moved = pauli_decompose(&form.apply_to(&rho).unwrap()).unwrap();
            assert!((moved.theta - form.theta.theta).abs().max() < 1e-9);
            let (mut e0, mut e1) = (rho.eigenvalues(), moved.reconstruct().unwrap().eigenvalues());
            e0.sort_by(f64::total_cmp);
            e1.sort_by(f64::total_cmp);
            for (x, y) in e0.iter().zip(&e1) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn canonical_input_keeps_identity_rotations() {
        let th = PauliTheta::from_blocks(
            Vector3::new(0.1, 0.0, 0.2),
            Vector3::new(0.0, 0.0, 0.3),
            Matrix3::new(0.0, 0.0, 0.1, 0.0, 0.4, 0.0, 0.2, 0.1, 0.3),
        );
        let form = canonical_form(&th).unwrap();
        assert_abs_diff_eq!(form.rot_b, Matrix3::identity(), epsilon = 1e-12);
        assert!((form.theta.theta - th.theta).abs().max() < 1e-12);
    }

    #[test]
    fn bob_rotated_state_recovers_canonical_values() {
        let th = pauli_decompose(&gap_example()).unwrap();
        let canon = canonical_form(&th).unwrap();
        let swapped = th.rotated(&Matrix3::identity(), &random_rotation(9));
        let again = canonical_form(&swapped).unwrap();
        assert!((closed_form_sic_l1(&again.theta).unwrap() - closed_form_sic_l1(&canon.theta).unwrap()).abs() < 1e-12);
        assert_abs_diff_eq!(again.theta.b(), canon.theta.b(), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_branch_signalled() {
        assert!(matches!(canonical_form(&pauli_decompose(&bell()).unwrap()), Err(Error::DegenerateBranch)));
    }

    #[test]
    fn diagonal_forms() {
        let d = diagonal_form(&pauli_decompose(&bell()).unwrap());
        let diag = d.theta.t().diagonal().map(f64::abs);
        assert_abs_diff_eq!(diag, Vector3::new(1.0, 1.0, 1.0), epsilon = 1e-12);
        let w = diagonal_form(&pauli_decompose(&werner(0.6).unwrap()).unwrap());
        assert_abs_diff_eq!(w.theta.t().diagonal().map(f64::abs), Vector3::new(0.6, 0.6, 0.6), epsilon = 1e-12);
        let zero =
            diagonal_form(&pauli_decompose(&DensityMatrix::<f64>::maximally_mixed(vec![2, 2]).unwrap()).unwrap());
        assert!(zero.theta.t().norm() < 1e-15);
        for r in [w.rot_a, w.rot_b] {
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_form_of_rotated_bell_diagonal() {
        let rho = bell_diagonal([0.5, 0.3, 0.15, 0.05]).unwrap();
        let th = pauli_decompose(&rho).unwrap().rotated(&random_rotation(1), &random_rotation(2));
        let d = diagonal_form(&th);
        assert!(is_sorted_diagonal(&d.theta));
        let mut sv: Vec<f64> = th.t().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for (i, s) in sv.iter().enumerate() {
            assert!((d.theta.t()[(i, i)].abs() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((sic_l1_closed(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert!((sic_l1_closed(&gap_example()).unwrap() - 0.5).abs() < 1e-12);
        let mut rng = stream_rng(8, 0);
        let a = random::random_pure(&[2], &mut rng).unwrap();
        let b = random::random_pure(&[2], &mut rng).unwrap();
        let product = crate::qkernel::tensor_product(&a, &b).unwrap();
        assert!(sic_l1_closed(&product).unwrap() < 1e-9);
    }

    #[test]
    fn closed_form_rejects_raw_input() {
        let th = pauli_decompose(&gap_example()).unwrap().rotated(&random_rotation(4), &random_rotation(5));
        assert!(matches!(closed_form_sic_l1(&th), Err(Error::NotCanonical(_))));
    }

    #[test]
    fn closed_form_invariant_under_local_unitaries() {
        let mut rng = stream_rng(6, 0);
        for seed in 0..20 {
            let rho = random::random_hs(&[2, 2], &mut rng).unwrap();
            let base = sic_l1_closed(&rho).unwrap();
            let u = rotation_unitary(&random_rotation(seed));
            let moved = rho.conjugate(&u.kronecker(&CMat::identity(2, 2))).unwrap();
            assert!((sic_l1_closed(&moved).unwrap() - base).abs() < 1e-9);
            let theta = pauli_decompose(&rho).unwrap();
            let axis = theta.b().normalize();
            let spin = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), 0.3 + seed as f64)
                .into_inner();
            let bob_moved = rho.conjugate(&CMat::identity(2, 2).kronecker(&rotation_unitary(&spin))).unwrap();
            assert!((sic_l1_closed(&bob_moved).unwrap() - base).abs() < 1e-9);
        }
    }

    #[test]
    fn branches_meet_along_top_singular_axis() {
        let rho = bell_diagonal([0.55, 0.05, 0.3, 0.1]).unwrap();
        let theta = pauli_decompose(&rho).unwrap();
        let t = theta.t();
        let top = (0..3).max_by(|&i, &j| t[(i, i)].abs().total_cmp(&t[(j, j)].abs())).unwrap();
        let degenerate = sic_l1_closed(&rho).unwrap();
        let mut b = Vector3::zeros();
        b[top] = 1e-6;
        let nudged = PauliTheta::from_blocks(theta.a(), b, t);
        let form = canonical_form(&nudged).unwrap();
        assert!((closed_form_sic_l1(&form.theta).unwrap() - degenerate).abs() < 1e-4);
    }

    #[test]
    fn f32_decomposition() {
        let rho = crate::qkernel::DensityMatrix::<f32>::new(
            vec![2, 2],
            bell().data().map(|z| Complex::new(z.re as f32, z.im as f32)),
        )
        .unwrap();
        assert!((sic_l1_closed(&rho).unwrap() - 1.0).abs() < 1e-5);
    }
}
