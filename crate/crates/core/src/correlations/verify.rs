use super::family::EigenbasisFamily;
use super::mid::{b_side_mid, check_bipartite};
use super::sic::sic;
use crate::error::{Error, Result};
use crate::measures::DistanceKind;
use crate::optim::{stream_rng, Budget};
use crate::protocols::random;
use crate::qkernel::{apply_kraus, apply_kraus_selective, dephase, linalg, partial_trace, DensityMatrix, KrausMap};
use crate::report::VerificationReport;
use crate::scalar::CMat;

/// Optimizer slack for `sic <= Q_B`.
pub const THEOREM1_TOL: f64 = 1e-6;
/// B-classical states must give `sic` below this.
pub const E1_TOL: f64 = 1e-7;
/// Slack for the monotonicity and convexity inequalities.
pub const PROPERTY_TOL: f64 = 1e-6;

/// The properties checked by [`verify_sic_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyCheck {
    /// Vanishing on B-classical states.
    E1,
    /// Non-increasing under channels on Alice.
    E2,
    /// Non-increasing on average under incoherent selective operations on Bob.
    E3,
    /// Convexity.
    E4,
}

impl PropertyCheck {
    pub const ALL: [PropertyCheck; 4] = [PropertyCheck::E1, PropertyCheck::E2, PropertyCheck::E3, PropertyCheck::E4];

    pub fn label(self) -> &'static str {
        match self {
            PropertyCheck::E1 => "E1",
            PropertyCheck::E2 => "E2",
            PropertyCheck::E3 => "E3",
            PropertyCheck::E4 => "E4",
        }
    }
}

/// `sic^r(rho) <= Q_B^r(rho)`.
pub fn verify_theorem1(rho: &DensityMatrix<f64>, kind: DistanceKind, budget: &Budget) -> Result<VerificationReport> {
    if kind != DistanceKind::RelativeEntropy {
        return Err(Error::UnsupportedKind { kind, what: "the sic <= Q_B bound" });
    }
    let s = sic(rho, kind, budget)?;
    let q = b_side_mid(rho, kind, budget)?;
    Ok(VerificationReport::upper_bound("theorem1", Some(kind), s.value, q.value, THEOREM1_TOL)
        .with_seed(budget.seed)
        .with_converged(s.converged && q.converged))
}

/// Runs every check in [`PropertyCheck::ALL`] on instances derived from
/// `rho` and seeded by `budget.seed`.
pub fn verify_sic_properties(
    rho: &DensityMatrix<f64>,
    kind: DistanceKind,
    budget: &Budget,
) -> Result<Vec<VerificationReport>> {
    PropertyCheck::ALL.iter().map(|&p| verify_sic_property(rho, kind, budget, p)).collect()
}

/// One property check.
///
/// * E1: `sic(I ⊗ Λ_B(rho)) = 0` with `Λ_B` dephasing in the eigenbasis of
///   `rho_B`.
/// * E2: a random two-operator channel on Alice; only for a qubit Alice,
///   where every two-outcome measurement is a mixture of projective ones.
/// * E3: random permutation-phase Kraus operators written in Bob's
///   eigenbasis.
/// * E4: a mixture of `rho` with a random state rotated so that both Bob
///   marginals share `rho_B`'s eigenbasis.
pub fn verify_sic_property(
    rho: &DensityMatrix<f64>,
    kind: DistanceKind,
    budget: &Budget,
    property: PropertyCheck,
) -> Result<VerificationReport> {
    let (da, db) = check_bipartite(rho)?;
    let label = property.label();
    let mut rng = stream_rng(budget.seed, 0x4550_0000 + property as u64);
    let bob_frame = EigenbasisFamily::of(partial_trace(rho, &[1])?.data()).base().clone();
    let report = match property {
        PropertyCheck::E1 => {
            let classical = dephase(rho, &crate::qkernel::ProjectiveBasis::from_unitary_unchecked(bob_frame), 1)?;
            let s = sic(&classical, kind, budget)?;
            VerificationReport::upper_bound(label, Some(kind), s.value, 0.0, E1_TOL).with_converged(s.converged)
        }
        PropertyCheck::E2 => {
            if da != 2 {
                return Ok(VerificationReport::skipped(label, "channel check needs a qubit on Alice's side"));
            }
            let map = KrausMap::new(random::random_channel_kraus(da, 2, &mut rng), 0)?;
            let out = apply_kraus(rho, &map)?;
            let before = sic(rho, kind, budget)?;
            let after = sic(&out, kind, budget)?;
            VerificationReport::upper_bound(label, Some(kind), after.value, before.value, PROPERTY_TOL)
                .with_converged(before.converged && after.converged)
        }
        PropertyCheck::E3 => {
            let ops: Vec<CMat<f64>> = random::random_incoherent_kraus(db, 2, &mut rng)
                .into_iter()
                .map(|k| &bob_frame * k * bob_frame.adjoint())
                .collect();
            let map = KrausMap::new(ops, 1)?;
            let before = sic(rho, kind, budget)?;
            let mut average = 0.0;
            let mut converged = before.converged;
            for outcome in apply_kraus_selective(rho, &map)? {
                if let Some(state) = outcome.state {
                    let s = sic(&state, kind, budget)?;
                    average += outcome.prob * s.value;
                    converged &= s.converged;
                }
            }
            VerificationReport::upper_bound(label, Some(kind), average, before.value, PROPERTY_TOL)
                .with_converged(converged)
        }
        PropertyCheck::E4 => {
            let other = random::random_hs(&[da, db], &mut rng)?;
            let other_frame = EigenbasisFamily::of(partial_trace(&other, &[1])?.data()).base().clone();
            let align = linalg::embed(&(&bob_frame * other_frame.adjoint()), &[da, db], 1, 1);
            let other = other.conjugate(&align)?;
            let weight: f64 = rand::Rng::random_range(&mut rng, 0.1..0.9);
            let mixed = DensityMatrix::mixture(&[(weight, rho), (1.0 - weight, &other)])?;
            let s_rho = sic(rho, kind, budget)?;
            let s_other = sic(&other, kind, budget)?;
            let s_mixed = sic(&mixed, kind, budget)?;
            let average = weight * s_rho.value + (1.0 - weight) * s_other.value;
            VerificationReport::upper_bound(label, Some(kind), s_mixed.value, average, PROPERTY_TOL)
                .with_converged(s_rho.converged && s_other.converged && s_mixed.converged)
        }
    };
    Ok(report.with_seed(budget.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{bell, gap_example, maximally_correlated};
    use crate::qkernel::{tensor_product, DensityMatrix};
    use crate::scalar::c;
    use crate::DistanceKind::RelativeEntropy as R;

    fn quick() -> Budget {
        Budget { starts: 8, evals_per_start: 1500, ..Budget::default() }
    }

    #[test]
    fn theorem1_on_gap_example() {
        let r = verify_theorem1(&gap_example(), R, &quick()).unwrap();
        assert!(r.passed());
        assert!((r.value_rhs - 0.5).abs() < 1e-9);
        assert!(r.value_lhs < 0.5 - 1e-3);
    }

    #[test]
    fn theorem1_tight_for_maximally_correlated() {
        let coeff = CMat::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.3, 0.0)]);
        let r = verify_theorem1(&maximally_correlated(&coeff).unwrap(), R, &quick()).unwrap();
        assert!(r.passed());
        assert!(r.margin.abs() < 1e-5, "margin {}", r.margin);
    }

    #[test]
    fn theorem1_rejects_l1() {
        assert!(verify_theorem1(&bell(), DistanceKind::L1, &quick()).is_err());
    }

    #[test]
    fn properties_on_random_state() {
        let mut rng = stream_rng(21, 0);
        let rho = random::random_hs(&[2, 2], &mut rng).unwrap();
        for r in verify_sic_properties(&rho, R, &quick()).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn fully_depolarized_alice_kills_sic() {
        let half = 0.5f64.sqrt();
        let ops: Vec<CMat<f64>> = [
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]
        .iter()
        .map(|e| CMat::from_row_slice(2, 2, e).scale(half))
        .collect();
        let out = apply_kraus(&gap_example(), &KrausMap::new(ops, 0).unwrap()).unwrap();
        assert!(sic(&out, R, &quick()).unwrap().value < 1e-9);
    }

    #[test]
    fn convexity_fails_without_a_shared_bob_frame() {
        let zero = DensityMatrix::<f64>::basis_state(vec![2], 0).unwrap();
        let one = DensityMatrix::<f64>::basis_state(vec![2], 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(vec![2], &nalgebra::DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let a = tensor_product(&zero, &zero).unwrap();
        let b = tensor_product(&one, &plus).unwrap();
        let mixed = DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert!(sic(&a, R, &quick()).unwrap().value < 1e-9);
        assert!(sic(&b, R, &quick()).unwrap().value < 1e-9);
        assert!(sic(&mixed, R, &quick()).unwrap().value > 0.1);
    }
}
