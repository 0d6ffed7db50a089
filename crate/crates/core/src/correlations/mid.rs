use nalgebra::Complex;

use super::family::{conditional_probe, EigenbasisFamily};
use crate::error::{Error, Result};
use crate::measures::DistanceKind;
use crate::optim::{best_index, pattern_minimize, run_starts, stream_rng, Budget, SearchOptions};
use crate::qkernel::{linalg, matrix_entropy, partial_trace, DensityMatrix, ProjectiveBasis};
use crate::scalar::{entropy_term, CMat};

/// Measurement-induced disturbance and the basis attaining it.
#[derive(Debug, Clone)]
pub struct MidResult {
    pub value: f64,
    /// Alice's eigenbasis; `None` for the one-sided quantity.
    pub alice_basis: Option<ProjectiveBasis<f64>>,
    pub bob_basis: ProjectiveBasis<f64>,
    /// The infimum over a non-unique eigenbasis was taken numerically.
    pub degenerate: bool,
    pub converged: bool,
    pub evaluations: usize,
}

pub(crate) fn check_bipartite(rho: &DensityMatrix<f64>) -> Result<(usize, usize)> {
    match rho.dims() {
        [da, db] => Ok((*da, *db)),
        dims => Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got dims {dims:?} (regroup with `bipartition`)"
        ))),
    }
}

/// `D(rho, I ⊗ Λ_B(rho))` minimized over the eigenbases of `rho_B`.
pub fn b_side_mid(rho: &DensityMatrix<f64>, kind: DistanceKind, budget: &Budget) -> Result<MidResult> {
    let (da, db) = check_bipartite(rho)?;
    if !kind.valid_for_mid() {
        return Err(Error::MidInvalid { kind });
    }
    let rho_b = partial_trace(rho, &[1])?;
    let family = EigenbasisFamily::of(rho_b.data());
    let s_rho = matrix_entropy(rho.data());
    let data = rho.data();
    let objective = |members: &[CMat<f64>]| {
        let frame = linalg::embed(&members[0], &[da, db], 1, 1);
        let r = frame.adjoint() * data * &frame;
        dephased_distance(kind, &r, da, db, false, s_rho)
    };
    let probe = conditional_probe(data, da, db, true);
    let found = minimize_over_families(&[&family], &[probe], objective, budget);
    Ok(MidResult {
        value: found.value,
        alice_basis: None,
        bob_basis: ProjectiveBasis::from_unitary_unchecked(found.members[0].clone()),
        degenerate: family.is_degenerate(),
        converged: found.converged,
        evaluations: found.evals,
    })
}

/// `D(rho, Λ_A ⊗ Λ_B(rho))` minimized over both local eigenbasis families.
pub fn mid(rho: &DensityMatrix<f64>, kind: DistanceKind, budget: &Budget) -> Result<MidResult> {
    let (da, db) = check_bipartite(rho)?;
    if !kind.valid_for_mid() {
        return Err(Error::MidInvalid { kind });
    }
    let fam_a = EigenbasisFamily::of(partial_trace(rho, &[0])?.data());
    let fam_b = EigenbasisFamily::of(partial_trace(rho, &[1])?.data());
    let s_rho = matrix_entropy(rho.data());
    let data = rho.data();
    let objective = |members: &[CMat<f64>]| {
        let frame = members[0].kronecker(&members[1]);
        let r = frame.adjoint() * data * &frame;
        dephased_distance(kind, &r, da, db, true, s_rho)
    };
    let probes = [conditional_probe(data, da, db, false), conditional_probe(data, da, db, true)];
    let found = minimize_over_families(&[&fam_a, &fam_b], &probes, objective, budget);
    Ok(MidResult {
        value: found.value,
        alice_basis: Some(ProjectiveBasis::from_unitary_unchecked(found.members[0].clone())),
        bob_basis: ProjectiveBasis::from_unitary_unchecked(found.members[1].clone()),
        degenerate: fam_a.is_degenerate() || fam_b.is_degenerate(),
        converged: found.converged,
        evaluations: found.evals,
    })
}

/// Distance between `r` (already in the measurement frame) and its
/// dephasing: on Bob only, or on both sides.
fn dephased_distance(kind: DistanceKind, r: &CMat<f64>, da: usize, db: usize, both: bool, s_rho: f64) -> f64 {
    let n = da * db;
    match kind {
        DistanceKind::RelativeEntropy => {
            // relative entropy to a pinching is the entropy increase
            let s_deph = if both {
                (0..n).map(|k| entropy_term(r[(k, k)].re)).sum::<f64>()
            } else {
                (0..db)
                    .map(|j| {
                        let block = CMat::from_fn(da, da, |a, ap| r[(a * db + j, ap * db + j)]);
                        matrix_entropy(&block)
                    })
                    .sum()
            };
            (s_deph - s_rho).max(0.0)
        }
        DistanceKind::TraceNorm | DistanceKind::L1 => {
            // L1 is rejected before reaching here
            let off = CMat::from_fn(n, n, |x, y| {
                let removed = if both { x != y } else { x % db != y % db };
                if removed {
                    r[(x, y)]
                } else {
                    Complex::new(0.0, 0.0)
                }
            });
            linalg::trace_norm(&off)
        }
    }
}

pub(crate) struct FamilyMinimum {
    pub value: f64,
    pub members: Vec<CMat<f64>>,
    pub converged: bool,
    pub evals: usize,
}

/// Multi-start minimization of `f(members)` over a product of eigenbasis
/// families. Start 0 is the probe-aligned member, start 1 the solver's
/// eigenbasis, the rest Haar-random members.
pub(crate) fn minimize_over_families(
    families: &[&EigenbasisFamily],
    probes: &[CMat<f64>],
    f: impl Fn(&[CMat<f64>]) -> f64 + Sync,
    budget: &Budget,
) -> FamilyMinimum {
    let base: Vec<CMat<f64>> = families.iter().map(|fam| fam.base().clone()).collect();
    let lens: Vec<usize> = families.iter().map(|fam| fam.param_len()).collect();
    let total: usize = lens.iter().sum();
    if total == 0 {
        return FamilyMinimum { value: f(&base), members: base, converged: true, evals: 1 };
    }
    let starts = 2 + budget.outer_starts;
    let opts = SearchOptions {
        initial_step: budget.initial_step,
        min_step: budget.min_step,
        max_evals: budget.evals_per_start,
    };
    let results = run_starts(starts, |s| {
        let anchored: Vec<EigenbasisFamily> = families
            .iter()
            .zip(probes)
            .map(|(fam, probe)| match s {
                0 => fam.reanchored(fam.aligned_member(probe)),
                1 => (*fam).clone(),
                _ => {
                    let mut rng = stream_rng(budget.seed, 0x4d49_4400 + s as u64);
                    fam.reanchored(fam.random_member(&mut rng))
                }
            })
            .collect();
        let realize = |x: &[f64]| {
            let mut off = 0;
            anchored
                .iter()
                .zip(&lens)
                .map(|(fam, &len)| {
                    let m = fam.realize(&x[off..off + len]);
                    off += len;
                    m
                })
                .collect::<Vec<_>>()
        };
        let local = pattern_minimize(|x| f(&realize(x)), vec![0.0; total], opts);
        let members = realize(&local.x);
        (local, members)
    });
    let best = best_index(results.iter().map(|(l, _)| l.value), false).expect("at least one start");
    FamilyMinimum {
        value: results[best].0.value,
        members: results[best].1.clone(),
        converged: results[best].0.converged,
        evals: results.iter().map(|(l, _)| l.evals).sum(),
    }
}
