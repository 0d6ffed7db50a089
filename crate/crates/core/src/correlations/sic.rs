use nalgebra::Complex;

use super::family::{conditional_probe, EigenbasisFamily};
use super::mid::check_bipartite;
use super::objective::SteeringObjective;
use crate::error::{Error, Result};
use crate::measures::{coherence, DistanceKind};
use crate::optim::{
    best_index, pattern_maximize, pattern_minimize, run_starts, stream_rng, Budget, SearchOptions, UnitaryChart,
};
use crate::protocols::random::haar_unitary;
use crate::qkernel::{partial_trace, steer, DensityMatrix, ProjectiveBasis};
use crate::scalar::{CMat, Real};

/// Certified inner maxima may exceed the outer search's value by this much
/// before the minimax counts as converged.
pub const CERTIFICATION_TOL: f64 = 1e-7;

const WARM_STEP: f64 = 0.05;

/// Minimax bookkeeping for a degenerate `rho_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxTrace {
    pub rounds: usize,
    /// Certified inner max minus the value seen by the outer search in the
    /// last round.
    pub certification_gap: f64,
    /// `min_E f(alice*, E)` at the reported Alice witness: a lower bound on
    /// the max-inf ordering, recorded next to the inf-max value.
    pub max_inf_lower: f64,
}

#[derive(Debug, Clone)]
pub struct SicResult {
    pub value: f64,
    pub alice: ProjectiveBasis<f64>,
    pub bob: ProjectiveBasis<f64>,
    pub converged: bool,
    pub evaluations: usize,
    pub warnings: Vec<String>,
    pub minimax: Option<MinimaxTrace>,
}

/// `|xi_k> = d^{-1/2} sum_j exp(-2 pi i k j / d) |j>`.
pub fn fourier_basis<T: Real>(d: usize) -> ProjectiveBasis<T> {
    let norm = T::one() / T::from_usize(d).unwrap().sqrt();
    let u = CMat::<T>::from_fn(d, d, |j, k| {
        let angle = -T::two_pi() * T::from_usize((j * k) % d).unwrap() / T::from_usize(d).unwrap();
        Complex::new(angle.cos() * norm, angle.sin() * norm)
    });
    ProjectiveBasis::from_unitary_unchecked(u)
}

/// `sum_i p_i C(rho_B^i, bob)` for Alice measuring in `alice`, through the
/// explicit steering ensemble.
pub fn avg_steered_coherence(
    rho: &DensityMatrix<f64>,
    alice: &ProjectiveBasis<f64>,
    bob: &ProjectiveBasis<f64>,
    kind: DistanceKind,
) -> Result<f64> {
    let (_, db) = check_bipartite(rho)?;
    if bob.dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "Bob basis dimension {} for subsystem of dimension {db}",
            bob.dim()
        )));
    }
    let ensemble = steer(rho, alice)?;
    let mut total = 0.0;
    for o in ensemble.outcomes.iter().filter(|o| !o.negligible) {
        total += o.prob * coherence(kind, &o.state, bob)?;
    }
    Ok(total)
}

/// Steering-induced coherence: infimum over Bob's eigenbases of the maximum
/// over Alice's projective bases of the average steered coherence.
pub fn sic(rho: &DensityMatrix<f64>, kind: DistanceKind, budget: &Budget) -> Result<SicResult> {
    let (da, db) = check_bipartite(rho)?;
    if !kind.valid_for_coherence(db) {
        return Err(Error::CoherenceInvalid { kind, dim: db });
    }
    let mut warnings = Vec::new();
    if kind == DistanceKind::L1 && db > 2 {
        warnings.push(format!("l1 coherence with Bob dimension {db}: no MID counterpart to compare against"));
    }
    let family = EigenbasisFamily::of(partial_trace(rho, &[1])?.data());
    let mut out = if family.is_degenerate() {
        minimax(rho.data(), da, db, &family, kind, budget)
    } else {
        let obj = SteeringObjective::new(rho.data(), da, db, family.base(), kind);
        let inner = inner_max(&obj, budget, None, 0, true);
        SicResult {
            value: inner.value,
            alice: ProjectiveBasis::from_unitary_unchecked(inner.alice),
            bob: family.basis(),
            converged: inner.converged,
            evaluations: inner.evals,
            warnings: Vec::new(),
            minimax: None,
        }
    };
    out.warnings.extend(warnings);
    Ok(out)
}

pub(crate) struct InnerMax {
    pub value: f64,
    pub alice: CMat<f64>,
    pub evals: usize,
    pub converged: bool,
}

/// Multi-start maximization over Alice's bases. `full` runs `budget.starts`
/// searches (plus the warm start); otherwise only the warm start with a
/// short step and `budget.inner_restarts` random anchors.
pub(crate) fn inner_max(
    obj: &SteeringObjective,
    budget: &Budget,
    warm: Option<&CMat<f64>>,
    stream: u64,
    full: bool,
) -> InnerMax {
    let da = obj.da();
    let mut anchors: Vec<(CMat<f64>, f64)> = Vec::new();
    if let Some(w) = warm {
        anchors.push((w.clone(), WARM_STEP));
    }
    let random = if full {
        if budget.canonical_starts {
            anchors.push((CMat::identity(da, da), budget.initial_step));
            anchors.push((fourier_basis::<f64>(da).as_unitary().clone(), budget.initial_step));
        }
        budget.starts.saturating_sub(anchors.len() - warm.is_some() as usize)
    } else {
        budget.inner_restarts
    };
    let fixed = anchors.len();
    let opts = budget.search_options();
    let results = run_starts(fixed + random, |s| {
        let (anchor, step) = if s < fixed {
            anchors[s].clone()
        } else {
            let mut rng = stream_rng(budget.seed, (stream << 16) + s as u64);
            (haar_unitary(da, &mut rng), budget.initial_step)
        };
        let chart = UnitaryChart::new(anchor);
        let local = pattern_maximize(
            |x| obj.value(&chart.unitary(x)),
            vec![0.0; chart.param_len()],
            SearchOptions { initial_step: step, ..opts },
        );
        let u = chart.unitary(&local.x);
        (local, u)
    });
    let best = best_index(results.iter().map(|(l, _)| l.value), true).expect("at least one start");
    let (local, u) = &results[best];
    InnerMax {
        // re-evaluate so the value is exactly the witness's value
        value: obj.value(u),
        alice: u.clone(),
        evals: results.iter().map(|(l, _)| l.evals).sum(),
        converged: local.converged,
    }
}

fn minimax(
    rho: &CMat<f64>,
    da: usize,
    db: usize,
    family: &EigenbasisFamily,
    kind: DistanceKind,
    budget: &Budget,
) -> SicResult {
    let probe = conditional_probe(rho, da, db, true);
    let aligned = family.aligned_member(&probe);
    let outer_opts = SearchOptions {
        initial_step: budget.initial_step,
        min_step: budget.min_step.max(1e-7),
        max_evals: (budget.evals_per_start / 4).max(20),
    };
    let n_params = family.param_len();
    let mut evals = 0usize;
    let mut warm_global: Option<CMat<f64>> = None;
    let mut best: Option<(f64, CMat<f64>, CMat<f64>)> = None;
    let mut last_gap = f64::INFINITY;
    let mut rounds = 0;
    let mut seed_anchor = aligned.clone();

    for round in 0..budget.outer_rounds.max(1) {
        rounds = round + 1;
        let starts = budget.outer_starts.max(1);
        let results = run_starts(starts, |s| {
            let anchor = match s {
                0 => seed_anchor.clone(),
                1 if round == 0 => family.base().clone(),
                _ => {
                    let mut rng = stream_rng(budget.seed, 0x5349_4300 + ((round as u64) << 8) + s as u64);
                    family.random_member(&mut rng)
                }
            };
            let fam = family.reanchored(anchor);
            let mut warm = warm_global.clone().unwrap_or_else(|| CMat::identity(da, da));
            let mut inner_evals = 0usize;
            let mut k = 0u64;
            let local = pattern_minimize(
                |y| {
                    let obj = SteeringObjective::new(rho, da, db, &fam.realize(y), kind);
                    let stream = ((round as u64) << 40) + ((s as u64) << 32) + k;
                    k += 1;
                    let r = inner_max(&obj, budget, Some(&warm), stream, false);
                    inner_evals += r.evals;
                    warm = r.alice;
                    r.value
                },
                vec![0.0; n_params],
                outer_opts,
            );
            (local.value, fam.realize(&local.x), warm, inner_evals)
        });
        evals += results.iter().map(|r| r.3).sum::<usize>();
        let pick = best_index(results.iter().map(|r| r.0), false).expect("at least one outer start");
        let (outer_value, bob, warm, _) = &results[pick];

        let obj = SteeringObjective::new(rho, da, db, bob, kind);
        let cert = inner_max(&obj, budget, Some(warm), 0xCE27_0000 + round as u64, true);
        evals += cert.evals;
        last_gap = cert.value - outer_value;
        if best.as_ref().is_none_or(|(v, _, _)| cert.value < *v) {
            best = Some((cert.value, bob.clone(), cert.alice.clone()));
        }
        if last_gap <= CERTIFICATION_TOL {
            break;
        }
        warm_global = Some(cert.alice);
        seed_anchor = bob.clone();
    }

    let (value, bob, alice) = best.expect("at least one round");
    let fixed_alice = family.reanchored(bob.clone());
    let lower = pattern_minimize(
        |y| SteeringObjective::new(rho, da, db, &fixed_alice.realize(y), kind).value(&alice),
        vec![0.0; n_params],
        budget.search_options(),
    );
    evals += lower.evals;
    SicResult {
        value,
        alice: ProjectiveBasis::from_unitary_unchecked(alice),
        bob: ProjectiveBasis::from_unitary_unchecked(bob),
        converged: last_gap <= CERTIFICATION_TOL,
        evaluations: evals,
        warnings: Vec::new(),
        minimax: Some(MinimaxTrace { rounds, certification_gap: last_gap, max_inf_lower: lower.value }),
    }
}
