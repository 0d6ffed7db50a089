//! Seeded ensemble runners behind `verify`.
//!
//! Instance `i` of a suite run with seed `s` samples from
//! `stream_rng(s, i)` and optimizes with `budget.with_seed(s ^ mix(i))`, so a
//! suite replays exactly from its seed whatever the thread schedule.

use rand::Rng;

use crate::correlations::{fourier_basis, verify_sic_properties, verify_theorem1, EigenbasisFamily, DEGENERACY_GAP};
use crate::error::{Error, Result};
use crate::measures::{coherence, distance, relative_entropy, DistanceKind};
use crate::optim::{run_starts, stream_rng, Budget};
use crate::protocols::{self, random};
use crate::qkernel::{apply_kraus_selective, partial_trace, tensor_product, DensityMatrix, KrausMap, ProjectiveBasis};
use crate::report::{SuiteReport, VerificationReport};
use crate::twoqubit;

pub const SUITES: [&str; 6] = ["thm1", "thm2", "thm3", "cor1", "props", "distances"];
/// Sampling retries before an instance is reported as skipped.
pub const RESAMPLE_LIMIT: usize = 16;
/// Slack for the distance and coherence property checks.
pub const MEASURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    pub budget: Budget,
    /// Suite-specific sub-ensemble:
    /// `thm1`: `2x2` (default) or `3x2`; `thm2`: `d2` (default) or `d3`;
    /// `thm3`: `random` (default) or `bell-diagonal`; `cor1`: `pure`
    /// (default) or `rhoX`; `distances`: `d2` (default) or `d3`.
    pub variant: Option<String>,
}

impl SuiteConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, budget: Budget::default(), variant: None }
    }

    pub fn with_variant(mut self, variant: impl Into<String>) -> Self {
        self.variant = Some(variant.into());
        self
    }

    fn instance_budget(&self, i: usize) -> Budget {
        self.budget.with_seed(self.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let variant = cfg.variant.as_deref();
    let label = match variant {
        Some(v) => format!("{name}:{v}"),
        None => name.to_string(),
    };
    let instances = match (name, variant) {
        ("thm1", None | Some("2x2")) => per_instance(cfg, |i, rng| theorem1_instance(cfg, i, rng, [2, 2])),
        ("thm1", Some("3x2")) => per_instance(cfg, |i, rng| theorem1_instance(cfg, i, rng, [3, 2])),
        ("thm2", None | Some("d2")) => per_instance(cfg, |i, rng| theorem2_instance(cfg, i, rng, 2)),
        ("thm2", Some("d3")) => per_instance(cfg, |i, rng| theorem2_instance(cfg, i, rng, 3)),
        ("thm3", None | Some("random")) => per_instance(cfg, |i, rng| theorem3_instance(cfg, i, rng, false)),
        ("thm3", Some("bell-diagonal")) => per_instance(cfg, |i, rng| theorem3_instance(cfg, i, rng, true)),
        ("cor1", None | Some("pure")) => per_instance(cfg, |i, rng| corollary1_instance(cfg, i, rng)),
        ("cor1", Some("rhoX")) => vec![protocols::rho_x_finding(&cfg.instance_budget(0))],
        ("props", None) => per_instance_many(cfg, |i, rng| {
            let rho = sample_non_degenerate(rng, |r| random::random_hs(&[2, 2], r))?;
            verify_sic_properties(&rho, DistanceKind::RelativeEntropy, &cfg.instance_budget(i))
        }),
        ("distances", None | Some("d2")) => per_instance_many(cfg, |i, rng| measure_properties(cfg.seed, i, rng, 2)),
        ("distances", Some("d3")) => per_instance_many(cfg, |i, rng| measure_properties(cfg.seed, i, rng, 3)),
        (s, _) if !SUITES.contains(&s) => return Err(Error::InvalidRecipe(format!("unknown suite {s:?}"))),
        (s, Some(v)) => return Err(Error::InvalidRecipe(format!("suite {s} has no variant {v:?}"))),
        (s, None) => return Err(Error::InvalidRecipe(format!("suite {s} needs a variant"))),
    };
    let instances = instances.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(label, instances))
}

fn per_instance(
    cfg: &SuiteConfig,
    run: impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<VerificationReport> + Sync + Send,
) -> Vec<Result<VerificationReport>> {
    run_starts(cfg.n, |i| run(i, &mut stream_rng(cfg.seed, i as u64)))
}

fn per_instance_many(
    cfg: &SuiteConfig,
    run: impl Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<Vec<VerificationReport>> + Sync + Send,
) -> Vec<Result<VerificationReport>> {
    run_starts(cfg.n, |i| run(i, &mut stream_rng(cfg.seed, i as u64)))
        .into_iter()
        .flat_map(|r| match r {
            Ok(v) => v.into_iter().map(Ok).collect::<Vec<_>>(),
            Err(e) => vec![Err(e)],
        })
        .collect()
}

fn bob_gap(rho: &DensityMatrix<f64>) -> Result<f64> {
    Ok(EigenbasisFamily::of(partial_trace(rho, &[1])?.data()).min_gap())
}

fn sample_non_degenerate<R: Rng>(
    rng: &mut R,
    mut sample: impl FnMut(&mut R) -> Result<DensityMatrix<f64>>,
) -> Result<DensityMatrix<f64>> {
    for _ in 0..RESAMPLE_LIMIT {
        let rho = sample(rng)?;
        if bob_gap(&rho)? >= DEGENERACY_GAP {
            return Ok(rho);
        }
    }
    Err(Error::DegenerateBranch)
}

fn theorem1_instance<R: Rng>(cfg: &SuiteConfig, i: usize, rng: &mut R, dims: [usize; 2]) -> Result<VerificationReport> {
    let rho = sample_non_degenerate(rng, |r| random::random_hs(&dims, r))?;
    verify_theorem1(&rho, DistanceKind::RelativeEntropy, &cfg.instance_budget(i))
}

fn theorem2_instance<R: Rng>(cfg: &SuiteConfig, i: usize, rng: &mut R, d: usize) -> Result<VerificationReport> {
    let budget = cfg.instance_budget(i);
    let mut last = None;
    for _ in 0..RESAMPLE_LIMIT {
        let coeff = random::random_coefficient_matrix(d, rng);
        let report = protocols::verify_theorem2(&coeff, d, &budget)?;
        if report.verdict != crate::report::Verdict::Skipped {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("at least one attempt"))
}

fn theorem3_instance<R: Rng>(
    cfg: &SuiteConfig,
    i: usize,
    rng: &mut R,
    bell_diagonal: bool,
) -> Result<VerificationReport> {
    let rho = if bell_diagonal {
        let w = random::random_simplex(4, rng);
        protocols::bell_diagonal([w[0], w[1], w[2], w[3]])?
    } else {
        sample_non_degenerate(rng, |r| random::random_hs(&[2, 2], r))?
    };
    twoqubit::verify_theorem3(&rho, &cfg.instance_budget(i))
}

fn corollary1_instance<R: Rng>(cfg: &SuiteConfig, i: usize, rng: &mut R) -> Result<VerificationReport> {
    let varrho = sample_non_degenerate(rng, |r| random::random_pure(&[2, 2], r))?;
    protocols::verify_corollary1(&varrho, &fourier_basis(2), &cfg.instance_budget(i))
}

/// Distance properties D1, D3 (all kinds), D2, D5 (relative entropy), D6
/// (relative entropy and trace norm) and coherence properties C1-C3 for
/// `C^r` and `C^{l1}` on one random instance of dimension `d`.
pub fn measure_properties<R: Rng>(seed: u64, i: usize, rng: &mut R, d: usize) -> Result<Vec<VerificationReport>> {
    let tol = MEASURE_TOL;
    let rho = random::random_hs(&[d], rng)?;
    let sigma = random::random_hs(&[d], rng)?;
    let other = random::random_hs(&[d], rng)?;
    let ancilla = random::random_hs(&[2], rng)?;
    let weight: f64 = rng.random_range(0.05..0.95);
    let mixed = DensityMatrix::mixture(&[(weight, &rho), (1.0 - weight, &other)])?;
    let u = random::haar_unitary(d, rng);
    let mut out = Vec::new();
    let instance_seed = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);

    for kind in DistanceKind::ALL {
        let tag = kind.short_name();
        out.push(VerificationReport::equality(format!("D1-{tag}"), Some(kind), distance(kind, &rho, &rho)?, 0.0, tol));
        let apart = distance(kind, &rho, &sigma)?;
        out.push(
            VerificationReport::upper_bound(format!("D1-{tag}-positive"), Some(kind), 0.0, apart, 0.0)
                .with_note("distinct states are at positive distance"),
        );
        if apart <= 0.0 {
            out.last_mut().unwrap().verdict = crate::report::Verdict::Fail;
        }
        let avg = weight * distance(kind, &rho, &sigma)? + (1.0 - weight) * distance(kind, &other, &sigma)?;
        out.push(VerificationReport::upper_bound(
            format!("D3-{tag}"),
            Some(kind),
            distance(kind, &mixed, &sigma)?,
            avg,
            tol,
        ));
    }

    // D2 with the selective pair (rho_n, sigma_n) for a random channel
    let kraus = KrausMap::new(random::random_channel_kraus(d, 2, rng), 0)?;
    let rho_n = apply_kraus_selective(&rho, &kraus)?;
    let sigma_n = apply_kraus_selective(&sigma, &kraus)?;
    let mut selective = 0.0;
    for (r, s) in rho_n.iter().zip(&sigma_n) {
        if let (Some(rs), Some(ss)) = (&r.state, &s.state) {
            selective += r.prob * relative_entropy(rs.data(), ss.data())?;
        }
    }
    out.push(VerificationReport::upper_bound(
        "D2-r",
        Some(DistanceKind::RelativeEntropy),
        selective,
        distance(DistanceKind::RelativeEntropy, &rho, &sigma)?,
        tol,
    ));

    let r = DistanceKind::RelativeEntropy;
    let extended = distance(r, &tensor_product(&rho, &ancilla)?, &tensor_product(&sigma, &ancilla)?)?;
    out.push(VerificationReport::equality("D5-r", Some(r), extended, distance(r, &rho, &sigma)?, tol));

    for kind in [DistanceKind::RelativeEntropy, DistanceKind::TraceNorm] {
        let moved = distance(kind, &rho.conjugate(&u)?, &sigma.conjugate(&u)?)?;
        out.push(VerificationReport::equality(
            format!("D6-{}", kind.short_name()),
            Some(kind),
            moved,
            distance(kind, &rho, &sigma)?,
            tol,
        ));
    }

    let reference = ProjectiveBasis::computational(d);
    let incoherent = crate::qkernel::dephase(&rho, &reference, 0)?;
    let inc_kraus = KrausMap::new(random::random_incoherent_kraus(d, 3, rng), 0)?;
    let branches = apply_kraus_selective(&rho, &inc_kraus)?;
    for kind in [DistanceKind::RelativeEntropy, DistanceKind::L1] {
        let tag = kind.short_name();
        out.push(VerificationReport::equality(
            format!("C1-{tag}"),
            Some(kind),
            coherence(kind, &incoherent, &reference)?,
            0.0,
            tol,
        ));
        let c_rho = coherence(kind, &rho, &reference)?;
        out.push(VerificationReport::upper_bound(format!("C1-{tag}-positive"), Some(kind), 0.0, c_rho, 0.0));
        if c_rho <= 0.0 {
            out.last_mut().unwrap().verdict = crate::report::Verdict::Fail;
        }
        let mut avg = 0.0;
        for b in &branches {
            if let Some(s) = &b.state {
                avg += b.prob * coherence(kind, s, &reference)?;
            }
        }
        out.push(VerificationReport::upper_bound(format!("C2-{tag}"), Some(kind), avg, c_rho, tol));
        let convex = weight * c_rho + (1.0 - weight) * coherence(kind, &other, &reference)?;
        out.push(VerificationReport::upper_bound(
            format!("C3-{tag}"),
            Some(kind),
            coherence(kind, &mixed, &reference)?,
            convex,
            tol,
        ));
    }
    Ok(out.into_iter().map(|r| r.with_seed(instance_seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    fn cfg(n: usize) -> SuiteConfig {
        SuiteConfig {
            budget: Budget { starts: 8, evals_per_start: 1500, ..Budget::default() },
            ..SuiteConfig::new(n, 7)
        }
    }

    #[test]
    fn small_suites_pass() {
        for name in ["thm1", "thm3", "cor1", "distances"] {
            let report = run_suite(name, &cfg(4)).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "{name}: {:?}", report.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn rho_x_variant_is_a_finding() {
        let report = run_suite("cor1", &cfg(1).with_variant("rhoX")).unwrap();
        assert_eq!(report.verdict, Verdict::Finding);
        assert_eq!(report.findings, 1);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(run_suite("thm9", &cfg(1)).is_err());
        assert!(run_suite("thm1", &cfg(1).with_variant("5x5")).is_err());
    }

    #[test]
    fn replay_is_exact() {
        let a = run_suite("thm1", &cfg(3)).unwrap();
        let b = run_suite("thm1", &cfg(3)).unwrap();
        assert_eq!(a, b);
    }
}
