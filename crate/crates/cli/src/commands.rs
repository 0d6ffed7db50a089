use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use qsteer::correlations::{b_side_mid, mid, sic, SicResult, THEOREM1_TOL};
use qsteer::measures::coherence;
use qsteer::protocols::{kind_name, make_state, steering_induced_entanglement, RecipeKind, StateRecipe};
use qsteer::qkernel::{state_from_json, state_to_json, ProjectiveBasis};
use qsteer::suites::{run_suite, SuiteConfig};
use qsteer::{twoqubit, Budget, Density, DistanceKind, Verdict};

use crate::output::{basis_json, emit, to_json_bytes, write_atomic, CliResult, Failure};
use crate::{Common, ComputeArgs, Format, Quantity, SampleArgs, StateSource, SweepArgs, VerifyArgs};

/// Largest total Hilbert-space dimension accepted.
pub const DIMENSION_CAP: usize = 64;
const EXACT_TOL: f64 = 1e-9;
const THETA_TOL: f64 = 1e-10;

fn budget(common: &Common) -> Budget {
    let mut b = Budget::default().with_seed(common.seed);
    if let Some(evals) = common.budget {
        b.evals_per_start = evals as usize;
    }
    b
}

fn parse_recipe(text: &str) -> CliResult<StateRecipe> {
    Ok(StateRecipe::from_json(text)?)
}

fn check_cap(rho: &Density) -> CliResult {
    if rho.side() > DIMENSION_CAP {
        return Err(Failure::Validation(format!("total dimension {} exceeds the cap of {DIMENSION_CAP}", rho.side())));
    }
    Ok(())
}

fn load_state(source: &StateSource) -> CliResult<(Density, String)> {
    let (rho, label) = match (&source.state, &source.recipe) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let rho =
                state_from_json::<f64>(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            (rho, path.display().to_string())
        }
        (None, Some(text)) => {
            let recipe = parse_recipe(text)?;
            (make_state(&recipe)?, recipe.to_json()?)
        }
        _ => return Err(Failure::Validation("exactly one of --state and --recipe is required".into())),
    };
    check_cap(&rho)?;
    Ok((rho, label))
}

#[derive(Serialize)]
struct Entry {
    value: f64,
    tolerance: f64,
    converged: bool,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

fn sic_extra(s: &SicResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("witness_alice".into(), basis_json(&s.alice));
    m.insert("witness_bob".into(), basis_json(&s.bob));
    m.insert("evaluations".into(), json!(s.evaluations));
    if !s.warnings.is_empty() {
        m.insert("warnings".into(), json!(s.warnings));
    }
    if let Some(t) = &s.minimax {
        m.insert(
            "minimax".into(),
            json!({"rounds": t.rounds, "certification_gap": t.certification_gap, "max_inf_lower": t.max_inf_lower}),
        );
    }
    m
}

fn compute_quantity(q: Quantity, rho: &Density, kind: DistanceKind, b: &Budget) -> CliResult<Vec<(String, Entry)>> {
    Ok(match q {
        Quantity::Sic => {
            let s = sic(rho, kind, b)?;
            vec![(
                "sic".into(),
                Entry { value: s.value, tolerance: THEOREM1_TOL, converged: s.converged, extra: sic_extra(&s) },
            )]
        }
        Quantity::Bsmid | Quantity::Mid => {
            let (name, m) =
                if q == Quantity::Bsmid { ("bsmid", b_side_mid(rho, kind, b)?) } else { ("mid", mid(rho, kind, b)?) };
            let mut extra = Map::new();
            extra.insert("bob_basis".into(), basis_json(&m.bob_basis));
            if let Some(a) = &m.alice_basis {
                extra.insert("alice_basis".into(), basis_json(a));
            }
            extra.insert("degenerate".into(), json!(m.degenerate));
            let tolerance = if m.degenerate { THEOREM1_TOL } else { EXACT_TOL };
            vec![(name.into(), Entry { value: m.value, tolerance, converged: m.converged, extra })]
        }
        Quantity::Coherence => {
            let value = coherence(kind, rho, &ProjectiveBasis::computational(rho.side()))?;
            let mut extra = Map::new();
            extra.insert("basis".into(), json!("computational"));
            vec![("coherence".into(), Entry { value, tolerance: EXACT_TOL, converged: true, extra })]
        }
        Quantity::Theta => {
            let theta = twoqubit::pauli_decompose(rho)?;
            let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| theta.theta[(i, j)]).collect()).collect();
            let mut extra = Map::new();
            extra.insert("theta".into(), json!(rows));
            extra.insert("a".into(), json!(theta.a().as_slice()));
            extra.insert("b".into(), json!(theta.b().as_slice()));
            extra.insert("t".into(), json!(rows[1..].iter().map(|r| r[1..].to_vec()).collect::<Vec<_>>()));
            let closed = twoqubit::sic_l1_closed(rho)?;
            vec![("theta".into(), Entry { value: closed, tolerance: THETA_TOL, converged: true, extra })]
        }
        Quantity::Sie => {
            let alice = ProjectiveBasis::computational(rho.dims()[0]);
            let sie = steering_induced_entanglement(rho, &alice, b)?;
            let mut extra = Map::new();
            extra.insert("alice_basis".into(), json!("computational"));
            extra.insert("exact".into(), json!(sie.exact));
            extra.insert(
                "outcomes".into(),
                json!(sie
                    .outcomes
                    .iter()
                    .map(|o| json!({"prob": o.prob, "entanglement": o.entanglement, "exact": o.exact}))
                    .collect::<Vec<_>>()),
            );
            vec![("sie".into(), Entry { value: sie.average, tolerance: EXACT_TOL, converged: sie.converged, extra })]
        }
    })
}

pub fn compute(args: ComputeArgs) -> CliResult {
    let mut quantities = args.quantities.clone();
    quantities.extend(args.quantity_flag.iter().copied());
    quantities.dedup();
    if quantities.is_empty() {
        return Err(Failure::Validation("no quantity requested".into()));
    }
    let (rho, label) = load_state(&args.source)?;
    let common = &args.common;
    let b = budget(common);
    let mut entries = Vec::new();
    for q in quantities {
        entries.extend(compute_quantity(q, &rho, common.kind, &b)?);
    }
    let all_converged = entries.iter().all(|(_, e)| e.converged);
    let bytes = match common.format {
        Format::Json => {
            let mut quantities = Map::new();
            for (name, e) in &entries {
                quantities.insert(name.clone(), serde_json::to_value(e)?);
            }
            to_json_bytes(&json!({
                "state": {"source": label, "dims": rho.dims()},
                "kind": common.kind,
                "seed": common.seed,
                "quantities": quantities,
            }))?
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["quantity", "value", "tolerance", "converged"])?;
            for (name, e) in &entries {
                w.write_record([name.clone(), e.value.to_string(), e.tolerance.to_string(), e.converged.to_string()])?;
            }
            w.into_inner().map_err(|e| Failure::Io(e.to_string()))?
        }
    };
    emit(common.out.as_deref(), &bytes, common.force)?;
    if !all_converged {
        return Err(Failure::NonConvergence("at least one quantity hit its evaluation cap".into()));
    }
    Ok(())
}

pub fn verify(args: VerifyArgs) -> CliResult {
    let common = &args.common;
    let cfg = SuiteConfig { n: args.n, seed: common.seed, budget: budget(common), variant: args.variant.clone() };
    let report = run_suite(&args.suite, &cfg)?;
    let bytes = match common.format {
        Format::Json => to_json_bytes(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "theorem",
                "kind",
                "value_lhs",
                "value_rhs",
                "margin",
                "tolerance",
                "seeds",
                "converged",
                "verdict",
            ])?;
            for r in &report.instances {
                let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
                w.write_record([
                    r.theorem.clone(),
                    r.kind.map(|k| k.short_name().to_string()).unwrap_or_default(),
                    r.value_lhs.to_string(),
                    r.value_rhs.to_string(),
                    r.margin.to_string(),
                    r.tolerance.to_string(),
                    seeds.join(" "),
                    r.converged.to_string(),
                    format!("{:?}", r.verdict).to_uppercase(),
                ])?;
            }
            w.into_inner().map_err(|e| Failure::Io(e.to_string()))?
        }
    };
    emit(common.out.as_deref(), &bytes, common.force)?;
    eprintln!(
        "{}: {} ({} passed, {} failed, {} findings, {} skipped, worst margin {:e})",
        report.suite,
        format!("{:?}", report.verdict).to_uppercase(),
        report.passed,
        report.failed,
        report.findings,
        report.skipped,
        report.worst_margin
    );
    if report.verdict == Verdict::Fail {
        return Err(Failure::Verification(format!("{} of {} instances failed", report.failed, report.instances.len())));
    }
    if !report.all_converged() {
        return Err(Failure::NonConvergence("some instances hit their evaluation cap".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    parameter: String,
    value: f64,
    sic: f64,
    q_b: f64,
    margin: f64,
    tolerance: f64,
    converged: bool,
}

/// `Q_B` partner of each coherence kind: the trace-norm MID pairs with l1.
fn mid_partner(kind: DistanceKind) -> DistanceKind {
    match kind {
        DistanceKind::L1 => DistanceKind::TraceNorm,
        k => k,
    }
}

pub fn sweep(args: SweepArgs) -> CliResult {
    let recipe = parse_recipe(&args.recipe)?;
    let name = recipe.sweep_parameter().ok_or_else(|| {
        Failure::Validation(format!("recipe kind {} has no sweep parameter", kind_name(&recipe.kind)))
    })?;
    if args.steps == 0 {
        return Err(Failure::Validation("--steps must be positive".into()));
    }
    let common = &args.common;
    let b = budget(common);
    let mut rows = Vec::with_capacity(args.steps);
    for k in 0..args.steps {
        let value = if args.steps == 1 {
            args.from
        } else {
            args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64
        };
        let rho = make_state(&recipe.with_sweep_value(value)?)?;
        check_cap(&rho)?;
        let s = sic(&rho, common.kind, &b)?;
        let q = b_side_mid(&rho, mid_partner(common.kind), &b)?;
        rows.push(SweepRow {
            parameter: name.to_string(),
            value,
            sic: s.value,
            q_b: q.value,
            margin: q.value - s.value,
            tolerance: THEOREM1_TOL,
            converged: s.converged && q.converged,
        });
    }
    let bytes = match common.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            w.into_inner().map_err(|e| Failure::Io(e.to_string()))?
        }
        Format::Json => to_json_bytes(&rows)?,
    };
    emit(common.out.as_deref(), &bytes, common.force)?;
    if rows.iter().any(|r| !r.converged) {
        return Err(Failure::NonConvergence("some grid points hit their evaluation cap".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    seed: u64,
    recipe: StateRecipe,
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    count: usize,
    files: Vec<ManifestEntry>,
}

pub fn sample(args: SampleArgs) -> CliResult {
    let recipe = parse_recipe(&args.recipe)?;
    if !matches!(recipe.kind, RecipeKind::RandomHs { .. } | RecipeKind::RandomPure { .. }) {
        return Err(Failure::Validation(format!(
            "sample needs RandomHS or RandomPure, got {}",
            kind_name(&recipe.kind)
        )));
    }
    let dir: &Path = &args.out;
    if dir.exists() && !args.force {
        let occupied = !dir.is_dir() || fs::read_dir(dir)?.next().is_some();
        if occupied {
            return Err(Failure::Io(format!("{} exists and is not empty (pass --force to overwrite)", dir.display())));
        }
    }
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(args.n);
    for i in 0..args.n {
        let seed = args.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let instance = StateRecipe::new(recipe.kind.clone(), seed);
        let rho = make_state(&instance)?;
        check_cap(&rho)?;
        let file = format!("state_{i:05}.json");
        let mut text = state_to_json(&rho)?;
        text.push('\n');
        write_atomic(&dir.join(&file), text.as_bytes())?;
        files.push(ManifestEntry { file, seed, recipe: instance });
    }
    let manifest = Manifest { seed: args.seed, count: args.n, files };
    write_atomic(&dir.join("manifest.json"), &to_json_bytes(&manifest)?)?;
    Ok(())
}
