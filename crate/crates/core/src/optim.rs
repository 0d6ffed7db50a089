//! Derivative-free local search over unitary charts, and the seeded
//! multi-start driver used by every optimizer in the crate.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qkernel::linalg::expm_i_hermitian;
use crate::scalar::CMat;

/// Evaluation caps and seeds for the numerical optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Independent local searches per inner maximization.
    pub starts: usize,
    /// Objective evaluations allowed per local search.
    pub evals_per_start: usize,
    pub seed: u64,
    /// Seed the inner search with the computational and Fourier bases in
    /// addition to Haar-random anchors.
    pub canonical_starts: bool,
    /// Local searches over Bob's degenerate eigenbasis family.
    pub outer_starts: usize,
    /// Certification rounds of the degenerate-case minimax.
    pub outer_rounds: usize,
    /// Random re-anchored inner searches per outer evaluation (besides the
    /// warm start).
    pub inner_restarts: usize,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            starts: 32,
            evals_per_start: 2000,
            seed: 0,
            canonical_starts: true,
            outer_starts: 3,
            outer_rounds: 8,
            inner_restarts: 1,
            initial_step: 0.5,
            min_step: 1e-8,
        }
    }
}

impl Budget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions { initial_step: self.initial_step, min_step: self.min_step, max_evals: self.evals_per_start }
    }
}

/// Independent deterministic random stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Point in the `dim^2` real coordinates of a unitary `exp(i H)`, with `H`
/// expanded in the generalized Gell-Mann matrices (normalized
/// `tr(G_a G_b) = 2 δ_ab`) followed by the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPoint {
    pub dim: usize,
    pub params: Vec<f64>,
}

impl UnitaryPoint {
    pub fn origin(dim: usize) -> Self {
        Self { dim, params: vec![0.0; dim * dim] }
    }

    pub fn generator(&self) -> CMat<f64> {
        hermitian_from_params(self.dim, &self.params)
    }

    pub fn unitary(&self) -> CMat<f64> {
        expm_i_hermitian(&self.generator())
    }
}

/// Hermitian matrix with the given Gell-Mann-plus-identity coordinates.
pub fn hermitian_from_params(d: usize, params: &[f64]) -> CMat<f64> {
    assert_eq!(params.len(), d * d, "expected {} coordinates", d * d);
    let mut h = CMat::<f64>::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        for l in j + 1..d {
            let (x, y) = (params[k], params[k + 1]);
            k += 2;
            h[(j, l)] += Complex::new(x, -y);
            h[(l, j)] += Complex::new(x, y);
        }
    }
    for l in 1..d {
        let p = params[k];
        k += 1;
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        for m in 0..l {
            h[(m, m)].re += p * norm;
        }
        h[(l, l)].re -= p * norm * l as f64;
    }
    let id = params[k] * (2.0 / d as f64).sqrt();
    for m in 0..d {
        h[(m, m)].re += id;
    }
    h
}

/// Local chart `x -> anchor · exp(i H(x))` around a fixed unitary.
#[derive(Debug, Clone)]
pub struct UnitaryChart {
    pub anchor: CMat<f64>,
}

impl UnitaryChart {
    pub fn new(anchor: CMat<f64>) -> Self {
        Self { anchor }
    }

    pub fn dim(&self) -> usize {
        self.anchor.nrows()
    }

    pub fn param_len(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn unitary(&self, x: &[f64]) -> CMat<f64> {
        if x.iter().all(|&v| v == 0.0) {
            return self.anchor.clone();
        }
        &self.anchor * expm_i_hermitian(&hermitian_from_params(self.dim(), x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Step shrank below `min_step` before the evaluation cap was hit.
    pub converged: bool,
}

/// Hooke-Jeeves pattern search, maximizing `f`.
pub fn pattern_maximize(mut f: impl FnMut(&[f64]) -> f64, x0: Vec<f64>, opts: SearchOptions) -> LocalOptimum {
    let mut evals = 1;
    let mut base = x0;
    let mut f_base = f(&base);
    let mut step = opts.initial_step;
    let mut converged = false;

    fn explore(
        f: &mut impl FnMut(&[f64]) -> f64,
        point: &mut [f64],
        fp: &mut f64,
        step: f64,
        evals: &mut usize,
        max_evals: usize,
    ) {
        for i in 0..point.len() {
            if *evals >= max_evals {
                return;
            }
            let orig = point[i];
            point[i] = orig + step;
            let up = f(point);
            *evals += 1;
            if up > *fp {
                *fp = up;
                continue;
            }
            if *evals >= max_evals {
                point[i] = orig;
                return;
            }
            point[i] = orig - step;
            let down = f(point);
            *evals += 1;
            if down > *fp {
                *fp = down;
                continue;
            }
            point[i] = orig;
        }
    }

    while evals < opts.max_evals {
        let mut x = base.clone();
        let mut fx = f_base;
        explore(&mut f, &mut x, &mut fx, step, &mut evals, opts.max_evals);
        if fx > f_base {
            loop {
                let pattern: Vec<f64> = x.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
                base = x.clone();
                f_base = fx;
                if evals >= opts.max_evals {
                    break;
                }
                let mut y = pattern;
                let mut fy = f(&y);
                evals += 1;
                explore(&mut f, &mut y, &mut fy, step, &mut evals, opts.max_evals);
                if fy > f_base {
                    x = y;
                    fx = fy;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
            if step < opts.min_step {
                converged = true;
                break;
            }
        }
    }
    LocalOptimum { x: base, value: f_base, evals, converged }
}

pub fn pattern_minimize(mut f: impl FnMut(&[f64]) -> f64, x0: Vec<f64>, opts: SearchOptions) -> LocalOptimum {
    let mut best = pattern_maximize(|x| -f(x), x0, opts);
    best.value = -best.value;
    best
}

/// Runs `run(start)` for every start index and returns all results in index
/// order. Starts run in parallel; the output does not depend on scheduling.
pub fn run_starts<R: Send>(count: usize, run: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..count).into_par_iter().map(run).collect()
}

/// Index of the best value; ties go to the lowest index.
pub fn best_index(values: impl IntoIterator<Item = f64>, maximize: bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        let better = match best {
            None => true,
            Some((_, b)) => {
                if maximize {
                    v > b
                } else {
                    v < b
                }
            }
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::linalg::{hermiticity_defect, unitarity_defect};

    #[test]
    fn generators_are_orthogonal() {
        let d = 3;
        let n = d * d;
        let gens: Vec<CMat<f64>> = (0..n)
            .map(|k| {
                let mut p = vec![0.0; n];
                p[k] = 1.0;
                hermitian_from_params(d, &p)
            })
            .collect();
        for a in 0..n {
            assert!(hermiticity_defect(&gens[a]) < 1e-15);
            for b in 0..n {
                let ip = (&gens[a] * &gens[b]).trace().re;
                let expected = if a == b { 2.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "generators {a},{b}: {ip}");
            }
        }
    }

    #[test]
    fn realized_points_are_unitary() {
        for d in 2..5 {
            let params: Vec<f64> = (0..d * d).map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.4).collect();
            let u = UnitaryPoint { dim: d, params }.unitary();
            assert!(unitarity_defect(&u) < 1e-10);
        }
    }

    #[test]
    fn pattern_search_finds_quadratic_peak() {
        let target = [0.3, -1.2, 2.0];
        let out = pattern_maximize(
            |x| -x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
            vec![0.0; 3],
            SearchOptions { initial_step: 0.5, min_step: 1e-9, max_evals: 5000 },
        );
        assert!(out.converged);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn evaluation_cap_reports_non_convergence() {
        let out = pattern_minimize(
            |x| (x[0] - 100.0).powi(2),
            vec![0.0],
            SearchOptions { initial_step: 0.01, min_step: 1e-12, max_evals: 10 },
        );
        assert!(!out.converged);
        assert!(out.evals <= 10);
    }

    #[test]
    fn best_index_prefers_lowest_on_ties() {
        assert_eq!(best_index([1.0, 3.0, 3.0], true), Some(1));
        assert_eq!(best_index([2.0, 1.0, 1.0], false), Some(1));
        assert_eq!(best_index([], true), None);
    }
}
