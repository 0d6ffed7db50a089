//! Allocation-light evaluation of Alice's average steered coherence, the
//! inner loop of every SIC optimization.

use nalgebra::{Complex, ComplexField};

use crate::measures::DistanceKind;
use crate::qkernel::{linalg, NEGLIGIBLE_PROB};
use crate::scalar::{entropy_term, CMat};

/// `rho` expressed in Bob's reference frame and cut into Alice blocks.
#[derive(Debug, Clone)]
pub(crate) struct SteeringObjective {
    da: usize,
    db: usize,
    kind: DistanceKind,
    /// `blocks[(a * da + a') * db * db + b * db + b']`
    blocks: Vec<Complex<f64>>,
}

impl SteeringObjective {
    /// `bob` holds Bob's reference basis as columns.
    pub fn new(rho: &CMat<f64>, da: usize, db: usize, bob: &CMat<f64>, kind: DistanceKind) -> Self {
        let frame = linalg::embed(bob, &[da, db], 1, 1);
        let r = frame.adjoint() * rho * &frame;
        let mut blocks = Vec::with_capacity(da * da * db * db);
        for a in 0..da {
            for ap in 0..da {
                for b in 0..db {
                    for bp in 0..db {
                        blocks.push(r[(a * db + b, ap * db + bp)]);
                    }
                }
            }
        }
        Self { da, db, kind, blocks }
    }

    pub fn da(&self) -> usize {
        self.da
    }

    /// `sum_i p_i C(rho_B^i)` for Alice's basis = columns of `alice`.
    pub fn value(&self, alice: &CMat<f64>) -> f64 {
        let (da, db) = (self.da, self.db);
        let bb = db * db;
        let mut m = vec![Complex::new(0.0, 0.0); bb];
        let mut total = 0.0;
        for i in 0..da {
            m.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
            for a in 0..da {
                let ca = alice[(a, i)].conj();
                for ap in 0..da {
                    let w = ca * alice[(ap, i)];
                    let blk = &self.blocks[(a * da + ap) * bb..(a * da + ap + 1) * bb];
                    for (acc, x) in m.iter_mut().zip(blk) {
                        *acc += w * x;
                    }
                }
            }
            total += unnormalized_coherence(self.kind, &m, db);
        }
        total
    }
}

/// `p · C(M / p)` for an unnormalized Bob operator `M` with `p = tr M`,
/// coherence taken in the computational basis.
pub(crate) fn unnormalized_coherence(kind: DistanceKind, m: &[Complex<f64>], db: usize) -> f64 {
    let p: f64 = (0..db).map(|j| m[j * db + j].re).sum();
    if p < NEGLIGIBLE_PROB {
        return 0.0;
    }
    match kind {
        DistanceKind::RelativeEntropy => {
            // p S(M/p) = S_u(M) - p log p; the p log p terms cancel
            let diag: f64 = (0..db).map(|j| entropy_term(m[j * db + j].re)).sum();
            let spec: f64 = if db == 2 {
                let (lo, hi) = linalg::eigvals_2x2(m[0].re, m[3].re, m[1]);
                entropy_term(lo) + entropy_term(hi)
            } else {
                let mat = CMat::from_fn(db, db, |r, c| m[r * db + c]);
                linalg::hermitian_eigenvalues(&mat).into_iter().map(entropy_term).sum()
            };
            (diag - spec).max(0.0)
        }
        DistanceKind::L1 => {
            let mut s = 0.0;
            for r in 0..db {
                for c in 0..db {
                    if r != c {
                        s += m[r * db + c].modulus();
                    }
                }
            }
            s
        }
        DistanceKind::TraceNorm => {
            if db == 2 {
                2.0 * m[1].modulus()
            } else {
                let off = CMat::from_fn(db, db, |r, c| if r == c { Complex::new(0.0, 0.0) } else { m[r * db + c] });
                linalg::hermitian_eigenvalues(&off).into_iter().map(f64::abs).sum()
            }
        }
    }
}
