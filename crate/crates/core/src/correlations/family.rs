use nalgebra::Complex;
use rand::Rng;

use crate::optim::{hermitian_from_params, UnitaryPoint};
use crate::protocols::random::haar_unitary;
use crate::qkernel::linalg::{self, expm_i_hermitian};
use crate::qkernel::ProjectiveBasis;
use crate::scalar::CMat;

/// Eigenvalue gaps below this make the eigenbasis non-unique.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// All eigenbases of a reduced state: a reference eigenbasis plus unitary
/// freedom inside each block of (numerically) equal eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenbasisFamily {
    base: CMat<f64>,
    values: Vec<f64>,
    blocks: Vec<Vec<usize>>,
}

impl EigenbasisFamily {
    pub fn of(reduced: &CMat<f64>) -> Self {
        let eig = linalg::eig_unchecked(reduced);
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in eig.values.iter().enumerate() {
            match blocks.last_mut() {
                Some(block) if v - eig.values[*block.last().unwrap()] < DEGENERACY_GAP => block.push(k),
                _ => blocks.push(vec![k]),
            }
        }
        Self { base: eig.vectors, values: eig.values, blocks }
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn is_degenerate(&self) -> bool {
        self.blocks.iter().any(|b| b.len() > 1)
    }

    /// Smallest gap between distinct neighbouring eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn base(&self) -> &CMat<f64> {
        &self.base
    }

    pub fn basis(&self) -> ProjectiveBasis<f64> {
        ProjectiveBasis::from_unitary_unchecked(self.base.clone())
    }

    /// Same family anchored at another member.
    pub fn reanchored(&self, member: CMat<f64>) -> Self {
        Self { base: member, values: self.values.clone(), blocks: self.blocks.clone() }
    }

    /// Coordinates: `n^2` per degenerate block of size `n`.
    pub fn param_len(&self) -> usize {
        self.blocks.iter().filter(|b| b.len() > 1).map(|b| b.len() * b.len()).sum()
    }

    pub fn realize(&self, x: &[f64]) -> CMat<f64> {
        debug_assert_eq!(x.len(), self.param_len());
        let mut out = self.base.clone();
        let mut offset = 0;
        for block in self.blocks.iter().filter(|b| b.len() > 1) {
            let n = block.len();
            let coords = &x[offset..offset + n * n];
            offset += n * n;
            if coords.iter().all(|&v| v == 0.0) {
                continue;
            }
            let w = expm_i_hermitian(&hermitian_from_params(n, coords));
            self.rotate_block(&mut out, block, &w);
        }
        out
    }

    fn rotate_block(&self, out: &mut CMat<f64>, block: &[usize], w: &CMat<f64>) {
        let n = block.len();
        let cols: Vec<_> = block.iter().map(|&k| self.base.column(k).into_owned()).collect();
        for (j, &k) in block.iter().enumerate() {
            let mut v = cols[0].clone() * w[(0, j)];
            for (i, col) in cols.iter().enumerate().skip(1).take(n - 1) {
                v += col * w[(i, j)];
            }
            out.set_column(k, &v);
        }
    }

    /// Haar-random rotation inside every degenerate block.
    pub fn random_member<R: Rng>(&self, rng: &mut R) -> CMat<f64> {
        let mut out = self.base.clone();
        for block in self.blocks.iter().filter(|b| b.len() > 1) {
            let w = haar_unitary(block.len(), rng);
            self.rotate_block(&mut out, block, &w);
        }
        out
    }

    /// Member diagonalizing `probe` compressed to each degenerate block. With
    /// a generic probe built from the conditional operators of a state that
    /// is classical on this side, this lands on the classical basis.
    pub fn aligned_member(&self, probe: &CMat<f64>) -> CMat<f64> {
        let mut out = self.base.clone();
        for block in self.blocks.iter().filter(|b| b.len() > 1) {
            let n = block.len();
            let p = CMat::from_fn(self.dim(), n, |r, c| self.base[(r, block[c])]);
            let compressed = p.adjoint() * probe * &p;
            let w = linalg::eig_unchecked(&compressed).vectors;
            self.rotate_block(&mut out, block, &w);
        }
        out
    }
}

/// Generic Hermitian probe `Tr_other[(W ⊗ I) rho]` (or `(I ⊗ W)`) with a
/// fixed irrational-coefficient `W`, used to align degenerate eigenbases.
pub(crate) fn conditional_probe(rho: &CMat<f64>, da: usize, db: usize, bob_side: bool) -> CMat<f64> {
    let other = if bob_side { da } else { db };
    let w = UnitaryPoint {
        dim: other,
        params: (0..other * other).map(|k| ((k as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5).collect(),
    }
    .generator();
    let zero = Complex::new(0.0, 0.0);
    if bob_side {
        CMat::from_fn(db, db, |b, bp| {
            let mut acc = zero;
            for a in 0..da {
                for ap in 0..da {
                    acc += w[(ap, a)] * rho[(a * db + b, ap * db + bp)];
                }
            }
            acc
        })
    } else {
        CMat::from_fn(da, da, |a, ap| {
            let mut acc = zero;
            for b in 0..db {
                for bp in 0..db {
                    acc += w[(bp, b)] * rho[(a * db + b, ap * db + bp)];
                }
            }
            acc
        })
    }
}
