//! Seeded random states, unitaries and channels.

use nalgebra::{Complex, ComplexField, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::Result;
use crate::qkernel::{partial_trace, DensityMatrix};
use crate::scalar::{CMat, CVec};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex<f64> {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat<f64> {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of
/// `R`'s diagonal divided out).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat<f64> {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.modulus() > 0.0 { rkk / Complex::from_real(rkk.modulus()) } else { Complex::new(1.0, 0.0) };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec<f64> {
    let v = DVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix<f64>> {
    let n = dims.iter().product();
    DensityMatrix::from_pure(dims.to_vec(), &random_unit_vector(n, rng))
}

/// Hilbert-Schmidt (induced) measure: reduce a random pure state on the
/// doubled space.
pub fn random_hs<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityMatrix<f64>> {
    let n: usize = dims.iter().product();
    let pure = DensityMatrix::from_pure(vec![n, n], &random_unit_vector(n * n, rng))?;
    let reduced = partial_trace(&pure, &[0])?;
    DensityMatrix::new(dims.to_vec(), reduced.into_data())
}

/// Random probability vector, uniform on the simplex.
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Random PSD unit-trace `d x d` matrix `G G† / tr(G G†)`.
pub fn random_coefficient_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat<f64> {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}

/// `sum_i p_i rho_i^A ⊗ |e_i><e_i|` with a Haar-random Bob basis.
pub fn random_b_classical<R: Rng + ?Sized>(da: usize, db: usize, rng: &mut R) -> Result<DensityMatrix<f64>> {
    let basis = haar_unitary(db, rng);
    let probs = random_simplex(db, rng);
    let mut data = CMat::zeros(da * db, da * db);
    for (i, p) in probs.iter().enumerate() {
        let rho_a = random_hs(&[da], rng)?;
        let e = basis.column(i);
        let proj = e * e.adjoint();
        data += rho_a.data().kronecker(&proj).scale(*p);
    }
    DensityMatrix::new(vec![da, db], data)
}

/// Kraus operators of a random channel on dimension `d` with `n_ops`
/// operators, cut from a Haar isometry.
pub fn random_channel_kraus<R: Rng + ?Sized>(d: usize, n_ops: usize, rng: &mut R) -> Vec<CMat<f64>> {
    let u = haar_unitary(d * n_ops, rng);
    (0..n_ops).map(|k| CMat::from_fn(d, d, |r, c| u[(k * d + r, c)])).collect()
}

/// Trace-preserving family `K_n = sum_j c_{n,j} |π_n(j)><j|` with random
/// permutations `π_n`, phases, and weights normalized so that
/// `sum_n |c_{n,j}|^2 = 1` for each `j`. Each `K_n` maps diagonal states to
/// diagonal states.
pub fn random_incoherent_kraus<R: Rng + ?Sized>(d: usize, n_ops: usize, rng: &mut R) -> Vec<CMat<f64>> {
    let weights: Vec<Vec<f64>> = (0..d).map(|_| random_simplex(n_ops, rng)).collect();
    (0..n_ops)
        .map(|n| {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(rng);
            let mut k = CMat::zeros(d, d);
            for j in 0..d {
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let amp = weights[j][n].sqrt();
                k[(perm[j], j)] = Complex::new(amp * phase.cos(), amp * phase.sin());
            }
            k
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::stream_rng;
    use crate::qkernel::linalg::{max_abs_diff, unitarity_defect};

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = stream_rng(1, 0);
        for d in 2..6 {
            assert!(unitarity_defect(&haar_unitary(d, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn channels_are_trace_preserving() {
        let mut rng = stream_rng(2, 0);
        for (d, n) in [(2, 3), (3, 2), (2, 1)] {
            for ops in [random_channel_kraus(d, n, &mut rng), random_incoherent_kraus(d, n, &mut rng)] {
                let sum = ops.iter().fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k);
                assert!(max_abs_diff(&sum, &CMat::identity(d, d)) < 1e-12);
            }
        }
    }

    #[test]
    fn hs_mean_approaches_maximally_mixed() {
        let mut rng = stream_rng(3, 0);
        let n_samples = 2000;
        let mut mean = CMat::zeros(4, 4);
        for _ in 0..n_samples {
            mean += random_hs(&[2, 2], &mut rng).unwrap().data();
        }
        mean.unscale_mut(n_samples as f64);
        let target = CMat::identity(4, 4).unscale(4.0);
        assert!(max_abs_diff(&mean, &target) < 5.0 / (n_samples as f64).sqrt());
    }

    #[test]
    fn b_classical_states_are_valid() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..20 {
            random_b_classical(3, 2, &mut rng).unwrap();
        }
    }
}
