//! Witness states and seeded random states, addressable through a JSON
//! recipe `{"kind": .., "params": {..}, "seed": ..}`.

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use super::random;
use crate::error::{Error, Result};
use crate::optim::stream_rng;
use crate::qkernel::{linalg, tensor_product, DensityMatrix};
use crate::scalar::{CMat, CVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    /// Local dimension for a random coefficient matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Squared Schmidt coefficients of the pure state `sum_j sqrt(w_j) |jj>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Explicit coefficient matrix `rho_ij` (real and imaginary parts).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_re: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum RecipeKind {
    MaximallyCorrelated(McParams),
    Bell,
    GapExample,
    RhoX,
    BClassical {
        dims: [usize; 2],
    },
    #[serde(rename = "RandomHS")]
    RandomHs {
        dims: Vec<usize>,
    },
    RandomPure {
        dims: Vec<usize>,
    },
    /// Product of independent Hilbert-Schmidt random states.
    Product {
        dims: Vec<usize>,
    },
    Werner {
        p: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecipe {
    #[serde(flatten)]
    pub kind: RecipeKind,
    #[serde(default)]
    pub seed: u64,
}

impl StateRecipe {
    pub fn new(kind: RecipeKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRecipe(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Name of the single continuous parameter a sweep may vary.
    pub fn sweep_parameter(&self) -> Option<&'static str> {
        match &self.kind {
            RecipeKind::Werner { .. } => Some("p"),
            RecipeKind::MaximallyCorrelated(McParams { weights: Some(w), .. }) if w.len() == 2 => Some("lambda0"),
            _ => None,
        }
    }

    pub fn with_sweep_value(&self, value: f64) -> Result<Self> {
        let kind = match &self.kind {
            RecipeKind::Werner { .. } => RecipeKind::Werner { p: value },
            RecipeKind::MaximallyCorrelated(McParams { weights: Some(w), .. }) if w.len() == 2 => {
                RecipeKind::MaximallyCorrelated(McParams {
                    weights: Some(vec![value, 1.0 - value]),
                    ..Default::default()
                })
            }
            other => return Err(Error::InvalidRecipe(format!("{} has no sweep parameter", kind_name(other)))),
        };
        Ok(Self { kind, seed: self.seed })
    }
}

pub fn kind_name(kind: &RecipeKind) -> &'static str {
    match kind {
        RecipeKind::MaximallyCorrelated(_) => "MaximallyCorrelated",
        RecipeKind::Bell => "Bell",
        RecipeKind::GapExample => "GapExample",
        RecipeKind::RhoX => "RhoX",
        RecipeKind::BClassical { .. } => "BClassical",
        RecipeKind::RandomHs { .. } => "RandomHS",
        RecipeKind::RandomPure { .. } => "RandomPure",
        RecipeKind::Product { .. } => "Product",
        RecipeKind::Werner { .. } => "Werner",
    }
}

pub fn make_state(recipe: &StateRecipe) -> Result<DensityMatrix<f64>> {
    let mut rng = stream_rng(recipe.seed, 0x5245_4349);
    match &recipe.kind {
        RecipeKind::MaximallyCorrelated(params) => {
            let coeff = if let Some(re) = &params.coeff_re {
                let n = re.len();
                let im = params.coeff_im.clone().unwrap_or_else(|| vec![vec![0.0; n]; n]);
                if im.len() != n || re.iter().chain(&im).any(|row| row.len() != n) {
                    return Err(Error::InvalidRecipe("coefficient matrix must be square".into()));
                }
                CMat::from_fn(n, n, |r, c| Complex::new(re[r][c], im[r][c]))
            } else if let Some(w) = &params.weights {
                if w.iter().any(|&x| x < 0.0) {
                    return Err(Error::InvalidRecipe("negative Schmidt weight".into()));
                }
                let amps = DVector::from_iterator(w.len(), w.iter().map(|&x| Complex::new(x.sqrt(), 0.0)));
                &amps * amps.adjoint()
            } else {
                let d = params
                    .d
                    .ok_or_else(|| Error::InvalidRecipe("MaximallyCorrelated needs d, weights or coeff_re".into()))?;
                random::random_coefficient_matrix(d, &mut rng)
            };
            maximally_correlated(&coeff)
        }
        RecipeKind::Bell => Ok(bell()),
        RecipeKind::GapExample => Ok(gap_example()),
        RecipeKind::RhoX => Ok(rho_x()),
        RecipeKind::BClassical { dims } => random::random_b_classical(dims[0], dims[1], &mut rng),
        RecipeKind::RandomHs { dims } => random::random_hs(dims, &mut rng),
        RecipeKind::RandomPure { dims } => random::random_pure(dims, &mut rng),
        RecipeKind::Product { dims } => {
            let mut state = random::random_hs(&dims[..1], &mut rng)?;
            for &d in &dims[1..] {
                state = tensor_product(&state, &random::random_hs(&[d], &mut rng)?)?;
            }
            Ok(state)
        }
        RecipeKind::Werner { p } => werner(*p),
    }
}

/// `sum_ij rho_ij |ii><jj|` from a PSD unit-trace coefficient matrix.
pub fn maximally_correlated(coeff: &CMat<f64>) -> Result<DensityMatrix<f64>> {
    let d = coeff.nrows();
    if d < 2 || !coeff.is_square() {
        return Err(Error::InvalidRecipe("coefficient matrix must be square with side >= 2".into()));
    }
    DensityMatrix::new(vec![d], coeff.clone()).map_err(|e| Error::InvalidRecipe(format!("coefficient matrix: {e}")))?;
    let mut data = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            data[(i * d + i, j * d + j)] = coeff[(i, j)];
        }
    }
    DensityMatrix::new(vec![d, d], linalg::hermitian_part(&data))
}

fn ket(amps: &[f64]) -> CVec<f64> {
    DVector::from_iterator(amps.len(), amps.iter().map(|&x| Complex::new(x, 0.0)))
}

/// `|Φ+> = (|00> + |11>)/√2`.
pub fn bell() -> DensityMatrix<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::from_pure(vec![2, 2], &ket(&[s, 0.0, 0.0, s])).expect("valid")
}

/// `½|Φ+><Φ+| + ½|01><01|`.
pub fn gap_example() -> DensityMatrix<f64> {
    let ket01 = DensityMatrix::basis_state(vec![2, 2], 1).expect("valid");
    DensityMatrix::mixture(&[(0.5, &bell()), (0.5, &ket01)]).expect("valid")
}

/// `p|Φ+><Φ+| + (1-p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidRecipe(format!("Werner weight {p} outside [0, 1]")));
    }
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2])?;
    DensityMatrix::mixture(&[(p, &bell()), (1.0 - p, &mixed)])
}

/// `½|0><0| ⊗ |Ψ+><Ψ+| + ½|1><1| ⊗ |Ψ-><Ψ-|` on A, B, C with
/// `|Ψ±> = (|00> ± |11>)/√2`.
pub fn rho_x() -> DensityMatrix<f64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::from_pure(vec![2, 2], &ket(&[s, 0.0, 0.0, s])).expect("valid");
    let minus = DensityMatrix::from_pure(vec![2, 2], &ket(&[s, 0.0, 0.0, -s])).expect("valid");
    let zero = DensityMatrix::basis_state(vec![2], 0).expect("valid");
    let one = DensityMatrix::basis_state(vec![2], 1).expect("valid");
    let a = tensor_product(&zero, &plus).expect("valid");
    let b = tensor_product(&one, &minus).expect("valid");
    DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).expect("valid")
}

/// Bell-diagonal state with the given weights on
/// `(|Φ+>, |Φ->, |Ψ+>, |Ψ->)`, here `|Ψ±> = (|01> ± |10>)/√2`.
pub fn bell_diagonal(weights: [f64; 4]) -> Result<DensityMatrix<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let kets = [ket(&[s, 0.0, 0.0, s]), ket(&[s, 0.0, 0.0, -s]), ket(&[0.0, s, s, 0.0]), ket(&[0.0, s, -s, 0.0])];
    let mut data = CMat::zeros(4, 4);
    for (w, k) in weights.iter().zip(&kets) {
        data += (k * k.adjoint()).scale(*w);
    }
    DensityMatrix::new(vec![2, 2], data)
}
