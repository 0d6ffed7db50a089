//! Steering-induced coherence and measurement-induced disturbance for
//! finite-dimensional bipartite states.
//!
//! The linear-algebra kernel, distance measures and the two-qubit Pauli
//! algebra are generic over [`scalar::Real`] (`f32` or `f64`); the
//! optimizers and verification suites work in `f64`.

pub mod correlations;
pub mod error;
pub mod measures;
pub mod optim;
pub mod protocols;
pub mod qkernel;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod twoqubit;

pub use error::{Error, Result};
pub use measures::DistanceKind;
pub use optim::Budget;
pub use report::{SuiteReport, Verdict, VerificationReport};

pub type Density = qkernel::DensityMatrix<f64>;
pub type Density32 = qkernel::DensityMatrix<f32>;
pub type Basis = qkernel::ProjectiveBasis<f64>;
pub type Basis32 = qkernel::ProjectiveBasis<f32>;
pub type Kraus = qkernel::KrausMap<f64>;
pub type Theta = twoqubit::PauliTheta<f64>;
pub type Theta32 = twoqubit::PauliTheta<f32>;
