//! Dense Hermitian linear algebra and quantum-state primitives.

mod basis;
mod io;
mod kraus;
pub mod linalg;
mod ops;
mod state;

pub use basis::ProjectiveBasis;
pub use io::{state_from_json, state_to_json, StateFile};
pub use kraus::KrausMap;
pub use linalg::{eig_hermitian, HermitianEigen};
pub use ops::{
    apply_kraus, apply_kraus_selective, apply_local_unitary, conditional_operator, dephase, matrix_entropy,
    partial_trace, steer, tensor_product, von_neumann_entropy, KrausOutcome, SteeredState, SteeringEnsemble,
    NEGLIGIBLE_PROB,
};
pub use state::DensityMatrix;
