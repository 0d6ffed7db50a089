use crate::measures::DistanceKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid projective basis: {0}")]
    InvalidBasis(String),

    #[error("Kraus map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    /// Support of the first argument is not contained in the support of the
    /// second; the relative entropy is +infinity.
    #[error("relative entropy diverges: support(rho) is not contained in support(sigma)")]
    InfiniteDivergence,

    #[error("{kind} distance is not a valid coherence measure in dimension {dim}")]
    CoherenceInvalid { kind: DistanceKind, dim: usize },

    #[error("{kind} distance is not unitarily invariant and cannot define MID")]
    MidInvalid { kind: DistanceKind },

    #[error("{kind} distance is not supported for {what}")]
    UnsupportedKind { kind: DistanceKind, what: &'static str },

    #[error("Bob Bloch vector vanishes; use the diagonal form")]
    DegenerateBranch,

    #[error("Pauli coefficients are not in canonical form: {0}")]
    NotCanonical(String),

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("malformed state file: {0}")]
    StateFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
