//! MID, B-side MID and steering-induced coherence.

mod family;
mod mid;
mod objective;
mod sic;
mod verify;

pub use family::{EigenbasisFamily, DEGENERACY_GAP};
pub use mid::{b_side_mid, mid, MidResult};
pub use sic::{avg_steered_coherence, fourier_basis, sic, MinimaxTrace, SicResult, CERTIFICATION_TOL};
pub use verify::{verify_sic_properties, verify_theorem1, PropertyCheck, THEOREM1_TOL};

pub(crate) use mid::check_bipartite;
