//! Witness states, random sampling and the tripartite steering protocol.

pub mod random;
mod recipes;
mod tripartite;
mod verify;

pub use recipes::{
    bell, bell_diagonal, gap_example, kind_name, make_state, maximally_correlated, rho_x, werner, McParams, RecipeKind,
    StateRecipe,
};
pub use tripartite::{
    incoherent_cnot, prepare_protocol_state, ree_numeric, steering_induced_entanglement, OutcomeEntanglement, Ree,
    SteeringEntanglement,
};
pub use verify::{rho_x_finding, verify_corollary1, verify_theorem2, COROLLARY1_TOL};
