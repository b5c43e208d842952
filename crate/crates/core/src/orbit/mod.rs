//! Approximation of a target tuple by the orbit Γx.

pub mod construct;
pub mod exponent;
pub mod frontier;
pub mod search;

pub use construct::{construct_gamma, ConstructConfig, ConstructionTrace};
pub use exponent::{estimate_e_xy, verify_cor_1_3, RhoScan};
pub use frontier::{ApproxRecord, Frontier};
pub use search::{best_gamma_search, full_enumeration_frontier, row_error, DetConstraint};
