//! Lattice enumeration: matrices in norm balls, row candidates in windows,
//! affine lattice points in split parallelepipeds.

pub mod ball;
pub mod covering;
pub mod rows;
pub mod split;

pub use ball::{enumerate_norm_ball, BallMode, NormBall};
pub use covering::{verify_meyer_covering, CoveringCertificate, CoveringConfig};
pub use rows::{Budget, RowQuery, DEFAULT_MAX_CANDIDATES};
pub use split::{
    affine_points_in_omega, affine_points_in_omega_rows, check_condition_2_1, chi_exponent, BoxRegion, OmegaRegion,
    SplitSpace,
};
