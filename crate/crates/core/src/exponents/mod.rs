//! Exponent formulas, finite-scan margins and log–log estimators.

pub mod classical;
pub mod classify;
pub mod estimate;
pub mod formulas;
pub mod profile;

pub use classical::{
    check_correspondence, classical_profile, d_alpha, estimate_e_classical, sandwich_check, CorrespondenceReport,
    SandwichCheck, XiMatrix,
};
pub use classify::{classify, Classification, ClassificationReport};
pub use estimate::{estimate_h, ExponentEstimate};
pub use formulas::{generic_exponent, phi0_psi0, psi_exponent};
pub use profile::{badly_approximable_margin, condition_1_1_margin, min_profile, MinProfile, ProfileRecord};
