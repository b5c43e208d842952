//! Heuristic classification of a tuple from its homogeneous exponent estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::estimate::{estimate_h, ExponentEstimate};
use crate::exponents::formulas::generic_exponent;
use crate::exponents::profile::min_profile;
use crate::lattice::rows::Budget;
use crate::linalg::RealTuple;
use crate::scalar::Real;

/// Offset above the generic exponent separating the classes.
pub const CLASS_MARGIN: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    BadlyApproxLikely,
    Generic,
    PvwaLikely,
    RationalDependent,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::BadlyApproxLikely => "BADLY_APPROX_LIKELY",
            Classification::Generic => "GENERIC",
            Classification::PvwaLikely => "PVWA_LIKELY",
            Classification::RationalDependent => "RATIONAL_DEPENDENT",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class: Classification,
    /// Absent when the profile had too few records to fit.
    pub estimate: Option<ExponentEstimate>,
    pub generic_value: f64,
    pub threshold: f64,
    pub qmax: i64,
}

/// Class from an estimate: with `t = (n−p)/p + 0.25` and the one-standard-error
/// interval `[lo, hi]`, BADLY when `hi < t`, PVWA when `lo > t`, GENERIC otherwise.
pub fn classify_estimate(n: usize, p: usize, est: &ExponentEstimate) -> Classification {
    if est.diverged {
        return Classification::RationalDependent;
    }
    let t = generic_exponent(n, p) + CLASS_MARGIN;
    if est.ci.1 < t {
        Classification::BadlyApproxLikely
    } else if est.ci.0 > t {
        Classification::PvwaLikely
    } else {
        Classification::Generic
    }
}

pub fn classify<T: Real>(x: &RealTuple<T>, qmax: i64, budget: &mut Budget) -> Result<ClassificationReport> {
    let (n, p) = (x.n(), x.p());
    let generic_value = generic_exponent(n, p);
    let threshold = generic_value + CLASS_MARGIN;
    if !x.independent() {
        return Ok(ClassificationReport {
            class: Classification::RationalDependent,
            estimate: None,
            generic_value,
            threshold,
            qmax,
        });
    }
    let profile = min_profile(x, qmax, budget)?;
    let (class, estimate) = match estimate_h(&profile) {
        Ok(e) => (classify_estimate(n, p, &e), Some(e)),
        Err(Error::InsufficientData { .. }) => (Classification::Generic, None),
        Err(e) => return Err(e),
    };
    Ok(ClassificationReport { class, estimate, generic_value, threshold, qmax })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        let mk = |v: f64, hw: f64| ExponentEstimate {
            value: v,
            ci: (v - hw, v + hw),
            n_points: 10,
            qmax: 100,
            diverged: false,
            intercept: 0.0,
            norm_range: (1, 100),
        };
        assert_eq!(classify_estimate(2, 1, &mk(1.0, 0.1)), Classification::BadlyApproxLikely);
        assert_eq!(classify_estimate(2, 1, &mk(1.2, 0.1)), Classification::Generic);
        assert_eq!(classify_estimate(2, 1, &mk(2.0, 0.5)), Classification::PvwaLikely);
    }

    #[test]
    fn half_is_rational_dependent() {
        let x = RealTuple::new(2, 1, vec![0.5, 1.0]).unwrap();
        let r = classify(&x, 100, &mut Budget::default()).unwrap();
        assert_eq!(r.class, Classification::RationalDependent);
        assert_eq!(serde_json::to_string(&r.class).unwrap(), "\"RATIONAL_DEPENDENT\"");
    }
}
