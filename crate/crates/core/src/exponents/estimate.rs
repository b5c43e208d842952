//! Log–log slope estimates of approximation exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::profile::MinProfile;
use crate::fit::least_squares;
use crate::scalar::{serde_ext_f64, serde_ext_pair};

/// Minimum number of frontier records for a fit.
pub const MIN_RECORDS: usize = 3;

/// An exponent estimated as the slope of `−log(error)` against `log(norm)`.
///
/// The confidence interval is the slope plus or minus one standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    #[serde(with = "serde_ext_f64")]
    pub value: f64,
    #[serde(with = "serde_ext_pair")]
    pub ci: (f64, f64),
    pub n_points: usize,
    pub qmax: i64,
    pub diverged: bool,
    #[serde(with = "serde_ext_f64")]
    pub intercept: f64,
    /// Smallest and largest norm used in the fit.
    pub norm_range: (i64, i64),
}

impl ExponentEstimate {
    /// Half-width of the confidence interval.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }

    fn diverged(n_points: usize, qmax: i64, norm_range: (i64, i64)) -> Self {
        ExponentEstimate {
            value: f64::INFINITY,
            ci: (f64::INFINITY, f64::INFINITY),
            n_points,
            qmax,
            diverged: true,
            intercept: f64::NAN,
            norm_range,
        }
    }
}

/// Fits `−log e` against `log q` over `(q, e)` pairs with positive errors.
pub fn fit_frontier(points: &[(i64, f64)], qmax: i64) -> Result<ExponentEstimate> {
    if points.len() < MIN_RECORDS {
        return Err(Error::InsufficientData { have: points.len(), need: MIN_RECORDS });
    }
    let xs: Vec<f64> = points.iter().map(|(q, _)| (*q as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| -e.ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or(Error::InsufficientData { have: points.len(), need: MIN_RECORDS })?;
    Ok(ExponentEstimate {
        value: fit.slope,
        ci: (fit.slope - fit.slope_se, fit.slope + fit.slope_se),
        n_points: points.len(),
        qmax,
        diverged: false,
        intercept: fit.intercept,
        norm_range: (points[0].0, points[points.len() - 1].0),
    })
}

/// Same as [`fit_frontier`], but a final error at or below `tol_zero` marks
/// the estimate as diverged (value +∞) regardless of the record count.
pub fn fit_with_divergence(points: &[(i64, f64)], qmax: i64, tol_zero: f64) -> Result<ExponentEstimate> {
    let range = (points.first().map_or(0, |p| p.0), points.last().map_or(0, |p| p.0));
    if points.iter().any(|(_, e)| *e <= tol_zero) {
        return Ok(ExponentEstimate::diverged(points.len(), qmax, range));
    }
    fit_frontier(points, qmax)
}

/// Homogeneous exponent estimate from a minimum profile.
pub fn estimate_h(profile: &MinProfile) -> Result<ExponentEstimate> {
    let pts: Vec<(i64, f64)> = profile.records.iter().map(|r| (r.q, r.m)).collect();
    fit_with_divergence(&pts, profile.qmax, profile.tol_zero)
}

/// `(log q, −log m)` pairs of a profile, for plotting.
pub fn plot_pairs(points: &[(i64, f64)]) -> Vec<(f64, f64)> {
    points.iter().map(|(q, m)| ((*q as f64).ln(), -m.ln())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(i64, f64)> = [1i64, 3, 10, 40, 200].iter().map(|&q| (q, 0.5 * (q as f64).powf(-1.5))).collect();
        let e = fit_frontier(&pts, 200).unwrap();
        assert!((e.value - 1.5).abs() < 1e-12);
        assert!(e.ci.0 <= e.value && e.value <= e.ci.1);
        assert_eq!(e.norm_range, (1, 200));
    }

    #[test]
    fn too_few_records() {
        let e = fit_frontier(&[(1, 0.5), (2, 0.1)], 2).unwrap_err();
        assert_eq!(e, Error::InsufficientData { have: 2, need: 3 });
    }

    #[test]
    fn zero_error_diverges_and_serializes() {
        let e = fit_with_divergence(&[(1, 0.5), (2, 0.0)], 10, 1e-15).unwrap();
        assert!(e.diverged && e.value.is_infinite());
        let js = serde_json::to_string(&e).unwrap();
        assert!(js.contains("\"value\":\"inf\""));
        let back: ExponentEstimate = serde_json::from_str(&js).unwrap();
        assert!(back.value.is_infinite() && back.diverged);
    }
}
