//! The inhomogeneous exponent e(x, y) and the `||γx − y|| < ||γ||^{−ρ}` scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::estimate::{estimate_h, fit_frontier, ExponentEstimate};
use crate::exponents::formulas::phi0_psi0;
use crate::exponents::profile::min_profile;
use crate::lattice::rows::Budget;
use crate::linalg::RealTuple;
use crate::orbit::frontier::{ApproxRecord, Frontier};
use crate::orbit::search::{best_gamma_search, DetConstraint};

/// Errors at or below this are treated as an exact hit of the orbit.
pub const ORBIT_TOL: f64 = 1e-15;

/// Least-squares slope of `−log error` against `log norm` over the frontier.
pub fn estimate_e_xy(frontier: &Frontier) -> Result<ExponentEstimate> {
    if frontier.records.iter().any(|r| r.error <= ORBIT_TOL) {
        return Err(Error::OrbitPoint);
    }
    fit_frontier(&frontier.points(), frontier.qmax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoScan {
    pub rho: f64,
    pub count: usize,
    pub qmax: i64,
    /// Homogeneous exponent estimate of x used for the hypothesis check.
    pub h: f64,
    pub psi0: f64,
    pub records: Vec<ApproxRecord>,
    /// Fewer than `count` qualifying records below `qmax`.
    pub incomplete: bool,
}

/// Up to `count` frontier records with `error < norm^{−ρ}`.
///
/// The hypothesis `ρ < 1/ψ₀` is checked with ψ₀ derived from the homogeneous
/// exponent estimate of `x` at the same `qmax`.
pub fn verify_cor_1_3(
    x: &RealTuple<f64>,
    y: &RealTuple<f64>,
    rho: f64,
    count: usize,
    qmax: i64,
    budget: &mut Budget,
) -> Result<RhoScan> {
    let (n, p) = (x.n(), x.p());
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    let h_est = estimate_h(&min_profile(x, qmax, budget)?)?;
    if h_est.diverged {
        return Err(Error::Precondition("homogeneous profile of x reached zero".into()));
    }
    let (_, psi0) = phi0_psi0(n, p, h_est.value)?;
    if !(rho < 1.0 / psi0) {
        return Err(Error::Precondition(format!("rho = {rho} must be below 1/psi0 = {}", 1.0 / psi0)));
    }
    let frontier = best_gamma_search(x, y, qmax, DetConstraint::Positive, budget)?;
    let records: Vec<ApproxRecord> = frontier
        .records
        .into_iter()
        .filter(|r| r.error < (r.norm as f64).powf(-rho))
        .take(count)
        .collect();
    Ok(RhoScan { rho, count, qmax, h: h_est.value, psi0, incomplete: records.len() < count, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply, IntMatrix};

    fn golden() -> RealTuple<f64> {
        RealTuple::new(2, 1, vec![(1.0 + 5f64.sqrt()) / 2.0, 1.0]).unwrap()
    }

    #[test]
    fn orbit_point_has_no_exponent() {
        let x = golden();
        let y = apply(&IntMatrix::new(2, vec![3, 1, 1, 1]).unwrap(), &x).unwrap();
        let f = best_gamma_search(&x, &y, 5, DetConstraint::Positive, &mut Budget::default()).unwrap();
        assert!(matches!(estimate_e_xy(&f), Err(Error::OrbitPoint)));
    }

    #[test]
    fn generic_target_near_one() {
        let x = RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap();
        let y = RealTuple::new(2, 1, vec![std::f64::consts::E / 10.0, std::f64::consts::PI / 10.0]).unwrap();
        let f = best_gamma_search(&x, &y, 1000, DetConstraint::Positive, &mut Budget::default()).unwrap();
        f.validate(Some((&x, &y)), true).unwrap();
        let e = estimate_e_xy(&f).unwrap();
        assert!((0.7..=1.3).contains(&e.value), "{e:?}");
    }

    #[test]
    fn rho_scan_golden() {
        let x = golden();
        let y = RealTuple::new(2, 1, vec![0.3, 0.7]).unwrap();
        let s = verify_cor_1_3(&x, &y, 0.8, 5, 10_000, &mut Budget::default()).unwrap();
        assert!(!s.incomplete && s.records.len() == 5);
        assert!(s.records.iter().all(|r| r.error < (r.norm as f64).powf(-0.8)));
        let all = verify_cor_1_3(&x, &y, 0.0, usize::MAX, 50, &mut Budget::default()).unwrap();
        assert!(all.records.iter().all(|r| r.error < 1.0));
    }
}
