//! Homogeneous minima `min ||ωx||` over growing norm balls, and the margins
//! `inf ||ωx||^p ||ω||^k`.
//!
//! Both reduce to single rows: `||ωx||` is the maximum over the rows `a` of ω
//! of `max_j |a·x_j|`, and `||ω||` the maximum of the row norms, so any
//! nonzero ω is dominated by the single-row matrix built from one of its
//! nonzero rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::formulas::phi_upper;
use crate::lattice::rows::{enumerate_shell_rows, Budget, RowQuery};
use crate::linalg::{IntMatrix, RealTuple};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub q: i64,
    /// `min ||ωx||` over nonzero ω with `||ω|| ≤ q`.
    pub m: f64,
    pub argmin: IntMatrix,
}

/// Strict improvements of `min ||ωx||` as the norm bound grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinProfile {
    pub n: usize,
    pub p: usize,
    pub qmax: i64,
    /// Values at or below this count as exact zeros.
    pub tol_zero: f64,
    pub records: Vec<ProfileRecord>,
}

impl MinProfile {
    /// True when the minimum reached zero (a rational dependence).
    pub fn hit_zero(&self) -> bool {
        self.records.last().is_some_and(|r| r.m <= self.tol_zero)
    }
}

/// `max_j |a · x_j|` at working precision.
pub fn row_value<T: Real>(x: &RealTuple<T>, a: &[i64]) -> T {
    let mut best = x.row_dot(a, 0).abs();
    for j in 1..x.p() {
        let v = x.row_dot(a, j).abs();
        if v > best {
            best = v;
        }
    }
    best
}

/// Canonical sign: first nonzero coordinate positive.
fn canonical(a: &[i64]) -> bool {
    a.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

/// Single-row matrix with `a` in the first row.
pub fn single_row_matrix(a: &[i64]) -> IntMatrix {
    let n = a.len();
    let mut e = vec![0; n * n];
    e[..n].copy_from_slice(a);
    IntMatrix::new(n, e).expect("square by construction")
}

/// Shell-by-shell scan recording every strict decrease of `min ||ωx||`.
///
/// The argmin of a record is the single-row matrix whose first row is the
/// lexicographically smallest minimizing row with positive leading entry.
/// The scan stops early once the minimum reaches zero.
pub fn min_profile<T: Real>(x: &RealTuple<T>, qmax: i64, budget: &mut Budget) -> Result<MinProfile> {
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let (n, p) = (x.n(), x.p());
    let tol_zero = T::tol_zero();
    let centers = vec![0.0; p];
    let mut best: Option<T> = None;
    let mut records = Vec::new();
    for big_n in 1..=qmax {
        let radius = best.as_ref().map_or(f64::INFINITY, |b| b.to_f64());
        let radii = vec![radius; p];
        let q = RowQuery { n, p, x: x.entries_f64(), centers: &centers, radii: &radii };
        let mut shell_best: Option<(T, Vec<i64>)> = None;
        enumerate_shell_rows(&q, big_n, budget, |a| {
            if !canonical(a) {
                return;
            }
            let v = row_value(x, a);
            if best.as_ref().is_some_and(|b| v >= *b) {
                return;
            }
            let better = match &shell_best {
                None => true,
                Some((sv, sa)) => v < *sv || (v == *sv && a < sa.as_slice()),
            };
            if better {
                shell_best = Some((v, a.to_vec()));
            }
        })?;
        if let Some((v, a)) = shell_best {
            let m = v.to_f64();
            records.push(ProfileRecord { q: big_n, m, argmin: single_row_matrix(&a) });
            best = Some(v);
            if m <= tol_zero {
                break;
            }
        }
    }
    Ok(MinProfile { n, p, qmax, tol_zero, records })
}

/// Finite-scan value of `inf ||ωx||^p ||ω||^{(n−p)(1+φ)}` over nonzero ω
/// with `||ω|| ≤ qmax`.
pub fn condition_1_1_margin<T: Real>(x: &RealTuple<T>, phi: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    let (n, p) = (x.n(), x.p());
    if !(phi >= 0.0 && phi < phi_upper(n, p)) {
        return Err(Error::Precondition(format!("phi = {phi} outside [0, {})", phi_upper(n, p))));
    }
    let k = (n - p) as f64 * (1.0 + phi);
    margin_scan(x, k, qmax, budget)
}

/// `inf ||ωx||^p ||ω||^{n−p}`: the margin at φ = 0.
pub fn badly_approximable_margin<T: Real>(x: &RealTuple<T>, qmax: i64, budget: &mut Budget) -> Result<f64> {
    condition_1_1_margin(x, 0.0, qmax, budget)
}

/// `min over nonzero rows a, ||a|| ≤ qmax, of (max_j |a·x_j|)^p · ||a||^k`.
pub fn margin_scan<T: Real>(x: &RealTuple<T>, k: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let (n, p) = (x.n(), x.p());
    let pi = p as i32;
    let centers = vec![0.0; p];
    let mut best = f64::INFINITY;
    for big_n in 1..=qmax {
        let nk = (big_n as f64).powf(k);
        let radius = if best.is_finite() {
            (best / nk).powf(1.0 / p as f64)
        } else {
            f64::INFINITY
        };
        let radii = vec![radius; p];
        let q = RowQuery { n, p, x: x.entries_f64(), centers: &centers, radii: &radii };
        enumerate_shell_rows(&q, big_n, budget, |a| {
            if !canonical(a) {
                return;
            }
            let v = row_value(x, a).to_f64().powi(pi) * nk;
            if v < best {
                best = v;
            }
        })?;
        if best == 0.0 {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball::{enumerate_norm_ball, BallMode};
    use crate::linalg::{apply, tuple_norm};

    fn tup(v: &[f64]) -> RealTuple<f64> {
        RealTuple::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn sqrt2_first_shell_matches_all_81_matrices() {
        let x = tup(&[2f64.sqrt(), 1.0]);
        let prof = min_profile(&x, 1, &mut Budget::default()).unwrap();
        let oracle = enumerate_norm_ball(2, 1, BallMode::Ball, 100, |m| !m.is_zero())
            .unwrap()
            .map(|m| tuple_norm(&apply(&m, &x).unwrap()))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(prof.records.len(), 1);
        assert_eq!(prof.records[0].m, oracle);
        assert!((oracle - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(prof.records[0].argmin.row(0), &[1, -1]);
    }

    #[test]
    fn rational_column_hits_zero() {
        let x = tup(&[0.5, 1.0]);
        let prof = min_profile(&x, 10, &mut Budget::default()).unwrap();
        assert!(prof.hit_zero());
        assert_eq!(prof.records.last().unwrap().q, 2);
        assert_eq!(condition_1_1_margin(&x, 0.3, 5, &mut Budget::default()).unwrap(), 0.0);
    }

    #[test]
    fn margin_matches_brute_force_over_matrices() {
        let x = RealTuple::new(3, 1, vec![2f64.sqrt(), 3f64.sqrt(), 1.0]).unwrap();
        let k = 2.0 * 1.1;
        let got = margin_scan(&x, k, 2, &mut Budget::default()).unwrap();
        let oracle = enumerate_norm_ball(3, 2, BallMode::Ball, 10_000_000, |m| !m.is_zero())
            .unwrap()
            .map(|m| tuple_norm(&apply(&m, &x).unwrap()) * (m.sup_norm() as f64).powf(k))
            .fold(f64::INFINITY, f64::min);
        assert!((got - oracle).abs() <= 1e-12 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn profile_values_re_verify() {
        let x = RealTuple::new(3, 2, vec![2f64.sqrt(), 0.3, 1.0, 0.7, 5f64.sqrt(), 1.0]).unwrap();
        let prof = min_profile(&x, 12, &mut Budget::default()).unwrap();
        for w in prof.records.windows(2) {
            assert!(w[0].q < w[1].q && w[0].m > w[1].m);
        }
        for r in &prof.records {
            let v = tuple_norm(&apply(&r.argmin, &x).unwrap());
            assert!((v - r.m).abs() <= 1e-12);
        }
    }
}
