//! The classical exponent e(ξ) of a real `q×p` matrix and its correspondence
//! with the homogeneous exponent of `x = (ξθ; θ)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::estimate::{estimate_h, fit_with_divergence, ExponentEstimate};
use crate::exponents::profile::min_profile;
use crate::lattice::rows::{enumerate_rows, shell_boxes, Budget, RowQuery};
use crate::linalg::RealTuple;
use crate::scalar::{serde_ext_f64, Real};

/// A real `q×p` matrix ξ (column-major) at working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct XiMatrix<T: Real = f64> {
    q: usize,
    p: usize,
    entries: Vec<T>,
}

impl<T: Real> XiMatrix<T> {
    pub fn new(q: usize, p: usize, entries: Vec<T>) -> Result<Self> {
        if q == 0 || p == 0 {
            return Err(Error::InvalidDimensions("xi must be nonempty".into()));
        }
        if entries.len() != q * p {
            return Err(Error::DimensionMismatch(format!("{} entries for a {q}x{p} matrix", entries.len())));
        }
        Ok(XiMatrix { q, p, entries })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.entries[j * self.q..(j + 1) * self.q]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let v: Vec<f64> = self.entries.iter().map(|e| e.to_f64()).collect();
        DMatrix::from_column_slice(self.q, self.p, &v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.to_f64().abs()))
    }

    /// The tuple `(ξ; I_p)` in `R^(q+p, p)`.
    pub fn normalized_tuple(&self) -> Result<RealTuple<T>> {
        let n = self.q + self.p;
        let mut e = Vec::with_capacity(n * self.p);
        let like = &self.entries[0];
        for j in 0..self.p {
            e.extend_from_slice(self.col(j));
            for k in 0..self.p {
                e.push(like.int_like(i64::from(k == j)));
            }
        }
        RealTuple::from_entries(n, self.p, e)
    }
}

/// `max_j ||a · ξ_j||` (distance to the nearest integer) for one row a of α.
pub fn row_distance<T: Real>(xi: &XiMatrix<T>, a: &[i64]) -> T {
    let mut best = T::dot_int(a, xi.col(0)).dist_to_int();
    for j in 1..xi.p {
        let v = T::dot_int(a, xi.col(j)).dist_to_int();
        if v > best {
            best = v;
        }
    }
    best
}

/// `d(α) = min over integer β of ||αξ + β||`, the largest distance of an
/// entry of αξ to the integers. α is `p×q`, row-major.
pub fn d_alpha<T: Real>(xi: &XiMatrix<T>, alpha: &[i64]) -> Result<f64> {
    if alpha.len() != xi.p * xi.q {
        return Err(Error::DimensionMismatch(format!(
            "alpha must be {}x{}",
            xi.p, xi.q
        )));
    }
    Ok(alpha
        .chunks(xi.q)
        .map(|row| row_distance(xi, row).to_f64())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRecord {
    pub norm: i64,
    pub d: f64,
    /// A minimizing row of α (α itself is this row followed by zero rows).
    pub alpha_row: Vec<i64>,
}

/// Strict minima of `d(α)` over `0 < ||α|| ≤ q`, as q grows to `qmax`.
pub fn classical_profile<T: Real>(xi: &XiMatrix<T>, qmax: i64, budget: &mut Budget) -> Result<Vec<ClassicalRecord>> {
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let (q, p) = (xi.q, xi.p);
    let xt = xi.normalized_tuple()?;
    let n = q + p;
    let colsum: Vec<f64> = (0..p).map(|j| xt.col_f64(j)[..q].iter().map(|v| v.abs()).sum()).collect();
    let centers = vec![0.0; p];
    let mut best: Option<T> = None;
    let mut out = Vec::new();
    for big_n in 1..=qmax {
        let radius = best.as_ref().map_or(0.5, |b| b.to_f64());
        let radii = vec![radius; p];
        let rq = RowQuery { n, p, x: xt.entries_f64(), centers: &centers, radii: &radii };
        let mut shell_best: Option<(T, Vec<i64>)> = None;
        for (alo, ahi) in shell_boxes(q, big_n) {
            let mut lo = alo.clone();
            let mut hi = ahi.clone();
            for s in &colsum {
                let b = (big_n as f64 * s).ceil() as i64 + 1;
                lo.push(-b);
                hi.push(b);
            }
            enumerate_rows(&rq, &lo, &hi, budget, |ab| {
                let a = &ab[..q];
                if a.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
                    return;
                }
                let v = row_distance(xi, a);
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
        }
        if let Some((v, a)) = shell_best {
            let d = v.to_f64();
            out.push(ClassicalRecord { norm: big_n, d, alpha_row: a });
            best = Some(v);
            if d <= T::tol_zero() {
                break;
            }
        }
    }
    Ok(out)
}

/// Slope estimate of e(ξ) over the frontier of strict minima of d(α).
pub fn estimate_e_classical<T: Real>(xi: &XiMatrix<T>, qmax: i64, budget: &mut Budget) -> Result<ExponentEstimate> {
    let prof = classical_profile(xi, qmax, budget)?;
    let pts: Vec<(i64, f64)> = prof.iter().map(|r| (r.norm, r.d)).collect();
    fit_with_divergence(&pts, qmax, T::tol_zero())
}

/// One evaluation of the two-sided comparison between the classical and the
/// homogeneous infima at exponent b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub b: f64,
    pub q: i64,
    /// `min d(α)||α||^b` over `0 < ||α|| ≤ q`.
    pub lower: f64,
    /// `min ||ωx||·||ω||^b` over `0 < ||ω|| ≤ q`, x = (ξ; I).
    pub middle: f64,
    /// Norm bound `⌊q/K⌋` of the upper comparison.
    pub upper_q: i64,
    /// `K^b · lower(⌊q/K⌋)`, absent when `⌊q/K⌋ = 0`.
    #[serde(with = "serde_ext_f64")]
    pub upper: f64,
    pub holds: bool,
}

fn rows_in_box(dim: usize, q: i64, mut f: impl FnMut(&[i64])) {
    let mut a = vec![-q; dim];
    loop {
        if a.iter().any(|&v| v != 0) {
            f(&a);
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if a[k] < q {
                a[k] += 1;
                break;
            }
            a[k] = -q;
        }
    }
}

/// Direct-scan check of `lower(q) ≤ middle(q) ≤ K^b lower(⌊q/K⌋)` with
/// `K = q·||ξ|| + 1` (q here the row count of ξ), on the normalized tuple.
///
/// For nonzero ω = (a | b) with `||ω|| ≤ q`: if a ≠ 0 then `||ωx|| ≥ d(a)`
/// and `||ω|| ≥ ||a||`; if a = 0 then `||ωx|| ≥ 1`. Conversely, rounding
/// gives b with `||(a | b)|| ≤ K||a||`.
pub fn sandwich_check(xi: &XiMatrix<f64>, bs: &[f64], qs: &[i64]) -> Result<Vec<SandwichCheck>> {
    let x = xi.normalized_tuple()?;
    let (qd, p) = (xi.q, xi.p);
    let n = qd + p;
    let k_const = qd as f64 * xi.sup_norm() + 1.0;
    let lower = |q: i64, b: f64| -> f64 {
        let mut best = f64::INFINITY;
        rows_in_box(qd, q, |a| {
            let v = row_distance(xi, a) * (crate::lattice::rows::vec_norm(a) as f64).powf(b);
            best = best.min(v);
        });
        best
    };
    let middle = |q: i64, b: f64| -> f64 {
        let mut best = f64::INFINITY;
        rows_in_box(n, q, |w| {
            let e = (0..p).map(|j| x.row_dot(w, j).abs()).fold(0.0, f64::max);
            best = best.min(e * (crate::lattice::rows::vec_norm(w) as f64).powf(b));
        });
        best
    };
    let mut out = Vec::new();
    for &b in bs {
        for &q in qs {
            if q < 1 {
                return Err(Error::Precondition("sandwich norm bounds must be >= 1".into()));
            }
            let lo = lower(q, b);
            let mid = middle(q, b);
            let upper_q = (q as f64 / k_const).floor() as i64;
            let upper = if upper_q >= 1 {
                k_const.powf(b) * lower(upper_q, b)
            } else {
                f64::INFINITY
            };
            out.push(SandwichCheck {
                b,
                q,
                lower: lo,
                middle: mid,
                upper_q,
                upper,
                holds: lo <= mid && mid <= upper,
            });
        }
    }
    Ok(out)
}

/// Side-by-side estimates of h(x) for `x = (ξθ; θ)` and of e(ξ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub h: ExponentEstimate,
    pub e: ExponentEstimate,
    #[serde(with = "serde_ext_f64")]
    pub difference: f64,
    pub sandwich: Vec<SandwichCheck>,
}

/// `x = (ξθ; θ)` for a nonsingular `p×p` θ.
pub fn stacked_tuple(xi: &XiMatrix<f64>, theta: &DMatrix<f64>) -> Result<RealTuple<f64>> {
    let p = xi.p;
    if theta.shape() != (p, p) {
        return Err(Error::DimensionMismatch(format!("theta must be {p}x{p}")));
    }
    if theta.determinant().abs() <= f64::EPSILON * crate::linalg::sup_norm_real(theta).powi(p as i32) {
        return Err(Error::Precondition("theta must be nonsingular".into()));
    }
    let top = xi.to_dmatrix() * theta;
    let mut m = DMatrix::zeros(xi.q + p, p);
    m.view_mut((0, 0), (xi.q, p)).copy_from(&top);
    m.view_mut((xi.q, 0), (p, p)).copy_from(theta);
    RealTuple::from_dmatrix(&m)
}

/// Estimates h(x) and e(ξ) at the same norm bound and checks the sandwich
/// inequalities at the given (b, q) samples.
pub fn check_correspondence(
    xi: &XiMatrix<f64>,
    theta: &DMatrix<f64>,
    qmax: i64,
    sandwich_bs: &[f64],
    sandwich_qs: &[i64],
    budget: &mut Budget,
) -> Result<CorrespondenceReport> {
    let x = stacked_tuple(xi, theta)?;
    let h = estimate_h(&min_profile(&x, qmax, budget)?)?;
    let e = estimate_e_classical(xi, qmax, budget)?;
    let difference = if h.diverged && e.diverged { 0.0 } else { (h.value - e.value).abs() };
    let sandwich = sandwich_check(xi, sandwich_bs, sandwich_qs)?;
    Ok(CorrespondenceReport { h, e, difference, sandwich })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi1(v: f64) -> XiMatrix<f64> {
        XiMatrix::new(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn d_alpha_examples() {
        let s = xi1(2f64.sqrt());
        assert!((d_alpha(&s, &[5]).unwrap() - (5.0 * 2f64.sqrt() - 7.0)).abs() < 1e-15);
        assert_eq!(d_alpha(&s, &[0]).unwrap(), 0.0);
        assert_eq!(d_alpha(&s, &[-5]).unwrap(), d_alpha(&s, &[5]).unwrap());
        assert!(d_alpha(&s, &[1, 2]).is_err());
    }

    #[test]
    fn golden_records_are_fibonacci() {
        let g = xi1((1.0 + 5f64.sqrt()) / 2.0);
        let prof = classical_profile(&g, 1000, &mut Budget::default()).unwrap();
        let norms: Vec<i64> = prof.iter().map(|r| r.norm).collect();
        assert_eq!(norms, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987]);
        for r in &prof {
            assert_eq!(d_alpha(&g, &r.alpha_row).unwrap(), r.d);
        }
    }

    #[test]
    fn rational_xi_diverges() {
        let third = xi1(1.0 / 3.0);
        let e = estimate_e_classical(&third, 50, &mut Budget::default()).unwrap();
        assert!(e.diverged && e.value.is_infinite());
    }

    #[test]
    fn sandwich_holds_for_sqrt2() {
        let s = xi1(2f64.sqrt());
        for c in sandwich_check(&s, &[0.0, 0.5, 1.0, 2.0], &[1, 7, 30]).unwrap() {
            assert!(c.holds, "{c:?}");
        }
    }
}
