//! The decomposition `M(n,R) = V₁ ⊕ V₂` induced by a completed basis, split
//! parallelepipeds `Ω(s,t)`, and the finite-scan check of the Diophantine
//! condition on the split.
//!
//! Split coordinates of ξ are the entries of `C = ξX` with `X = [x | ext]`:
//! columns `j < p` span V₁ (so the V₁ part of ξ has norm `||ξx||`), the other
//! columns span V₂. The split norm is the max norm of `C`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::rows::{enumerate_rows, enumerate_shell_rows, Budget, RowQuery};
use crate::linalg::{complete_basis, row_action_norm, CompletedBasis, RealTuple};

/// A splitting `R^d = V₁ ⊕ V₂` given by a linear coordinate map.
#[derive(Debug, Clone)]
pub struct SplitSpace {
    pub d: usize,
    pub d1: usize,
    pub d2: usize,
    /// Standard coordinates → split coordinates (first d1 entries in V₁).
    pub to_split: DMatrix<f64>,
    pub from_split: DMatrix<f64>,
    basis: Option<CompletedBasis>,
}

impl SplitSpace {
    /// General split from an invertible coordinate map.
    pub fn new(to_split: DMatrix<f64>, d1: usize) -> Result<Self> {
        let d = to_split.nrows();
        if to_split.ncols() != d {
            return Err(Error::DimensionMismatch("coordinate map must be square".into()));
        }
        if d1 < 2 || d1 >= d {
            return Err(Error::InvalidDimensions(format!(
                "need d1 >= 2 and d2 >= 1, got d={d}, d1={d1}"
            )));
        }
        let from_split = to_split
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("coordinate map is singular".into()))?;
        Ok(SplitSpace {
            d,
            d1,
            d2: d - d1,
            to_split,
            from_split,
            basis: None,
        })
    }

    /// Split of `M(n,R) ≅ R^(n²)` (row-major) induced by completing x to a basis.
    pub fn from_tuple(x: &RealTuple<f64>) -> Result<Self> {
        Self::from_basis(complete_basis(x)?)
    }

    pub fn from_basis(cb: CompletedBasis) -> Result<Self> {
        let (n, p) = (cb.n(), cb.p());
        let d = n * n;
        let mut t = DMatrix::zeros(d, d);
        for r in 0..n {
            for j in 0..n {
                let row = split_index(n, p, r, j);
                for k in 0..n {
                    t[(row, r * n + k)] = cb.change_of_basis[(k, j)];
                }
            }
        }
        let mut s = SplitSpace::new(t, n * p)?;
        s.basis = Some(cb);
        Ok(s)
    }

    pub fn basis(&self) -> Option<&CompletedBasis> {
        self.basis.as_ref()
    }

    /// (u, w) split coordinates of a standard-coordinate vector.
    pub fn split(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = &self.to_split * DVector::from_column_slice(v);
        (c.as_slice()[..self.d1].to_vec(), c.as_slice()[self.d1..].to_vec())
    }

    pub fn join(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let mut c = u.to_vec();
        c.extend_from_slice(w);
        (&self.from_split * DVector::from_vec(c)).as_slice().to_vec()
    }

    /// Max norms of the V₁ and V₂ parts.
    pub fn norms(&self, v: &[f64]) -> (f64, f64) {
        let (u, w) = self.split(v);
        (max_abs(&u), max_abs(&w))
    }
}

/// Index of split coordinate `C[r][j]` in the flattened (V₁, V₂) vector.
pub fn split_index(n: usize, p: usize, r: usize, j: usize) -> usize {
    if j < p {
        r * p + j
    } else {
        n * p + r * (n - p) + (j - p)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Axis-aligned box `∏ [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch("box bounds differ in length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Precondition("box must be bounded with nonempty interior".into()));
        }
        Ok(BoxRegion { lo, hi })
    }

    /// The cube `[-1, 1]^dim`.
    pub fn symmetric_unit(dim: usize) -> Self {
        BoxRegion {
            lo: vec![-1.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Membership in the dilate `s · box`.
    pub fn contains_scaled(&self, s: f64, v: &[f64]) -> bool {
        v.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| s * l <= *x && *x <= s * h)
    }
}

/// `Ω(s,t) = { u + w : u ∈ s·R1, w ∈ t·R2 }`.
#[derive(Debug, Clone)]
pub struct OmegaRegion<'a> {
    pub split: &'a SplitSpace,
    pub r1: BoxRegion,
    pub r2: BoxRegion,
    pub s: f64,
    pub t: f64,
}

impl<'a> OmegaRegion<'a> {
    pub fn new(split: &'a SplitSpace, r1: BoxRegion, r2: BoxRegion, s: f64, t: f64) -> Result<Self> {
        if r1.dim() != split.d1 || r2.dim() != split.d2 {
            return Err(Error::DimensionMismatch("box dimensions must match the split".into()));
        }
        if !(s > 0.0 && t > 0.0) {
            return Err(Error::Precondition("s and t must be positive".into()));
        }
        Ok(OmegaRegion { split, r1, r2, s, t })
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        let (u, w) = self.split.split(v);
        self.r1.contains_scaled(self.s, &u) && self.r2.contains_scaled(self.t, &w)
    }

    /// Split-coordinate interval for each coordinate.
    fn split_intervals(&self) -> Vec<(f64, f64)> {
        let mut iv: Vec<(f64, f64)> = self
            .r1
            .lo
            .iter()
            .zip(&self.r1.hi)
            .map(|(l, h)| (self.s * l, self.s * h))
            .collect();
        iv.extend(self.r2.lo.iter().zip(&self.r2.hi).map(|(l, h)| (self.t * l, self.t * h)));
        iv
    }
}

/// Interval image of a box under a linear map.
fn interval_image(m: &DMatrix<f64>, iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    (0..m.nrows())
        .map(|r| {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for (c, &(l, h)) in iv.iter().enumerate() {
                let a = m[(r, c)];
                if a >= 0.0 {
                    lo += a * l;
                    hi += a * h;
                } else {
                    lo += a * h;
                    hi += a * l;
                }
            }
            (lo, hi)
        })
        .collect()
}

/// Integer bounding box of `Ω(s,t) − v` in standard coordinates (slightly padded).
pub fn bounding_box(region: &OmegaRegion<'_>, v: &[f64]) -> (Vec<i64>, Vec<i64>) {
    let img = interval_image(&region.split.from_split, &region.split_intervals());
    let pad = |x: f64| 1e-9 * (1.0 + x.abs());
    img.iter()
        .zip(v)
        .map(|(&(l, h), &vi)| {
            let lo = (l - vi - pad(l - vi)).ceil();
            let hi = (h - vi + pad(h - vi)).floor();
            (lo as i64, hi as i64)
        })
        .unzip()
}

/// All `z ∈ Z^d` with `v + z ∈ Ω(s,t)`, by bounding-box enumeration and an
/// exact membership filter.
pub fn affine_points_in_omega(region: &OmegaRegion<'_>, v: &[f64], budget: &mut Budget) -> Result<Vec<Vec<i64>>> {
    let d = region.split.d;
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates, expected {d}", v.len())));
    }
    let (lo, hi) = bounding_box(region, v);
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(Vec::new());
    }
    let total: u128 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as u128).product();
    budget.precheck(total)?;
    budget.charge(total as u64)?;
    let mut out = Vec::new();
    let mut z = lo.clone();
    let mut p = vec![0.0; d];
    loop {
        for k in 0..d {
            p[k] = v[k] + z[k] as f64;
        }
        if region.contains(&p) {
            out.push(z.clone());
        }
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if z[k] < hi[k] {
                z[k] += 1;
                break;
            }
            z[k] = lo[k];
        }
    }
}

/// Same set as [`affine_points_in_omega`] for a split induced by a tuple,
/// computed row by row. When `first_only` is set, returns at most one point.
pub fn affine_points_in_omega_rows(
    region: &OmegaRegion<'_>,
    v: &[f64],
    first_only: bool,
    budget: &mut Budget,
) -> Result<Vec<Vec<i64>>> {
    let Some(cb) = region.split.basis() else {
        return affine_points_in_omega(region, v, budget);
    };
    let (n, p) = (cb.n(), cb.p());
    if v.len() != n * n {
        return Err(Error::DimensionMismatch(format!("point has {} coordinates, expected {}", v.len(), n * n)));
    }
    let x = cb.base.entries_f64();
    let iv = region.split_intervals();
    let mut per_row: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for r in 0..n {
        let vr = &v[r * n..(r + 1) * n];
        // split coordinates of row r must lie in these intervals
        let row_iv: Vec<(f64, f64)> = (0..n).map(|j| iv[split_index(n, p, r, j)]).collect();
        let mut centers = vec![0.0; p];
        let mut radii = vec![0.0; p];
        for j in 0..p {
            let vx: f64 = (0..n).map(|k| vr[k] * x[j * n + k]).sum();
            let (l, h) = row_iv[j];
            centers[j] = 0.5 * (l + h) - vx;
            radii[j] = 0.5 * (h - l);
        }
        // coordinates of row r: a = C · X⁻¹, interval-propagated
        let inv_t = cb.inverse.transpose();
        let a_iv = interval_image(&inv_t, &row_iv);
        let pad = |x: f64| 1e-9 * (1.0 + x.abs());
        let mut lo: Vec<i64> = Vec::with_capacity(n);
        let mut hi: Vec<i64> = Vec::with_capacity(n);
        for k in 0..n {
            let (l, h) = a_iv[k];
            lo.push((l - vr[k] - pad(l - vr[k])).ceil() as i64);
            hi.push((h - vr[k] + pad(h - vr[k])).floor() as i64);
        }
        let q = RowQuery { n, p, x, centers: &centers, radii: &radii };
        let mut found: Vec<Vec<i64>> = Vec::new();
        let mut full = vec![0.0; n * n];
        enumerate_rows(&q, &lo, &hi, budget, |a| {
            if first_only && !found.is_empty() {
                return;
            }
            // exact membership of this row's coordinates
            for k in 0..n {
                full[r * n + k] = vr[k] + a[k] as f64;
            }
            let ok = (0..n).all(|j| {
                let c: f64 = (0..n).map(|k| full[r * n + k] * cb.change_of_basis[(k, j)]).sum();
                let (l, h) = row_iv[j];
                l <= c && c <= h
            });
            if ok {
                found.push(a.to_vec());
            }
        })?;
        if found.is_empty() {
            return Ok(Vec::new());
        }
        per_row.push(found);
    }
    // cartesian product of row choices
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for rows in &per_row {
        let total = out.len() as u128 * rows.len() as u128;
        budget.precheck(total)?;
        let mut next = Vec::with_capacity(total as usize);
        for prefix in &out {
            for a in rows {
                let mut z = prefix.clone();
                z.extend_from_slice(a);
                next.push(z);
            }
        }
        out = next;
    }
    // final membership check in the full coordinates
    out.retain(|z| {
        let pnt: Vec<f64> = z.iter().zip(v).map(|(zi, vi)| vi + *zi as f64).collect();
        region.contains(&pnt)
    });
    Ok(out)
}

/// `χ = d₁(1+δ)/(d₂ − d₁δ + δ)`.
pub fn chi_exponent(d1: usize, d2: usize, delta: f64) -> Result<f64> {
    check_delta(d1, d2, delta, true)?;
    let (d1, d2) = (d1 as f64, d2 as f64);
    let den = d2 - d1 * delta + delta;
    assert!(den > 0.0, "denominator positive under the precondition");
    Ok(d1 * (1.0 + delta) / den)
}

fn check_delta(d1: usize, d2: usize, delta: f64, allow_zero: bool) -> Result<()> {
    if d1 < 2 || d2 < 1 {
        return Err(Error::InvalidDimensions(format!("need d1 >= 2, d2 >= 1, got ({d1},{d2})")));
    }
    let upper = d2 as f64 / (d1 as f64 - 1.0);
    let low_ok = if allow_zero { delta >= 0.0 } else { delta > 0.0 };
    if !(low_ok && delta < upper) {
        return Err(Error::Precondition(format!(
            "delta = {delta} outside {}0, {upper})",
            if allow_zero { "[" } else { "(" }
        )));
    }
    Ok(())
}

/// Finite-scan estimate of the largest κ with `||u||^{d1} ||z||^{d2+δ} > κ`
/// for nonzero integer z, `||z|| ≤ qmax` (z = u + w; norms in split
/// coordinates). Returns the minimum found.
pub fn check_condition_2_1(split: &SplitSpace, delta: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    check_delta(split.d1, split.d2, delta, false)?;
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let (d1, e2) = (split.d1 as f64, split.d2 as f64 + delta);
    match split.basis() {
        Some(cb) => kappa_scan_rows(cb, d1, e2, qmax, budget),
        None => kappa_scan_box(split, d1, e2, qmax, budget),
    }
}

fn kappa_scan_rows(cb: &CompletedBasis, d1: f64, e2: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    // single-row matrices attain the minimum: for z with a nonzero row a,
    // ||u|| ≥ ||a x|| and ||z||_V ≥ ||a X||.
    let (n, p) = (cb.n(), cb.p());
    let x = cb.base.entries_f64();
    let inv_norm = row_action_norm(&cb.inverse);
    let mut best = f64::INFINITY;
    let centers = vec![0.0; p];
    for big_n in 1..=qmax {
        // ||a X|| ≥ ||a|| / ||X⁻¹||
        let zlow = big_n as f64 / inv_norm;
        let r = if best.is_finite() {
            (best / zlow.powf(e2)).powf(1.0 / d1)
        } else {
            f64::INFINITY
        };
        let radii = vec![r; p];
        let q = RowQuery { n, p, x, centers: &centers, radii: &radii };
        enumerate_shell_rows(&q, big_n, budget, |a| {
            let ad = DMatrix::from_row_slice(1, n, &a.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let c = ad * &cb.change_of_basis;
            let un = c.columns(0, p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let zn = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let val = un.powf(d1) * zn.powf(e2);
            if val < best {
                best = val;
            }
        })?;
    }
    Ok(best)
}

fn kappa_scan_box(split: &SplitSpace, d1: f64, e2: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    let d = split.d;
    let total = (2 * qmax as u128 + 1).checked_pow(d as u32).unwrap_or(u128::MAX);
    budget.precheck(total)?;
    budget.charge(total as u64)?;
    let mut best = f64::INFINITY;
    let mut z = vec![-qmax; d];
    loop {
        if z.iter().any(|&c| c != 0) {
            let zf: Vec<f64> = z.iter().map(|&c| c as f64).collect();
            let (un, wn) = split.norms(&zf);
            let val = un.powf(d1) * un.max(wn).powf(e2);
            best = best.min(val);
        }
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            if z[k] < qmax {
                z[k] += 1;
                break;
            }
            z[k] = -qmax;
        }
    }
}
