//! Enumeration of integer row vectors `a` whose products `a · x_j` fall in
//! prescribed windows.
//!
//! Rows of a matrix act independently on a tuple, so every search over
//! matrices reduces to searches over rows. The enumerator picks `p'` "solved"
//! coordinates whose block of `x` is invertible, iterates the remaining ones,
//! and for each setting solves for the real point hitting the window centres;
//! only integers in a small box around that point can qualify. The output is a
//! superset of the true solutions (windows are padded for rounding), so callers
//! must filter with their own exact arithmetic.

use crate::error::{Error, Result};

/// Caps the number of enumerated points.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: u64,
    used: u64,
}

/// Default cap on enumerated candidates for a single operation.
pub const DEFAULT_MAX_CANDIDATES: u64 = 2_000_000_000;

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    #[inline]
    pub fn charge(&mut self, k: u64) -> Result<()> {
        self.used = self.used.saturating_add(k);
        if self.used > self.limit {
            return Err(Error::BudgetExceeded {
                needed: self.used as u128,
                limit: self.limit,
            });
        }
        Ok(())
    }

    /// Fails if `k` further candidates would exceed the limit, without charging.
    pub fn precheck(&self, k: u128) -> Result<()> {
        if self.used as u128 + k > self.limit as u128 {
            return Err(Error::BudgetExceeded {
                needed: self.used as u128 + k,
                limit: self.limit,
            });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_MAX_CANDIDATES)
    }
}

/// Windows `|a · x_j − centers[j]| ≤ radii[j]`; infinite radii impose nothing.
#[derive(Debug, Clone)]
pub struct RowQuery<'a> {
    pub n: usize,
    pub p: usize,
    /// Column-major n×p entries of x.
    pub x: &'a [f64],
    pub centers: &'a [f64],
    pub radii: &'a [f64],
}

/// Relative padding applied to every finite window.
const PAD_REL: f64 = 1e-14;

/// Calls `visit` with every integer vector `a`, `lo[k] ≤ a[k] ≤ hi[k]`, that
/// may satisfy the query's windows (a superset of the exact solutions).
pub fn enumerate_rows<F: FnMut(&[i64])>(
    q: &RowQuery<'_>,
    lo: &[i64],
    hi: &[i64],
    budget: &mut Budget,
    mut visit: F,
) -> Result<()> {
    enumerate_rows_dyn(q, lo, hi, budget, &mut visit)
}

fn enumerate_rows_dyn(
    q: &RowQuery<'_>,
    lo: &[i64],
    hi: &[i64],
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[i64]),
) -> Result<()> {
    let n = q.n;
    debug_assert_eq!(lo.len(), n);
    debug_assert_eq!(hi.len(), n);
    if (0..n).any(|k| lo[k] > hi[k]) {
        return Ok(());
    }
    let width = |k: usize| (hi[k] - lo[k]) as u128 + 1;
    let finite: Vec<usize> = (0..q.p).filter(|&j| q.radii[j].is_finite()).collect();
    let col = |j: usize| &q.x[j * n..(j + 1) * n];

    // choose solved coordinates, preferring wide ranges and large pivots
    let mut solved: Vec<usize> = Vec::new();
    let mut work: Vec<Vec<f64>> = finite.iter().map(|&j| col(j).to_vec()).collect();
    let mut used_cols = vec![false; finite.len()];
    for _ in 0..finite.len() {
        let mut best: Option<(usize, usize, f64)> = None;
        for (ci, w) in work.iter().enumerate() {
            if used_cols[ci] {
                continue;
            }
            let scale = col(finite[ci]).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for k in 0..n {
                if solved.contains(&k) || width(k) < 2 {
                    continue;
                }
                let piv = w[k].abs();
                if piv <= 1e-9 * scale {
                    continue;
                }
                let score = piv * width(k) as f64;
                if best.map_or(true, |b| score > b.2) {
                    best = Some((ci, k, score));
                }
            }
        }
        let Some((ci, k, _)) = best else { break };
        used_cols[ci] = true;
        solved.push(k);
        let pivot_col = work[ci].clone();
        for (cj, w) in work.iter_mut().enumerate() {
            if used_cols[cj] {
                continue;
            }
            let f = w[k] / pivot_col[k];
            for r in 0..n {
                w[r] -= f * pivot_col[r];
            }
        }
    }
    let solve_cols: Vec<usize> = used_cols
        .iter()
        .enumerate()
        .filter(|(_, u)| **u)
        .map(|(ci, _)| finite[ci])
        .collect();
    let s = solved.len();
    let free: Vec<usize> = (0..n).filter(|k| !solved.contains(k)).collect();

    // prefilter only: the box for the free coordinates must fit the budget
    let free_count: u128 = free.iter().map(|&k| width(k)).product();
    budget.precheck(free_count)?;

    if s == 0 {
        // plain box with a direct window test
        let mut a: Vec<i64> = lo.to_vec();
        let mut count = 0u64;
        loop {
            count += 1;
            if window_ok(q, &a, lo, hi) {
                visit(&a);
            }
            if !odometer(&mut a, &(0..n).collect::<Vec<_>>(), lo, hi) {
                break;
            }
        }
        return budget.charge(count);
    }

    // block B (rows `solved`, columns `solve_cols`) and its inverse
    let mut b = nalgebra::DMatrix::<f64>::zeros(s, s);
    for (r, &k) in solved.iter().enumerate() {
        for (c, &j) in solve_cols.iter().enumerate() {
            b[(r, c)] = q.x[j * n + k];
        }
    }
    let binv = match b.clone().try_inverse() {
        Some(m) => m,
        None => {
            // numerically singular block: fall back to the full box
            let all = RowQuery {
                radii: &vec![f64::INFINITY; q.p],
                ..q.clone()
            };
            return enumerate_rows_dyn(&all, lo, hi, budget, &mut |a: &[i64]| {
                if window_ok(q, a, lo, hi) {
                    visit(a)
                }
            });
        }
    };
    // padded radii for solved windows
    let pad: Vec<f64> = solve_cols
        .iter()
        .map(|&j| {
            let mag: f64 = (0..n)
                .map(|k| lo[k].unsigned_abs().max(hi[k].unsigned_abs()) as f64 * q.x[j * n + k].abs())
                .sum();
            q.radii[j] + PAD_REL * (1.0 + mag + q.centers[j].abs())
        })
        .collect();
    let half_width: Vec<f64> = (0..s)
        .map(|r| (0..s).map(|c| pad[c] * binv[(c, r)].abs()).sum())
        .collect();

    let mut a: Vec<i64> = vec![0; n];
    for &k in &free {
        a[k] = lo[k];
    }
    let mut target = vec![0.0; s];
    let mut a_star = vec![0.0; s];
    let mut box_lo = vec![0i64; s];
    let mut box_hi = vec![0i64; s];
    let mut count = 0u64;
    loop {
        count += 1;
        for (c, &j) in solve_cols.iter().enumerate() {
            let mut partial = 0.0;
            for &k in &free {
                partial += a[k] as f64 * q.x[j * n + k];
            }
            target[c] = q.centers[j] - partial;
        }
        let mut empty = false;
        for r in 0..s {
            let mut v = 0.0;
            for c in 0..s {
                v += target[c] * binv[(c, r)];
            }
            a_star[r] = v;
            let k = solved[r];
            let l = (v - half_width[r]).floor();
            let h = (v + half_width[r]).ceil();
            let l = if l < lo[k] as f64 { lo[k] } else { l as i64 };
            let h = if h > hi[k] as f64 { hi[k] } else { h as i64 };
            if l > h {
                empty = true;
                break;
            }
            box_lo[r] = l;
            box_hi[r] = h;
        }
        if !empty {
            for r in 0..s {
                a[solved[r]] = box_lo[r];
            }
            loop {
                count += 1;
                if window_ok(q, &a, lo, hi) {
                    visit(&a);
                }
                // advance the solved coordinates
                let mut r = 0;
                loop {
                    if r == s {
                        break;
                    }
                    let k = solved[r];
                    if a[k] < box_hi[r] {
                        a[k] += 1;
                        break;
                    }
                    a[k] = box_lo[r];
                    r += 1;
                }
                if r == s {
                    break;
                }
            }
        }
        if count > 1 << 20 {
            budget.charge(count)?;
            count = 0;
        }
        if !odometer(&mut a, &free, lo, hi) {
            break;
        }
    }
    budget.charge(count)
}

/// Cheap binary64 check against padded windows, applied before visiting.
#[inline]
fn window_ok(q: &RowQuery<'_>, a: &[i64], lo: &[i64], hi: &[i64]) -> bool {
    let n = q.n;
    for j in 0..q.p {
        let r = q.radii[j];
        if !r.is_finite() {
            continue;
        }
        let xj = &q.x[j * n..(j + 1) * n];
        let mut v = 0.0;
        let mut mag = 0.0;
        for k in 0..n {
            v += a[k] as f64 * xj[k];
            mag += lo[k].unsigned_abs().max(hi[k].unsigned_abs()) as f64 * xj[k].abs();
        }
        let pad = PAD_REL * (1.0 + mag + q.centers[j].abs());
        if (v - q.centers[j]).abs() > r + pad {
            return false;
        }
    }
    true
}

/// Advances `a` over the coordinates `idx`; false when wrapped around.
#[inline]
fn odometer(a: &mut [i64], idx: &[usize], lo: &[i64], hi: &[i64]) -> bool {
    for &k in idx {
        if a[k] < hi[k] {
            a[k] += 1;
            return true;
        }
        a[k] = lo[k];
    }
    false
}

/// Coordinate boxes whose disjoint union is the shell `{a ∈ Z^n : ||a|| = big_n}`.
///
/// Box k fixes `a[k] = ±big_n`, bounds earlier coordinates by `big_n − 1` and
/// later ones by `big_n`.
pub fn shell_boxes(n: usize, big_n: i64) -> Vec<(Vec<i64>, Vec<i64>)> {
    if big_n == 0 {
        return vec![(vec![0; n], vec![0; n])];
    }
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        for sign in [1i64, -1] {
            let mut lo = vec![0i64; n];
            let mut hi = vec![0i64; n];
            for c in 0..n {
                let bound = match c.cmp(&k) {
                    std::cmp::Ordering::Less => big_n - 1,
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Greater => big_n,
                };
                lo[c] = -bound;
                hi[c] = bound;
            }
            lo[k] = sign * big_n;
            hi[k] = sign * big_n;
            out.push((lo, hi));
        }
    }
    out
}

/// Enumerates candidates of norm exactly `big_n` for the query.
pub fn enumerate_shell_rows<F: FnMut(&[i64])>(
    q: &RowQuery<'_>,
    big_n: i64,
    budget: &mut Budget,
    mut visit: F,
) -> Result<()> {
    for (lo, hi) in shell_boxes(q.n, big_n) {
        enumerate_rows(q, &lo, &hi, budget, &mut visit)?;
    }
    Ok(())
}

/// Enumerates candidates of norm at most `big_n` for the query.
pub fn enumerate_ball_rows<F: FnMut(&[i64])>(
    q: &RowQuery<'_>,
    big_n: i64,
    budget: &mut Budget,
    visit: F,
) -> Result<()> {
    let lo = vec![-big_n; q.n];
    let hi = vec![big_n; q.n];
    enumerate_rows(q, &lo, &hi, budget, visit)
}

/// Max absolute entry of an integer vector.
#[inline]
pub fn vec_norm(a: &[i64]) -> i64 {
    a.iter().map(|v| v.abs()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(q: &RowQuery<'_>, lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
        let n = q.n;
        let mut out = Vec::new();
        let mut a = lo.to_vec();
        loop {
            let ok = (0..q.p).all(|j| {
                let v: f64 = (0..n).map(|k| a[k] as f64 * q.x[j * n + k]).sum();
                (v - q.centers[j]).abs() <= q.radii[j]
            });
            if ok {
                out.push(a.clone());
            }
            if !odometer(&mut a, &(0..n).collect::<Vec<_>>(), lo, hi) {
                break;
            }
        }
        out
    }

    fn exact_filter(q: &RowQuery<'_>, got: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
        let n = q.n;
        let mut v: Vec<Vec<i64>> = got
            .into_iter()
            .filter(|a| {
                (0..q.p).all(|j| {
                    let v: f64 = (0..n).map(|k| a[k] as f64 * q.x[j * n + k]).sum();
                    (v - q.centers[j]).abs() <= q.radii[j]
                })
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn matches_brute_force_on_small_boxes() {
        let x = [2f64.sqrt(), 1.0, 0.3, 3f64.sqrt(), -0.7, 0.25];
        for (n, p) in [(2usize, 1usize), (3, 1), (3, 2)] {
            let xs = &x[..n * p];
            for (cen, rad) in [(0.1, 0.05), (-0.4, 0.3), (0.0, 1e-3), (0.5, f64::INFINITY)] {
                let centers = vec![cen; p];
                let radii = vec![rad; p];
                let q = RowQuery { n, p, x: xs, centers: &centers, radii: &radii };
                let lo = vec![-7; n];
                let hi = vec![6; n];
                let mut got = Vec::new();
                enumerate_rows(&q, &lo, &hi, &mut Budget::default(), |a| got.push(a.to_vec())).unwrap();
                let mut want = brute(&q, &lo, &hi);
                want.sort();
                assert_eq!(exact_filter(&q, got), want, "n={n} p={p} c={cen} r={rad}");
            }
        }
    }

    #[test]
    fn shells_partition_the_ball() {
        for n in 1..4usize {
            for big_n in 0..4i64 {
                let total: u128 = shell_boxes(n, big_n)
                    .iter()
                    .map(|(lo, hi)| (0..n).map(|k| (hi[k] - lo[k] + 1) as u128).product::<u128>())
                    .sum();
                let want = (2 * big_n as u128 + 1).pow(n as u32)
                    - if big_n == 0 { 0 } else { (2 * big_n as u128 - 1).pow(n as u32) };
                assert_eq!(total, want);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let x = [0.5, 0.25, 0.125];
        let q = RowQuery { n: 3, p: 1, x: &x, centers: &[0.0], radii: &[f64::INFINITY] };
        let err = enumerate_ball_rows(&q, 10, &mut Budget::new(100), |_| {}).unwrap_err();
        assert!(err.is_budget());
    }
}
