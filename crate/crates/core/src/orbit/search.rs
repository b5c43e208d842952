//! Exact best-approximation frontier of `||γx − y||` over `||γ|| ≤ qmax`.
//!
//! Row i of γ contributes `e_i(a) = max_j |a·x_j − y_ij|` and `||γx − y||`
//! is the maximum of these, so a matrix improving on the current best error
//! E must use, in every row, a vector with `e_i < E`. For each row we keep
//! the pool of all such vectors with norm at most the current shell; each
//! shell adds the vectors of exactly that norm (found with windowed row
//! enumeration) and a branch-and-bound over the pools finds the best matrix
//! having at least one row of the new norm and satisfying the determinant
//! constraint. The pools are exhaustive, so no fallback enumeration is ever
//! needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::rows::{enumerate_ball_rows, enumerate_shell_rows, vec_norm, Budget, RowQuery};
use crate::linalg::{IntMatrix, RealTuple};
use crate::orbit::frontier::{ApproxRecord, Frontier};

/// Which matrices are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetConstraint {
    /// det γ > 0 (the semigroup Γ).
    Positive,
    /// Any integer matrix.
    Any,
}

impl DetConstraint {
    fn admits(&self, m: &IntMatrix) -> Result<bool> {
        Ok(match self {
            DetConstraint::Positive => m.det()? > 0,
            DetConstraint::Any => true,
        })
    }
}

/// `max_j |a·x_j − y_ij|`, accumulated exactly like [`crate::linalg::approximation_error`].
#[inline]
pub fn row_error(x: &RealTuple<f64>, y: &RealTuple<f64>, i: usize, a: &[i64]) -> f64 {
    let mut e: f64 = 0.0;
    for j in 0..x.p() {
        e = e.max((x.row_dot(a, j) - y.get(i, j)).abs());
    }
    e
}

#[derive(Debug, Clone)]
struct Cand {
    err: f64,
    norm: i64,
    row: Vec<i64>,
}

fn sort_pool(pool: &mut [Cand]) {
    pool.sort_by(|a, b| a.err.total_cmp(&b.err).then_with(|| a.row.cmp(&b.row)));
}

/// Exact Pareto frontier of (||γ||, ||γx − y||) over admissible γ with
/// `1 ≤ ||γ|| ≤ qmax`. Among equal-error matrices of a shell, the
/// lexicographically smallest row-major entry sequence is recorded.
pub fn best_gamma_search(
    x: &RealTuple<f64>,
    y: &RealTuple<f64>,
    qmax: i64,
    constraint: DetConstraint,
    budget: &mut Budget,
) -> Result<Frontier> {
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    if x.n() != y.n() || x.p() != y.p() {
        return Err(Error::DimensionMismatch(format!(
            "x is {}x{} but y is {}x{}",
            x.n(),
            x.p(),
            y.n(),
            y.p()
        )));
    }
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let (n, p) = (x.n(), x.p());
    let mut best = f64::INFINITY;
    let mut pools: Vec<Vec<Cand>> = vec![Vec::new(); n];
    let mut records = Vec::new();
    let centers: Vec<Vec<f64>> = (0..n).map(|i| (0..p).map(|j| y.get(i, j)).collect()).collect();
    for big_n in 1..=qmax {
        let radii = vec![best; p];
        let mut fresh = false;
        for i in 0..n {
            let q = RowQuery { n, p, x: x.entries_f64(), centers: &centers[i], radii: &radii };
            let pool = &mut pools[i];
            let mut push = |a: &[i64]| {
                let err = row_error(x, y, i, a);
                if err < best {
                    pool.push(Cand { err, norm: vec_norm(a), row: a.to_vec() });
                }
            };
            if big_n == 1 {
                enumerate_ball_rows(&q, 1, budget, &mut push)?;
            } else {
                enumerate_shell_rows(&q, big_n, budget, &mut push)?;
            }
            sort_pool(pool);
            fresh |= pool.iter().any(|c| c.norm == big_n);
        }
        if !fresh {
            continue;
        }
        if let Some((err, rows)) = assemble(&pools, big_n, best, constraint, n)? {
            let gamma = IntMatrix::new(n, rows.concat())?;
            records.push(ApproxRecord { gamma, norm: big_n, error: err });
            best = err;
            for pool in pools.iter_mut() {
                pool.retain(|c| c.err < best);
            }
            if best == 0.0 {
                break;
            }
        }
    }
    Ok(Frontier { qmax, records })
}

/// Best admissible matrix from the pools with max row error below `bound`
/// and at least one row of norm `big_n`: minimal error first, then the
/// lexicographically smallest entries.
fn assemble(
    pools: &[Vec<Cand>],
    big_n: i64,
    bound: f64,
    constraint: DetConstraint,
    n: usize,
) -> Result<Option<(f64, Vec<Vec<i64>>)>> {
    // pass 1: minimal error. Anchor the row of norm big_n first so that its
    // error bounds the whole branch from below.
    let mut anchors: Vec<(usize, &Cand)> = pools
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().filter(|c| c.norm == big_n).map(move |c| (i, c)))
        .collect();
    anchors.sort_by(|a, b| a.1.err.total_cmp(&b.1.err).then(a.0.cmp(&b.0)).then_with(|| a.1.row.cmp(&b.1.row)));
    let mut best = bound;
    let mut found = false;
    let mut rows: Vec<&[i64]> = vec![&[]; n];
    for (i, c) in anchors {
        if c.err >= best {
            break;
        }
        rows[i] = &c.row;
        min_error_dfs(pools, constraint, i, 0, c.err, &mut rows, &mut best, &mut found)?;
    }
    if !found {
        return Ok(None);
    }
    // pass 2: every combination of rows with errors <= best that is
    // admissible and contains a new row attains the minimum; take the
    // lexicographically first one.
    let lex_pools: Vec<Vec<&Cand>> = pools
        .iter()
        .map(|p| {
            let mut v: Vec<&Cand> = p.iter().filter(|c| c.err <= best).collect();
            v.sort_by(|a, b| a.row.cmp(&b.row));
            v
        })
        .collect();
    let mut has_new_after = vec![false; n + 1];
    for i in (0..n).rev() {
        has_new_after[i] = has_new_after[i + 1] || lex_pools[i].iter().any(|c| c.norm == big_n);
    }
    let mut chosen: Vec<&Cand> = Vec::with_capacity(n);
    if lex_dfs(&lex_pools, big_n, constraint, &has_new_after, 0, false, &mut chosen)? {
        debug_assert!(chosen.iter().all(|c| c.err <= best));
        Ok(Some((best, chosen.iter().map(|c| c.row.clone()).collect())))
    } else {
        unreachable!("pass 1 found a matrix attaining the minimum")
    }
}

#[allow(clippy::too_many_arguments)]
fn min_error_dfs<'a>(
    pools: &'a [Vec<Cand>],
    constraint: DetConstraint,
    anchor: usize,
    i: usize,
    partial: f64,
    rows: &mut Vec<&'a [i64]>,
    best: &mut f64,
    found: &mut bool,
) -> Result<()> {
    let n = pools.len();
    if partial >= *best {
        return Ok(());
    }
    if i == n {
        let m = IntMatrix::new(n, rows.concat())?;
        if constraint.admits(&m)? {
            *best = partial;
            *found = true;
        }
        return Ok(());
    }
    if i == anchor {
        return min_error_dfs(pools, constraint, anchor, i + 1, partial, rows, best, found);
    }
    for c in &pools[i] {
        // pools are sorted by error
        if c.err >= *best {
            break;
        }
        rows[i] = &c.row;
        min_error_dfs(pools, constraint, anchor, i + 1, partial.max(c.err), rows, best, found)?;
    }
    Ok(())
}

fn lex_dfs<'a>(
    pools: &[Vec<&'a Cand>],
    big_n: i64,
    constraint: DetConstraint,
    has_new_after: &[bool],
    i: usize,
    has_new: bool,
    chosen: &mut Vec<&'a Cand>,
) -> Result<bool> {
    let n = pools.len();
    if i == n {
        if !has_new {
            return Ok(false);
        }
        let rows: Vec<i64> = chosen.iter().flat_map(|c| c.row.clone()).collect();
        return constraint.admits(&IntMatrix::new(n, rows)?);
    }
    if !has_new && !has_new_after[i] {
        return Ok(false);
    }
    let must_be_new = !has_new && !has_new_after[i + 1];
    for c in &pools[i] {
        if must_be_new && c.norm != big_n {
            continue;
        }
        chosen.push(c);
        if lex_dfs(pools, big_n, constraint, has_new_after, i + 1, has_new || c.norm == big_n, chosen)? {
            return Ok(true);
        }
        chosen.pop();
    }
    Ok(false)
}

/// Frontier by brute force over every matrix of norm at most `qmax`, with
/// the same tie-breaking. Used as an independent reference.
pub fn full_enumeration_frontier(
    x: &RealTuple<f64>,
    y: &RealTuple<f64>,
    qmax: i64,
    constraint: DetConstraint,
    max_candidates: u64,
) -> Result<Frontier> {
    use crate::lattice::ball::{enumerate_norm_ball, BallMode};
    use crate::linalg::approximation_error;
    let n = x.n();
    let mut best = f64::INFINITY;
    let mut records = Vec::new();
    for big_n in 1..=qmax {
        let mut shell_best: Option<(f64, IntMatrix)> = None;
        for m in enumerate_norm_ball(n, big_n, BallMode::Shell, max_candidates, |_| true)? {
            let e = approximation_error(&m, x, y)?;
            if e >= best || !constraint.admits(&m)? {
                continue;
            }
            // enumeration is lexicographic, so the first minimizer wins ties
            if shell_best.as_ref().map_or(true, |(be, _)| e < *be) {
                shell_best = Some((e, m));
            }
        }
        if let Some((e, m)) = shell_best {
            best = e;
            records.push(ApproxRecord { gamma: m, norm: big_n, error: e });
            if e == 0.0 {
                break;
            }
        }
    }
    Ok(Frontier { qmax, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::apply;

    fn s2() -> RealTuple<f64> {
        RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()
    }

    #[test]
    fn matches_full_enumeration_at_qmax_3() {
        let x = s2();
        let y = RealTuple::new(2, 1, vec![0.5, 0.5]).unwrap();
        let fast = best_gamma_search(&x, &y, 3, DetConstraint::Positive, &mut Budget::default()).unwrap();
        let slow = full_enumeration_frontier(&x, &y, 3, DetConstraint::Positive, 10_000_000).unwrap();
        assert_eq!(fast, slow);
        fast.validate(Some((&x, &y)), true).unwrap();
    }

    #[test]
    fn exact_orbit_point_reaches_zero() {
        let x = s2();
        let g = IntMatrix::new(2, vec![2, 1, 1, 1]).unwrap();
        let y = apply(&g, &x).unwrap();
        let f = best_gamma_search(&x, &y, 4, DetConstraint::Positive, &mut Budget::default()).unwrap();
        let last = f.records.last().unwrap();
        assert_eq!(last.error, 0.0);
        assert_eq!(last.norm, 2);
        assert_eq!(last.gamma, g);
    }

    #[test]
    fn dropping_determinant_never_hurts() {
        let x = RealTuple::new(3, 1, vec![2f64.sqrt(), 3f64.sqrt(), 1.0]).unwrap();
        let y = RealTuple::new(3, 1, vec![0.2, -0.4, 0.9]).unwrap();
        let a = best_gamma_search(&x, &y, 6, DetConstraint::Positive, &mut Budget::default()).unwrap();
        let b = best_gamma_search(&x, &y, 6, DetConstraint::Any, &mut Budget::default()).unwrap();
        assert!(b.records.last().unwrap().error <= a.records.last().unwrap().error);
    }
}
