//! Exact lattice-point counts and their log–log growth rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::lattice::rows::{enumerate_ball_rows, vec_norm, Budget, RowQuery};
use crate::linalg::RealTuple;
use crate::scalar::{serde_ext_f64, serde_ext_pair};

/// Slope of `log count` against `log q`, with a one-standard-error interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    #[serde(with = "serde_ext_f64")]
    pub slope: f64,
    #[serde(with = "serde_ext_pair")]
    pub ci: (f64, f64),
    pub n_points: usize,
    /// Growth exponent predicted by the counting bound.
    pub target: f64,
}

/// Cumulative counts `(q, #{… with norm ≤ q})` for `q = 1..=qmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub pairs: Vec<(i64, u128)>,
    pub fit: Option<SlopeFit>,
}

impl CountSeries {
    fn new(pairs: Vec<(i64, u128)>, target: f64) -> Self {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            pairs.iter().filter(|(_, c)| *c > 0).map(|&(q, c)| ((q as f64).ln(), (c as f64).ln())).unzip();
        let fit = least_squares(&xs, &ys).map(|f| SlopeFit {
            slope: f.slope,
            ci: (f.slope - f.slope_se, f.slope + f.slope_se),
            n_points: f.n,
            target,
        });
        CountSeries { pairs, fit }
    }

    /// CSV with header `q,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,count\n");
        for (q, c) in &self.pairs {
            s.push_str(&format!("{q},{c}\n"));
        }
        s
    }

    /// `(log q, log count)` pairs for plotting.
    pub fn plot_pairs(&self) -> Vec<(f64, f64)> {
        self.pairs.iter().filter(|(_, c)| *c > 0).map(|&(q, c)| ((q as f64).ln(), (c as f64).ln())).collect()
    }
}

fn cumulative(per_norm: &[u128]) -> Vec<u128> {
    per_norm
        .iter()
        .scan(0u128, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect()
}

/// `#{γ ∈ M(n,Z) : ||γ|| ≤ q, γx ∈ B(0, ρ+1)}` for every `q ≤ qmax`.
///
/// The condition is row-wise, so the count is the n-th power of the number
/// of integer rows a with `||a|| ≤ q` and `|a·x_j| ≤ ρ+1` for all j.
pub fn count_into_box(x: &RealTuple<f64>, rho: f64, qmax: i64, budget: &mut Budget) -> Result<CountSeries> {
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    if !(rho >= 0.0) || qmax < 1 {
        return Err(Error::Precondition("need rho >= 0 and qmax >= 1".into()));
    }
    let (n, p) = (x.n(), x.p());
    let bound = rho + 1.0;
    let centers = vec![0.0; p];
    let radii = vec![bound; p];
    let q = RowQuery { n, p, x: x.entries_f64(), centers: &centers, radii: &radii };
    let mut per_norm = vec![0u128; qmax as usize + 1];
    enumerate_ball_rows(&q, qmax, budget, |a| {
        if (0..p).all(|j| x.row_dot(a, j).abs() <= bound) {
            per_norm[vec_norm(a) as usize] += 1;
        }
    })?;
    let rows = cumulative(&per_norm);
    let mut pairs = Vec::with_capacity(qmax as usize);
    for qq in 1..=qmax {
        let c = rows[qq as usize].checked_pow(n as u32).ok_or(Error::Overflow("count_into_box"))?;
        pairs.push((qq, c));
    }
    Ok(CountSeries::new(pairs, (n * (n - p)) as f64))
}

/// Rank of a small integer matrix by fraction-free elimination.
fn small_rank(m: &mut [i128], n: usize) -> usize {
    let mut rank = 0;
    let mut prev: i128 = 1;
    for c in 0..n {
        let Some(piv) = (rank..n).find(|&r| m[r * n + c] != 0) else { continue };
        if piv != rank {
            for k in 0..n {
                m.swap(piv * n + k, rank * n + k);
            }
        }
        let pv = m[rank * n + c];
        for r in rank + 1..n {
            let f = m[r * n + c];
            for k in c..n {
                m[r * n + k] = (pv * m[r * n + k] - f * m[rank * n + k]) / prev;
            }
        }
        prev = pv;
        rank += 1;
    }
    rank
}

/// Cumulative number of rank-r integer n×n matrices with norm ≤ q, by
/// exhaustive enumeration.
pub fn count_rank_r(n: usize, r: usize, qmax: i64, budget: &mut Budget) -> Result<CountSeries> {
    count_rank_r_ordered(n, r, qmax, budget, &(0..n * n).collect::<Vec<_>>())
}

/// Same count with the odometer advancing entries in the given order.
pub fn count_rank_r_ordered(n: usize, r: usize, qmax: i64, budget: &mut Budget, order: &[usize]) -> Result<CountSeries> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidDimensions(format!("exhaustive rank counts need 2 <= n <= 4, got {n}")));
    }
    if r < 1 || r > n {
        return Err(Error::Precondition(format!("rank {r} outside 1..={n}")));
    }
    if qmax < 1 {
        return Err(Error::Precondition("qmax must be >= 1".into()));
    }
    let nn = n * n;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..nn).collect::<Vec<_>>() {
        return Err(Error::Precondition("order must be a permutation of the entries".into()));
    }
    let total = ((2 * qmax + 1) as u128).checked_pow(nn as u32).ok_or(Error::Overflow("count_rank_r"))?;
    budget.precheck(total)?;
    budget.charge(total as u64)?;
    let mut per_norm = vec![0u128; qmax as usize + 1];
    let mut entries = vec![-qmax; nn];
    let mut work = vec![0i128; nn];
    'outer: loop {
        work.iter_mut().zip(&entries).for_each(|(w, &e)| *w = e as i128);
        if small_rank(&mut work, n) == r {
            per_norm[entries.iter().map(|v| v.abs()).max().unwrap_or(0) as usize] += 1;
        }
        for &k in order {
            if entries[k] < qmax {
                entries[k] += 1;
                continue 'outer;
            }
            entries[k] = -qmax;
        }
        break;
    }
    let cum = cumulative(&per_norm);
    let pairs = (1..=qmax).map(|q| (q, cum[q as usize])).collect();
    Ok(CountSeries::new(pairs, (n * r) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball::{enumerate_norm_ball, BallMode};
    use crate::linalg::{apply, tuple_norm};

    fn s2() -> RealTuple<f64> {
        RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()
    }

    #[test]
    fn box_counts_match_matrix_enumeration() {
        let x = s2();
        let s = count_into_box(&x, 1.0, 4, &mut Budget::default()).unwrap();
        for &(q, c) in &s.pairs {
            let oracle = enumerate_norm_ball(2, q, BallMode::Ball, 100_000_000, |_| true)
                .unwrap()
                .filter(|m| tuple_norm(&apply(m, &x).unwrap()) <= 2.0)
                .count() as u128;
            assert_eq!(c, oracle, "q = {q}");
        }
    }

    #[test]
    fn huge_box_counts_everything() {
        let s = count_into_box(&s2(), 1e9, 5, &mut Budget::default()).unwrap();
        for &(q, c) in &s.pairs {
            assert_eq!(c, (2 * q as u128 + 1).pow(4));
        }
    }

    #[test]
    fn box_counts_monotone_in_rho() {
        let a = count_into_box(&s2(), 0.5, 30, &mut Budget::default()).unwrap();
        let b = count_into_box(&s2(), 1.5, 30, &mut Budget::default()).unwrap();
        for (u, v) in a.pairs.iter().zip(&b.pairs) {
            assert!(u.1 <= v.1);
        }
        assert!(a.pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn rank_counts_small_cases() {
        // 2x2 entries in {-1,0,1}: 81 matrices, 1 zero, 32 of rank 1, 48 of rank 2
        let r1 = count_rank_r(2, 1, 1, &mut Budget::default()).unwrap();
        let r2 = count_rank_r(2, 2, 1, &mut Budget::default()).unwrap();
        assert_eq!(r1.pairs, vec![(1, 32)]);
        assert_eq!(r2.pairs, vec![(1, 48)]);
        let rev: Vec<usize> = (0..4).rev().collect();
        assert_eq!(count_rank_r_ordered(2, 1, 6, &mut Budget::default(), &rev).unwrap(), count_rank_r(2, 1, 6, &mut Budget::default()).unwrap());
        assert!(count_rank_r(3, 0, 1, &mut Budget::default()).is_err());
    }

    #[test]
    fn rank_three_by_three() {
        let s = count_rank_r(3, 3, 1, &mut Budget::default()).unwrap();
        let oracle = enumerate_norm_ball(3, 1, BallMode::Ball, 100_000, |m| m.det().unwrap() != 0).unwrap().count() as u128;
        assert_eq!(s.pairs, vec![(1, oracle)]);
    }
}
