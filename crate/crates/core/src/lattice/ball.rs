//! Brute-force enumeration of integer matrices in sup-norm balls and shells.

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

/// Which part of the ball to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMode {
    /// All matrices with `||ω|| ≤ q`.
    Ball,
    /// Only matrices with `||ω|| = q`.
    Shell,
}

/// Iterator over `n×n` integer matrices of bounded sup norm, in
/// lexicographic order of the row-major entries.
pub struct NormBall<F> {
    n: usize,
    q: i64,
    mode: BallMode,
    cur: Vec<i64>,
    done: bool,
    filter: F,
}

/// Every ω with `||ω|| ≤ q` (or `= q` in shell mode) that passes `filter`,
/// each exactly once. Refuses when `(2q+1)^(n²)` exceeds `max_candidates`.
pub fn enumerate_norm_ball<F>(
    n: usize,
    q: i64,
    mode: BallMode,
    max_candidates: u64,
    filter: F,
) -> Result<NormBall<F>>
where
    F: FnMut(&IntMatrix) -> bool,
{
    if n == 0 {
        return Err(Error::InvalidDimensions("matrix size must be positive".into()));
    }
    if q < 0 {
        return Err(Error::Precondition(format!("norm bound must be >= 0, got {q}")));
    }
    let side = 2 * q as u128 + 1;
    let total = (0..n * n).try_fold(1u128, |acc, _| acc.checked_mul(side));
    match total {
        Some(t) if t <= max_candidates as u128 => {}
        other => {
            return Err(Error::BudgetExceeded {
                needed: other.unwrap_or(u128::MAX),
                limit: max_candidates,
            })
        }
    }
    Ok(NormBall {
        n,
        q,
        mode,
        cur: vec![-q; n * n],
        done: false,
        filter,
    })
}

impl<F: FnMut(&IntMatrix) -> bool> Iterator for NormBall<F> {
    type Item = IntMatrix;

    fn next(&mut self) -> Option<IntMatrix> {
        while !self.done {
            let entries = self.cur.clone();
            // advance (last entry fastest)
            let mut k = self.cur.len();
            loop {
                if k == 0 {
                    self.done = true;
                    break;
                }
                k -= 1;
                if self.cur[k] < self.q {
                    self.cur[k] += 1;
                    break;
                }
                self.cur[k] = -self.q;
            }
            if self.mode == BallMode::Shell && entries.iter().map(|v| v.abs()).max() != Some(self.q) {
                continue;
            }
            let m = IntMatrix::new(self.n, entries).expect("sizes agree");
            if (self.filter)(&m) {
                return Some(m);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIMIT: u64 = 10_000_000;

    #[test]
    fn small_counts() {
        let zero: Vec<_> = enumerate_norm_ball(2, 0, BallMode::Ball, LIMIT, |_| true).unwrap().collect();
        assert_eq!(zero, vec![IntMatrix::zeros(2)]);
        assert_eq!(enumerate_norm_ball(2, 1, BallMode::Ball, LIMIT, |_| true).unwrap().count(), 81);
        assert_eq!(enumerate_norm_ball(2, 1, BallMode::Shell, LIMIT, |_| true).unwrap().count(), 80);
    }

    #[test]
    fn positive_determinant_count_matches_nested_loops() {
        let got = enumerate_norm_ball(2, 1, BallMode::Ball, LIMIT, |m| m.det().unwrap() > 0)
            .unwrap()
            .count();
        let mut want = 0;
        for a in -1..=1i64 {
            for b in -1..=1i64 {
                for c in -1..=1i64 {
                    for d in -1..=1i64 {
                        if a * d - b * c > 0 {
                            want += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(got, want);
        assert_eq!(want, 24);
    }

    #[test]
    fn refuses_over_budget() {
        let e = enumerate_norm_ball(3, 5, BallMode::Ball, 1000, |_| true).err().unwrap();
        assert!(e.is_budget());
    }
}
