//! Best-approximation records and Pareto frontiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{approximation_error, IntMatrix, RealTuple};
use crate::scalar::TOL_CMP;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRecord {
    pub gamma: IntMatrix,
    pub norm: i64,
    /// `||γx − y||`.
    pub error: f64,
}

/// Records sorted by norm with strictly decreasing error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Frontier {
    pub qmax: i64,
    pub records: Vec<ApproxRecord>,
}

impl Frontier {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(norm, error)` pairs.
    pub fn points(&self) -> Vec<(i64, f64)> {
        self.records.iter().map(|r| (r.norm, r.error)).collect()
    }

    /// Re-checks the Pareto ordering, norms, and (when `x`, `y` are given)
    /// errors and determinants.
    pub fn validate(&self, xy: Option<(&RealTuple<f64>, &RealTuple<f64>)>, require_gamma: bool) -> Result<()> {
        for w in self.records.windows(2) {
            if !(w[0].norm < w[1].norm && w[0].error > w[1].error) {
                return Err(Error::Precondition(format!(
                    "frontier not Pareto at norms {} -> {}",
                    w[0].norm, w[1].norm
                )));
            }
        }
        for r in &self.records {
            if r.gamma.sup_norm() != r.norm {
                return Err(Error::Precondition(format!("recorded norm {} is wrong", r.norm)));
            }
            if require_gamma && r.gamma.det()? <= 0 {
                return Err(Error::Precondition(format!("record at norm {} has det <= 0", r.norm)));
            }
            if let Some((x, y)) = xy {
                let e = approximation_error(&r.gamma, x, y)?;
                if (e - r.error).abs() > TOL_CMP {
                    return Err(Error::Precondition(format!(
                        "record at norm {} has error {} but recomputes to {e}",
                        r.norm, r.error
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with header `norm,error,g_0_0,...` (entries row-major).
    pub fn to_csv(&self) -> String {
        let n = self.records.first().map_or(0, |r| r.gamma.n());
        let mut s = String::from("norm,error");
        for r in 0..n {
            for c in 0..n {
                s.push_str(&format!(",g_{r}_{c}"));
            }
        }
        s.push('\n');
        for rec in &self.records {
            s.push_str(&format!("{},{:e}", rec.norm, rec.error));
            for v in rec.gamma.entries() {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, qmax: i64) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty frontier CSV".into()))?;
        let cols = header.split(',').count();
        if cols < 3 {
            return Err(Error::Parse("frontier CSV header too short".into()));
        }
        let n = ((cols - 2) as f64).sqrt().round() as usize;
        if n * n + 2 != cols {
            return Err(Error::Parse("frontier CSV entry count is not a square".into()));
        }
        let bad = |l: &str| Error::Parse(format!("bad frontier CSV line '{l}'"));
        let mut records = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols {
                return Err(bad(line));
            }
            let norm: i64 = f[0].parse().map_err(|_| bad(line))?;
            let error: f64 = f[1].parse().map_err(|_| bad(line))?;
            let entries: Vec<i64> = f[2..].iter().map(|v| v.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad(line))?;
            records.push(ApproxRecord { gamma: IntMatrix::new(n, entries)?, norm, error });
        }
        Ok(Frontier { qmax, records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let f = Frontier {
            qmax: 5,
            records: vec![
                ApproxRecord { gamma: IntMatrix::identity(2), norm: 1, error: 0.3 },
                ApproxRecord { gamma: IntMatrix::new(2, vec![2, 1, 1, 1]).unwrap(), norm: 2, error: 1.0 / 7.0 },
            ],
        };
        let csv = f.to_csv();
        assert!(csv.starts_with("norm,error,g_0_0,g_0_1,g_1_0,g_1_1\n"));
        assert_eq!(Frontier::from_csv(&csv, 5).unwrap(), f);
        assert!(f.validate(None, true).is_ok());
    }

    #[test]
    fn non_pareto_rejected() {
        let f = Frontier {
            qmax: 5,
            records: vec![
                ApproxRecord { gamma: IntMatrix::identity(2), norm: 1, error: 0.3 },
                ApproxRecord { gamma: IntMatrix::new(2, vec![2, 0, 0, 1]).unwrap(), norm: 2, error: 0.3 },
            ],
        };
        assert!(f.validate(None, true).is_err());
    }
}
