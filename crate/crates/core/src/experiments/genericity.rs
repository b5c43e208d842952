//! Finite-scan evidence that tuples with `inf ||ωx||^p ||ω||^{n−p+χ} = 0`
//! are rare.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::config::{random_tuple, sample_seed};
use crate::exponents::profile::margin_scan;
use crate::lattice::rows::Budget;
use crate::linalg::RealTuple;
use crate::scalar::Real;

/// Margin thresholds reported by [`genericity_scan`].
pub const THRESHOLDS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Margins below this are listed as the low-margin tail.
pub const TAIL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub n: usize,
    pub p: usize,
    pub chi: f64,
    pub samples: usize,
    pub qmax: i64,
    pub seed: u64,
    /// Scan bounds qmax/8, qmax/4, qmax/2, qmax (deduplicated, at least 1).
    pub checkpoints: Vec<i64>,
    pub thresholds: Vec<f64>,
    /// `fraction_below[c][t]`: share of samples whose margin at checkpoint c
    /// is below threshold t.
    pub fraction_below: Vec<Vec<f64>>,
    /// Share of samples keeping margin ≥ 1e−3 at qmax.
    pub fraction_above_tail: f64,
    /// Indices of samples with margin < 1e−3 at qmax.
    pub low_tail: Vec<usize>,
    /// Margin of every sample at every checkpoint.
    pub margins: Vec<Vec<f64>>,
}

/// `inf ||ωx||^p ||ω||^{n−p+χ}` over nonzero ω with `||ω|| ≤ qmax`.
pub fn sample_margin<T: Real>(x: &RealTuple<T>, chi: f64, qmax: i64, budget: &mut Budget) -> Result<f64> {
    if !(chi > 0.0) {
        return Err(Error::Precondition(format!("chi = {chi} must be positive")));
    }
    margin_scan(x, (x.n() - x.p()) as f64 + chi, qmax, budget)
}

pub fn genericity_scan(n: usize, p: usize, chi: f64, samples: usize, qmax: i64, seed: u64) -> Result<GenericityReport> {
    if !(chi > 0.0) {
        return Err(Error::Precondition(format!("chi = {chi} must be positive")));
    }
    if n < 2 || p < 1 || p >= n {
        return Err(Error::InvalidDimensions(format!("need 1 <= p <= n-1, got n={n}, p={p}")));
    }
    if samples < 1 || qmax < 1 {
        return Err(Error::Precondition("samples and qmax must be >= 1".into()));
    }
    let mut checkpoints: Vec<i64> = [8, 4, 2, 1].iter().map(|d| (qmax / d).max(1)).collect();
    checkpoints.dedup();
    let margins: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = random_tuple(&mut sample_seed(seed, i), n, p, 1.0)?;
            if !x.independent() {
                return Ok(vec![0.0; checkpoints.len()]);
            }
            checkpoints.iter().map(|&q| sample_margin(&x, chi, q, &mut Budget::default())).collect()
        })
        .collect::<Result<_>>()?;
    let fraction_below = (0..checkpoints.len())
        .map(|c| {
            THRESHOLDS
                .iter()
                .map(|&t| margins.iter().filter(|m| m[c] < t).count() as f64 / samples as f64)
                .collect()
        })
        .collect();
    let last = checkpoints.len() - 1;
    let low_tail: Vec<usize> = (0..samples).filter(|&i| margins[i][last] < TAIL_THRESHOLD).collect();
    Ok(GenericityReport {
        n,
        p,
        chi,
        samples,
        qmax,
        seed,
        checkpoints,
        thresholds: THRESHOLDS.to_vec(),
        fraction_below,
        fraction_above_tail: 1.0 - low_tail.len() as f64 / samples as f64,
        low_tail,
        margins,
    })
}
