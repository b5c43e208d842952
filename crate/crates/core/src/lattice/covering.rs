//! End-to-end check that dilated split parallelepipeds meet every shifted
//! lattice `v + Z^d`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::rows::Budget;
use crate::lattice::split::{
    affine_points_in_omega_rows, check_condition_2_1, chi_exponent, BoxRegion, OmegaRegion, SplitSpace,
};
use crate::scalar::serde_ext_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: Vec<f64>,
    pub epsilon: f64,
    pub point: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub v: Vec<f64>,
    pub epsilon: f64,
}

/// Outcome of a covering run. `epsilon0` and `proof_sigma` are the explicit
/// constants of the covering argument evaluated at the scanned κ, kept for
/// comparison with the σ actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCertificate {
    pub sigma: f64,
    #[serde(with = "serde_ext_f64")]
    pub epsilon0: f64,
    pub chi: f64,
    pub delta: f64,
    pub qmax: i64,
    pub kappa: f64,
    pub lambda: f64,
    #[serde(with = "serde_ext_f64")]
    pub proof_sigma: f64,
    pub witnesses: Vec<Witness>,
    pub failures: Vec<Failure>,
}

impl CoveringCertificate {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Parameters of [`verify_meyer_covering`].
#[derive(Debug, Clone)]
pub struct CoveringConfig {
    pub delta: f64,
    pub r1: BoxRegion,
    pub r2: BoxRegion,
    pub sigma: f64,
    pub epsilon_grid: Vec<f64>,
    pub v_samples: usize,
    pub seed: u64,
    /// Norm bound of the κ scan.
    pub qmax: i64,
}

/// Default κ-scan bound by ambient dimension.
pub fn default_kappa_qmax(d: usize) -> i64 {
    if d <= 4 {
        200
    } else {
        30
    }
}

/// For every ε in the grid and every sampled `v ∈ [0,1)^d`, looks for a point
/// of `(v + Z^d) ∩ Ω(ε, σ ε^{−χ})`.
pub fn verify_meyer_covering(split: &SplitSpace, cfg: &CoveringConfig, budget: &mut Budget) -> Result<CoveringCertificate> {
    if !(cfg.sigma > 0.0) {
        return Err(Error::Precondition("sigma must be positive".into()));
    }
    let chi = chi_exponent(split.d1, split.d2, cfg.delta)?;
    let kappa_scan = check_condition_2_1(split, cfg.delta, cfg.qmax, budget)?;
    if !(kappa_scan > 0.0) {
        return Err(Error::ConditionFailed {
            margin: kappa_scan,
            qmax: cfg.qmax,
        });
    }
    let kappa = kappa_scan.min(1.0);
    let (d1, d2) = (split.d1 as f64, split.d2 as f64);
    // normalized volume: Lebesgue measure of R1 ⊕ R2 in standard coordinates
    let jac = split.to_split.determinant().abs();
    let lambda = cfg.r1.volume() * cfg.r2.volume() / jac;
    let theta = lambda * kappa.powf(d2);
    let proof_sigma = 2.0 * kappa * theta.powf(-(1.0 + chi));
    let epsilon0 = kappa.powf(1.0 - d1 * cfg.delta / (d2 + cfg.delta)) / theta;
    if let Some(bad) = cfg.epsilon_grid.iter().find(|&&e| !(e > 0.0 && e < epsilon0)) {
        return Err(Error::Precondition(format!(
            "epsilon {bad} not in (0, epsilon0 = {epsilon0:e})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<Vec<f64>> = (0..cfg.v_samples)
        .map(|_| (0..split.d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let mut witnesses = Vec::new();
    let mut failures = Vec::new();
    for &eps in &cfg.epsilon_grid {
        let region = OmegaRegion::new(split, cfg.r1.clone(), cfg.r2.clone(), eps, cfg.sigma * eps.powf(-chi))?;
        for v in &samples {
            let pts = affine_points_in_omega_rows(&region, v, true, budget)?;
            match pts.into_iter().next() {
                Some(z) => {
                    let pnt: Vec<f64> = v.iter().zip(&z).map(|(a, b)| a + *b as f64).collect();
                    if region.contains(&pnt) {
                        witnesses.push(Witness { v: v.clone(), epsilon: eps, point: z });
                    } else {
                        failures.push(Failure { v: v.clone(), epsilon: eps });
                    }
                }
                None => failures.push(Failure { v: v.clone(), epsilon: eps }),
            }
        }
    }
    Ok(CoveringCertificate {
        sigma: cfg.sigma,
        epsilon0,
        chi,
        delta: cfg.delta,
        qmax: cfg.qmax,
        kappa: kappa_scan,
        lambda,
        proof_sigma,
        witnesses,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealTuple;

    fn cfg(grid: Vec<f64>) -> CoveringConfig {
        CoveringConfig {
            delta: 0.2,
            r1: BoxRegion::symmetric_unit(2),
            r2: BoxRegion::symmetric_unit(2),
            sigma: 1.0,
            epsilon_grid: grid,
            v_samples: 5,
            seed: 7,
            qmax: 50,
        }
    }

    #[test]
    fn small_run_succeeds_and_round_trips() {
        let s = SplitSpace::from_tuple(&RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()).unwrap();
        let cert = verify_meyer_covering(&s, &cfg(vec![0.2, 0.05]), &mut Budget::default()).unwrap();
        assert!(cert.is_success(), "{:?}", cert.failures);
        assert_eq!(cert.witnesses.len(), 10);
        let js = serde_json::to_string(&cert).unwrap();
        let back: CoveringCertificate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn epsilon_above_threshold_rejected() {
        let s = SplitSpace::from_tuple(&RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()).unwrap();
        let e = verify_meyer_covering(&s, &cfg(vec![1e9]), &mut Budget::default()).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }
}
