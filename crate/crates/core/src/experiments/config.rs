use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RealTuple;
use crate::scalar::Precision;

/// Parameters of a seeded experiment; a report is a pure function of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub qmax: i64,
    pub samples: usize,
    pub seed: u64,
    /// Entries are drawn from `[−box_radius, box_radius]`.
    #[serde(default = "default_radius")]
    pub box_radius: f64,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_radius() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn new(n: usize, p: usize, qmax: i64, samples: usize, seed: u64) -> Self {
        ExperimentConfig { n, p, qmax, samples, seed, box_radius: 1.0, precision: Precision::Binary64, output: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 || self.p >= self.n {
            return Err(Error::InvalidDimensions(format!("need 1 <= p <= n-1, got n={}, p={}", self.n, self.p)));
        }
        if self.samples < 1 {
            return Err(Error::Precondition("samples must be >= 1".into()));
        }
        if self.qmax < 1 {
            return Err(Error::Precondition("qmax must be >= 1".into()));
        }
        if !(self.box_radius > 0.0 && self.box_radius.is_finite()) {
            return Err(Error::Precondition("box_radius must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// RNG stream of sample `index`: seeded with `seed ⊕ index`, so samples can
/// be processed in any order or in parallel.
pub fn sample_seed(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

/// Uniform dyadic rational `k/2^53` mapped onto `[−r, r)`.
pub(crate) fn dyadic(rng: &mut ChaCha8Rng, r: f64) -> f64 {
    let k = rng.gen::<u64>() >> 11;
    r * (2.0 * (k as f64 / (1u64 << 53) as f64) - 1.0)
}

pub(crate) fn random_tuple(rng: &mut ChaCha8Rng, n: usize, p: usize, r: f64) -> Result<RealTuple<f64>> {
    let entries: Vec<f64> = (0..n * p).map(|_| dyadic(rng, r)).collect();
    RealTuple::new(n, p, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_validation() {
        let c = ExperimentConfig::new(2, 1, 2000, 50, 42);
        let js = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&js).unwrap(), c);
        assert!(ExperimentConfig::from_json(r#"{"n":2,"p":2,"qmax":5,"samples":1,"seed":0}"#).is_err());
        let minimal = ExperimentConfig::from_json(r#"{"n":3,"p":1,"qmax":5,"samples":1,"seed":0}"#).unwrap();
        assert_eq!(minimal.box_radius, 1.0);
    }

    #[test]
    fn dyadic_in_range_and_reproducible() {
        let a: Vec<f64> = (0..100).map(|_| 0.0).scan(sample_seed(7, 3), |r, _| Some(dyadic(r, 2.0))).collect();
        let b: Vec<f64> = (0..100).map(|_| 0.0).scan(sample_seed(7, 3), |r, _| Some(dyadic(r, 2.0))).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-2.0..2.0).contains(v)));
    }
}
