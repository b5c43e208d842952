//! Seeded statistical experiments: lattice-point counts, Monte-Carlo
//! exponent estimates and genericity scans.

pub mod config;
pub mod counting;
pub mod genericity;
pub mod montecarlo;

pub use config::{sample_seed, ExperimentConfig};
pub use counting::{count_into_box, count_rank_r, CountSeries, SlopeFit};
pub use genericity::{genericity_scan, GenericityReport};
pub use montecarlo::{monte_carlo_exponent, run_sample, MonteCarloReport, SampleOutcome, SampleStatus};
