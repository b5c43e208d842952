//! Property suites shared by the invariant and acceptance tests (1000 cases each).

#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::DMatrix;
use orbitapprox::experiments::{genericity_scan, monte_carlo_exponent, ExperimentConfig};
use orbitapprox::exponents::psi_exponent;
use orbitapprox::lattice::ball::{enumerate_norm_ball, BallMode};
use orbitapprox::lattice::rows::{enumerate_shell_rows, vec_norm, Budget, RowQuery};
use orbitapprox::lattice::split::{affine_points_in_omega, affine_points_in_omega_rows};
use orbitapprox::lattice::{chi_exponent, BoxRegion, OmegaRegion, SplitSpace};
use orbitapprox::linalg::{apply, complete_basis, tuple_norm, IntMatrix, RealTuple};
use proptest::prelude::*;
use proptest::test_runner::TestRunner;

pub const CASES: u32 = 1000;
const TOL_CMP: f64 = 1e-12;

pub type Suite = fn() -> Result<(), String>;

pub const SUITES: [(&str, Suite); 6] = [
    ("norm axioms", norm_axioms),
    ("shell partition counts", shell_partition_counts),
    ("affine enumeration shift-equivariance", affine_shift_equivariance),
    ("split identity", split_identity),
    ("chi equals psi", chi_equals_psi),
    ("thread-count determinism", thread_determinism),
];

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(ProptestConfig { cases: CASES, ..ProptestConfig::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn int_matrix(n: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-bound..=bound, n * n).prop_map(move |e| IntMatrix::new(n, e).unwrap())
}

/// Tuples with linearly independent random columns.
fn tuple(n: usize, p: usize) -> impl Strategy<Value = RealTuple<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * p)
        .prop_filter_map("independent", move |e| RealTuple::new(n, p, e).ok().filter(|x| x.independent()))
}

fn pools() -> &'static (rayon::ThreadPool, rayon::ThreadPool) {
    static POOLS: OnceLock<(rayon::ThreadPool, rayon::ThreadPool)> = OnceLock::new();
    POOLS.get_or_init(|| {
        let mk = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        (mk(1), mk(4))
    })
}

pub fn norm_axioms() -> Result<(), String> {
    let pairs = (2usize..=4).prop_flat_map(|n| (int_matrix(n, 1000), int_matrix(n, 1000)));
    run(pairs, |(a, b)| {
        let n = a.n();
        let k: i64 = 7;
        let sum = IntMatrix::new(n, a.entries().iter().zip(b.entries()).map(|(u, v)| u + v).collect()).unwrap();
        let scaled = IntMatrix::new(n, a.entries().iter().map(|u| -k * u).collect()).unwrap();
        prop_assert!(a.sup_norm() >= 0);
        prop_assert_eq!(a.sup_norm() == 0, a.is_zero());
        prop_assert_eq!(scaled.sup_norm(), k * a.sup_norm());
        prop_assert!(sum.sup_norm() <= a.sup_norm() + b.sup_norm());
        prop_assert!(a.mul(&b).unwrap().sup_norm() <= n as i64 * a.sup_norm() * b.sup_norm());
        let x = RealTuple::new(n, 1, (0..n).map(|i| (i as f64 + 1.0).sqrt()).collect()).unwrap();
        let ax = tuple_norm(&apply(&a, &x).unwrap());
        prop_assert!(ax <= n as f64 * a.sup_norm() as f64 * tuple_norm(&x) * (1.0 + TOL_CMP));
        prop_assert_eq!(IntMatrix::zeros(n).sup_norm(), 0);
        Ok(())
    })
}

pub fn shell_partition_counts() -> Result<(), String> {
    run((2usize..=4, 0i64..=5, 0i64..=2), |(n, q, mq)| {
        // rows: the shells 1..=q plus the zero row tile the ball exactly
        let xs = vec![0.5; n];
        let q_inf = RowQuery { n, p: 1, x: &xs, centers: &[0.0], radii: &[f64::INFINITY] };
        let mut seen = std::collections::HashSet::new();
        seen.insert(vec![0i64; n]);
        let mut total = 1u64;
        let mut clean = true;
        for big_n in 1..=q {
            let mut shell = 0u64;
            enumerate_shell_rows(&q_inf, big_n, &mut Budget::default(), |a| {
                clean &= vec_norm(a) == big_n && seen.insert(a.to_vec());
                shell += 1;
            })
            .unwrap();
            prop_assert_eq!(shell, ((2 * big_n + 1).pow(n as u32) - (2 * big_n - 1).pow(n as u32)) as u64);
            total += shell;
        }
        prop_assert!(clean, "shell rows must be distinct and of the shell's norm");
        prop_assert_eq!(total, (2 * q + 1).pow(n as u32) as u64);
        // 2x2 matrices: ball(mq) = disjoint union of shells 0..=mq
        let ball = enumerate_norm_ball(2, mq, BallMode::Ball, 1_000_000, |_| true).unwrap().count();
        let shells: usize = (0..=mq)
            .map(|k| enumerate_norm_ball(2, k, BallMode::Shell, 1_000_000, |_| true).unwrap().count())
            .sum();
        prop_assert_eq!(ball, shells);
        prop_assert_eq!(ball as i64, (2 * mq + 1).pow(4));
        Ok(())
    })
}

pub fn affine_shift_equivariance() -> Result<(), String> {
    let split = SplitSpace::from_tuple(&RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()).unwrap();
    let inputs = (
        prop::collection::vec(0u32..(1 << 20), 4),
        prop::collection::vec(-50i64..=50, 4),
        0.2f64..1.0,
        1.0f64..4.0,
    );
    run(inputs, |(v, z0, s, t)| {
        let region =
            OmegaRegion::new(&split, BoxRegion::symmetric_unit(2), BoxRegion::symmetric_unit(2), s, t).unwrap();
        // dyadic coordinates keep v + z exact
        let v: Vec<f64> = v.iter().map(|&k| k as f64 / (1u64 << 20) as f64).collect();
        let shifted: Vec<f64> = v.iter().zip(&z0).map(|(a, b)| a + *b as f64).collect();
        let sorted = |mut pts: Vec<Vec<i64>>| {
            pts.sort();
            pts
        };
        let base = sorted(affine_points_in_omega(&region, &v, &mut Budget::default()).unwrap());
        let moved = sorted(affine_points_in_omega(&region, &shifted, &mut Budget::default()).unwrap());
        let expect = sorted(base.iter().map(|z| z.iter().zip(&z0).map(|(a, b)| a - b).collect()).collect());
        prop_assert_eq!(&moved, &expect);
        let rows = sorted(affine_points_in_omega_rows(&region, &shifted, false, &mut Budget::default()).unwrap());
        prop_assert_eq!(&rows, &expect);
        Ok(())
    })
}

pub fn split_identity() -> Result<(), String> {
    let inputs = ((2usize..=4).prop_flat_map(|n| (1..n).prop_flat_map(move |p| tuple(n, p))), any::<u64>());
    run(inputs, |(x, seed)| {
        let n = x.n();
        let cb = complete_basis(&x).unwrap();
        let mut state = seed;
        let xi = DMatrix::from_fn(n, n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 20.0 - 10.0
        });
        let (v1, _) = cb.split_norms(&xi);
        let applied = (&xi * x.to_dmatrix()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((v1 - applied).abs() <= TOL_CMP * (1.0 + applied), "{} vs {}", v1, applied);
        // to_split ∘ from_split = identity
        let split = SplitSpace::from_basis(cb).unwrap();
        let id = &split.to_split * &split.from_split;
        prop_assert!((id - DMatrix::identity(n * n, n * n)).abs().max() <= TOL_CMP);
        Ok(())
    })
}

pub fn chi_equals_psi() -> Result<(), String> {
    run((2usize..=6, 0.0f64..1.0, 0.0f64..0.999), |(n, p_frac, phi_frac)| {
        let p = (1 + ((n - 1) as f64 * p_frac).floor() as usize).min(n - 1);
        let phi = phi_frac / ((n * p) as f64 - 1.0);
        let psi = psi_exponent(n, p, phi).unwrap();
        let d2 = n * (n - p);
        let chi = chi_exponent(n * p, d2, d2 as f64 * phi).unwrap();
        prop_assert!((chi - psi).abs() <= 1e-12 * psi.max(1.0), "chi {} psi {}", chi, psi);
        Ok(())
    })
}

pub fn thread_determinism() -> Result<(), String> {
    run((any::<u64>(), 1usize..=4, 5i64..=40, 2usize..=3), |(seed, samples, qmax, n)| {
        let (one, four) = pools();
        let cfg = ExperimentConfig::new(n, 1, qmax, samples, seed);
        let a = one.install(|| monte_carlo_exponent(&cfg).unwrap()).to_json();
        let b = four.install(|| monte_carlo_exponent(&cfg).unwrap()).to_json();
        prop_assert_eq!(a, b);
        let g1 = one.install(|| genericity_scan(2, 1, 0.5, samples, qmax, seed).unwrap());
        let g4 = four.install(|| genericity_scan(2, 1, 0.5, samples, qmax, seed).unwrap());
        prop_assert_eq!(g1, g4);
        Ok(())
    })
}
