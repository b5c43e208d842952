//! Explicit construction of γ ∈ Γ with `||γx − y|| < ε` and `||γ||` of
//! order `ε^{−ψ}`.
//!
//! Pipeline:
//! 1. reduce y to `y₀θ` with the first q columns of `y₀` independent and the
//!    rest zero (`x̃ = xθ⁻¹`, tolerance `ε/α` with α the column-sum norm of θ);
//! 2. complete `x̃` to a basis `X = [x̃ | e_k …]` of R^n;
//! 3. `g₀ = [y₀ | 0]X⁻¹` maps `x̃_j ↦ y₀_j` and the appended vectors to 0;
//! 4. η is zero on the first q basis vectors and sends the others to the
//!    columns of `H`, half the standard vectors completing `span(y₀)`, with
//!    one sign flipped if needed so that `det [y₀,q | H] · det X > 0`;
//! 5. with `D = diag(1, …, 1, ε', …, ε', t, …, t)`, every integer γ with
//!    `|γX − [y₀,q | H]D| ≤ ρD` entrywise has `det γ > 0` and
//!    `||γx̃ − y₀|| < ε'`, where ρ is a certified radius around `[y₀,q | H]`;
//! 6. such γ are found row by row with windowed enumeration, growing t
//!    geometrically until every row has a solution.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::formulas::psi_exponent;
use crate::exponents::profile::condition_1_1_margin;
use crate::lattice::rows::{enumerate_rows, vec_norm, Budget, RowQuery};
use crate::linalg::{approximation_error, complete_basis, matrix_rows, row_action_norm, IntMatrix, RealTuple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructConfig {
    /// Norm bound for the Diophantine precondition scan on x.
    pub q_check: i64,
    /// Initial scale of the appended coordinates.
    pub t0: f64,
    /// Geometric growth factor of t.
    pub growth: f64,
    pub max_steps: usize,
}

impl Default for ConstructConfig {
    fn default() -> Self {
        ConstructConfig { q_check: 1000, t0: 1.0, growth: 2f64.powf(0.25), max_steps: 400 }
    }
}

/// Every intermediate object of a construction, at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub n: usize,
    pub p: usize,
    pub epsilon: f64,
    pub phi: f64,
    pub psi: f64,
    /// Precondition margin of x at `q_check`.
    pub margin: f64,
    pub q_check: i64,
    /// Rank of y.
    pub q: usize,
    /// Column order putting the independent columns of y first.
    pub permutation: Vec<usize>,
    /// θ with `y_π = y₀θ`.
    pub theta_reduction: Vec<Vec<f64>>,
    pub y0: Vec<Vec<f64>>,
    /// `x̃ = x_π θ⁻¹`.
    pub x_reduced: Vec<Vec<f64>>,
    /// `ε' = ε/α`.
    pub epsilon_reduced: f64,
    /// Completed basis X of the reduced tuple and its appended indices.
    pub basis: Vec<Vec<f64>>,
    pub extension_indices: Vec<usize>,
    pub g0: Vec<Vec<f64>>,
    pub g1: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    /// Sign of `det(g₁ + η)` after the column-sign adjustment.
    pub det_g1_eta_sign: i8,
    /// Certified radius ρ around `[y₀,q | H]`.
    pub radius: f64,
    /// Final scale t of the appended coordinates.
    pub t: f64,
    pub steps: usize,
    /// `γ − g₁`.
    pub found_theta: Vec<Vec<f64>>,
    pub gamma: IntMatrix,
    pub det: i128,
    pub error: f64,
    /// `(ε, ||γ||)`.
    pub achieved: (f64, i64),
    /// Envelope `ε^{−ψ}`.
    pub predicted_budget: f64,
    /// `||γ|| · ε^ψ`: the constant realized by this γ.
    pub achieved_constant: f64,
}

/// Greedy choice of independent columns; returns their indices.
fn independent_columns(cols: &[Vec<f64>], rel_tol: f64) -> Vec<usize> {
    let scale = cols.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let mut r = c.clone();
        for b in &basis {
            let d: f64 = r.iter().zip(b).map(|(u, v)| u * v).sum();
            for (u, v) in r.iter_mut().zip(b) {
                *u -= d * v;
            }
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > rel_tol * scale {
            basis.push(r.iter().map(|v| v / norm).collect());
            chosen.push(j);
        }
    }
    chosen
}

fn residual(ortho: &[Vec<f64>], mut r: Vec<f64>) -> Vec<f64> {
    for b in ortho {
        let d: f64 = r.iter().zip(b).map(|(u, v)| u * v).sum();
        for (u, v) in r.iter_mut().zip(b) {
            *u -= d * v;
        }
    }
    r
}

fn push_orthonormal(ortho: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    let r = residual(ortho, v);
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    ortho.push(r.iter().map(|v| v / norm).collect());
}

/// Operator norm of M for the max norm on column vectors (max row sum).
fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Finds γ ∈ Γ with `||γx − y|| < ε`, following the pipeline in the module docs.
pub fn construct_gamma(
    x: &RealTuple<f64>,
    y: &RealTuple<f64>,
    epsilon: f64,
    phi: f64,
    cfg: &ConstructConfig,
    budget: &mut Budget,
) -> Result<ConstructionTrace> {
    let (n, p) = (x.n(), x.p());
    if y.n() != n || y.p() != p {
        return Err(Error::DimensionMismatch(format!("x is {n}x{p} but y is {}x{}", y.n(), y.p())));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let psi = psi_exponent(n, p, phi)?;
    let margin = condition_1_1_margin(x, phi, cfg.q_check, budget)?;
    if !(margin > 0.0) {
        return Err(Error::ConditionFailed { margin, qmax: cfg.q_check });
    }

    // (1) rank reduction y_π = y₀θ
    let ycols: Vec<Vec<f64>> = (0..p).map(|j| y.col_f64(j).to_vec()).collect();
    let indep = independent_columns(&ycols, 1e-10);
    let q = indep.len();
    let mut permutation = indep.clone();
    permutation.extend((0..p).filter(|j| !indep.contains(j)));
    let yq = DMatrix::from_fn(n, q, |i, k| ycols[indep[k]][i]);
    let mut theta = DMatrix::<f64>::identity(p, p);
    if q > 0 && q < p {
        let svd = yq.clone().svd(true, true);
        for (c, &j) in permutation.iter().enumerate().skip(q) {
            let rhs = DMatrix::from_column_slice(n, 1, &ycols[j]);
            let coef = svd.solve(&rhs, 1e-12).map_err(|e| Error::Precondition(e.to_string()))?;
            for k in 0..q {
                theta[(k, c)] = coef[(k, 0)];
            }
        }
    }
    let theta_inv = theta.clone().try_inverse().ok_or(Error::DependentColumns)?;
    let xpi = DMatrix::from_fn(n, p, |i, c| x.get(i, permutation[c]));
    let xr = &xpi * &theta_inv;
    let x_reduced = RealTuple::from_dmatrix(&xr)?;
    let mut y0 = DMatrix::<f64>::zeros(n, p);
    y0.view_mut((0, 0), (n, q)).copy_from(&yq);
    let alpha = row_action_norm(&theta);
    let eps_r = epsilon / alpha;

    // (2)-(3) basis and g₀
    let cb = complete_basis(&x_reduced)?;
    let big_x = &cb.change_of_basis;
    let mut y0ext = DMatrix::<f64>::zeros(n, n);
    y0ext.view_mut((0, 0), (n, p)).copy_from(&y0);
    let g0 = &y0ext * &cb.inverse;
    let g1 = g0.clone();
    let g2 = DMatrix::<f64>::zeros(n, n);

    // (4) η via H completing span(y₀,q)
    // pick, one at a time, the standard vector farthest from the current span
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for k in 0..q {
        push_orthonormal(&mut ortho, yq.column(k).iter().copied().collect());
    }
    let mut hcols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    for _ in q..n {
        let (i, _) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                (i, residual(&ortho, e).iter().map(|v| v * v).sum::<f64>())
            })
            .fold((usize::MAX, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        used[i] = true;
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        push_orthonormal(&mut ortho, e.clone());
        hcols.push(e.iter().map(|v| 0.5 * v).collect());
    }
    let mut m0 = DMatrix::<f64>::zeros(n, n);
    m0.view_mut((0, 0), (n, q)).copy_from(&yq);
    for (k, h) in hcols.iter().enumerate() {
        for i in 0..n {
            m0[(i, q + k)] = h[i];
        }
    }
    if m0.determinant() * big_x.determinant() < 0.0 {
        for i in 0..n {
            m0[(i, n - 1)] = -m0[(i, n - 1)];
        }
    }
    let mut zh = m0.clone();
    zh.view_mut((0, 0), (n, q)).fill(0.0);
    let eta = &zh * &cb.inverse;
    let det_g1_eta_sign = ((&g1 + &eta).determinant().signum()) as i8;

    // (5) certified radius
    let m0_inv = m0.clone().try_inverse().ok_or(Error::DependentColumns)?;
    let radius = (0.5 / (n as f64 * max_row_sum(&m0_inv))).min(0.25);

    // (6) search
    let xr_entries = x_reduced.entries_f64().to_vec();
    let ext = &cb.extension_indices;
    let mut t = cfg.t0;
    for step in 0..cfg.max_steps {
        let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n);
        for r in 0..n {
            match best_row(&xr_entries, n, p, q, r, &m0, &cb.inverse, ext, eps_r, radius, t, budget)? {
                Some(a) => rows.push(a),
                None => break,
            }
        }
        if rows.len() == n {
            let gamma = IntMatrix::from_rows(&rows)?;
            let det = gamma.det()?;
            let error = approximation_error(&gamma, x, y)?;
            if det > 0 && error < epsilon {
                let norm = gamma.sup_norm();
                let gr = DMatrix::from_fn(n, n, |i, j| gamma.get(i, j) as f64);
                let predicted_budget = epsilon.powf(-psi);
                return Ok(ConstructionTrace {
                    n,
                    p,
                    epsilon,
                    phi,
                    psi,
                    margin,
                    q_check: cfg.q_check,
                    q,
                    permutation,
                    theta_reduction: matrix_rows(&theta),
                    y0: matrix_rows(&y0),
                    x_reduced: matrix_rows(&xr),
                    epsilon_reduced: eps_r,
                    basis: matrix_rows(big_x),
                    extension_indices: ext.clone(),
                    g0: matrix_rows(&g0),
                    g1: matrix_rows(&g1),
                    g2: matrix_rows(&g2),
                    eta: matrix_rows(&eta),
                    det_g1_eta_sign,
                    radius,
                    t,
                    steps: step + 1,
                    found_theta: matrix_rows(&(gr - &g1)),
                    gamma,
                    det,
                    error,
                    achieved: (epsilon, norm),
                    predicted_budget,
                    achieved_constant: norm as f64 / predicted_budget,
                });
            }
        }
        t *= cfg.growth;
    }
    Err(Error::Precondition(format!("no admissible γ found within {} growth steps", cfg.max_steps)))
}

/// Smallest-norm (then lexicographically first) integer row a with
/// `aX` inside the row-r windows at scale t.
#[allow(clippy::too_many_arguments)]
fn best_row(
    xr: &[f64],
    n: usize,
    p: usize,
    q: usize,
    r: usize,
    m0: &DMatrix<f64>,
    x_inv: &DMatrix<f64>,
    ext: &[usize],
    eps_r: f64,
    radius: f64,
    t: f64,
    budget: &mut Budget,
) -> Result<Option<Vec<i64>>> {
    // window centre and radius of each coordinate of aX
    let (centers, radii): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|c| {
            if c < q {
                (m0[(r, c)], eps_r * radius)
            } else if c < p {
                (eps_r * m0[(r, c)], eps_r * radius)
            } else {
                (t * m0[(r, c)], t * radius)
            }
        })
        .unzip();
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for i in 0..n {
        let mid: f64 = (0..n).map(|c| centers[c] * x_inv[(c, i)]).sum();
        let rad: f64 = (0..n).map(|c| radii[c] * x_inv[(c, i)].abs()).sum();
        let pad = 1e-9 * (1.0 + mid.abs() + rad);
        let (l, h) = ((mid - rad - pad).ceil(), (mid + rad + pad).floor());
        if !(l.abs() < 1e15 && h.abs() < 1e15) {
            return Err(Error::Overflow("row bounds of the construction"));
        }
        lo[i] = l as i64;
        hi[i] = h as i64;
    }
    for (k, &i) in ext.iter().enumerate() {
        let c = p + k;
        lo[i] = lo[i].max((centers[c] - radii[c]).ceil() as i64);
        hi[i] = hi[i].min((centers[c] + radii[c]).floor() as i64);
    }
    let query = RowQuery { n, p, x: xr, centers: &centers[..p], radii: &radii[..p] };
    let mut best: Option<(i64, Vec<i64>)> = None;
    enumerate_rows(&query, &lo, &hi, budget, |a| {
        let inside = (0..p).all(|j| {
            let v: f64 = a.iter().zip(&xr[j * n..(j + 1) * n]).map(|(&ai, &xi)| ai as f64 * xi).sum();
            (v - centers[j]).abs() <= radii[j]
        });
        if !inside {
            return;
        }
        let norm = vec_norm(a);
        let better = match &best {
            None => true,
            Some((bn, brow)) => norm < *bn || (norm == *bn && a < brow.as_slice()),
        };
        if better {
            best = Some((norm, a.to_vec()));
        }
    })?;
    Ok(best.map(|(_, a)| a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball::{enumerate_norm_ball, BallMode};
    use crate::linalg::apply;

    fn s2() -> RealTuple<f64> {
        RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap()
    }

    #[test]
    fn example_target() {
        let y = RealTuple::new(2, 1, vec![0.3, 0.7]).unwrap();
        let tr = construct_gamma(&s2(), &y, 0.1, 0.0, &ConstructConfig::default(), &mut Budget::default()).unwrap();
        assert!(tr.det > 0 && tr.gamma.det().unwrap() == tr.det);
        assert!(approximation_error(&tr.gamma, &s2(), &y).unwrap() < 0.1);
        assert_eq!(tr.det_g1_eta_sign, 1);
        let js = serde_json::to_string(&tr).unwrap();
        let back: ConstructionTrace = serde_json::from_str(&js).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn zero_target_matches_enumeration() {
        let y = RealTuple::new(2, 1, vec![0.0, 0.0]).unwrap();
        let eps = 0.05;
        let tr = construct_gamma(&s2(), &y, eps, 0.0, &ConstructConfig::default(), &mut Budget::default()).unwrap();
        assert_eq!(tr.q, 0);
        assert!(tr.error < eps && tr.det > 0);
        // the oracle confirms nothing much smaller exists
        let norm = tr.gamma.sup_norm();
        let smallest = (1..=norm)
            .find(|&k| {
                enumerate_norm_ball(2, k, BallMode::Shell, 1_000_000_000, |_| true)
                    .unwrap()
                    .any(|m| m.det().unwrap() > 0 && approximation_error(&m, &s2(), &y).unwrap() < eps)
            })
            .unwrap();
        assert!(smallest <= norm);
    }

    #[test]
    fn dependent_x_fails_condition() {
        let x = RealTuple::new(2, 1, vec![0.5, 1.0]).unwrap();
        let y = RealTuple::new(2, 1, vec![0.3, 0.7]).unwrap();
        let e = construct_gamma(&x, &y, 0.1, 0.0, &ConstructConfig::default(), &mut Budget::default()).unwrap_err();
        assert!(matches!(e, Error::ConditionFailed { .. }));
    }

    #[test]
    fn rank_deficient_target() {
        let x = RealTuple::new(3, 2, vec![2f64.sqrt(), 3f64.sqrt(), 1.0, 5f64.sqrt(), 1.0, 7f64.sqrt()]).unwrap();
        let c = vec![0.2, -0.3, 0.4];
        let y = RealTuple::from_columns(&[c.clone(), c.iter().map(|v| -2.0 * v).collect()]).unwrap();
        let tr = construct_gamma(&x, &y, 0.2, 0.0, &ConstructConfig::default(), &mut Budget::default()).unwrap();
        assert_eq!(tr.q, 1);
        assert!(tr.error < 0.2 && tr.det > 0);
    }

    #[test]
    fn geometric_grid_n2() {
        let y = RealTuple::new(2, 1, vec![-0.41, 0.62]).unwrap();
        for k in 1..=10 {
            let eps = 0.5f64.powi(k);
            let tr = construct_gamma(&s2(), &y, eps, 0.0, &ConstructConfig::default(), &mut Budget::default()).unwrap();
            assert!(tr.error < eps && tr.det > 0);
            let _ = apply(&tr.gamma, &s2()).unwrap();
        }
    }
}
