//! Exact integer matrices, real p-tuples, norms and basis completion.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Fixed, Precision, Real, Symbolic};

/// Square integer matrix, row-major, exact entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimensions("matrix size must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows must have length n".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.n + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[i64] {
        &self.entries[r * self.n..(r + 1) * self.n]
    }

    /// Largest absolute entry.
    pub fn sup_norm(&self) -> i64 {
        self.entries.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    /// Exact determinant by fraction-free elimination; overflow is an error.
    pub fn det(&self) -> Result<i128> {
        let (det, _) = bareiss(self.n, self.entries.iter().map(|&v| v as i128).collect())?;
        Ok(det)
    }

    pub fn rank(&self) -> Result<usize> {
        let (_, rank) = bareiss(self.n, self.entries.iter().map(|&v| v as i128).collect())?;
        Ok(rank)
    }

    /// Membership in the semigroup of positive-determinant matrices.
    pub fn in_gamma(&self) -> Result<bool> {
        Ok(self.det()? > 0)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for k in 0..n {
                    s += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                out[i * n + j] = i64::try_from(s).map_err(|_| Error::Overflow("matrix product"))?;
            }
        }
        Ok(IntMatrix { n, entries: out })
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl std::fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Fraction-free Gaussian elimination on a square matrix.
/// Returns (determinant, rank).
fn bareiss(n: usize, mut a: Vec<i128>) -> Result<(i128, usize)> {
    let ovf = || Error::Overflow("determinant");
    let mut sign: i128 = 1;
    let mut prev: i128 = 1;
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..n {
        if row == n {
            break;
        }
        let Some(piv) = (row..n).find(|&r| a[r * n + col] != 0) else {
            continue;
        };
        if piv != row {
            for c in 0..n {
                a.swap(piv * n + c, row * n + c);
            }
            sign = -sign;
        }
        let p = a[row * n + col];
        for r in row + 1..n {
            for c in col + 1..n {
                let lhs = a[r * n + c].checked_mul(p).ok_or_else(ovf)?;
                let rhs = a[r * n + col].checked_mul(a[row * n + c]).ok_or_else(ovf)?;
                a[r * n + c] = lhs.checked_sub(rhs).ok_or_else(ovf)? / prev;
            }
            a[r * n + col] = 0;
        }
        prev = p;
        row += 1;
        rank += 1;
    }
    let det = if rank == n {
        sign.checked_mul(a[(n - 1) * n + (n - 1)]).ok_or_else(ovf)?
    } else {
        0
    };
    Ok((det, rank))
}

/// Largest absolute entry of a real matrix.
pub fn sup_norm_real(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Numerical rank by Gaussian elimination with complete pivoting.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = sup_norm_real(&a).max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0f64);
        for r in step..rows {
            for c in step..cols {
                let v = a[(r, c)].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        a.swap_rows(step, best.0);
        a.swap_columns(step, best.1);
        let p = a[(step, step)];
        for r in step + 1..rows {
            let f = a[(r, step)] / p;
            if f != 0.0 {
                for c in step..cols {
                    let v = a[(step, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

const RANK_TOL: f64 = 1e-12;

/// A p-tuple of real n-vectors stored column-major as an n×p matrix.
///
/// Entries are kept at the working scalar type `T` together with a binary64
/// mirror used for bounding-box computations and reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTuple<T: Real = f64> {
    n: usize,
    p: usize,
    entries: Vec<T>,
    approx: Vec<f64>,
    independent: bool,
}

impl<T: Real> RealTuple<T> {
    /// Builds a tuple from column-major entries at any precision.
    pub fn from_entries(n: usize, p: usize, entries: Vec<T>) -> Result<Self> {
        Self::build(n, p, entries)
    }

    fn build(n: usize, p: usize, entries: Vec<T>) -> Result<Self> {
        if n < 2 || p < 1 || p >= n {
            return Err(Error::InvalidDimensions(format!(
                "need 1 <= p <= n-1, got n={n}, p={p}"
            )));
        }
        if entries.len() != n * p {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for an {n}x{p} tuple",
                entries.len()
            )));
        }
        let approx: Vec<f64> = entries.iter().map(|v| v.to_f64()).collect();
        if approx.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("tuple entries must be finite".into()));
        }
        let independent =
            numerical_rank(&DMatrix::from_column_slice(n, p, &approx), RANK_TOL) == p;
        Ok(RealTuple {
            n,
            p,
            entries,
            approx,
            independent,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn independent(&self) -> bool {
        self.independent
    }

    /// Column j at working precision.
    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.entries[j * self.n..(j + 1) * self.n]
    }

    /// Column j as binary64.
    #[inline]
    pub fn col_f64(&self, j: usize) -> &[f64] {
        &self.approx[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.approx[j * self.n + i]
    }

    pub fn get_exact(&self, i: usize, j: usize) -> &T {
        &self.entries[j * self.n + i]
    }

    pub fn entries_f64(&self) -> &[f64] {
        &self.approx
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.p, &self.approx)
    }

    /// Binary64 copy of this tuple.
    pub fn to_f64_tuple(&self) -> RealTuple<f64> {
        RealTuple {
            n: self.n,
            p: self.p,
            entries: self.approx.clone(),
            approx: self.approx.clone(),
            independent: self.independent,
        }
    }

    /// `a · x_j` at working precision for an integer row vector `a`.
    #[inline]
    pub fn row_dot(&self, a: &[i64], j: usize) -> T {
        T::dot_int(a, self.col(j))
    }
}

impl RealTuple<f64> {
    /// Builds a tuple from column-major binary64 entries.
    pub fn new(n: usize, p: usize, entries: Vec<f64>) -> Result<Self> {
        Self::build(n, p, entries)
    }

    /// Builds a tuple from a list of columns.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let p = cols.len();
        let n = cols.first().map(|c| c.len()).unwrap_or(0);
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("columns differ in length".into()));
        }
        Self::build(n, p, cols.concat())
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::build(m.nrows(), m.ncols(), m.as_slice().to_vec())
    }

    pub fn from_symbolic(n: usize, p: usize, syms: &[Symbolic]) -> Result<Self> {
        Self::build(n, p, syms.iter().map(|s| s.eval_f64()).collect())
    }
}

impl RealTuple<Fixed> {
    pub fn from_symbolic(n: usize, p: usize, syms: &[Symbolic], bits: u32) -> Result<Self> {
        Self::build(n, p, syms.iter().map(|s| s.eval_fixed(bits)).collect())
    }
}

/// A tuple evaluated at whichever precision was configured.
#[derive(Debug, Clone)]
pub enum AnyTuple {
    Binary64(RealTuple<f64>),
    Extended(RealTuple<Fixed>),
}

impl AnyTuple {
    pub fn from_symbolic(n: usize, p: usize, syms: &[Symbolic], precision: Precision) -> Result<Self> {
        Ok(match precision {
            Precision::Binary64 => AnyTuple::Binary64(RealTuple::<f64>::from_symbolic(n, p, syms)?),
            Precision::Extended { bits } => {
                AnyTuple::Extended(RealTuple::<Fixed>::from_symbolic(n, p, syms, bits)?)
            }
        })
    }

    pub fn to_f64_tuple(&self) -> RealTuple<f64> {
        match self {
            AnyTuple::Binary64(x) => x.clone(),
            AnyTuple::Extended(x) => x.to_f64_tuple(),
        }
    }
}

/// Largest absolute entry of the tuple.
pub fn tuple_norm<T: Real>(x: &RealTuple<T>) -> f64 {
    x.approx.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// The tuple `(g x_1, ..., g x_p)`.
pub fn apply<T: Real>(g: &IntMatrix, x: &RealTuple<T>) -> Result<RealTuple<T>> {
    if g.n() != x.n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {0}x{0} but tuple vectors have length {1}",
            g.n(),
            x.n
        )));
    }
    let n = x.n;
    let mut out = Vec::with_capacity(n * x.p);
    for j in 0..x.p {
        for i in 0..n {
            out.push(x.row_dot(g.row(i), j));
        }
    }
    RealTuple::build(n, x.p, out)
}

/// `||g x - y||`, computed in the same order as [`apply`].
pub fn approximation_error(g: &IntMatrix, x: &RealTuple<f64>, y: &RealTuple<f64>) -> Result<f64> {
    if x.n != y.n || x.p != y.p || g.n() != x.n {
        return Err(Error::DimensionMismatch("g, x and y must agree".into()));
    }
    let mut e: f64 = 0.0;
    for i in 0..x.n {
        for j in 0..x.p {
            e = e.max((x.row_dot(g.row(i), j) - y.get(i, j)).abs());
        }
    }
    Ok(e)
}

/// Real matrix acting on a tuple, `ξ x`.
pub fn apply_real(xi: &DMatrix<f64>, x: &RealTuple<f64>) -> Result<DMatrix<f64>> {
    if xi.ncols() != x.n {
        return Err(Error::DimensionMismatch("matrix columns must equal n".into()));
    }
    Ok(xi * x.to_dmatrix())
}

/// `x_1, ..., x_p` completed to a basis of R^n with standard basis vectors.
#[derive(Debug, Clone)]
pub struct CompletedBasis {
    pub base: RealTuple<f64>,
    /// Indices i of the standard vectors e_i appended as x_{p+1}, ..., x_n.
    pub extension_indices: Vec<usize>,
    /// n×(n−p) block of appended columns.
    pub extension: DMatrix<f64>,
    /// X = [x | extension].
    pub change_of_basis: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Norm-equivalence constant between ||·|| and ||·||_V.
    pub c_equiv: f64,
}

/// Max column absolute sum: the operator norm of `v ↦ v M` on row vectors
/// with the max norm.
pub fn row_action_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Appends standard basis vectors chosen by partial pivoting on the rows of x.
pub fn complete_basis(x: &RealTuple<f64>) -> Result<CompletedBasis> {
    if !x.independent() {
        return Err(Error::DependentColumns);
    }
    let (n, p) = (x.n(), x.p());
    let mut a = x.to_dmatrix();
    let mut used = vec![false; n];
    for j in 0..p {
        let (piv, val) = (0..n)
            .filter(|&r| !used[r])
            .map(|r| (r, a[(r, j)].abs()))
            .fold((usize::MAX, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if piv == usize::MAX || val <= 0.0 {
            return Err(Error::DependentColumns);
        }
        used[piv] = true;
        let pv = a[(piv, j)];
        for c in j + 1..p {
            let f = a[(piv, c)] / pv;
            for r in 0..n {
                let v = a[(r, j)];
                a[(r, c)] -= f * v;
            }
        }
    }
    let extension_indices: Vec<usize> = (0..n).filter(|&r| !used[r]).collect();
    let mut extension = DMatrix::zeros(n, n - p);
    for (k, &i) in extension_indices.iter().enumerate() {
        extension[(i, k)] = 1.0;
    }
    let mut big = DMatrix::zeros(n, n);
    big.view_mut((0, 0), (n, p)).copy_from(&x.to_dmatrix());
    big.view_mut((0, p), (n, n - p)).copy_from(&extension);
    let inverse = big.clone().try_inverse().ok_or(Error::DependentColumns)?;
    let c_equiv = row_action_norm(&big).max(row_action_norm(&inverse)).max(1.0);
    Ok(CompletedBasis {
        base: x.clone(),
        extension_indices,
        extension,
        change_of_basis: big,
        inverse,
        c_equiv,
    })
}

impl CompletedBasis {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn p(&self) -> usize {
        self.base.p()
    }

    /// Split coordinates of ξ: the matrix ξX.
    pub fn coordinates(&self, xi: &DMatrix<f64>) -> DMatrix<f64> {
        xi * &self.change_of_basis
    }

    /// ξ recovered from its split coordinates.
    pub fn from_coordinates(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        c * &self.inverse
    }

    /// ||ξ||_V = max(||v1||_V, ||v2||_V), the max norm of the split coordinates.
    pub fn split_norm(&self, xi: &DMatrix<f64>) -> f64 {
        sup_norm_real(&self.coordinates(xi))
    }

    /// (||v1||_V, ||v2||_V) for ξ = v1 + v2.
    pub fn split_norms(&self, xi: &DMatrix<f64>) -> (f64, f64) {
        let c = self.coordinates(xi);
        let p = self.p();
        let n1 = sup_norm_real(&c.columns(0, p).into_owned());
        let n2 = sup_norm_real(&c.columns(p, self.n() - p).into_owned());
        (n1, n2)
    }
}

/// Row-major nested vectors, for serialization.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(m(&[&[1, -3], &[2, 0]]).sup_norm(), 3);
        assert_eq!(IntMatrix::identity(4).sup_norm(), 1);
        assert_eq!(IntMatrix::zeros(2).sup_norm(), 0);
    }

    #[test]
    fn det_examples() {
        assert_eq!(IntMatrix::identity(3).det().unwrap(), 1);
        assert_eq!(m(&[&[2, 1], &[1, 1]]).det().unwrap(), 1);
        assert_eq!(m(&[&[1, 2], &[2, 4]]).det().unwrap(), 0);
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det().unwrap(), -1);
        assert_eq!(m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]).det().unwrap(), 6);
        assert_eq!(m(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]).rank().unwrap(), 3);
        assert_eq!(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]).rank().unwrap(), 2);
    }

    #[test]
    fn det_overflow_is_reported() {
        let big = i64::MAX;
        let g = m(&[&[big, big, 1], &[big, -big, big], &[1, big, big]]);
        assert_eq!(g.det(), Err(Error::Overflow("determinant")));
        assert!(m(&[&[big, 0], &[0, big]]).mul(&m(&[&[2, 0], &[0, 1]])).is_err());
    }

    #[test]
    fn apply_examples() {
        let s2 = 2f64.sqrt();
        let x = RealTuple::new(2, 1, vec![s2, 1.0]).unwrap();
        assert!((tuple_norm(&x) - s2).abs() < 1e-15);
        let y = apply(&m(&[&[2, 1], &[1, 1]]), &x).unwrap();
        assert!((y.get(0, 0) - (2.0 * s2 + 1.0)).abs() < 1e-12);
        assert!((y.get(1, 0) - (s2 + 1.0)).abs() < 1e-12);
        assert_eq!(apply(&IntMatrix::identity(2), &x).unwrap(), x);
        assert_eq!(tuple_norm(&apply(&IntMatrix::zeros(2), &x).unwrap()), 0.0);
        assert!(apply(&IntMatrix::identity(3), &x).is_err());
    }

    #[test]
    fn independence_flag() {
        assert!(RealTuple::new(3, 2, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap().independent() == false);
        assert!(RealTuple::new(3, 2, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap().independent());
        assert!(RealTuple::new(2, 2, vec![1.0; 4]).is_err());
    }

    #[test]
    fn complete_basis_examples() {
        let x = RealTuple::new(2, 1, vec![2f64.sqrt(), 1.0]).unwrap();
        let cb = complete_basis(&x).unwrap();
        assert_eq!(cb.extension_indices, vec![1]);
        assert!(cb.change_of_basis.determinant().abs() > 0.5);
        let e1 = RealTuple::new(2, 1, vec![1.0, 0.0]).unwrap();
        assert_eq!(complete_basis(&e1).unwrap().extension_indices, vec![1]);
        let dep = RealTuple::new(3, 2, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(complete_basis(&dep).unwrap_err(), Error::DependentColumns);
    }
}
