//! Dense linear algebra over the rationals.
//!
//! All other modules reduce their questions (ranks, kernels, meets and sums
//! of subspaces, graded dimensions) to row reduction of `RationalMatrix`.
//! Pivoting is deterministic (first nonzero entry in column order) so that
//! repeated runs produce bit-identical output.

use num::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Arbitrary-precision rational scalar. Always stored in lowest terms with a
/// positive denominator (the `num` library maintains both invariants).
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Rational from a numerator/denominator pair.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.entries[r * self.cols + c]
    }
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut m = Self::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build from integer entries, row major.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| rat(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(r, c)] += p;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] + &other[(r, c)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] - &other[(r, c)])
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] * s)
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| -self[(r, c)].clone())
    }

    /// Matrix power (square matrices only).
    pub fn pow(&self, e: usize) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn col(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_cols(rows: usize, cols: &[Vec<Rational>]) -> Self {
        let mut m = Self::zero(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols { self[(r, c)].clone() } else { other[(r, c - self.cols)].clone() }
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows { self[(r, c)].clone() } else { other[(r - self.rows, c)].clone() }
        })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])].clone())
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = Rational::zero();
                for c in 0..self.cols {
                    if !self[(r, c)].is_zero() && !v[c].is_zero() {
                        acc += &self[(r, c)] * &v[c];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Result of row reduction: the reduced matrix, its pivot columns, and rank.
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Reduced row echelon form via Gauss-Jordan elimination. The pivot in each
/// column is the first nonzero entry at or below the current row, which keeps
/// the output reproducible.
pub fn rref(m: &RationalMatrix) -> Rref {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !a[(r, col)].is_zero()) else { continue };
        if p != row {
            for c in 0..cols {
                let tmp = a[(p, c)].clone();
                a[(p, c)] = a[(row, c)].clone();
                a[(row, c)] = tmp;
            }
        }
        let inv = a[(row, col)].recip();
        for c in col..cols {
            let v = &a[(row, c)] * &inv;
            a[(row, c)] = v;
        }
        for r in 0..rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for c in col..cols {
                let v = &a[(r, c)] - &(&factor * &a[(row, c)]);
                a[(r, c)] = v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    Rref { matrix: a, pivots }
}

pub fn rank(m: &RationalMatrix) -> usize {
    rref(m).rank()
}

/// Basis of the null space, returned as the columns of a matrix. Count is
/// always `cols - rank`.
pub fn kernel_basis(m: &RationalMatrix) -> RationalMatrix {
    let red = rref(m);
    let cols = m.cols();
    let pivots = &red.pivots;
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = RationalMatrix::zero(cols, free.len());
    for (j, &fc) in free.iter().enumerate() {
        basis[(fc, j)] = Rational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            basis[(pc, j)] = -red.matrix[(i, fc)].clone();
        }
    }
    basis
}

/// Column space basis, in reduced form (unique for a given span).
pub fn column_space_basis(m: &RationalMatrix) -> RationalMatrix {
    // Row-reduce the transpose; the nonzero rows are a canonical basis.
    let red = rref(&m.transpose());
    let r = red.rank();
    let mut out = RationalMatrix::zero(m.rows(), r);
    for i in 0..r {
        for j in 0..m.rows() {
            out[(j, i)] = red.matrix[(i, j)].clone();
        }
    }
    out
}

/// Do the columns of `sub` span a subspace of the column span of `sup`?
pub fn is_subspace(sub: &RationalMatrix, sup: &RationalMatrix) -> bool {
    if sub.rows() != sup.rows() {
        return false;
    }
    if sub.cols() == 0 {
        return true;
    }
    rank(&sup.hstack(sub)) == rank(sup)
}

pub fn same_span(a: &RationalMatrix, b: &RationalMatrix) -> bool {
    is_subspace(a, b) && is_subspace(b, a)
}

/// Basis of the intersection of two column spans in the same ambient space.
pub fn subspace_meet(
    a: &RationalMatrix,
    b: &RationalMatrix,
) -> Result<RationalMatrix, LinalgError> {
    if a.rows() != b.rows() {
        return Err(LinalgError::AmbientMismatch(a.rows(), b.rows()));
    }
    if a.cols() == 0 || b.cols() == 0 {
        return Ok(RationalMatrix::zero(a.rows(), 0));
    }
    // Kernel of [a | -b]: a*x = b*y gives the meet as a*x.
    let stacked = a.hstack(&b.neg());
    let ker = kernel_basis(&stacked);
    let mut cols = Vec::new();
    for j in 0..ker.cols() {
        let x: Vec<Rational> = (0..a.cols()).map(|i| ker[(i, j)].clone()).collect();
        cols.push(a.apply_cols(&x));
    }
    Ok(column_space_basis(&RationalMatrix::from_cols(a.rows(), &cols)))
}

/// Basis of the sum of two column spans.
pub fn subspace_sum(
    a: &RationalMatrix,
    b: &RationalMatrix,
) -> Result<RationalMatrix, LinalgError> {
    if a.rows() != b.rows() {
        return Err(LinalgError::AmbientMismatch(a.rows(), b.rows()));
    }
    Ok(column_space_basis(&a.hstack(b)))
}

impl RationalMatrix {
    /// Linear combination of columns with the given coefficients.
    pub fn apply_cols(&self, coeffs: &[Rational]) -> Vec<Rational> {
        assert_eq!(coeffs.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..self.rows {
                if !self[(i, j)].is_zero() {
                    out[i] += &self[(i, j)] * c;
                }
            }
        }
        out
    }
}

/// Surjection from the ambient space onto a quotient by the span of `sub`,
/// expressed in a chosen complement basis. The kernel of the returned map is
/// exactly the span of `sub`.
pub fn quotient_matrix(ambient_dim: usize, sub: &RationalMatrix) -> Result<RationalMatrix, LinalgError> {
    if sub.rows() != ambient_dim {
        return Err(LinalgError::AmbientMismatch(sub.rows(), ambient_dim));
    }
    let red = rref(&sub.transpose());
    let pivots = red.pivots.clone();
    let free: Vec<usize> = (0..ambient_dim).filter(|c| !pivots.contains(c)).collect();
    // Coordinates along the free positions after reducing modulo `sub`:
    // e_f maps to itself; pivot directions map to minus the reduced row tail.
    let mut q = RationalMatrix::zero(free.len(), ambient_dim);
    for (i, &f) in free.iter().enumerate() {
        q[(i, f)] = Rational::one();
        for (row, &p) in pivots.iter().enumerate() {
            q[(i, p)] = -red.matrix[(row, f)].clone();
        }
    }
    Ok(q)
}

/// Exact check that a symmetric matrix is positive definite, via recursive
/// pivoting (Schur complements stay rational).
pub fn is_positive_definite(m: &RationalMatrix) -> bool {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    if n == 0 {
        return true;
    }
    let mut a = m.clone();
    for k in 0..n {
        let d = a[(k, k)].clone();
        if !d.is_positive() {
            return false;
        }
        for i in (k + 1)..n {
            let f = &a[(i, k)] / &d;
            for j in k..n {
                let v = &a[(i, j)] - &(&f * &a[(k, j)]);
                a[(i, j)] = v;
            }
        }
    }
    true
}

/// Determinant by fraction-free-ish Gaussian elimination (exact).
pub fn determinant(m: &RationalMatrix) -> Rational {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    let mut a = m.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            for c in 0..n {
                let tmp = a[(p, c)].clone();
                a[(p, c)] = a[(col, c)].clone();
                a[(col, c)] = tmp;
            }
            det = -det;
        }
        det *= a[(col, col)].clone();
        let inv = a[(col, col)].recip();
        for r in (col + 1)..n {
            let f = &a[(r, col)] * &inv;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let v = &a[(r, c)] - &(&f * &a[(col, c)]);
                a[(r, c)] = v;
            }
        }
    }
    det
}

/// Solve `m x = v` exactly; `None` when inconsistent. When the system is
/// underdetermined an arbitrary (deterministic) solution is returned.
pub fn solve(m: &RationalMatrix, v: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(m.rows(), v.len());
    let rhs = RationalMatrix::from_cols(v.len(), &[v.to_vec()]);
    let aug = m.hstack(&rhs);
    let red = rref(&aug);
    if red.pivots.contains(&m.cols()) {
        return None;
    }
    let mut x = vec![Rational::zero(); m.cols()];
    for (row, &p) in red.pivots.iter().enumerate() {
        x[p] = red.matrix[(row, m.cols())].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent rank oracle: the rank is the size of the largest square
    /// submatrix with nonzero determinant, where determinants are computed by
    /// Laplace expansion. Exponential, so only used on small matrices.
    fn laplace_det(m: &RationalMatrix) -> Rational {
        let n = m.rows();
        assert_eq!(n, m.cols());
        if n == 0 {
            return Rational::one();
        }
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = Rational::zero();
        for c in 0..n {
            if m[(0, c)].is_zero() {
                continue;
            }
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&x| x != c).collect();
            let minor = laplace_det(&m.submatrix(&rows, &cols));
            let term = &m[(0, c)] * &minor;
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn rank_oracle(m: &RationalMatrix) -> usize {
        let max = m.rows().min(m.cols());
        for size in (1..=max).rev() {
            let row_sets = combinations(m.rows(), size);
            let col_sets = combinations(m.cols(), size);
            for rs in &row_sets {
                for cs in &col_sets {
                    if !laplace_det(&m.submatrix(rs, cs)).is_zero() {
                        return size;
                    }
                }
            }
        }
        0
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        go(0, n, k, &mut cur, &mut out);
        out
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RationalMatrix {
        RationalMatrix::from_fn(rows, cols, |_, _| rat(rng.gen_range(-4..=4)))
    }

    #[test]
    fn rref_identity() {
        let id = RationalMatrix::identity(2);
        let red = rref(&id);
        assert_eq!(red.matrix, id);
        assert_eq!(red.pivots, vec![0, 1]);
        assert_eq!(red.rank(), 2);
    }

    #[test]
    fn rref_proportional_rows() {
        let m = RationalMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        let red = rref(&m);
        assert_eq!(red.matrix, RationalMatrix::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(red.pivots, vec![0]);
    }

    #[test]
    fn rref_rank_matches_minor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..12 {
            let m = random_matrix(&mut rng, 5, 7);
            assert_eq!(rank(&m), rank_oracle(&m));
        }
    }

    #[test]
    fn rref_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 6);
            let r1 = rref(&m).matrix;
            let r2 = rref(&r1).matrix;
            assert_eq!(r1, r2);
        }
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert_eq!(kernel_basis(&RationalMatrix::identity(3)).cols(), 0);
    }

    #[test]
    fn kernel_of_zero_is_full() {
        let k = kernel_basis(&RationalMatrix::zero(3, 3));
        assert_eq!(k.cols(), 3);
        assert_eq!(rank(&k), 3);
    }

    #[test]
    fn kernel_of_nilpotent_jordan_block() {
        // J3 maps e2 -> e1, e3 -> e2, e1 -> 0; kernel is the first axis.
        let j3 = RationalMatrix::from_i64(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let k = kernel_basis(&j3);
        assert_eq!(k.cols(), 1);
        let expected = RationalMatrix::from_i64(&[&[1], &[0], &[0]]);
        assert!(same_span(&k, &expected));
    }

    #[test]
    fn rank_nullity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 5, 8);
            assert_eq!(rank(&m) + kernel_basis(&m).cols(), m.cols());
            assert!(m.mul(&kernel_basis(&m)).is_zero());
        }
    }

    #[test]
    fn meet_of_equal_spaces() {
        let a = RationalMatrix::from_i64(&[&[1, 0], &[1, 1], &[0, 2]]);
        let m = subspace_meet(&a, &a).unwrap();
        assert!(same_span(&m, &a));
    }

    #[test]
    fn meet_of_complementary_planes_is_zero() {
        let a = RationalMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 0], &[0, 0]]);
        let b = RationalMatrix::from_i64(&[&[0, 0], &[0, 0], &[1, 0], &[0, 1]]);
        assert_eq!(subspace_meet(&a, &b).unwrap().cols(), 0);
    }

    #[test]
    fn meet_concrete_line() {
        let a = RationalMatrix::from_i64(&[&[1, 0], &[1, 0], &[0, 1]]);
        let b = RationalMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 0]]);
        let m = subspace_meet(&a, &b).unwrap();
        let expected = RationalMatrix::from_i64(&[&[1], &[1], &[0]]);
        assert!(same_span(&m, &expected));
    }

    #[test]
    fn meet_ambient_mismatch() {
        let a = RationalMatrix::identity(3);
        let b = RationalMatrix::identity(4);
        assert!(matches!(subspace_meet(&a, &b), Err(LinalgError::AmbientMismatch(3, 4))));
    }

    #[test]
    fn sum_self_and_complementary_lines() {
        let a = RationalMatrix::from_i64(&[&[1], &[0]]);
        let b = RationalMatrix::from_i64(&[&[1], &[1]]);
        assert!(same_span(&subspace_sum(&a, &a).unwrap(), &a));
        let s = subspace_sum(&a, &b).unwrap();
        assert_eq!(rank(&s), 2);
    }

    #[test]
    fn quotient_by_diagonal_line() {
        let sub = RationalMatrix::from_i64(&[&[1], &[1], &[1]]);
        let q = quotient_matrix(3, &sub).unwrap();
        assert_eq!(q.rows(), 2);
        // Kernel of the quotient map is exactly the line.
        let ker = kernel_basis(&q);
        assert!(same_span(&ker, &sub));
    }

    #[test]
    fn modularity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..15 {
            let ca = rng.gen_range(1..4);
            let cb = rng.gen_range(1..4);
            let a = random_matrix(&mut rng, 5, ca);
            let b = random_matrix(&mut rng, 5, cb);
            let sum = subspace_sum(&a, &b).unwrap();
            let meet = subspace_meet(&a, &b).unwrap();
            assert_eq!(rank(&sum) + rank(&meet), rank(&a) + rank(&b));
        }
    }

    #[test]
    fn determinant_and_solve() {
        let m = RationalMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(determinant(&m), rat(1));
        let x = solve(&m, &[rat(3), rat(2)]).unwrap();
        assert_eq!(m.apply(&x), vec![rat(3), rat(2)]);
        // Inconsistent system.
        let s = RationalMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert!(solve(&s, &[rat(0), rat(1)]).is_none());
    }

    #[test]
    fn positive_definite_check() {
        let good = RationalMatrix::from_i64(&[&[2, 1], &[1, 2]]);
        assert!(is_positive_definite(&good));
        let bad = RationalMatrix::from_i64(&[&[1, 2], &[2, 1]]);
        assert!(!is_positive_definite(&bad));
    }
}
