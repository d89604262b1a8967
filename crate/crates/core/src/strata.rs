//! Cohomology data of the closed strata of a simple normal crossing
//! divisor inside a smooth projective variety, with the maps the weight
//! spectral sequence engine consumes.
//!
//! Level `m` is the disjoint union of the `m`-fold intersections of the
//! divisor components; level `0` is the ambient variety itself. Every
//! graded piece is assumed to be a sum of Tate classes, so only even
//! cohomological degrees carry dimensions. The assembled maps already
//! include their alternating signs: inserting or removing an index at
//! position `a` of an ordered index set contributes `(-1)^(a-1)`.

use crate::linalg::{is_positive_definite, kernel_basis, rank, rat, RationalMatrix};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrataError {
    #[error("stratum level {0} degree {1}: map has shape {2}x{3}, expected {4}x{5}")]
    Shape(usize, usize, usize, usize, usize, usize),
    #[error("stratum level {0} carries odd-degree cohomology in degree {1}")]
    NonTate(usize, usize),
    #[error("gysin composed with gysin is nonzero out of level {0} degree {1}")]
    GysinSquare(usize, usize),
    #[error("restriction composed with restriction is nonzero out of level {0} degree {1}")]
    RestrictionSquare(usize, usize),
    #[error("gysin and restriction fail to anticommute out of level {0} degree {1}")]
    MixedSquare(usize, usize),
    #[error("intersection pairing on level {0} degree {1} is degenerate")]
    DegeneratePairing(usize, usize),
    #[error("hard Lefschetz fails on level {0} from degree {1}")]
    HardLefschetz(usize, usize),
    #[error("Lefschetz operator is not self-adjoint on level {0} degree {1}")]
    LefschetzNotSelfAdjoint(usize, usize),
}

/// Strata cohomology with Gysin, restriction, Lefschetz, and intersection
/// pairing data. Plain data; `validate` checks the structural identities.
#[derive(Debug, Clone)]
pub struct StrataComplex {
    /// Complex dimension of the ambient variety.
    pub ambient_dim: usize,
    /// `cohomology[m][s]` is `dim H^s` of the level-`m` stratum.
    pub cohomology: Vec<BTreeMap<usize, usize>>,
    /// `gysin[m][s]`: `H^s(level m) -> H^(s+2)(level m-1)`, for `m >= 1`.
    pub gysin: Vec<BTreeMap<usize, RationalMatrix>>,
    /// `restriction[m][s]`: `H^s(level m) -> H^s(level m+1)`.
    pub restriction: Vec<BTreeMap<usize, RationalMatrix>>,
    /// `lefschetz[m][s]`: cup with the Kaehler class, `H^s -> H^(s+2)`.
    pub lefschetz: Vec<BTreeMap<usize, RationalMatrix>>,
    /// `pairing[m][s]`: matrix of the intersection form
    /// `H^s x H^(2(n-m)-s) -> Q`, rows indexing `H^s`.
    pub pairing: Vec<BTreeMap<usize, RationalMatrix>>,
    pub label: String,
}

impl StrataComplex {
    pub fn empty(ambient_dim: usize, label: &str) -> Self {
        let levels = ambient_dim + 1;
        StrataComplex {
            ambient_dim,
            cohomology: vec![BTreeMap::new(); levels],
            gysin: vec![BTreeMap::new(); levels],
            restriction: vec![BTreeMap::new(); levels],
            lefschetz: vec![BTreeMap::new(); levels],
            pairing: vec![BTreeMap::new(); levels],
            label: label.to_string(),
        }
    }

    pub fn levels(&self) -> usize {
        self.cohomology.len()
    }

    pub fn dim(&self, m: usize, s: i64) -> usize {
        if s < 0 || m >= self.levels() {
            return 0;
        }
        self.cohomology[m].get(&(s as usize)).copied().unwrap_or(0)
    }

    /// Complex dimension of the level-`m` stratum.
    pub fn stratum_dim(&self, m: usize) -> usize {
        self.ambient_dim - m
    }

    pub fn gysin_map(&self, m: usize, s: i64) -> RationalMatrix {
        let target = if m >= 1 { self.dim(m - 1, s + 2) } else { 0 };
        if s < 0 || m == 0 || m >= self.levels() {
            return RationalMatrix::zero(target, self.dim(m, s));
        }
        self.gysin[m]
            .get(&(s as usize))
            .cloned()
            .unwrap_or_else(|| RationalMatrix::zero(target, self.dim(m, s)))
    }

    pub fn restriction_map(&self, m: usize, s: i64) -> RationalMatrix {
        let target = if m + 1 < self.levels() { self.dim(m + 1, s) } else { 0 };
        if s < 0 || m >= self.levels() {
            return RationalMatrix::zero(target, self.dim(m, s));
        }
        self.restriction[m]
            .get(&(s as usize))
            .cloned()
            .unwrap_or_else(|| RationalMatrix::zero(target, self.dim(m, s)))
    }

    pub fn lefschetz_map(&self, m: usize, s: i64) -> RationalMatrix {
        if s < 0 || m >= self.levels() {
            return RationalMatrix::zero(0, 0);
        }
        self.lefschetz[m]
            .get(&(s as usize))
            .cloned()
            .unwrap_or_else(|| RationalMatrix::zero(self.dim(m, s + 2), self.dim(m, s)))
    }

    pub fn pairing_matrix(&self, m: usize, s: i64) -> RationalMatrix {
        if s < 0 || m >= self.levels() {
            return RationalMatrix::zero(0, 0);
        }
        let dual = 2 * self.stratum_dim(m) as i64 - s;
        self.pairing[m]
            .get(&(s as usize))
            .cloned()
            .unwrap_or_else(|| RationalMatrix::zero(self.dim(m, s), self.dim(m, dual)))
    }

    /// Euler characteristic of one stratum level.
    pub fn level_euler(&self, m: usize) -> i64 {
        self.cohomology[m]
            .iter()
            .map(|(&s, &d)| if s % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Total dimension of `H^s` of the union of the depth-one pieces is not
    /// recorded here; this is the per-degree dimension at one level.
    pub fn degree_dims(&self, m: usize) -> &BTreeMap<usize, usize> {
        &self.cohomology[m]
    }

    /// Structural identities: Tate-only degrees, shapes, the three square
    /// identities of the double differential, nondegenerate pairings,
    /// self-adjoint Lefschetz operators, and hard Lefschetz per stratum.
    pub fn validate(&self) -> Result<(), StrataError> {
        let n = self.ambient_dim;
        for m in 0..self.levels() {
            for (&s, _) in &self.cohomology[m] {
                if s % 2 != 0 {
                    return Err(StrataError::NonTate(m, s));
                }
            }
            let top = 2 * self.stratum_dim(m) as i64;
            for s in (0..=top).step_by(2) {
                let d = self.dim(m, s);
                let g = self.gysin_map(m, s);
                if m >= 1 && (g.cols() != d || g.rows() != self.dim(m - 1, s + 2)) {
                    return Err(StrataError::Shape(
                        m,
                        s as usize,
                        g.rows(),
                        g.cols(),
                        self.dim(m - 1, s + 2),
                        d,
                    ));
                }
                let r = self.restriction_map(m, s);
                let rtarget = if m + 1 < self.levels() { self.dim(m + 1, s) } else { 0 };
                if r.cols() != d || r.rows() != rtarget {
                    return Err(StrataError::Shape(m, s as usize, r.rows(), r.cols(), rtarget, d));
                }
                // Differential identities.
                if m >= 2 && !self.gysin_map(m - 1, s + 2).mul(&g).is_zero() {
                    return Err(StrataError::GysinSquare(m, s as usize));
                }
                if !self.restriction_map(m + 1, s).mul(&r).is_zero() {
                    return Err(StrataError::RestrictionSquare(m, s as usize));
                }
                if m >= 1 {
                    let via_restr = self.gysin_map(m + 1, s).mul(&r);
                    let via_gysin = self.restriction_map(m - 1, s + 2).mul(&g);
                    if !via_restr.add(&via_gysin).is_zero() {
                        return Err(StrataError::MixedSquare(m, s as usize));
                    }
                }
                // Pairing nondegenerate (square of full rank).
                if d > 0 {
                    let p = self.pairing_matrix(m, s);
                    let dual = self.dim(m, top - s);
                    if p.rows() != d || p.cols() != dual || d != dual || rank(&p) != d {
                        return Err(StrataError::DegeneratePairing(m, s as usize));
                    }
                }
                // Lefschetz self-adjointness: <Lx, y> = <x, Ly>.
                if d > 0 && s + 2 <= top {
                    let l = self.lefschetz_map(m, s);
                    let dual_deg = top - s - 2;
                    let l_dual = self.lefschetz_map(m, dual_deg);
                    let p_up = self.pairing_matrix(m, s + 2);
                    let p_dn = self.pairing_matrix(m, s);
                    // (Lx)^T P_up y  vs  x^T P_dn (L y) with y in H^(dual-2).
                    let lhs = l.transpose().mul(&p_up);
                    let rhs = p_dn.mul(&l_dual);
                    if lhs != rhs {
                        return Err(StrataError::LefschetzNotSelfAdjoint(m, s as usize));
                    }
                }
            }
            // Hard Lefschetz: L^j : H^(mid-j) ~ H^(mid+j).
            let mid = self.stratum_dim(m) as i64;
            for s in 0..=mid {
                let d = self.dim(m, s);
                if d == 0 {
                    continue;
                }
                if self.dim(m, 2 * mid - s) != d {
                    return Err(StrataError::HardLefschetz(m, s as usize));
                }
                let mut power = RationalMatrix::identity(d);
                let mut deg = s;
                while deg < 2 * mid - s {
                    power = self.lefschetz_map(m, deg).mul(&power);
                    deg += 2;
                }
                if rank(&power) != d {
                    return Err(StrataError::HardLefschetz(m, s as usize));
                }
            }
        }
        Ok(())
    }

    /// Primitive positivity on one stratum: the form
    /// `sign * <x, L^j y>` on `ker(L^(j+1)) inside H^(mid-j)` must be
    /// positive definite, where `sign` alternates with the codegree. Returns
    /// the offending `(m, j)` on failure.
    pub fn primitive_positivity(&self) -> Result<(), (usize, i64)> {
        for m in 0..self.levels() {
            let mid = self.stratum_dim(m) as i64;
            for j in 0..=mid {
                let s = mid - j;
                if s < 0 || (s % 2) != 0 {
                    continue;
                }
                let d = self.dim(m, s);
                if d == 0 {
                    continue;
                }
                // L^(j+1) out of H^s.
                let mut power = RationalMatrix::identity(d);
                let mut deg = s;
                for _ in 0..=(j as usize) {
                    power = self.lefschetz_map(m, deg).mul(&power);
                    deg += 2;
                }
                let prim = kernel_basis(&power);
                if prim.cols() == 0 {
                    continue;
                }
                // Q(x, y) = eps(s) <x, L^j y> with eps(a) = (-1)^(a(a-1)/2);
                // <x, z> = x^T P_s z pairs H^s against H^(2 mid - s).
                let mut lj = RationalMatrix::identity(d);
                let mut deg = s;
                for _ in 0..(j as usize) {
                    lj = self.lefschetz_map(m, deg).mul(&lj);
                    deg += 2;
                }
                let form = self.pairing_matrix(m, s).mul(&lj).scale(&rat(epsilon(s)));
                let restricted = prim.transpose().mul(&form).mul(&prim);
                let sym = restricted.add(&restricted.transpose()).scale(&crate::linalg::ratio(1, 2));
                if !is_positive_definite(&sym) {
                    return Err((m, j));
                }
            }
        }
        Ok(())
    }
}

/// The alternating pairing sign `(-1)^(a(a-1)/2)`.
pub fn epsilon(a: i64) -> i64 {
    let t = (a * (a - 1)) / 2;
    if t.rem_euclid(2) == 0 { 1 } else { -1 }
}
