//! Mixed Hodge structure models over the rationals: graded Hodge numbers,
//! Hodge-Tate verdicts, Hodge number polynomials, Tate twists, and the
//! two-out-of-three test along short exact sequences.
//!
//! The Hodge filtration is increasing here, with `F_{-p}` playing the role
//! of the classical `F^p`.

use crate::filtration::Filtration;
use crate::linalg::{is_subspace, rank, subspace_meet, subspace_sum, RationalMatrix};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HodgeError {
    #[error("filtration ambient {0} does not match model dimension {1}")]
    AmbientMismatch(usize, usize),
    #[error("maps do not form an exact sequence at position {0}")]
    NotExact(usize),
    #[error("graded sequence fails exactness at cell (p={0}, w={1})")]
    NotStrict(i64, i64),
    #[error("map is not compatible with the {0} filtration")]
    NotFiltered(&'static str),
}

/// A finite model of a mixed Hodge structure: an ambient dimension with an
/// increasing Hodge filtration `F` and a weight filtration `W`.
#[derive(Debug, Clone)]
pub struct MixedHodgeModel {
    ambient_dim: usize,
    f: Filtration,
    w: Filtration,
    label: String,
}

/// Generating count of the graded Hodge numbers: coefficient of `(p, w)` is
/// `dim Gr^F_{-p} Gr^W_w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgePolynomial {
    pub coefficients: BTreeMap<(i64, i64), usize>,
}

impl HodgePolynomial {
    pub fn total(&self) -> usize {
        self.coefficients.values().sum()
    }

    /// Supported on the diagonal `w = 2p`; formally this is the statement
    /// that `(1 - xy) * p(x, y)` still lies in the subring generated by `xy`.
    pub fn diagonal_only(&self) -> bool {
        self.coefficients.keys().all(|&(p, w)| w == 2 * p)
    }

    pub fn to_string_pretty(&self) -> String {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .map(|(&(p, w), &c)| format!("{c}*x^{p}*y^{w}"))
            .collect();
        if terms.is_empty() { "0".to_string() } else { terms.join(" + ") }
    }
}

/// Verdict plus the list of violating `(p, w)` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeTateVerdict {
    pub is_hodge_tate: bool,
    pub violations: Vec<(i64, i64)>,
}

impl MixedHodgeModel {
    pub fn new(f: Filtration, w: Filtration, label: &str) -> Result<Self, HodgeError> {
        if f.ambient_dim() != w.ambient_dim() {
            return Err(HodgeError::AmbientMismatch(f.ambient_dim(), w.ambient_dim()));
        }
        Ok(MixedHodgeModel { ambient_dim: f.ambient_dim(), f, w, label: label.to_string() })
    }

    /// The Tate object `Q(-k)`: one dimensional, weight `2k`, Hodge index `k`.
    pub fn tate(k: i64) -> Self {
        let f = Filtration::one_step(1, -k);
        let w = Filtration::one_step(1, 2 * k);
        MixedHodgeModel::new(f, w, &format!("Q({})", -k)).unwrap()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn hodge_filtration(&self) -> &Filtration {
        &self.f
    }

    pub fn weight_filtration(&self) -> &Filtration {
        &self.w
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.ambient_dim + other.ambient_dim;
        let embed = |m: &RationalMatrix, offset: usize| -> RationalMatrix {
            let mut out = RationalMatrix::zero(n, m.cols());
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    out[(offset + r, c)] = m[(r, c)].clone();
                }
            }
            out
        };
        let combine = |a: &Filtration, b: &Filtration| -> Filtration {
            let lo = a.lo().min(b.lo());
            let hi = a.hi().max(b.hi());
            let mut steps = Vec::new();
            for m in lo..=hi {
                let left = embed(&a.step(m), 0);
                let right = embed(&b.step(m), self.ambient_dim);
                steps.push((m, left.hstack(&right)));
            }
            Filtration::new(n, steps).unwrap()
        };
        MixedHodgeModel {
            ambient_dim: n,
            f: combine(&self.f, &other.f),
            w: combine(&self.w, &other.w),
            label: format!("{} + {}", self.label, other.label),
        }
    }

    /// `dim Gr^F_{-p} Gr^W_w` for every cell `(p, w)` with a nonzero count.
    /// `F` induces a filtration on each weight-graded piece; the total over
    /// all cells is the ambient dimension.
    pub fn graded_hodge_numbers(&self) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        for w in self.w.lo()..=self.w.hi() {
            if self.w.graded_dim(w) == 0 {
                continue;
            }
            // Image dimension of F_i inside Gr^W_w as i grows; jumps are the
            // graded Hodge numbers of this weight piece.
            let mut prev = 0usize;
            for i in self.f.lo()..=self.f.hi() {
                let meet_hi = subspace_meet(&self.f.step(i), &self.w.step(w)).unwrap();
                let meet_lo = subspace_meet(&self.f.step(i), &self.w.step(w - 1)).unwrap();
                let d = rank(&meet_hi) - rank(&meet_lo);
                if d > prev {
                    out.insert((-i, w), d - prev);
                }
                prev = d;
            }
        }
        out
    }

    /// Hodge-Tate test: all odd weight gaps vanish and the graded Hodge
    /// numbers are supported on `w = 2p`. The certificate lists every
    /// violating cell.
    pub fn is_hodge_tate(&self) -> HodgeTateVerdict {
        let mut violations = Vec::new();
        for (cell, count) in self.graded_hodge_numbers() {
            if count > 0 && cell.1 != 2 * cell.0 {
                violations.push(cell);
            }
        }
        HodgeTateVerdict { is_hodge_tate: violations.is_empty(), violations }
    }

    /// Complementarity test `F_{-j} (+) W_{2j+2+2*shift} = V` for every `j`,
    /// as an internal direct sum. The index convention in the literature is
    /// ambiguous; `shift = -2` is the value calibrated on the quantum
    /// examples, `shift = 0` the literal reading. Returns the failing `j`.
    pub fn fw_complement_verdict(&self, shift: i64) -> Result<(), i64> {
        let j_lo = -self.f.hi() - 2;
        let j_hi = -self.f.lo() + 2;
        for j in j_lo..=j_hi {
            let fpart = self.f.step(-j);
            let wpart = self.w.step(2 * j + 2 + 2 * shift);
            let meet = subspace_meet(&fpart, &wpart).unwrap();
            let sum = subspace_sum(&fpart, &wpart).unwrap();
            if rank(&meet) != 0 || rank(&sum) != self.ambient_dim {
                return Err(j);
            }
        }
        Ok(())
    }

    pub fn hodge_polynomial(&self) -> HodgePolynomial {
        HodgePolynomial { coefficients: self.graded_hodge_numbers() }
    }

    /// Twist by `Q(k)`: Hodge indices drop by `k` (so `F` steps shift by
    /// `+k`) and weights drop by `2k`.
    pub fn tate_twist(&self, k: i64) -> Self {
        MixedHodgeModel {
            ambient_dim: self.ambient_dim,
            f: self.f.shift(k),
            w: self.w.shift(-2 * k),
            label: format!("{}({})", self.label, k),
        }
    }
}

/// Maps of a candidate short exact sequence `0 -> A -> B -> C -> 0`.
/// Matrices act on column coordinate vectors.
#[derive(Debug, Clone)]
pub struct ShortExactMaps {
    pub inject: RationalMatrix,
    pub surject: RationalMatrix,
}

#[derive(Debug, Clone)]
pub struct TwoOfThreeReport {
    pub left_ht: HodgeTateVerdict,
    pub right_ht: HodgeTateVerdict,
    pub middle_ht: HodgeTateVerdict,
    /// True when left and right are Hodge-Tate; the middle must then be too.
    pub lemma_applies: bool,
}

/// Verify that `0 -> left -> middle -> right -> 0` is exact, that the maps
/// are compatible with both filtrations and exact on every graded piece
/// (strictness), and report the two-out-of-three verdicts.
pub fn ht_two_of_three(
    left: &MixedHodgeModel,
    middle: &MixedHodgeModel,
    right: &MixedHodgeModel,
    maps: &ShortExactMaps,
) -> Result<TwoOfThreeReport, HodgeError> {
    let (a, b, c) = (left.ambient_dim, middle.ambient_dim, right.ambient_dim);
    if maps.inject.rows() != b || maps.inject.cols() != a {
        return Err(HodgeError::NotExact(0));
    }
    if maps.surject.rows() != c || maps.surject.cols() != b {
        return Err(HodgeError::NotExact(2));
    }
    if rank(&maps.inject) != a {
        return Err(HodgeError::NotExact(0));
    }
    if rank(&maps.surject) != c {
        return Err(HodgeError::NotExact(2));
    }
    if !maps.surject.mul(&maps.inject).is_zero() || a + c != b {
        return Err(HodgeError::NotExact(1));
    }
    for (name, fa, fb, fc) in [
        ("Hodge", &left.f, &middle.f, &right.f),
        ("weight", &left.w, &middle.w, &right.w),
    ] {
        let lo = fa.lo().min(fb.lo()).min(fc.lo());
        let hi = fa.hi().max(fb.hi()).max(fc.hi());
        for m in lo..=hi {
            if !is_subspace(&maps.inject.mul(&fa.step(m)), &fb.step(m)) {
                return Err(HodgeError::NotFiltered(name));
            }
            if !is_subspace(&maps.surject.mul(&fb.step(m)), &fc.step(m)) {
                return Err(HodgeError::NotFiltered(name));
            }
        }
    }
    // Strictness at the graded level: for a short exact sequence of mixed
    // Hodge structures every (p, w) cell count is additive.
    let ga = left.graded_hodge_numbers();
    let gb = middle.graded_hodge_numbers();
    let gc = right.graded_hodge_numbers();
    let mut cells: Vec<(i64, i64)> = ga.keys().chain(gb.keys()).chain(gc.keys()).copied().collect();
    cells.sort();
    cells.dedup();
    for (p, w) in cells {
        let da = ga.get(&(p, w)).copied().unwrap_or(0);
        let db = gb.get(&(p, w)).copied().unwrap_or(0);
        let dc = gc.get(&(p, w)).copied().unwrap_or(0);
        if da + dc != db {
            return Err(HodgeError::NotStrict(p, w));
        }
    }
    let left_ht = left.is_hodge_tate();
    let right_ht = right.is_hodge_tate();
    let middle_ht = middle.is_hodge_tate();
    Ok(TwoOfThreeReport {
        lemma_applies: left_ht.is_hodge_tate && right_ht.is_hodge_tate,
        left_ht,
        right_ht,
        middle_ht,
    })
}

/// Alternating sum of a bounded sequence of dimensions; zero is a necessary
/// condition for exactness.
pub fn alternating_sum_is_zero(dims: &[usize]) -> bool {
    let mut acc: i64 = 0;
    for (i, &d) in dims.iter().enumerate() {
        if i % 2 == 0 {
            acc += d as i64;
        } else {
            acc -= d as i64;
        }
    }
    acc == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::Filtration;
    use crate::linalg::RationalMatrix;

    fn elliptic_h1() -> MixedHodgeModel {
        let line = RationalMatrix::from_i64(&[&[1], &[0]]);
        let f = Filtration::new(2, vec![(-1, line), (0, RationalMatrix::identity(2))]).unwrap();
        let w = Filtration::one_step(2, 1);
        MixedHodgeModel::new(f, w, "elliptic H1").unwrap()
    }

    #[test]
    fn tate_object_numbers() {
        let q0 = MixedHodgeModel::tate(0);
        assert_eq!(q0.graded_hodge_numbers(), BTreeMap::from([((0, 0), 1)]));
        assert!(MixedHodgeModel::tate(-1).is_hodge_tate().is_hodge_tate);
    }

    #[test]
    fn elliptic_curve_is_not_hodge_tate() {
        let m = elliptic_h1();
        assert_eq!(m.graded_hodge_numbers(), BTreeMap::from([((0, 1), 1), ((1, 1), 1)]));
        let verdict = m.is_hodge_tate();
        assert!(!verdict.is_hodge_tate);
        assert_eq!(verdict.violations, vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn quantum_plane_model() {
        let m = MixedHodgeModel::tate(0)
            .direct_sum(&MixedHodgeModel::tate(1))
            .direct_sum(&MixedHodgeModel::tate(2));
        assert_eq!(
            m.graded_hodge_numbers(),
            BTreeMap::from([((0, 0), 1), ((1, 2), 1), ((2, 4), 1)])
        );
        assert!(m.is_hodge_tate().is_hodge_tate);
        assert!(m.hodge_polynomial().diagonal_only());
        // Calibrated complement test passes at shift -2, the literal
        // indexing does not.
        assert!(m.fw_complement_verdict(-2).is_ok());
        assert!(m.fw_complement_verdict(0).is_err());
    }

    #[test]
    fn twist_shifts_cells() {
        let q0 = MixedHodgeModel::tate(0);
        let t = q0.tate_twist(1);
        assert_eq!(t.graded_hodge_numbers(), BTreeMap::from([((-1, -2), 1)]));
        let back = t.tate_twist(-1);
        assert_eq!(back.graded_hodge_numbers(), q0.graded_hodge_numbers());
    }

    #[test]
    fn twist_preserves_ht() {
        let m = elliptic_h1();
        assert_eq!(m.tate_twist(3).is_hodge_tate().is_hodge_tate, m.is_hodge_tate().is_hodge_tate);
        assert!(MixedHodgeModel::tate(2).tate_twist(-5).is_hodge_tate().is_hodge_tate);
    }

    #[test]
    fn totals_match_dimension() {
        let m = elliptic_h1().direct_sum(&MixedHodgeModel::tate(3));
        let total: usize = m.graded_hodge_numbers().values().sum();
        assert_eq!(total, m.ambient_dim());
    }

    #[test]
    fn two_of_three_tate_sum() {
        let left = MixedHodgeModel::tate(0);
        let right = MixedHodgeModel::tate(-1);
        let middle = left.direct_sum(&right);
        let maps = ShortExactMaps {
            inject: RationalMatrix::from_i64(&[&[1], &[0]]),
            surject: RationalMatrix::from_i64(&[&[0, 1]]),
        };
        let report = ht_two_of_three(&left, &middle, &right, &maps).unwrap();
        assert!(report.lemma_applies);
        assert!(report.middle_ht.is_hodge_tate);
    }

    #[test]
    fn two_of_three_flags_impossible_middle() {
        // Hodge-Tate ends around a non-Hodge-Tate middle cannot be strict.
        let left = MixedHodgeModel::tate(0);
        let right = MixedHodgeModel::tate(1);
        let middle = elliptic_h1();
        let maps = ShortExactMaps {
            inject: RationalMatrix::from_i64(&[&[1], &[0]]),
            surject: RationalMatrix::from_i64(&[&[0, 1]]),
        };
        let out = ht_two_of_three(&left, &middle, &right, &maps);
        assert!(out.is_err(), "strictness must fail: {out:?}");
    }

    #[test]
    fn exactness_rank_check() {
        let left = MixedHodgeModel::tate(0);
        let right = MixedHodgeModel::tate(0);
        let middle = left.direct_sum(&right);
        let maps = ShortExactMaps {
            inject: RationalMatrix::from_i64(&[&[0], &[0]]),
            surject: RationalMatrix::from_i64(&[&[0, 1]]),
        };
        assert!(matches!(
            ht_two_of_three(&left, &middle, &right, &maps),
            Err(HodgeError::NotExact(0))
        ));
    }

    #[test]
    fn alternating_sums() {
        assert!(alternating_sum_is_zero(&[1, 2, 1]));
        assert!(!alternating_sum_is_zero(&[1, 3, 1]));
    }
}
