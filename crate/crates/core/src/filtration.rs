//! Increasing exhaustive filtrations of finite-dimensional rational vector
//! spaces, the grading/filtration correspondence, and monodromy weight
//! filtrations of nilpotent endomorphisms.

use crate::linalg::{
    self, column_space_basis, is_subspace, kernel_basis, rank, same_span, subspace_sum, Rational,
    RationalMatrix,
};
use num_traits::One;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiltrationError {
    #[error("step {0} is not contained in step {1}")]
    NotNested(i64, i64),
    #[error("top step has rank {0} but ambient dimension is {1}")]
    NotExhaustive(usize, usize),
    #[error("step basis at index {0} lives in ambient dimension {1}, expected {2}")]
    AmbientMismatch(i64, usize, usize),
    #[error("matrix is not nilpotent (power {0} is nonzero)")]
    NotNilpotent(usize),
    #[error("matrix must be square")]
    NotSquare,
}

/// Increasing, exhaustive, bounded filtration `G_m` of an ambient space.
/// Below `lo` every step is zero, at and above `hi` every step is the full
/// space, and the recorded steps are canonical column-space bases.
#[derive(Debug, Clone)]
pub struct Filtration {
    ambient_dim: usize,
    steps: BTreeMap<i64, RationalMatrix>,
    lo: i64,
    hi: i64,
}

impl Filtration {
    /// Validate and canonicalize a filtration given as `(index, basis)`
    /// pairs. Indices not listed inherit the next lower listed step.
    pub fn new(
        ambient_dim: usize,
        steps: Vec<(i64, RationalMatrix)>,
    ) -> Result<Self, FiltrationError> {
        let mut map: BTreeMap<i64, RationalMatrix> = BTreeMap::new();
        for (idx, basis) in steps {
            if basis.rows() != ambient_dim {
                return Err(FiltrationError::AmbientMismatch(idx, basis.rows(), ambient_dim));
            }
            let canon = column_space_basis(&basis);
            map.insert(idx, canon);
        }
        if map.is_empty() {
            map.insert(0, RationalMatrix::identity(ambient_dim));
        }
        let indices: Vec<i64> = map.keys().copied().collect();
        for w in indices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !is_subspace(&map[&a], &map[&b]) {
                return Err(FiltrationError::NotNested(a, b));
            }
        }
        let top = *indices.last().unwrap();
        if rank(&map[&top]) != ambient_dim {
            return Err(FiltrationError::NotExhaustive(rank(&map[&top]), ambient_dim));
        }
        let lo = indices.iter().copied().find(|i| map[i].cols() > 0).unwrap_or(top);
        let hi = indices.iter().copied().find(|i| map[i].cols() == ambient_dim).unwrap_or(top);
        Ok(Filtration { ambient_dim, steps: map, lo, hi })
    }

    /// Filtration with a single jump to the full space at `idx`.
    pub fn one_step(ambient_dim: usize, idx: i64) -> Self {
        Filtration::new(ambient_dim, vec![(idx, RationalMatrix::identity(ambient_dim))]).unwrap()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Least index with a nonzero step.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Least index whose step is the whole space.
    pub fn hi(&self) -> i64 {
        self.hi
    }

    /// Basis of the step at index `m` (zero matrix below the support,
    /// identity above it).
    pub fn step(&self, m: i64) -> RationalMatrix {
        match self.steps.range(..=m).next_back() {
            Some((_, basis)) => basis.clone(),
            None => RationalMatrix::zero(self.ambient_dim, 0),
        }
    }

    pub fn step_dim(&self, m: i64) -> usize {
        self.step(m).cols()
    }

    /// `dim G_m - dim G_{m-1}`.
    pub fn graded_dim(&self, m: i64) -> usize {
        self.step_dim(m) - self.step_dim(m - 1)
    }

    /// All indices where the dimension jumps, with the graded dimension.
    pub fn graded_dims(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for m in self.lo..=self.hi {
            let d = self.graded_dim(m);
            if d > 0 {
                out.insert(m, d);
            }
        }
        out
    }

    /// Span equality step by step.
    pub fn equals(&self, other: &Filtration) -> bool {
        if self.ambient_dim != other.ambient_dim {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        (lo..=hi).all(|m| same_span(&self.step(m), &other.step(m)))
    }

    /// Shift all indices by `delta`.
    pub fn shift(&self, delta: i64) -> Filtration {
        let steps = self.steps.iter().map(|(i, b)| (i + delta, b.clone())).collect();
        Filtration { ambient_dim: self.ambient_dim, steps, lo: self.lo + delta, hi: self.hi + delta }
    }
}

/// Build the filtration attached to a grading: a basis vector of weight `p`
/// enters at step `-p`, so `G_m` is spanned by the vectors with `-p <= m`.
pub fn grading_to_filtration(weights: &[i64]) -> Filtration {
    let n = weights.len();
    let mut by_index: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &p) in weights.iter().enumerate() {
        by_index.entry(-p).or_default().push(i);
    }
    let mut steps = Vec::new();
    let mut acc: Vec<usize> = Vec::new();
    for (idx, members) in by_index {
        acc.extend(members);
        let mut basis = RationalMatrix::zero(n, acc.len());
        for (j, &i) in acc.iter().enumerate() {
            basis[(i, j)] = Rational::one();
        }
        steps.push((idx, basis));
    }
    if steps.is_empty() {
        steps.push((0, RationalMatrix::identity(0)));
    }
    Filtration::new(n, steps).expect("grading filtrations are always valid")
}

/// A square nilpotent matrix together with its nilpotency index.
#[derive(Debug, Clone)]
pub struct NilpotentOp {
    matrix: RationalMatrix,
    nilpotency_index: usize,
}

impl NilpotentOp {
    pub fn new(matrix: RationalMatrix) -> Result<Self, FiltrationError> {
        if matrix.rows() != matrix.cols() {
            return Err(FiltrationError::NotSquare);
        }
        let n = matrix.rows();
        if n == 0 {
            return Ok(NilpotentOp { matrix, nilpotency_index: 0 });
        }
        let mut power = RationalMatrix::identity(n);
        for e in 0..=n {
            if power.is_zero() {
                return Ok(NilpotentOp { matrix, nilpotency_index: e });
            }
            power = power.mul(&matrix);
        }
        Err(FiltrationError::NotNilpotent(n))
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Least `e` with `N^e = 0` (zero for the empty operator).
    pub fn nilpotency_index(&self) -> usize {
        self.nilpotency_index
    }
}

/// Jordan chain basis of a nilpotent operator: each chain is
/// `[t, Nt, ..., N^(len-1) t]` and the union of all chain vectors is a basis.
pub fn jordan_chains(op: &NilpotentOp) -> Vec<Vec<Vec<Rational>>> {
    let n = op.dim();
    let e = op.nilpotency_index();
    let mut powers = vec![RationalMatrix::identity(n)];
    for _ in 0..e {
        let next = powers.last().unwrap().mul(op.matrix());
        powers.push(next);
    }
    // Kernel ladder 0 = K_0 <= K_1 <= ... <= K_e = V.
    let kernels: Vec<RationalMatrix> =
        (0..=e).map(|s| kernel_basis(&powers[s])).collect();

    let mut chains: Vec<(usize, Vec<Rational>)> = Vec::new(); // (length, top)
    for s in (1..=e).rev() {
        // Level-s elements already claimed by longer chains, plus K_{s-1}.
        let mut existing = kernels[s - 1].clone();
        for (len, top) in &chains {
            if *len >= s {
                let v = powers[len - s].apply(top);
                existing = existing.hstack(&RationalMatrix::from_cols(n, &[v]));
            }
        }
        let ks = &kernels[s];
        for j in 0..ks.cols() {
            let cand = ks.col(j);
            let cand_m = RationalMatrix::from_cols(n, &[cand.clone()]);
            if !is_subspace(&cand_m, &existing) {
                chains.push((s, cand.clone()));
                existing = existing.hstack(&cand_m);
            }
        }
    }
    chains
        .into_iter()
        .map(|(len, top)| (0..len).map(|j| powers[j].apply(&top)).collect())
        .collect()
}

/// Monodromy weight filtration of a nilpotent operator centered at `k`: the
/// unique increasing filtration with `N(W_i) <= W_{i-2}` and
/// `N^j : Gr_{k+j} ~ Gr_{k-j}` for all `j`. Computed from a Jordan chain
/// basis (a chain of length `s` spans weights `k+s-1, k+s-3, ..., k-s+1`),
/// then both defining properties are re-verified on the output.
pub fn weight_filtration(op: &NilpotentOp, center: i64) -> Filtration {
    let n = op.dim();
    let chains = jordan_chains(op);
    let mut by_weight: BTreeMap<i64, Vec<Vec<Rational>>> = BTreeMap::new();
    for chain in &chains {
        let len = chain.len() as i64;
        for (j, v) in chain.iter().enumerate() {
            let weight = center + (len - 1) - 2 * j as i64;
            by_weight.entry(weight).or_default().push(v.clone());
        }
    }
    let mut steps = Vec::new();
    let mut acc: Vec<Vec<Rational>> = Vec::new();
    for (w, vecs) in &by_weight {
        acc.extend(vecs.iter().cloned());
        steps.push((*w, RationalMatrix::from_cols(n, &acc)));
    }
    if steps.is_empty() {
        steps.push((center, RationalMatrix::identity(n)));
    }
    let filt = Filtration::new(n, steps).expect("weight filtration must be valid");
    debug_assert!(verify_weight_filtration(op, center, &filt).is_ok());
    filt
}

/// Check the two defining properties of the weight filtration exactly.
pub fn verify_weight_filtration(
    op: &NilpotentOp,
    center: i64,
    w: &Filtration,
) -> Result<(), String> {
    let n = op.dim();
    if w.ambient_dim() != n {
        return Err("ambient dimension mismatch".into());
    }
    for i in (w.lo() - 1)..=(w.hi() + 1) {
        let image_cols: Vec<Vec<Rational>> = (0..w.step(i).cols())
            .map(|j| op.matrix().apply(&w.step(i).col(j)))
            .collect();
        let image = RationalMatrix::from_cols(n, &image_cols);
        if !is_subspace(&image, &w.step(i - 2)) {
            return Err(format!("N(W_{i}) not contained in W_{}", i - 2));
        }
    }
    // N^j must induce an isomorphism Gr_{k+j} -> Gr_{k-j}.
    for j in 1..=(w.hi() - center).max(center - w.lo()).max(0) {
        let up = center + j;
        let down = center - j;
        if w.graded_dim(up) != w.graded_dim(down) {
            return Err(format!("graded dims at {up} and {down} differ"));
        }
        // Rank of the induced map: N^j(W_up) + W_{down-1} must reach W_down
        // and the graded kernel must vanish, which together reduce to a rank
        // count: dim(N^j W_up + W_{down-1}) - dim W_{down-1} = graded dim.
        let nj = op.matrix().pow(j as usize);
        let image_cols: Vec<Vec<Rational>> =
            (0..w.step(up).cols()).map(|c| nj.apply(&w.step(up).col(c))).collect();
        let image = RationalMatrix::from_cols(n, &image_cols);
        let span = subspace_sum(&image, &w.step(down - 1)).unwrap();
        let induced_rank = rank(&span) - w.step_dim(down - 1);
        if induced_rank != w.graded_dim(up) {
            return Err(format!("N^{j} not an isomorphism Gr_{up} -> Gr_{down}"));
        }
        if !is_subspace(&span, &w.step(down)) {
            return Err(format!("N^{j}(W_{up}) escapes W_{down}"));
        }
    }
    Ok(())
}

/// Second, independent construction of the weight filtration:
/// `W_{k+l} = sum over a-b = l of (ker N^(a+1) meet im N^b)`.
pub fn weight_filtration_by_kernels(op: &NilpotentOp, center: i64) -> Filtration {
    let n = op.dim();
    let e = op.nilpotency_index().max(1);
    let mut powers = vec![RationalMatrix::identity(n)];
    for _ in 0..=e {
        let next = powers.last().unwrap().mul(op.matrix());
        powers.push(next);
    }
    let kernels: Vec<RationalMatrix> = (0..=e + 1).map(|s| kernel_basis(&powers[s])).collect();
    let images: Vec<RationalMatrix> =
        (0..=e).map(|s| column_space_basis(&powers[s])).collect();
    let mut steps = Vec::new();
    for l in -(e as i64)..=(e as i64) {
        let mut acc = RationalMatrix::zero(n, 0);
        for a in 0..=e {
            let b = a as i64 - l;
            if b < 0 || b > e as i64 {
                continue;
            }
            let meet = linalg::subspace_meet(&kernels[a + 1], &images[b as usize]).unwrap();
            acc = subspace_sum(&acc, &meet).unwrap();
        }
        steps.push((center + l, acc));
    }
    Filtration::new(n, steps).expect("kernel construction must be valid")
}

/// Direct sum of nilpotent Jordan blocks of the given sizes (test helper and
/// model builder).
pub fn jordan_block_sum(sizes: &[usize]) -> NilpotentOp {
    let n: usize = sizes.iter().sum();
    let mut m = RationalMatrix::zero(n, n);
    let mut offset = 0;
    for &s in sizes {
        for i in 0..s.saturating_sub(1) {
            // Block maps e_{i+1} -> e_i inside the block.
            m[(offset + i, offset + i + 1)] = Rational::one();
        }
        offset += s;
    }
    NilpotentOp::new(m).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_full_step() {
        let f = Filtration::one_step(3, 0);
        assert_eq!(f.lo(), 0);
        assert_eq!(f.hi(), 0);
        assert_eq!(f.graded_dim(0), 3);
    }

    #[test]
    fn two_step_flag() {
        let line = RationalMatrix::from_i64(&[&[1], &[0]]);
        let f = Filtration::new(2, vec![(-1, line), (0, RationalMatrix::identity(2))]).unwrap();
        assert_eq!(f.lo(), -1);
        assert_eq!(f.hi(), 0);
        assert_eq!(f.graded_dim(-1), 1);
        assert_eq!(f.graded_dim(0), 1);
    }

    #[test]
    fn not_nested_rejected() {
        let plane = RationalMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 0]]);
        let line = RationalMatrix::from_i64(&[&[0], &[0], &[1]]);
        let err = Filtration::new(3, vec![(-1, plane), (0, line)]).unwrap_err();
        assert!(matches!(err, FiltrationError::NotNested(-1, 0)));
    }

    #[test]
    fn not_exhaustive_rejected() {
        let line = RationalMatrix::from_i64(&[&[1], &[0]]);
        let err = Filtration::new(2, vec![(0, line)]).unwrap_err();
        assert!(matches!(err, FiltrationError::NotExhaustive(1, 2)));
    }

    #[test]
    fn graded_dims_of_full_flag() {
        let l1 = RationalMatrix::from_i64(&[&[1], &[0], &[0]]);
        let l2 = RationalMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 0]]);
        let f =
            Filtration::new(3, vec![(-1, l1), (0, l2), (1, RationalMatrix::identity(3))]).unwrap();
        assert_eq!(f.graded_dims(), BTreeMap::from([(-1, 1), (0, 1), (1, 1)]));
        let total: usize = f.graded_dims().values().sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn grading_all_zero_weights() {
        let f = grading_to_filtration(&[0, 0, 0]);
        assert!(f.equals(&Filtration::one_step(3, 0)));
    }

    #[test]
    fn grading_two_weights() {
        // Weights (1, 2): the weight-2 vector enters at -2, both at -1.
        let f = grading_to_filtration(&[1, 2]);
        assert_eq!(f.step_dim(-2), 1);
        let axis2 = RationalMatrix::from_i64(&[&[0], &[1]]);
        assert!(same_span(&f.step(-2), &axis2));
        assert_eq!(f.step_dim(-1), 2);
    }

    #[test]
    fn quantum_style_grading() {
        // Projective plane quantum weights 2, 1, 0 for the classes in
        // degrees 0, 2, 4: graded dims 1 at steps -2, -1, 0.
        let f = grading_to_filtration(&[2, 1, 0]);
        assert_eq!(f.graded_dims(), BTreeMap::from([(-2, 1), (-1, 1), (0, 1)]));
    }

    #[test]
    fn nilpotency_detection() {
        let j2 = jordan_block_sum(&[2]);
        assert_eq!(j2.nilpotency_index(), 2);
        let not_nil = RationalMatrix::identity(2);
        assert!(matches!(NilpotentOp::new(not_nil), Err(FiltrationError::NotNilpotent(2))));
    }

    #[test]
    fn weight_filtration_zero_operator() {
        let zero = NilpotentOp::new(RationalMatrix::zero(3, 3)).unwrap();
        let w = weight_filtration(&zero, 5);
        assert_eq!(w.step_dim(4), 0);
        assert_eq!(w.step_dim(5), 3);
    }

    /// Brute force over all coordinate-free flags in dimension 2 satisfying
    /// both defining properties for a single Jordan block.
    #[test]
    fn weight_filtration_j2_matches_brute_force() {
        let op = jordan_block_sum(&[2]);
        let center = 1i64;
        let w = weight_filtration(&op, center);
        // Enumerate candidate middle lines: spans of (1,0), (0,1), (1,t).
        let mut matches = Vec::new();
        let mut candidates = vec![
            RationalMatrix::from_i64(&[&[1], &[0]]),
            RationalMatrix::from_i64(&[&[0], &[1]]),
        ];
        for t in [-3i64, -2, -1, 1, 2, 3] {
            candidates.push(RationalMatrix::from_fn(2, 1, |r, _| {
                if r == 0 { rat(1) } else { rat(t) }
            }));
        }
        for line in candidates {
            // Candidate filtration: W_{-1+center}=0, W_center = W_{center+?}..
            // For J2 centered at 1 the jumps are at 0 and 2.
            let cand = Filtration::new(
                2,
                vec![(center - 1, line.clone()), (center + 1, RationalMatrix::identity(2))],
            )
            .unwrap();
            if verify_weight_filtration(&op, center, &cand).is_ok() {
                matches.push(cand);
            }
        }
        assert_eq!(matches.len(), 1, "the defining properties pin the filtration uniquely");
        assert!(w.equals(&matches[0]));
        // The middle step is the kernel.
        assert!(same_span(&w.step(center), &kernel_basis(op.matrix())));
        assert_eq!(w.step_dim(center - 2), 0);
        assert_eq!(w.step_dim(center + 1), 2);
    }

    #[test]
    fn centering_shift() {
        let op = jordan_block_sum(&[3, 2, 1]);
        let w0 = weight_filtration(&op, 0);
        let w1 = weight_filtration(&op, 1);
        assert!(w1.equals(&w0.shift(1)));
    }

    #[test]
    fn jordan_type_from_graded_dims() {
        let op = jordan_block_sum(&[3, 1, 1]);
        let w = weight_filtration(&op, 0);
        // Chain of length 3 gives weights 2,0,-2; two singletons add weight 0.
        assert_eq!(w.graded_dims(), BTreeMap::from([(-2, 1), (0, 3), (2, 1)]));
    }

    fn random_nilpotent(rng: &mut ChaCha8Rng, dim: usize) -> NilpotentOp {
        // Strictly upper triangular in a random basis change with unit
        // determinant stays nilpotent and exact.
        let mut upper = RationalMatrix::zero(dim, dim);
        for r in 0..dim {
            for c in (r + 1)..dim {
                upper[(r, c)] = rat(rng.gen_range(-2..=2));
            }
        }
        let mut lower = RationalMatrix::identity(dim);
        for r in 0..dim {
            for c in 0..r {
                lower[(r, c)] = rat(rng.gen_range(-1..=1));
            }
        }
        let mut upper_u = RationalMatrix::identity(dim);
        for r in 0..dim {
            for c in (r + 1)..dim {
                upper_u[(r, c)] = rat(rng.gen_range(-1..=1));
            }
        }
        let basis = lower.mul(&upper_u);
        let inv = invert_unitriangular(&basis);
        NilpotentOp::new(basis.mul(&upper).mul(&inv)).unwrap()
    }

    fn invert_unitriangular(m: &RationalMatrix) -> RationalMatrix {
        let n = m.rows();
        let mut inv = RationalMatrix::identity(n);
        // Solve m * inv = id column by column.
        for col in 0..n {
            let target: Vec<Rational> =
                (0..n).map(|r| if r == col { rat(1) } else { rat(0) }).collect();
            let x = linalg::solve(m, &target).unwrap();
            for r in 0..n {
                inv[(r, col)] = x[r].clone();
            }
        }
        inv
    }

    #[test]
    fn two_constructions_agree_on_random_nilpotents() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..25 {
            let dim = rng.gen_range(1..=8);
            let op = random_nilpotent(&mut rng, dim);
            let center = rng.gen_range(-3..=3);
            let w = weight_filtration(&op, center);
            verify_weight_filtration(&op, center, &w).unwrap();
            let w2 = weight_filtration_by_kernels(&op, center);
            assert!(w.equals(&w2), "chain and kernel constructions disagree");
        }
    }

    #[test]
    fn jordan_chains_form_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let dim = rng.gen_range(1..=7);
            let op = random_nilpotent(&mut rng, dim);
            let chains = jordan_chains(&op);
            let all: Vec<Vec<Rational>> = chains.into_iter().flatten().collect();
            assert_eq!(all.len(), dim);
            let m = RationalMatrix::from_cols(dim, &all);
            assert_eq!(rank(&m), dim);
        }
    }
}
