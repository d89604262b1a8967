//! Cohomology rings of smooth complete fans in any rank, presented as a
//! polynomial ring on the ray classes modulo square-free non-face
//! monomials and the linear relations, and the induced quantum-style
//! graded model with the anticanonical cup product as residue.

use super::ToricError;
use crate::linalg::{rank, rat, rref, Rational, RationalMatrix};
use crate::rescaling::{Component, RescalingModel};
use num_traits::Zero;
use std::collections::BTreeMap;

/// A fan of arbitrary rank given by primitive rays and simplicial maximal
/// cones; used for the cohomology ring of the associated smooth complete
/// variety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralFan {
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl GeneralFan {
    pub fn rank(&self) -> usize {
        self.rays.first().map_or(0, |r| r.len())
    }

    pub fn validate(&self) -> Result<(), ToricError> {
        let r = self.rank();
        if r == 0 || self.rays.iter().any(|v| v.len() != r) {
            return Err(ToricError::BadFan("inconsistent ray rank".into()));
        }
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.len() != r {
                return Err(ToricError::NotSmooth(ci, 0));
            }
            let m = RationalMatrix::from_fn(r, r, |i, j| rat(self.rays[cone[j]][i]));
            let d = crate::linalg::determinant(&m);
            if d != rat(1) && d != rat(-1) {
                return Err(ToricError::NotSmooth(ci, 0));
            }
        }
        // Completeness surrogate: every facet of a maximal cone is shared
        // by exactly two maximal cones.
        let mut wall_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for cone in &self.max_cones {
            for skip in 0..cone.len() {
                let mut f: Vec<usize> =
                    cone.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                f.sort();
                *wall_count.entry(f).or_insert(0) += 1;
            }
        }
        if wall_count.values().any(|&c| c != 2) {
            return Err(ToricError::NotComplete);
        }
        Ok(())
    }

    fn is_face(&self, set: &[usize]) -> bool {
        self.max_cones.iter().any(|c| set.iter().all(|x| c.contains(x)))
    }
}

/// Graded ring data: bases of each even degree, reduction of monomials to
/// the basis, and the cup product.
#[derive(Debug, Clone)]
pub struct CohomologyRing {
    pub fan: GeneralFan,
    /// `dims[k]` is the rank of the weight `2k` piece.
    pub dims: Vec<usize>,
    /// Monomial basis per degree: exponent vectors over the rays.
    basis: Vec<Vec<Vec<u32>>>,
    /// Coordinates of every degree-`k` monomial in the degree-`k` basis.
    reduce: Vec<BTreeMap<Vec<u32>, Vec<Rational>>>,
    /// Scale of the integral against the chosen top basis element.
    top_scale: Rational,
}

fn monomials(ray_count: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if ray_count == 0 {
        return out;
    }
    let mut cur = vec![0u32; ray_count];
    fn go(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            go(i + 1, left - e, cur, out);
            cur[i] = 0;
        }
    }
    go(0, degree as u32, &mut cur, &mut out);
    out
}

fn support(mono: &[u32]) -> Vec<usize> {
    mono.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect()
}

/// Build the ring using per-degree exact linear algebra.
pub fn cohomology_ring(fan: &GeneralFan) -> Result<CohomologyRing, ToricError> {
    fan.validate()?;
    let n = fan.rank();
    let l = fan.rays.len();
    let mut dims = Vec::new();
    let mut basis_all = Vec::new();
    let mut reduce_all = Vec::new();
    for k in 0..=n {
        let monos = monomials(l, k);
        let index: BTreeMap<Vec<u32>, usize> =
            monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut ideal_cols: Vec<Vec<Rational>> = Vec::new();
        for m in &monos {
            if !fan.is_face(&support(m)) {
                let mut col = vec![Rational::zero(); monos.len()];
                col[index[m]] = rat(1);
                ideal_cols.push(col);
            }
        }
        if k >= 1 {
            for coord in 0..n {
                for lower in monomials(l, k - 1) {
                    let mut col = vec![Rational::zero(); monos.len()];
                    for ray in 0..l {
                        let coeff = fan.rays[ray][coord];
                        if coeff == 0 {
                            continue;
                        }
                        let mut m = lower.clone();
                        m[ray] += 1;
                        col[index[&m]] += rat(coeff);
                    }
                    ideal_cols.push(col);
                }
            }
        }
        let ideal = RationalMatrix::from_cols(monos.len(), &ideal_cols);
        let q = crate::linalg::quotient_matrix(monos.len(), &ideal)
            .map_err(|_| ToricError::BadFan("ideal reduction failed".into()))?;
        let dim = q.rows();
        let red = rref(&ideal.transpose());
        let pivots = red.pivots.clone();
        let free: Vec<usize> = (0..monos.len()).filter(|c| !pivots.contains(c)).collect();
        let basis: Vec<Vec<u32>> = free.iter().map(|&i| monos[i].clone()).collect();
        let mut reduce = BTreeMap::new();
        for (i, m) in monos.iter().enumerate() {
            let mut unit = vec![Rational::zero(); monos.len()];
            unit[i] = rat(1);
            reduce.insert(m.clone(), q.apply(&unit));
        }
        dims.push(dim);
        basis_all.push(basis);
        reduce_all.push(reduce);
    }
    if dims[0] != 1 || dims[n] != 1 {
        return Err(ToricError::BadFan("ring has wrong end dimensions".into()));
    }
    let mut ring = CohomologyRing {
        fan: fan.clone(),
        dims,
        basis: basis_all,
        reduce: reduce_all,
        top_scale: rat(1),
    };
    // Normalize: the square-free monomial of any maximal cone integrates
    // to one.
    let sigma = ring.fan.max_cones[0].clone();
    let mut mono = vec![0u32; l];
    for &r in &sigma {
        mono[r] += 1;
    }
    let coords = ring.reduce[n][&mono].clone();
    let c = coords[0].clone();
    if c.is_zero() {
        return Err(ToricError::BadFan("top class degenerates".into()));
    }
    ring.top_scale = c.recip();
    Ok(ring)
}

impl CohomologyRing {
    pub fn rank(&self) -> usize {
        self.fan.rank()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    /// Multiply classes given in basis coordinates of degrees `ka`, `kb`.
    pub fn cup(&self, ka: usize, a: &[Rational], kb: usize, b: &[Rational]) -> Vec<Rational> {
        let kc = ka + kb;
        if kc > self.rank() {
            return Vec::new();
        }
        let mut out = vec![Rational::zero(); self.dim(kc)];
        for (ia, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (ib, cb) in b.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let mut m = self.basis[ka][ia].clone();
                for (x, e) in m.iter_mut().zip(&self.basis[kb][ib]) {
                    *x += e;
                }
                let red = &self.reduce[kc][&m];
                for (o, r) in out.iter_mut().zip(red) {
                    if !r.is_zero() {
                        *o += ca * cb * r;
                    }
                }
            }
        }
        out
    }

    pub fn integrate(&self, top: &[Rational]) -> Rational {
        if top.is_empty() {
            return Rational::zero();
        }
        &top[0] * &self.top_scale
    }

    pub fn ray_class(&self, ray: usize) -> Vec<Rational> {
        let l = self.fan.rays.len();
        let mut mono = vec![0u32; l];
        mono[ray] = 1;
        self.reduce[1][&mono].clone()
    }

    pub fn anticanonical(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim(1)];
        for ray in 0..self.fan.rays.len() {
            for (o, c) in out.iter_mut().zip(self.ray_class(ray)) {
                *o += c;
            }
        }
        out
    }

    /// Matrix of cupping with a degree-one class, from degree `k`.
    pub fn cup_matrix(&self, class: &[Rational], k: usize) -> RationalMatrix {
        let rows = self.dim(k + 1);
        let cols = self.dim(k);
        let mut m = RationalMatrix::zero(rows, cols);
        for c in 0..cols {
            let mut unit = vec![Rational::zero(); cols];
            unit[c] = rat(1);
            let prod = self.cup(1, class, k, &unit);
            for (r, v) in prod.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Poincare pairing matrix between degrees `k` and `rank - k`.
    pub fn pairing(&self, k: usize) -> RationalMatrix {
        let n = self.rank();
        let rows = self.dim(k);
        let cols = self.dim(n - k);
        RationalMatrix::from_fn(rows, cols, |r, c| {
            let mut a = vec![Rational::zero(); rows];
            a[r] = rat(1);
            let mut b = vec![Rational::zero(); cols];
            b[c] = rat(1);
            self.integrate(&self.cup(k, &a, n - k, &b))
        })
    }

    /// Poincare duality and hard Lefschetz for the anticanonical class.
    pub fn verify_duality_and_lefschetz(&self) -> Result<(), ToricError> {
        let n = self.rank();
        let c1 = self.anticanonical();
        for k in 0..=n {
            if self.dim(k) != self.dim(n - k) {
                return Err(ToricError::BadFan(format!("duality fails at degree {k}")));
            }
            if self.dim(k) > 0 && rank(&self.pairing(k)) != self.dim(k) {
                return Err(ToricError::BadFan(format!("pairing degenerate at degree {k}")));
            }
        }
        for k in 0..n {
            if 2 * k >= n {
                break;
            }
            let mut m = RationalMatrix::identity(self.dim(k));
            for step in 0..(n - 2 * k) {
                m = self.cup_matrix(&c1, k + step).mul(&m);
            }
            if rank(&m) != self.dim(k) {
                return Err(ToricError::BadFan(format!("hard Lefschetz fails from degree {k}")));
            }
        }
        Ok(())
    }
}

/// The graded model of the associated quantum module at the large-volume
/// point: one component in degree `rank`, scaling weight `rank - p` on the
/// degree-`p` classes, residue the anticanonical cup product.
pub fn fano_rescaling(ring: &CohomologyRing, label: &str) -> RescalingModel {
    let n = ring.rank();
    let dim: usize = (0..=n).map(|k| ring.dim(k)).sum();
    let mut two_weights = Vec::with_capacity(dim);
    let mut offsets = Vec::new();
    let mut off = 0usize;
    for k in 0..=n {
        offsets.push(off);
        for _ in 0..ring.dim(k) {
            two_weights.push(2 * (n as i64 - k as i64));
        }
        off += ring.dim(k);
    }
    let c1 = ring.anticanonical();
    let mut residue = RationalMatrix::zero(dim, dim);
    for k in 0..n {
        let m = ring.cup_matrix(&c1, k);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                residue[(offsets[k + 1] + r, offsets[k] + c)] = m[(r, c)].clone();
            }
        }
    }
    let comp = Component { two_weights, residue };
    RescalingModel::new(BTreeMap::from([(n as i64, comp)]), label)
        .expect("cup product shifts the grading by one")
}

/// Fan of projective n-space.
pub fn projective_space_fan(n: usize) -> GeneralFan {
    let mut rays: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect();
    rays.push(vec![-1; n]);
    let max_cones = (0..=n)
        .map(|skip| (0..=n).filter(|&i| i != skip).collect())
        .collect();
    GeneralFan { rays, max_cones }
}

/// Fan of the n-fold product of projective lines.
pub fn product_of_lines_fan(n: usize) -> GeneralFan {
    let mut rays = Vec::new();
    for i in 0..n {
        for s in [1i64, -1] {
            let mut v = vec![0i64; n];
            v[i] = s;
            rays.push(v);
        }
    }
    let mut max_cones = Vec::new();
    for mask in 0..(1usize << n) {
        let cone: Vec<usize> = (0..n).map(|i| 2 * i + ((mask >> i) & 1)).collect();
        max_cones.push(cone);
    }
    GeneralFan { rays, max_cones }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_plane_ring() {
        let ring = cohomology_ring(&projective_space_fan(2)).unwrap();
        assert_eq!(ring.dims, vec![1, 1, 1]);
        ring.verify_duality_and_lefschetz().unwrap();
        // The anticanonical class is three times the hyperplane: its
        // square integrates to nine.
        let c1 = ring.anticanonical();
        let sq = ring.cup(1, &c1, 1, &c1);
        assert_eq!(ring.integrate(&sq), rat(9));
    }

    #[test]
    fn projective_3_space_ring() {
        let ring = cohomology_ring(&projective_space_fan(3)).unwrap();
        assert_eq!(ring.dims, vec![1, 1, 1, 1]);
        ring.verify_duality_and_lefschetz().unwrap();
        let c1 = ring.anticanonical();
        let sq = ring.cup(1, &c1, 1, &c1);
        let cube = ring.cup(2, &sq, 1, &c1);
        assert_eq!(ring.integrate(&cube), rat(64));
    }

    #[test]
    fn product_of_three_lines_ring() {
        let ring = cohomology_ring(&product_of_lines_fan(3)).unwrap();
        assert_eq!(ring.dims, vec![1, 3, 3, 1]);
        ring.verify_duality_and_lefschetz().unwrap();
        let c1 = ring.anticanonical();
        let sq = ring.cup(1, &c1, 1, &c1);
        let cube = ring.cup(2, &sq, 1, &c1);
        assert_eq!(ring.integrate(&cube), rat(48));
        assert_eq!(rank(&ring.cup_matrix(&c1, 1)), 3);
    }

    #[test]
    fn fano_models() {
        for (fan, n) in [
            (projective_space_fan(2), 2usize),
            (projective_space_fan(3), 3),
            (product_of_lines_fan(3), 3),
        ] {
            let ring = cohomology_ring(&fan).unwrap();
            let model = fano_rescaling(&ring, "fano");
            assert!(model.ht_condition().unwrap().is_hodge_tate);
            let f = model.f_table().unwrap();
            let h = model.h_table().unwrap();
            assert_eq!(f, h);
            // The table matches the Hodge numbers of the variety on the
            // complementary diagonal.
            for (&(p, q), &d) in &f {
                assert_eq!(q, n as i64 - p, "diagonal support");
                assert_eq!(d, ring.dim((n as i64 - p) as usize));
            }
            assert!(model.speciality().unwrap().special);
        }
    }

    #[test]
    fn p3_single_chain() {
        let ring = cohomology_ring(&projective_space_fan(3)).unwrap();
        let model = fano_rescaling(&ring, "p3");
        let comp = &model.components()[&3];
        let op = crate::filtration::NilpotentOp::new(comp.residue.clone()).unwrap();
        assert_eq!(op.nilpotency_index(), 4);
    }

    #[test]
    fn incomplete_fan_rejected() {
        let mut fan = projective_space_fan(2);
        fan.max_cones.pop();
        assert!(matches!(cohomology_ring(&fan), Err(ToricError::NotComplete)));
    }
}
