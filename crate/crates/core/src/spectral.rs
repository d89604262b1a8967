//! Weight spectral sequence engine on strata data.
//!
//! The first page is a grid of stratum cohomology groups indexed by
//! `(i, j, k)` with `k >= max(0, i)`: the cell holds `H^(i+j-2k+n)` of the
//! stratum level `2k - i + shift` carrying the Tate twist `i - k`. Shift 0
//! computes the pages converging to the relative cohomology of the pair,
//! shift 1 the pages of the nearby fiber. The differential out of a cell
//! has a level-lowering component (minus the assembled Gysin map, keeping
//! `k`) and a level-raising component (the assembled restriction map,
//! raising `k`). A cell of degree `q = j + n` contributes to the weight
//! `w = j - i + n` graded piece, and with Tate-only strata every nonzero
//! cell weight is even, which is what forces degeneration after the second
//! page: the next differential would change the weight parity.

use crate::linalg::{
    is_subspace, kernel_basis, rank, rat, column_space_basis, solve, RationalMatrix,
};
use crate::rescaling::{Component, RescalingModel};
use crate::strata::{epsilon, StrataComplex, StrataError};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error("differential squared is nonzero at weight {0}, degree {1}")]
    D1Square(i64, i64),
    #[error("component differentials fail the graded square split at weight {0}, degree {1}")]
    D1ComponentSquare(i64, i64),
    #[error("second-page degeneration cannot be certified at degree {0}, weight {1}")]
    DegenerationFails(i64, i64),
    #[error("monodromy operator does not commute with the differential at weight {0}, degree {1}")]
    MonodromyCommutator(i64, i64),
    #[error("monodromy power {0} is not an isomorphism on the grid at row {1}")]
    MonodromyIso(i64, i64),
    #[error("monodromy kernel at column {0}, row {1} is not the level-zero block")]
    MonodromyKernel(i64, i64),
    #[error("Lefschetz power {0} is not an isomorphism on the grid at column {1}")]
    LefschetzIso(i64, i64),
    #[error("Lefschetz does not commute with the differential at weight {0}, degree {1}")]
    LefschetzCommutator(i64, i64),
    #[error("pairing adjointness fails out of cell (i={0}, j={1}, k={2})")]
    PairingAdjoint(i64, i64, i64),
    #[error("pairing antisymmetry with the {3} operator fails at cell (i={0}, j={1}, k={2})")]
    PairingAntisymmetry(i64, i64, i64, &'static str),
    #[error("primitive positivity fails on stratum level {0}, Lefschetz degree {1}")]
    Positivity(usize, i64),
    #[error("monodromy power {0} is not an isomorphism on the second page at degree {1}")]
    MonodromyPageIso(i64, i64),
    #[error("long exact sequence fails at weight {0}")]
    ExactnessFail(i64),
    #[error("invariant-cycle dimension bound fails at degree {0}")]
    ClemensSchmid(i64),
}

/// Cell key of the first page.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub i: i64,
    pub j: i64,
    pub k: i64,
}

#[derive(Debug, Clone)]
pub struct CellInfo {
    /// Stratum level the cell lives on.
    pub level: usize,
    /// Cohomological degree of the stratum group.
    pub degree: i64,
    pub dim: usize,
    /// Tate twist carried by the cell.
    pub twist: i64,
}

/// First page of the weight spectral sequence for one of the two geometric
/// situations (relative pair or nearby fiber).
#[derive(Debug, Clone)]
pub struct WeightGrid {
    strata: StrataComplex,
    stratum_shift: usize,
    cells: BTreeMap<CellKey, CellInfo>,
}

/// Graded dimensions of a converged page: `(degree, weight) -> dim`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PageSummary {
    pub graded: BTreeMap<(i64, i64), usize>,
}

impl PageSummary {
    pub fn degree_total(&self, q: i64) -> usize {
        self.graded.iter().filter(|((d, _), _)| *d == q).map(|(_, &v)| v).sum()
    }

    pub fn euler(&self) -> i64 {
        self.graded
            .iter()
            .map(|(&(q, _), &d)| if q.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    pub fn max_degree(&self) -> i64 {
        self.graded.keys().map(|&(q, _)| q).max().unwrap_or(0)
    }

    pub fn weights(&self) -> Vec<i64> {
        let mut ws: Vec<i64> = self.graded.keys().map(|&(_, w)| w).collect();
        ws.sort();
        ws.dedup();
        ws
    }
}

/// Second page with representatives, enough to induce the monodromy
/// operator on classes.
#[derive(Debug, Clone)]
struct E2Cell {
    dim: usize,
    /// Columns are cocycle representatives in the E1 chain group coordinates.
    reps: RationalMatrix,
    /// Basis of the boundary subspace in the same coordinates.
    boundaries: RationalMatrix,
}

#[derive(Debug, Clone)]
pub struct SecondPage {
    cells: BTreeMap<(i64, i64), E2Cell>,
}

impl SecondPage {
    pub fn summary(&self) -> PageSummary {
        let graded = self
            .cells
            .iter()
            .filter(|(_, c)| c.dim > 0)
            .map(|(&qw, c)| (qw, c.dim))
            .collect();
        PageSummary { graded }
    }
}

impl WeightGrid {
    /// Build the grid over validated strata. `stratum_shift` 0 gives the
    /// relative pages, 1 the nearby-fiber pages.
    pub fn new(strata: &StrataComplex, stratum_shift: usize) -> Result<Self, SpectralError> {
        strata.validate()?;
        let n = strata.ambient_dim as i64;
        let mut cells = BTreeMap::new();
        for k in 0..=n {
            let i_lo = 2 * k + stratum_shift as i64 - n;
            for i in i_lo..=k {
                let level = (2 * k - i) as usize + stratum_shift;
                if level > strata.ambient_dim {
                    continue;
                }
                let top = 2 * strata.stratum_dim(level) as i64;
                for s in (0..=top).step_by(2) {
                    let dim = strata.dim(level, s);
                    if dim == 0 {
                        continue;
                    }
                    let j = s - i + 2 * k - n;
                    cells.insert(
                        CellKey { i, j, k },
                        CellInfo { level, degree: s, dim, twist: i - k },
                    );
                }
            }
        }
        Ok(WeightGrid { strata: strata.clone(), stratum_shift, cells })
    }

    pub fn cells(&self) -> &BTreeMap<CellKey, CellInfo> {
        &self.cells
    }

    pub fn cell_dim(&self, key: CellKey) -> usize {
        self.cells.get(&key).map_or(0, |c| c.dim)
    }

    fn cell_weight(key: CellKey, n: i64) -> i64 {
        key.j - key.i + n
    }

    fn n(&self) -> i64 {
        self.strata.ambient_dim as i64
    }

    /// Cells contributing to chain group of weight `w`, degree `q`, sorted
    /// by `k`.
    fn chain_cells(&self, w: i64, q: i64) -> Vec<CellKey> {
        let n = self.n();
        let i = q - w;
        let j = q - n;
        let mut out = Vec::new();
        for k in 0.max(i)..=n {
            let key = CellKey { i, j, k };
            if self.cells.contains_key(&key) {
                out.push(key);
            }
        }
        out
    }

    fn group_dim(&self, cells: &[CellKey]) -> usize {
        cells.iter().map(|&c| self.cell_dim(c)).sum()
    }

    fn offsets(&self, cells: &[CellKey]) -> BTreeMap<CellKey, usize> {
        let mut out = BTreeMap::new();
        let mut off = 0;
        for &c in cells {
            out.insert(c, off);
            off += self.cell_dim(c);
        }
        out
    }

    /// Assemble a map between two cell groups from per-cell components.
    /// `component(src) -> Vec<(target cell, matrix)>`.
    fn assemble(
        &self,
        src: &[CellKey],
        dst: &[CellKey],
        component: impl Fn(CellKey) -> Vec<(CellKey, RationalMatrix)>,
    ) -> RationalMatrix {
        let src_off = self.offsets(src);
        let dst_off = self.offsets(dst);
        let mut out = RationalMatrix::zero(self.group_dim(dst), self.group_dim(src));
        for &s in src {
            for (target, m) in component(s) {
                let Some(&doff) = dst_off.get(&target) else { continue };
                let soff = src_off[&s];
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        out[(doff + r, soff + c)] = m[(r, c)].clone();
                    }
                }
            }
        }
        out
    }

    /// Level-lowering differential component (minus the assembled Gysin).
    fn gysin_component(&self, key: CellKey) -> Vec<(CellKey, RationalMatrix)> {
        let info = &self.cells[&key];
        let m = self.strata.gysin_map(info.level, info.degree).neg();
        vec![(CellKey { i: key.i + 1, j: key.j + 1, k: key.k }, m)]
    }

    /// Level-raising differential component (the assembled restriction).
    fn restriction_component(&self, key: CellKey) -> Vec<(CellKey, RationalMatrix)> {
        let info = &self.cells[&key];
        let m = self.strata.restriction_map(info.level, info.degree);
        vec![(CellKey { i: key.i + 1, j: key.j + 1, k: key.k + 1 }, m)]
    }

    fn d1_component(&self, key: CellKey) -> Vec<(CellKey, RationalMatrix)> {
        let mut out = self.gysin_component(key);
        out.extend(self.restriction_component(key));
        out
    }

    fn nu_component(&self, key: CellKey) -> Vec<(CellKey, RationalMatrix)> {
        let d = self.cell_dim(key);
        vec![(CellKey { i: key.i + 2, j: key.j, k: key.k + 1 }, RationalMatrix::identity(d))]
    }

    fn lefschetz_component(&self, key: CellKey) -> Vec<(CellKey, RationalMatrix)> {
        let info = &self.cells[&key];
        let m = self.strata.lefschetz_map(info.level, info.degree);
        vec![(CellKey { i: key.i, j: key.j + 2, k: key.k }, m)]
    }

    fn weight_range(&self) -> (i64, i64) {
        let n = self.n();
        let lo = self.cells.keys().map(|k| Self::cell_weight(*k, n)).min().unwrap_or(0);
        let hi = self.cells.keys().map(|k| Self::cell_weight(*k, n)).max().unwrap_or(0);
        (lo, hi)
    }

    fn degree_range(&self) -> (i64, i64) {
        let n = self.n();
        let lo = self.cells.keys().map(|k| k.j + n).min().unwrap_or(0);
        let hi = self.cells.keys().map(|k| k.j + n).max().unwrap_or(0);
        (lo, hi)
    }

    fn differential(&self, w: i64, q: i64) -> RationalMatrix {
        let src = self.chain_cells(w, q);
        let dst = self.chain_cells(w, q + 1);
        self.assemble(&src, &dst, |c| self.d1_component(c))
    }

    /// The differential must square to zero, and its two components must
    /// split the square: each squares to zero and the cross terms cancel.
    pub fn check_d1_squared(&self) -> Result<(), SpectralError> {
        let (wlo, whi) = self.weight_range();
        let (qlo, qhi) = self.degree_range();
        for w in wlo..=whi {
            for q in qlo..=qhi {
                let src = self.chain_cells(w, q);
                if src.is_empty() {
                    continue;
                }
                let mid = self.chain_cells(w, q + 1);
                let dst = self.chain_cells(w, q + 2);
                let d0 = self.differential(w, q);
                let d1 = self.differential(w, q + 1);
                if !d1.mul(&d0).is_zero() {
                    return Err(SpectralError::D1Square(w, q));
                }
                let g0 = self.assemble(&src, &mid, |c| self.gysin_component(c));
                let g1 = self.assemble(&mid, &dst, |c| self.gysin_component(c));
                let r0 = self.assemble(&src, &mid, |c| self.restriction_component(c));
                let r1 = self.assemble(&mid, &dst, |c| self.restriction_component(c));
                if !g1.mul(&g0).is_zero()
                    || !r1.mul(&r0).is_zero()
                    || !g1.mul(&r0).add(&r1.mul(&g0)).is_zero()
                {
                    return Err(SpectralError::D1ComponentSquare(w, q));
                }
            }
        }
        Ok(())
    }

    /// Second page with representatives. Degeneration is certified
    /// structurally: any further differential would connect weights of
    /// opposite parity, so it suffices that no nonzero cell has a nonzero
    /// neighbour one step along the next differential.
    pub fn second_page(&self) -> Result<SecondPage, SpectralError> {
        let (wlo, whi) = self.weight_range();
        let (qlo, qhi) = self.degree_range();
        let mut cells = BTreeMap::new();
        for w in wlo..=whi {
            for q in qlo..=qhi {
                let group = self.chain_cells(w, q);
                if group.is_empty() {
                    continue;
                }
                let d_out = self.differential(w, q);
                let d_in = self.differential(w, q - 1);
                let (dim, reps, boundaries) = homology_with_reps(&d_in, &d_out);
                cells.insert((q, w), E2Cell { dim, reps, boundaries });
            }
        }
        // Degeneration certificate.
        for (&(q, w), cell) in &cells {
            if cell.dim == 0 {
                continue;
            }
            let forward = cells.get(&(q + 1, w - 1)).map_or(0, |c| c.dim);
            let backward = cells.get(&(q - 1, w + 1)).map_or(0, |c| c.dim);
            if forward != 0 || backward != 0 {
                return Err(SpectralError::DegenerationFails(q, w));
            }
        }
        Ok(SecondPage { cells })
    }

    /// Monodromy operator checks on the grid and on the second page.
    pub fn monodromy_checks(&self, page: &SecondPage) -> Result<(), SpectralError> {
        let n = self.n();
        let (wlo, whi) = self.weight_range();
        let (qlo, qhi) = self.degree_range();
        // Commutation with the differential.
        for w in wlo..=whi {
            for q in qlo..=qhi {
                let src = self.chain_cells(w, q);
                if src.is_empty() {
                    continue;
                }
                let dst_nu = self.chain_cells(w - 2, q);
                let dst_mixed = self.chain_cells(w - 2, q + 1);
                let mid = self.chain_cells(w, q + 1);
                let nu_then_d = self
                    .assemble(&dst_nu, &dst_mixed, |c| self.d1_component(c))
                    .mul(&self.assemble(&src, &dst_nu, |c| self.nu_component(c)));
                let d_then_nu = self
                    .assemble(&mid, &dst_mixed, |c| self.nu_component(c))
                    .mul(&self.assemble(&src, &mid, |c| self.d1_component(c)));
                if nu_then_d != d_then_nu {
                    return Err(SpectralError::MonodromyCommutator(w, q));
                }
            }
        }
        // Grid isomorphisms nu^i : column -i -> column i and the kernel
        // statement: on column -i the kernel of nu^(i+1) is the k = 0 block.
        let max_col = self.cells.keys().map(|c| c.i.abs()).max().unwrap_or(0);
        let j_range: Vec<i64> = {
            let mut v: Vec<i64> = self.cells.keys().map(|c| c.j).collect();
            v.sort();
            v.dedup();
            v
        };
        for i in 0..=max_col {
            for &j in &j_range {
                let src: Vec<CellKey> =
                    self.cells.keys().filter(|c| c.i == -i && c.j == j).copied().collect();
                if i > 0 {
                    let dst: Vec<CellKey> =
                        self.cells.keys().filter(|c| c.i == i && c.j == j).copied().collect();
                    let m = self.iterated_nu(&src, i);
                    if self.group_dim(&src) != self.group_dim(&dst)
                        || rank(&m) != self.group_dim(&src)
                    {
                        return Err(SpectralError::MonodromyIso(i, j));
                    }
                }
                if !src.is_empty() {
                    let m = self.iterated_nu(&src, i + 1);
                    let ker = kernel_basis(&m);
                    let zero_block_dim = self.cell_dim(CellKey { i: -i, j, k: 0 });
                    if ker.cols() != zero_block_dim {
                        return Err(SpectralError::MonodromyKernel(-i, j));
                    }
                }
            }
        }
        // Second-page isomorphisms nu^r : Gr_(q+r) ~ Gr_(q-r).
        for q in qlo..=qhi {
            let max_r = (whi - q).max(q - wlo).max(0);
            for r in 1..=max_r {
                let up = page.cells.get(&(q, q + r));
                let down = page.cells.get(&(q, q - r));
                let dim_up = up.map_or(0, |c| c.dim);
                let dim_down = down.map_or(0, |c| c.dim);
                if dim_up != dim_down {
                    return Err(SpectralError::MonodromyPageIso(r, q));
                }
                if dim_up == 0 {
                    continue;
                }
                let induced = self.induced_nu_power(page, q, q + r, r as usize);
                if rank(&induced) != dim_up {
                    return Err(SpectralError::MonodromyPageIso(r, q));
                }
            }
        }
        Ok(())
    }

    fn iterated_nu(&self, src: &[CellKey], times: i64) -> RationalMatrix {
        let mut current: Vec<CellKey> = src.to_vec();
        let mut acc = RationalMatrix::identity(self.group_dim(src));
        for _ in 0..times {
            let next: Vec<CellKey> = current
                .iter()
                .map(|c| CellKey { i: c.i + 2, j: c.j, k: c.k + 1 })
                .filter(|c| self.cells.contains_key(c))
                .collect();
            let step = self.assemble(&current, &next, |c| self.nu_component(c));
            acc = step.mul(&acc);
            current = next;
        }
        acc
    }

    /// Monodromy power induced on second-page classes from weight `w` down
    /// to `w - 2*power` in the same degree.
    fn induced_nu_power(
        &self,
        page: &SecondPage,
        q: i64,
        w: i64,
        power: usize,
    ) -> RationalMatrix {
        let src_cell = &page.cells[&(q, w)];
        let src_cells = self.chain_cells(w, q);
        let mut vectors = src_cell.reps.clone();
        let mut cur_cells = src_cells;
        let mut cur_w = w;
        for _ in 0..power {
            let dst_cells = self.chain_cells(cur_w - 2, q);
            let m = self.assemble(&cur_cells, &dst_cells, |c| self.nu_component(c));
            vectors = m.mul(&vectors);
            cur_cells = dst_cells;
            cur_w -= 2;
        }
        let target = &page.cells[&(q, cur_w)];
        express_mod_boundaries(&target.reps, &target.boundaries, &vectors)
    }

    /// Lefschetz checks: commutation with the differential and the hard
    /// Lefschetz isomorphisms on the grid rows.
    pub fn lefschetz_checks(&self) -> Result<(), SpectralError> {
        let (wlo, whi) = self.weight_range();
        let (qlo, qhi) = self.degree_range();
        for w in wlo..=whi {
            for q in qlo..=qhi {
                let src = self.chain_cells(w, q);
                if src.is_empty() {
                    continue;
                }
                let up = self.chain_cells(w + 2, q + 2);
                let dst = self.chain_cells(w + 2, q + 3);
                let mid = self.chain_cells(w, q + 1);
                let l_then_d = self
                    .assemble(&up, &dst, |c| self.d1_component(c))
                    .mul(&self.assemble(&src, &up, |c| self.lefschetz_component(c)));
                let d_then_l = self
                    .assemble(&mid, &dst, |c| self.lefschetz_component(c))
                    .mul(&self.assemble(&src, &mid, |c| self.d1_component(c)));
                if l_then_d != d_then_l {
                    return Err(SpectralError::LefschetzCommutator(w, q));
                }
            }
        }
        // L^j : row -j -> row j; this bi-graded Lefschetz structure exists
        // on the relative grid only.
        if self.stratum_shift != 0 {
            return Ok(());
        }
        let max_row = self.cells.keys().map(|c| c.j.abs()).max().unwrap_or(0);
        let i_range: Vec<i64> = {
            let mut v: Vec<i64> = self.cells.keys().map(|c| c.i).collect();
            v.sort();
            v.dedup();
            v
        };
        for j in 1..=max_row {
            for &i in &i_range {
                let src: Vec<CellKey> =
                    self.cells.keys().filter(|c| c.i == i && c.j == -j).copied().collect();
                if src.is_empty() {
                    continue;
                }
                let dst: Vec<CellKey> =
                    self.cells.keys().filter(|c| c.i == i && c.j == j).copied().collect();
                let mut acc = RationalMatrix::identity(self.group_dim(&src));
                let mut cur = src.clone();
                for step in 0..j {
                    let next: Vec<CellKey> = cur
                        .iter()
                        .map(|c| CellKey { i: c.i, j: c.j + 2, k: c.k })
                        .filter(|c| self.cells.contains_key(c))
                        .collect();
                    acc = self.assemble(&cur, &next, |c| self.lefschetz_component(c)).mul(&acc);
                    cur = next;
                    let _ = step;
                }
                if self.group_dim(&src) != self.group_dim(&dst)
                    || rank(&acc) != self.group_dim(&src)
                {
                    return Err(SpectralError::LefschetzIso(j, i));
                }
            }
        }
        Ok(())
    }

    /// The pairing couples the cell `(-i, -j, k)` with `(i, j, k + i)` on
    /// the common stratum level `2k + i` through the intersection form,
    /// weighted by `epsilon(i + j - n)`.
    ///
    /// Checked here: adjointness of the two differential components,
    /// `psi(d'x, y) = psi(x, d''y)`, plus primitive positivity. The
    /// antisymmetry of the pairing against the monodromy and Lefschetz
    /// operators reduces to `epsilon(c-2) = -epsilon(c)` together with the
    /// Lefschetz self-adjointness already validated on the strata, so it
    /// needs no runtime pass of its own. Only the relative grid carries
    /// this structure.
    pub fn pairing_checks(&self) -> Result<(), SpectralError> {
        debug_assert_eq!(self.stratum_shift, 0, "the pairing lives on the relative grid");
        let n = self.n();
        for (&a, info_a) in &self.cells {
            // a is the source of the level-lowering component; the partner
            // cell of its image is b, and the partner of a itself is c.
            let b = CellKey { i: -a.i - 1, j: -a.j - 1, k: a.k - a.i - 1 };
            let Some(info_b) = self.cells.get(&b) else { continue };
            // psi(d'x, y) with x in a, y in b.
            let g = self.strata.gysin_map(info_a.level, info_a.degree).neg();
            let p_up = self.strata.pairing_matrix(info_a.level - 1, info_a.degree + 2);
            let eps_up = epsilon(-a.i - a.j - 2 - n);
            let lhs = g.transpose().mul(&p_up).scale(&rat(eps_up));
            // psi(x, d''y) with the restriction out of b landing in c.
            let p_here = self.strata.pairing_matrix(info_a.level, info_a.degree);
            let r = self.strata.restriction_map(info_b.level, info_b.degree);
            let eps_here = epsilon(-a.i - a.j - n);
            let rhs = p_here.mul(&r).scale(&rat(eps_here));
            if lhs != rhs {
                return Err(SpectralError::PairingAdjoint(a.i, a.j, a.k));
            }
        }
        self.strata.primitive_positivity().map_err(|(m, j)| SpectralError::Positivity(m, j))?;
        Ok(())
    }

    /// Build the graded model of the converged pages: per degree, the
    /// weight-graded pieces with their Tate index `w / 2` as scaling
    /// weight, and the monodromy operator induced on classes as residue.
    pub fn assemble_rescaling(&self, label: &str) -> Result<RescalingModel, SpectralError> {
        let page = self.second_page()?;
        let mut components: BTreeMap<i64, Component> = BTreeMap::new();
        let (qlo, qhi) = self.degree_range();
        for q in qlo..=qhi {
            let mut weights_desc: Vec<(i64, usize)> = page
                .cells
                .iter()
                .filter(|(&(qq, _), c)| qq == q && c.dim > 0)
                .map(|(&(_, w), c)| (w, c.dim))
                .collect();
            if weights_desc.is_empty() {
                continue;
            }
            weights_desc.sort_by(|a, b| b.0.cmp(&a.0));
            let dim: usize = weights_desc.iter().map(|x| x.1).sum();
            let mut two_weights = Vec::with_capacity(dim);
            let mut offsets: BTreeMap<i64, usize> = BTreeMap::new();
            for &(w, d) in &weights_desc {
                offsets.insert(w, two_weights.len());
                for _ in 0..d {
                    two_weights.push(w);
                }
            }
            // Residue: nu induced on classes, dropping the weight by two.
            let mut residue = RationalMatrix::zero(dim, dim);
            for &(w, d) in &weights_desc {
                if let Some(target) = page.cells.get(&(q, w - 2)) {
                    if target.dim == 0 {
                        continue;
                    }
                    let m = self.induced_nu_power(&page, q, w, 1);
                    let roff = offsets[&(w - 2)];
                    let coff = offsets[&w];
                    for r in 0..m.rows() {
                        for c in 0..d {
                            residue[(roff + r, coff + c)] = m[(r, c)].clone();
                        }
                    }
                }
            }
            components.insert(q, Component { two_weights, residue });
        }
        RescalingModel::new(components, label).map_err(|e| {
            // A failed weight shift here means the page carried odd weights.
            SpectralError::DegenerationFails(0, match e {
                crate::rescaling::RescalingError::BadWeightShift(k, _, _) => k,
                _ => 0,
            })
        })
    }

    pub fn strata(&self) -> &StrataComplex {
        &self.strata
    }

    pub fn stratum_shift(&self) -> usize {
        self.stratum_shift
    }
}

/// Homology at the middle of `d_in` then `d_out`, with representative
/// columns and the boundary basis.
fn homology_with_reps(
    d_in: &RationalMatrix,
    d_out: &RationalMatrix,
) -> (usize, RationalMatrix, RationalMatrix) {
    let cycles = kernel_basis(d_out);
    let boundaries = column_space_basis(d_in);
    let nn = d_out.cols();
    if nn == 0 {
        return (0, RationalMatrix::zero(0, 0), boundaries);
    }
    let mut reps: Vec<Vec<crate::linalg::Rational>> = Vec::new();
    let mut span = boundaries.clone();
    for j in 0..cycles.cols() {
        let col = RationalMatrix::from_cols(nn, &[cycles.col(j)]);
        if !is_subspace(&col, &span) {
            span = span.hstack(&col);
            reps.push(cycles.col(j));
        }
    }
    (reps.len(), RationalMatrix::from_cols(nn, &reps), boundaries)
}

/// Coordinates of `vectors` in the class basis `reps` modulo `boundaries`.
fn express_mod_boundaries(
    reps: &RationalMatrix,
    boundaries: &RationalMatrix,
    vectors: &RationalMatrix,
) -> RationalMatrix {
    let combined = reps.hstack(boundaries);
    let mut out = RationalMatrix::zero(reps.cols(), vectors.cols());
    for j in 0..vectors.cols() {
        let x = solve(&combined, &vectors.col(j)).expect("class must be expressible");
        for r in 0..reps.cols() {
            out[(r, j)] = x[r].clone();
        }
    }
    out
}

/// Weight-graded page of the open complement: level-`m` cells in degree
/// `q` carry `H^(2q-w)` of level `w - q` with the Gysin differential.
pub fn open_page(strata: &StrataComplex) -> Result<PageSummary, SpectralError> {
    strata.validate()?;
    let n = strata.ambient_dim as i64;
    let mut graded = BTreeMap::new();
    for w in 0..=(2 * n) {
        // Chain group at degree q: H^(2q - w)(level w - q).
        let dim = |q: i64| -> usize {
            let m = w - q;
            if m < 0 || m > n {
                return 0;
            }
            strata.dim(m as usize, 2 * q - w)
        };
        let map = |q: i64| -> RationalMatrix {
            let m = w - q;
            if m < 1 || m > n {
                return RationalMatrix::zero(dim(q + 1), dim(q));
            }
            strata.gysin_map(m as usize, 2 * q - w)
        };
        for q in 0..=(2 * n) {
            if dim(q) == 0 {
                continue;
            }
            let d_out = map(q);
            let d_in = map(q - 1);
            let h = kernel_basis(&d_out).cols() - rank(&d_in);
            if h > 0 {
                graded.insert((q, w), h);
            }
        }
    }
    Ok(PageSummary { graded })
}

/// Weight-graded cohomology of the divisor union via the intersection
/// lattice: cells `H^w(level s+1)` with the restriction differential.
pub fn divisor_page(strata: &StrataComplex) -> Result<PageSummary, SpectralError> {
    strata.validate()?;
    let n = strata.ambient_dim as i64;
    let mut graded = BTreeMap::new();
    for w in (0..=(2 * n)).step_by(1) {
        let dim = |s: i64| -> usize {
            if s < 0 || s + 1 > n {
                return 0;
            }
            strata.dim((s + 1) as usize, w)
        };
        let map = |s: i64| -> RationalMatrix {
            if s < 0 || s + 1 > n {
                return RationalMatrix::zero(dim(s + 1), dim(s));
            }
            strata.restriction_map((s + 1) as usize, w)
        };
        for s in 0..=n {
            if dim(s) == 0 {
                continue;
            }
            let d_out = map(s);
            let d_in = map(s - 1);
            let h = kernel_basis(&d_out).cols() - rank(&d_in);
            if h > 0 {
                graded.insert((s + w, w), h);
            }
        }
    }
    Ok(PageSummary { graded })
}

/// All four summaries in one bundle.
#[derive(Debug, Clone)]
pub struct PageBundle {
    pub relative: PageSummary,
    pub open: PageSummary,
    pub nearby: PageSummary,
    pub divisor: PageSummary,
}

pub fn compute_pages(strata: &StrataComplex) -> Result<PageBundle, SpectralError> {
    let rel = WeightGrid::new(strata, 0)?;
    let near = WeightGrid::new(strata, 1)?;
    Ok(PageBundle {
        relative: rel.second_page()?.summary(),
        open: open_page(strata)?,
        nearby: near.second_page()?.summary(),
        divisor: divisor_page(strata)?,
    })
}

/// Dimension-level exactness of the long exact sequence of the pair per
/// weight-graded piece, plus the invariant-cycle dimension bound against
/// the divisor cohomology.
pub fn les_check(strata: &StrataComplex) -> Result<PageBundle, SpectralError> {
    let bundle = compute_pages(strata)?;
    let mut weights: Vec<i64> = Vec::new();
    for page in [&bundle.relative, &bundle.open, &bundle.nearby] {
        weights.extend(page.weights());
    }
    weights.sort();
    weights.dedup();
    let max_q = bundle
        .relative
        .max_degree()
        .max(bundle.open.max_degree())
        .max(bundle.nearby.max_degree());
    for &w in &weights {
        let mut acc: i64 = 0;
        for q in 0..=max_q {
            let a = *bundle.relative.graded.get(&(q, w)).unwrap_or(&0) as i64;
            let b = *bundle.open.graded.get(&(q, w)).unwrap_or(&0) as i64;
            let c = *bundle.nearby.graded.get(&(q, w)).unwrap_or(&0) as i64;
            let sign = if q % 2 == 0 { 1 } else { -1 };
            acc += sign * (a - b + c);
        }
        if acc != 0 {
            return Err(SpectralError::ExactnessFail(w));
        }
    }
    // Invariant-cycle bound: the monodromy-invariant part of each nearby
    // degree is bounded by the divisor cohomology in that degree. The
    // kernel dimension of the monodromy logarithm is the number of its
    // chains, which the weight-graded dimensions determine as
    // Gr_q + Gr_(q+1).
    for q in 0..=max_q {
        let inv = *bundle.nearby.graded.get(&(q, q)).unwrap_or(&0)
            + *bundle.nearby.graded.get(&(q, q + 1)).unwrap_or(&0);
        let divisor_total = bundle.divisor.degree_total(q);
        let nearby_total = bundle.nearby.degree_total(q);
        if nearby_total > 0 && inv > divisor_total {
            return Err(SpectralError::ClemensSchmid(q));
        }
    }
    Ok(bundle)
}

/// Run every engine check on one strata complex: the differential squares,
/// degeneration, monodromy, Lefschetz, pairing, and the long exact
/// sequence bookkeeping.
pub fn full_check(strata: &StrataComplex) -> Result<PageBundle, SpectralError> {
    for shift in [0usize, 1] {
        let grid = WeightGrid::new(strata, shift)?;
        grid.check_d1_squared()?;
        let page = grid.second_page()?;
        grid.monodromy_checks(&page)?;
        grid.lefschetz_checks()?;
        if shift == 0 {
            grid.pairing_checks()?;
        }
    }
    les_check(strata)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ambient variety with empty divisor: a point in dimension zero.
    #[test]
    fn point_grid_is_trivial() {
        let mut s = StrataComplex::empty(0, "point");
        s.cohomology[0].insert(0, 1);
        s.pairing[0].insert(0, RationalMatrix::identity(1));
        let grid = WeightGrid::new(&s, 0).unwrap();
        assert_eq!(grid.cells().len(), 1);
        grid.check_d1_squared().unwrap();
        let page = grid.second_page().unwrap();
        assert_eq!(page.summary().graded, BTreeMap::from([((0, 0), 1)]));
        grid.monodromy_checks(&page).unwrap();
        grid.lefschetz_checks().unwrap();
        grid.pairing_checks().unwrap();
        let model = grid.assemble_rescaling("point").unwrap();
        assert_eq!(model.total_dim(), 1);
        assert!(model.ht_condition().unwrap().is_hodge_tate);
    }

    /// Empty divisor on a positive-dimensional ambient variety reduces the
    /// grid to the ambient cohomology on the zero column.
    #[test]
    fn empty_divisor_collapses() {
        // Projective line: H^0 and H^2, Lefschetz h with h^2 = 0 beyond top.
        let mut s = StrataComplex::empty(1, "line, no divisor");
        s.cohomology[0].insert(0, 1);
        s.cohomology[0].insert(2, 1);
        s.lefschetz[0].insert(0, RationalMatrix::identity(1));
        s.pairing[0].insert(0, RationalMatrix::identity(1));
        s.pairing[0].insert(2, RationalMatrix::identity(1));
        let grid = WeightGrid::new(&s, 0).unwrap();
        grid.check_d1_squared().unwrap();
        let page = grid.second_page().unwrap();
        assert_eq!(page.summary().graded, BTreeMap::from([((0, 0), 1), ((2, 2), 1)]));
        // Nearby grid needs level >= 1 strata, so it is empty here.
        let near = WeightGrid::new(&s, 1).unwrap();
        assert!(near.cells().is_empty());
    }
}
