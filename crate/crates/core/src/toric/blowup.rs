//! Strata of the pole divisor after resolving the base locus.
//!
//! The pipeline starts from a smooth complete refinement of the normal fan
//! and the Laurent data, blows up the base curves of the pencil one ray at
//! a time, and tracks enough intersection theory to assemble the full
//! strata package: classes on the ambient threefold through the blow-ups,
//! surfaces as ray stars blown up in points, one rational curve per wall,
//! one point per maximal cone. Middle cohomology of the threefold is
//! recorded in a divisor basis; its dual coordinates (through the
//! intersection form) serve as curve coordinates, so the level pairing
//! matrix is the identity.

use super::fan::Fan;
use super::laurent::{pole_analysis, LaurentData, PoleAnalysis};
use super::polytope::{dot, LatticePolytope, Vec3};
use super::ToricError;
use crate::linalg::{rat, solve, Rational, RationalMatrix};
use crate::strata::StrataComplex;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Wall data: the two rays, the third rays of the two adjacent cones, and
/// the relation coefficients `u_x + u_y + alpha u_a + beta u_b = 0`.
#[derive(Debug, Clone)]
struct Wall {
    rays: [usize; 2],
    alpha: Rational,
    beta: Rational,
    others: [usize; 2],
}

struct ToricGeometry {
    fan: Fan,
    walls: Vec<Wall>,
    wall_index: BTreeMap<[usize; 2], usize>,
    /// Rays of the lexicographically first maximal cone; the remaining ray
    /// divisors form the degree-two basis.
    dropped: [usize; 3],
    basis_rays: Vec<usize>,
    /// Coordinates of each ray divisor in the basis.
    div: Vec<Vec<Rational>>,
}

fn vec3_rat(v: Vec3) -> [Rational; 3] {
    [rat(v[0]), rat(v[1]), rat(v[2])]
}

impl ToricGeometry {
    fn new(fan: &Fan) -> Result<Self, ToricError> {
        fan.is_smooth()?;
        fan.check_complete()?;
        let mut walls = Vec::new();
        let mut wall_index = BTreeMap::new();
        for (key, cones) in fan.walls()? {
            let third = |ci: usize| -> usize {
                *fan.max_cones[ci].iter().find(|r| !key.contains(r)).expect("third ray")
            };
            let (x, y) = (third(cones[0]), third(cones[1]));
            // Solve u_x + u_y + alpha u_a + beta u_b = 0.
            let a = fan.rays[key[0]];
            let b = fan.rays[key[1]];
            let rhs: Vec<Rational> = (0..3)
                .map(|i| -rat(fan.rays[x][i] + fan.rays[y][i]))
                .collect();
            let m = RationalMatrix::from_fn(3, 2, |r, c| {
                if c == 0 { vec3_rat(a)[r].clone() } else { vec3_rat(b)[r].clone() }
            });
            let sol = solve(&m, &rhs).ok_or_else(|| {
                ToricError::BadFan(format!("wall {key:?} has no relation"))
            })?;
            wall_index.insert(key, walls.len());
            walls.push(Wall { rays: key, alpha: sol[0].clone(), beta: sol[1].clone(), others: [x, y] });
        }
        let mut cones_sorted = fan.max_cones.clone();
        cones_sorted.sort();
        let sigma0 = cones_sorted[0].clone();
        let dropped = [sigma0[0], sigma0[1], sigma0[2]];
        let basis_rays: Vec<usize> =
            (0..fan.rays.len()).filter(|r| !dropped.contains(r)).collect();
        // Express the dropped divisors through the linear relations
        // sum_rho <e_i, u_rho> D_rho = 0.
        let mat = RationalMatrix::from_fn(3, 3, |i, j| rat(fan.rays[dropped[j]][i]));
        let mut div = vec![Vec::new(); fan.rays.len()];
        for (bi, &r) in basis_rays.iter().enumerate() {
            let mut coords = vec![Rational::zero(); basis_rays.len()];
            coords[bi] = rat(1);
            div[r] = coords;
        }
        for (di, &dropped_ray) in dropped.iter().enumerate() {
            let mut coords = vec![Rational::zero(); basis_rays.len()];
            // Solve for all three dropped at once would be cleaner; do it
            // per ray: dropped coefficients satisfy
            // M * t = -sum_{basis rays} <e_i, u_rho> x_rho per basis unit.
            for (bi, &r) in basis_rays.iter().enumerate() {
                let rhs: Vec<Rational> = (0..3).map(|i| -rat(fan.rays[r][i])).collect();
                let t = solve(&mat, &rhs).expect("dropped cone is unimodular");
                coords[bi] = t[di].clone();
            }
            div[dropped_ray] = coords;
        }
        Ok(ToricGeometry {
            fan: fan.clone(),
            walls,
            wall_index,
            dropped,
            basis_rays,
            div,
        })
    }

    fn ray_count(&self) -> usize {
        self.fan.rays.len()
    }

    /// Triple intersection number of three ray divisors.
    fn triple(&self, a: usize, b: usize, c: usize) -> Rational {
        let mut t = [a, b, c];
        t.sort();
        let [a, b, c] = t;
        if a != b && b != c {
            let mut cone = vec![a, b, c];
            cone.sort();
            return if self.fan.max_cones.iter().any(|mc| {
                let mut s = mc.clone();
                s.sort();
                s == cone
            }) {
                rat(1)
            } else {
                rat(0)
            };
        }
        if a == b && b == c {
            // D_a^3 via a dual vector with <m, u_a> = 1.
            let m = self.dual_vector(a);
            let mut acc = Rational::zero();
            for rho in 0..self.ray_count() {
                if rho == a {
                    continue;
                }
                let coeff = rat(dot(m, self.fan.rays[rho]));
                if coeff.is_zero() {
                    continue;
                }
                acc -= coeff * self.triple_square(a, rho);
            }
            return acc;
        }
        // Exactly two equal: D_e^2 D_o.
        let (e, o) = if a == b { (a, c) } else { (b, a) };
        self.triple_square(e, o)
    }

    /// `D_e^2 . D_o` from the wall relation.
    fn triple_square(&self, e: usize, o: usize) -> Rational {
        let key = [e.min(o), e.max(o)];
        match self.wall_index.get(&key) {
            None => Rational::zero(),
            Some(&wi) => {
                let w = &self.walls[wi];
                if w.rays[0] == e { w.alpha.clone() } else { w.beta.clone() }
            }
        }
    }

    /// Integral vector pairing to one against the chosen ray and to zero
    /// against the other two rays of a smooth cone containing it.
    fn dual_vector(&self, ray: usize) -> Vec3 {
        let cone = self
            .fan
            .max_cones
            .iter()
            .find(|c| c.contains(&ray))
            .expect("complete fan covers every ray");
        let m = RationalMatrix::from_fn(3, 3, |i, j| rat(self.fan.rays[cone[j]][i]));
        let pos = cone.iter().position(|&r| r == ray).unwrap();
        let rhs: Vec<Rational> = (0..3).map(|i| if i == pos { rat(1) } else { rat(0) }).collect();
        // Solve m^T x = unit.
        let x = solve(&m.transpose(), &rhs).expect("smooth cone");
        [
            x[0].to_integer().try_into().unwrap(),
            x[1].to_integer().try_into().unwrap(),
            x[2].to_integer().try_into().unwrap(),
        ]
    }

    /// Dual basis of the tangent directions of a ray: two integral vectors
    /// spanning the annihilator of the ray.
    fn ray_annihilator(&self, ray: usize) -> [Vec3; 2] {
        let cone = self
            .fan
            .max_cones
            .iter()
            .find(|c| c.contains(&ray))
            .expect("complete fan covers every ray");
        let others: Vec<usize> = cone.iter().copied().filter(|&r| r != ray).collect();
        [self.dual_vector_in(cone, others[0]), self.dual_vector_in(cone, others[1])]
    }

    fn dual_vector_in(&self, cone: &[usize], ray: usize) -> Vec3 {
        let m = RationalMatrix::from_fn(3, 3, |i, j| rat(self.fan.rays[cone[j]][i]));
        let pos = cone.iter().position(|&r| r == ray).unwrap();
        let rhs: Vec<Rational> = (0..3).map(|i| if i == pos { rat(1) } else { rat(0) }).collect();
        let x = solve(&m.transpose(), &rhs).expect("smooth cone");
        [
            x[0].to_integer().try_into().unwrap(),
            x[1].to_integer().try_into().unwrap(),
            x[2].to_integer().try_into().unwrap(),
        ]
    }
}

/// State of the ambient threefold through the blow-up stages.
struct AmbientState {
    /// Basis size: toric basis rays then one exceptional class per stage.
    dim: usize,
    toric_dim: usize,
    /// Symmetric triple products on the basis.
    triples: Vec<Vec<Vec<Rational>>>,
    /// Anticanonical class coordinates.
    anticanonical: Vec<Rational>,
    /// Base curves per ray (functional coordinates), shrunk as stages run.
    base_curves: Vec<Vec<Rational>>,
    /// Wall curves (functional coordinates of the strict transforms).
    wall_curves: Vec<Vec<Rational>>,
    /// Fiber functionals per stage.
    fibers: Vec<Vec<Rational>>,
    /// Stage that separated the points of each wall, with the count.
    wall_blown: Vec<Option<(usize, i64)>>,
}

fn extend(v: &mut Vec<Rational>) {
    v.push(Rational::zero());
}

fn pair(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Build the strata of the resolved pair. `ray_order` is the blow-up
/// order; defaults to ray index order.
pub fn blowup_strata(
    fan: &Fan,
    p: &LatticePolytope,
    data: &LaurentData,
    ray_order: Option<Vec<usize>>,
) -> Result<StrataComplex, ToricError> {
    let geom = ToricGeometry::new(fan)?;
    let poles: PoleAnalysis = pole_analysis(fan, p, data)?;
    let l = geom.ray_count();
    let order: Vec<usize> = ray_order.unwrap_or_else(|| (0..l).collect());
    if order.len() != l || {
        let mut s = order.clone();
        s.sort();
        s != (0..l).collect::<Vec<_>>()
    } {
        return Err(ToricError::BadFan("ray order must be a permutation".into()));
    }
    // Rays with a single lattice point on their pole face restrict the
    // pencil to a monomial there: the base locus along such a divisor is
    // empty and no blow-up happens.
    let stages: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&r| poles.ray_faces[r].face_points.len() >= 2)
        .collect();
    let stage_of: Vec<Option<usize>> = {
        let mut v = vec![None; l];
        for (t, &r) in stages.iter().enumerate() {
            v[r] = Some(t);
        }
        v
    };
    let wall_length: Vec<i64> = geom
        .walls
        .iter()
        .map(|w| {
            poles
                .wall_faces
                .iter()
                .find(|f| f.rays == w.rays)
                .map(|f| f.lattice_length)
                .unwrap_or(0)
        })
        .collect();

    // Initial ambient state on the toric model.
    let tb = geom.basis_rays.len();
    let mut st = AmbientState {
        dim: tb,
        toric_dim: tb,
        triples: vec![vec![vec![Rational::zero(); tb]; tb]; tb],
        anticanonical: vec![Rational::zero(); tb],
        base_curves: Vec::new(),
        wall_curves: Vec::new(),
        fibers: Vec::new(),
        wall_blown: vec![None; geom.walls.len()],
    };
    for x in 0..tb {
        for y in 0..tb {
            for z in 0..tb {
                st.triples[x][y][z] =
                    geom.triple(geom.basis_rays[x], geom.basis_rays[y], geom.basis_rays[z]);
            }
        }
    }
    for rho in 0..l {
        for (i, c) in geom.div[rho].iter().enumerate() {
            st.anticanonical[i] += c;
        }
    }
    // Curve functionals: value on each basis divisor.
    let functional_of_product = |st: &AmbientState, a: &[Rational], b: &[Rational]| -> Vec<Rational> {
        let mut f = vec![Rational::zero(); st.dim];
        for (x, fx) in f.iter_mut().enumerate() {
            for (i, ai) in a.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                for (j, bj) in b.iter().enumerate() {
                    if bj.is_zero() {
                        continue;
                    }
                    *fx += ai * bj * &st.triples[x][i][j];
                }
            }
        }
        f
    };
    let anti = st.anticanonical.clone();
    for rho in 0..l {
        let f = functional_of_product(&st, &anti, &geom.div[rho]);
        st.base_curves.push(f);
    }
    for w in &geom.walls {
        let f = functional_of_product(&st, &geom.div[w.rays[0]], &geom.div[w.rays[1]]);
        st.wall_curves.push(f);
    }

    // Blow-up stages.
    for (stage, &r) in stages.iter().enumerate() {
        let b = st.base_curves[r].clone();
        let degree_n = pair(&st.anticanonical, &b) - rat(2);
        // Extend every stored object by the new basis direction.
        let nd = st.dim + 1;
        for row in st.triples.iter_mut() {
            for col in row.iter_mut() {
                extend(col);
            }
            row.push(vec![Rational::zero(); nd]);
        }
        st.triples.push(vec![vec![Rational::zero(); nd]; nd]);
        for x in 0..st.dim {
            // x . E . E = -(x . B)
            let v = -b[x].clone();
            st.triples[x][st.dim][st.dim] = v.clone();
            st.triples[st.dim][x][st.dim] = v.clone();
            st.triples[st.dim][st.dim][x] = v;
        }
        st.triples[st.dim][st.dim][st.dim] = degree_n;
        extend(&mut st.anticanonical);
        st.anticanonical[st.dim] = rat(-1);
        for f in st.base_curves.iter_mut() {
            extend(f);
        }
        for f in st.wall_curves.iter_mut() {
            extend(f);
        }
        for f in st.fibers.iter_mut() {
            extend(f);
        }
        let mut fiber = vec![Rational::zero(); nd];
        fiber[st.dim] = rat(-1);
        st.fibers.push(fiber.clone());
        st.dim = nd;
        // Strict transforms: later base curves lose their intersections
        // with this center; the wall curves of this ray lose their base
        // points the first time one of their rays is blown up.
        for (wi, w) in geom.walls.iter().enumerate() {
            if !w.rays.contains(&r) {
                continue;
            }
            let other = if w.rays[0] == r { w.rays[1] } else { w.rays[0] };
            let len = wall_length[wi];
            if len == 0 {
                continue;
            }
            if stage_of[other].map_or(false, |t| t > stage) {
                for (i, fi) in fiber.iter().enumerate() {
                    let delta = fi * rat(len);
                    st.base_curves[other][i] = &st.base_curves[other][i] - &delta;
                }
            }
            if st.wall_blown[wi].is_none() {
                for (i, fi) in fiber.iter().enumerate() {
                    let delta = fi * rat(len);
                    st.wall_curves[wi][i] = &st.wall_curves[wi][i] - &delta;
                }
                st.wall_blown[wi] = Some((stage, len));
            }
        }
    }

    // Ample class on the toric model: exact feasibility of the wall kink
    // system, one unit of positivity per wall curve.
    let mut rows = Vec::new();
    for w in &geom.walls {
        let mut row = vec![Rational::zero(); l];
        row[w.others[0]] -= rat(1);
        row[w.others[1]] -= rat(1);
        row[w.rays[0]] -= w.alpha.clone();
        row[w.rays[1]] -= w.beta.clone();
        rows.push(row);
    }
    let a = RationalMatrix::from_fn(rows.len(), l, |r, c| rows[r][c].clone());
    let b = vec![rat(-1); rows.len()];
    let coeffs = crate::lp::feasible_point(&a, &b)
        .ok_or_else(|| ToricError::BadFan("no ample class on the refined fan".into()))?;
    let mut h0 = vec![Rational::zero(); st.dim];
    for rho in 0..l {
        for (i, d) in geom.div[rho].iter().enumerate() {
            h0[i] += d * &coeffs[rho];
        }
    }
    // Pull back a large multiple and subtract the exceptional divisors so
    // that every tracked curve keeps positive degree.
    let mut scale = rat(1);
    let h = loop {
        let mut h: Vec<Rational> = h0.iter().map(|c| c * &scale).collect();
        for (t, _) in stages.iter().enumerate() {
            h[st.toric_dim + t] = rat(-1);
        }
        let blown_bases = stages.iter().map(|&r| &st.base_curves[r]);
        let ok = st
            .wall_curves
            .iter()
            .chain(st.fibers.iter())
            .chain(blown_bases)
            .all(|c| pair(&h, c) > Rational::zero());
        if ok {
            break h;
        }
        scale *= rat(2);
        if scale > rat(1 << 40) {
            return Err(ToricError::BadFan("no ample scale found".into()));
        }
    };

    assemble_strata(&geom, &st, &stage_of, &wall_length, &stages, &h)
}

/// Diagnostic: report the curves with nonpositive pullback degree.
pub fn debug_ample(
    fan: &Fan,
    p: &LatticePolytope,
    data: &LaurentData,
    coeffs: &[Rational],
) -> Result<(), ToricError> {
    let geom = ToricGeometry::new(fan)?;
    let poles = pole_analysis(fan, p, data)?;
    let _ = poles;
    let tb = geom.basis_rays.len();
    let mut triples = vec![vec![vec![Rational::zero(); tb]; tb]; tb];
    for x in 0..tb {
        for y in 0..tb {
            for z in 0..tb {
                triples[x][y][z] =
                    geom.triple(geom.basis_rays[x], geom.basis_rays[y], geom.basis_rays[z]);
            }
        }
    }
    let mut h0 = vec![Rational::zero(); tb];
    for rho in 0..geom.ray_count() {
        for (i, d) in geom.div[rho].iter().enumerate() {
            h0[i] += d * &coeffs[rho];
        }
    }
    for (wi, w) in geom.walls.iter().enumerate() {
        let mut f = vec![Rational::zero(); tb];
        for (x, fx) in f.iter_mut().enumerate() {
            for (i, ai) in geom.div[w.rays[0]].iter().enumerate() {
                for (j, bj) in geom.div[w.rays[1]].iter().enumerate() {
                    *fx += ai * bj * &triples[x][i][j];
                }
            }
        }
        let deg: Rational = h0.iter().zip(&f).map(|(a, b)| a * b).sum();
        if deg <= Rational::zero() {
            eprintln!(
                "wall {wi} rays {:?} = {:?},{:?}: degree {}",
                w.rays, fan.rays[w.rays[0]], fan.rays[w.rays[1]], deg
            );
        }
    }
    Ok(())
}

/// Per-surface data: basis handles and the intersection form.
struct SurfaceModel {
    ray: usize,
    /// Adjacent rays in ray-index order; the first two entries of
    /// `dropped` are excluded from the basis.
    adjacent: Vec<usize>,
    dropped: [usize; 2],
    /// Expansion of each adjacent curve pullback in the basis (toric part).
    curve_coords: BTreeMap<usize, Vec<Rational>>,
    /// Expansion of the self-restriction of the ray divisor.
    self_coords: Vec<Rational>,
    /// Exceptional point classes: wall index and multiplicity offsets.
    points: Vec<(usize, i64)>,
    /// Total basis size: toric basis + total point count.
    dim: usize,
    toric_dim: usize,
    form: RationalMatrix,
}

fn surface_model(
    geom: &ToricGeometry,
    st: &AmbientState,
    stage_of: &[Option<usize>],
    wall_length: &[i64],
    ray: usize,
) -> SurfaceModel {
    let adjacent: Vec<usize> = geom
        .walls
        .iter()
        .filter(|w| w.rays.contains(&ray))
        .map(|w| if w.rays[0] == ray { w.rays[1] } else { w.rays[0] })
        .collect();
    let mut adjacent = adjacent;
    adjacent.sort();
    // Drop the two other rays of the lex-first cone containing the ray.
    let cone = geom
        .fan
        .max_cones
        .iter()
        .filter(|c| c.contains(&ray))
        .min()
        .expect("ray in some cone")
        .clone();
    let others: Vec<usize> = cone.iter().copied().filter(|&r| r != ray).collect();
    let dropped = [others[0].min(others[1]), others[0].max(others[1])];
    let toric_basis: Vec<usize> =
        adjacent.iter().copied().filter(|a| !dropped.contains(a)).collect();
    let toric_dim = toric_basis.len();
    // Relations: for the two annihilator vectors m of the ray,
    // sum_a <m, u_a> C_a = 0 over adjacent rays.
    let anns = geom.ray_annihilator(ray);
    let mat = RationalMatrix::from_fn(2, 2, |i, j| rat(dot(anns[i], geom.fan.rays[dropped[j]])));
    let mut curve_coords: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for (bi, &a) in toric_basis.iter().enumerate() {
        let mut v = vec![Rational::zero(); toric_dim];
        v[bi] = rat(1);
        curve_coords.insert(a, v);
    }
    for (di, &d) in dropped.iter().enumerate() {
        let mut coords = vec![Rational::zero(); toric_dim];
        for (bi, &a) in toric_basis.iter().enumerate() {
            let rhs: Vec<Rational> =
                (0..2).map(|i| -rat(dot(anns[i], geom.fan.rays[a]))).collect();
            let t = solve(&mat, &rhs).expect("dropped pair is unimodular mod the ray");
            coords[bi] = t[di].clone();
        }
        curve_coords.insert(d, coords);
    }
    // Self restriction from a dual vector with <m, u_ray> = 1.
    let m = geom.dual_vector(ray);
    let mut self_coords = vec![Rational::zero(); toric_dim];
    for &a in &adjacent {
        let coeff = rat(dot(m, geom.fan.rays[a]));
        if coeff.is_zero() {
            continue;
        }
        for (i, c) in curve_coords[&a].iter().enumerate() {
            self_coords[i] -= &coeff * c;
        }
    }
    // Exceptional points on this surface: walls through the ray whose
    // points were separated at the stage of the other, earlier ray.
    let mut points = Vec::new();
    for (wi, w) in geom.walls.iter().enumerate() {
        if !w.rays.contains(&ray) {
            continue;
        }
        let other = if w.rays[0] == ray { w.rays[1] } else { w.rays[0] };
        let earlier = match (stage_of[other], stage_of[ray]) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
        if wall_length[wi] > 0 && earlier {
            points.push((wi, wall_length[wi]));
        }
    }
    let total_points: i64 = points.iter().map(|(_, c)| *c).sum();
    let dim = toric_dim + total_points as usize;
    // Intersection form: toric block from ambient triples, points diagonal
    // minus one.
    let mut form = RationalMatrix::zero(dim, dim);
    for (i, &a) in toric_basis.iter().enumerate() {
        for (j, &b) in toric_basis.iter().enumerate() {
            form[(i, j)] = geom.triple(ray, a, b);
        }
    }
    for t in 0..(total_points as usize) {
        form[(toric_dim + t, toric_dim + t)] = rat(-1);
    }
    let _ = st;
    SurfaceModel {
        ray,
        adjacent,
        dropped,
        curve_coords,
        self_coords,
        points,
        dim,
        toric_dim,
        form,
    }
}

impl SurfaceModel {
    /// Offset of the point block of a wall inside the surface basis.
    fn point_offset(&self, wall: usize) -> Option<(usize, i64)> {
        let mut off = self.toric_dim;
        for &(wi, count) in &self.points {
            if wi == wall {
                return Some((off, count));
            }
            off += count as usize;
        }
        None
    }

    /// Class of the strict wall curve inside the surface.
    fn wall_curve_class(&self, geom: &ToricGeometry, wall: usize) -> Vec<Rational> {
        let w = &geom.walls[wall];
        let other = if w.rays[0] == self.ray { w.rays[1] } else { w.rays[0] };
        let mut v = vec![Rational::zero(); self.dim];
        for (i, c) in self.curve_coords[&other].iter().enumerate() {
            v[i] = c.clone();
        }
        if let Some((off, count)) = self.point_offset(wall) {
            for t in 0..(count as usize) {
                v[off + t] = rat(-1);
            }
        }
        v
    }

    /// Class of the strict base curve inside the surface (the center of
    /// this surface's own blow-up stage).
    fn base_curve_class(&self, geom: &ToricGeometry) -> Vec<Rational> {
        // (sum of all divisors) restricted to the toric surface, minus all
        // exceptional points.
        let mut v = vec![Rational::zero(); self.dim];
        for &a in &self.adjacent {
            for (i, c) in self.curve_coords[&a].iter().enumerate() {
                v[i] += c;
            }
        }
        for (i, c) in self.self_coords.iter().enumerate() {
            v[i] += c;
        }
        let mut off = self.toric_dim;
        for &(_, count) in &self.points {
            for _ in 0..count {
                v[off] = rat(-1);
                off += 1;
            }
        }
        v
    }

    /// Restriction of an ambient basis class to the surface.
    fn restrict_ambient(
        &self,
        geom: &ToricGeometry,
        st: &AmbientState,
        stage_of: &[Option<usize>],
        stage_ray: &[usize],
        index: usize,
    ) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim];
        if index < st.toric_dim {
            let rho = geom.basis_rays[index];
            if rho == self.ray {
                for (i, c) in self.self_coords.iter().enumerate() {
                    v[i] = c.clone();
                }
            } else if self.adjacent.contains(&rho) {
                for (i, c) in self.curve_coords[&rho].iter().enumerate() {
                    v[i] = c.clone();
                }
            }
            return v;
        }
        let stage = index - st.toric_dim;
        let center_ray = stage_ray[stage];
        if center_ray == self.ray {
            return self.base_curve_class(geom);
        }
        // Exceptional fibers over the points this center contributed.
        let key = [center_ray.min(self.ray), center_ray.max(self.ray)];
        if let Some(&wi) = geom.wall_index.get(&key) {
            let earlier = match (stage_of[center_ray], stage_of[self.ray]) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                _ => false,
            };
            if earlier {
                if let Some((off, count)) = self.point_offset(wi) {
                    for t in 0..(count as usize) {
                        v[off + t] = rat(1);
                    }
                }
            }
        }
        v
    }
}

fn assemble_strata(
    geom: &ToricGeometry,
    st: &AmbientState,
    stage_of: &[Option<usize>],
    wall_length: &[i64],
    stages: &[usize],
    h: &[Rational],
) -> Result<StrataComplex, ToricError> {
    let l = geom.ray_count();
    let order_stage_ray: Vec<usize> = stages.to_vec();
    let surfaces: Vec<SurfaceModel> = (0..l)
        .map(|ray| surface_model(geom, st, stage_of, wall_length, ray))
        .collect();
    let nb = st.dim;
    let wall_count = geom.walls.len();
    let cone_count = geom.fan.max_cones.len();
    let surf_dims: Vec<usize> = surfaces.iter().map(|s| s.dim).collect();
    let surf_off: Vec<usize> = {
        let mut v = vec![0usize];
        for d in &surf_dims {
            v.push(v.last().unwrap() + d);
        }
        v
    };
    let total_surf: usize = surf_dims.iter().sum();

    let mut out = StrataComplex::empty(3, "toric pipeline");
    out.cohomology[0].insert(0, 1);
    out.cohomology[0].insert(2, nb);
    out.cohomology[0].insert(4, nb);
    out.cohomology[0].insert(6, 1);
    out.cohomology[1].insert(0, l);
    out.cohomology[1].insert(2, total_surf);
    out.cohomology[1].insert(4, l);
    out.cohomology[2].insert(0, wall_count);
    out.cohomology[2].insert(2, wall_count);
    out.cohomology[3].insert(0, cone_count);

    // Ambient pairing: middle cohomology in divisor coordinates, degree
    // four in the dual coordinates.
    out.pairing[0].insert(0, RationalMatrix::identity(1));
    out.pairing[0].insert(2, RationalMatrix::identity(nb));
    out.pairing[0].insert(4, RationalMatrix::identity(nb));
    out.pairing[0].insert(6, RationalMatrix::identity(1));
    // Surface pairing blocks.
    let mut surf_form = RationalMatrix::zero(total_surf, total_surf);
    for (si, s) in surfaces.iter().enumerate() {
        for i in 0..s.dim {
            for j in 0..s.dim {
                surf_form[(surf_off[si] + i, surf_off[si] + j)] = s.form[(i, j)].clone();
            }
        }
    }
    out.pairing[1].insert(0, RationalMatrix::identity(l));
    out.pairing[1].insert(2, surf_form.clone());
    out.pairing[1].insert(4, RationalMatrix::identity(l));
    out.pairing[2].insert(0, RationalMatrix::identity(wall_count));
    out.pairing[2].insert(2, RationalMatrix::identity(wall_count));
    out.pairing[3].insert(0, RationalMatrix::identity(cone_count));

    // Ambient Lefschetz.
    out.lefschetz[0].insert(0, RationalMatrix::from_cols(nb, &[h.to_vec()]));
    let mut cup_h = RationalMatrix::zero(nb, nb);
    for x in 0..nb {
        for z in 0..nb {
            let mut acc = Rational::zero();
            for (i, hi) in h.iter().enumerate() {
                if !hi.is_zero() {
                    acc += hi * &st.triples[i][x][z];
                }
            }
            cup_h[(z, x)] = acc;
        }
    }
    out.lefschetz[0].insert(2, cup_h);
    out.lefschetz[0].insert(
        4,
        RationalMatrix::from_fn(1, nb, |_, c| h[c].clone()),
    );
    // Surface Lefschetz: restriction of h, then cup inside the surface.
    let mut lef_s0 = RationalMatrix::zero(total_surf, l);
    let mut lef_s2 = RationalMatrix::zero(l, total_surf);
    for (si, s) in surfaces.iter().enumerate() {
        let mut hs = vec![Rational::zero(); s.dim];
        for (i, hi) in h.iter().enumerate() {
            if hi.is_zero() {
                continue;
            }
            let r = s.restrict_ambient(geom, st, stage_of, &order_stage_ray, i);
            for (k, v) in r.iter().enumerate() {
                hs[k] += hi * v;
            }
        }
        for (k, v) in hs.iter().enumerate() {
            lef_s0[(surf_off[si] + k, si)] = v.clone();
        }
        // Degree on each surface class via the form.
        let row = s.form.apply(&hs);
        for (k, v) in row.iter().enumerate() {
            lef_s2[(si, surf_off[si] + k)] = v.clone();
        }
    }
    out.lefschetz[1].insert(0, lef_s0);
    out.lefschetz[1].insert(2, lef_s2);
    // Curve Lefschetz: degree of h on each strict wall curve.
    out.lefschetz[2].insert(
        0,
        RationalMatrix::from_fn(wall_count, wall_count, |r, c| {
            if r == c { pair(h, &st.wall_curves[r]) } else { rat(0) }
        }),
    );

    // Restrictions from the ambient space.
    out.restriction[0].insert(0, RationalMatrix::from_fn(l, 1, |_, _| rat(1)));
    let mut restr02 = RationalMatrix::zero(total_surf, nb);
    for (si, s) in surfaces.iter().enumerate() {
        for i in 0..nb {
            let r = s.restrict_ambient(geom, st, stage_of, &order_stage_ray, i);
            for (k, v) in r.iter().enumerate() {
                restr02[(surf_off[si] + k, i)] = v.clone();
            }
        }
    }
    out.restriction[0].insert(2, restr02.clone());
    // Degree-four restriction: pair with the strict divisor class.
    let mut restr04 = RationalMatrix::zero(l, nb);
    for ray in 0..l {
        let strict = strict_divisor(geom, st, stage_of, ray);
        for i in 0..nb {
            restr04[(ray, i)] = strict[i].clone();
        }
    }
    out.restriction[0].insert(4, restr04);

    // Gysin from the surfaces.
    let mut gys10 = RationalMatrix::zero(nb, l);
    for ray in 0..l {
        let strict = strict_divisor(geom, st, stage_of, ray);
        for i in 0..nb {
            gys10[(i, ray)] = strict[i].clone();
        }
    }
    out.gysin[1].insert(0, gys10);
    // Surface middle classes push to curve functionals.
    let mut gys12 = RationalMatrix::zero(nb, total_surf);
    for (si, s) in surfaces.iter().enumerate() {
        for k in 0..s.dim {
            let func = surface_class_functional(geom, st, stage_of, &order_stage_ray, s, k);
            for i in 0..nb {
                gys12[(i, surf_off[si] + k)] = func[i].clone();
            }
        }
    }
    out.gysin[1].insert(2, gys12);
    out.gysin[1].insert(4, RationalMatrix::from_fn(1, l, |_, _| rat(1)));

    // Surface-to-curve restrictions and curve-to-surface Gysin with the
    // alternating signs from the ray order inside each wall.
    let mut restr10 = RationalMatrix::zero(wall_count, l);
    let mut restr12 = RationalMatrix::zero(wall_count, total_surf);
    let mut gys20 = RationalMatrix::zero(total_surf, wall_count);
    let mut gys22 = RationalMatrix::zero(l, wall_count);
    for (wi, w) in geom.walls.iter().enumerate() {
        for (pos, &ray) in w.rays.iter().enumerate() {
            let sign = if pos == 0 { rat(-1) } else { rat(1) };
            let si = ray;
            restr10[(wi, si)] = sign.clone();
            let s = &surfaces[si];
            let cls = s.wall_curve_class(geom, wi);
            // Degree of a surface class on the wall curve.
            let degs = s.form.apply(&cls);
            for (k, v) in degs.iter().enumerate() {
                restr12[(wi, surf_off[si] + k)] = &sign * v;
            }
            for (k, v) in cls.iter().enumerate() {
                gys20[(surf_off[si] + k, wi)] = &sign * v;
            }
            gys22[(si, wi)] = sign;
        }
    }
    out.restriction[1].insert(0, restr10);
    out.restriction[1].insert(2, restr12);
    out.gysin[2].insert(0, gys20);
    out.gysin[2].insert(2, gys22);

    // Curve-to-point restrictions and the adjoint Gysin.
    let mut restr20 = RationalMatrix::zero(cone_count, wall_count);
    for (ci, cone) in geom.fan.max_cones.iter().enumerate() {
        let mut sorted = cone.clone();
        sorted.sort();
        for skip in 0..3 {
            let pair_rays: Vec<usize> = sorted
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &r)| r)
                .collect();
            let key = [pair_rays[0], pair_rays[1]];
            let wi = geom.wall_index[&key];
            // Inserting the skipped ray: count smaller elements.
            let inserted = sorted[skip];
            let smaller = key.iter().filter(|&&r| r < inserted).count();
            let sign = if smaller % 2 == 0 { rat(1) } else { rat(-1) };
            restr20[(ci, wi)] = sign;
        }
    }
    out.gysin[3].insert(0, restr20.transpose());
    out.restriction[2].insert(0, restr20);

    Ok(out)
}

/// Coordinates of the strict ray divisor: pullback minus the exceptional
/// class of its own stage.
fn strict_divisor(
    geom: &ToricGeometry,
    st: &AmbientState,
    stage_of: &[Option<usize>],
    ray: usize,
) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); st.dim];
    for (i, c) in geom.div[ray].iter().enumerate() {
        v[i] = c.clone();
    }
    if let Some(t) = stage_of[ray] {
        v[st.toric_dim + t] = rat(-1);
    }
    v
}

/// Functional on the ambient basis given by a middle-degree surface class.
fn surface_class_functional(
    geom: &ToricGeometry,
    st: &AmbientState,
    stage_of: &[Option<usize>],
    order_stage_ray: &[usize],
    s: &SurfaceModel,
    k: usize,
) -> Vec<Rational> {
    let mut unit = vec![Rational::zero(); s.dim];
    unit[k] = rat(1);
    // Pair the class against the restriction of every ambient basis
    // element, inside the surface.
    let mut out = vec![Rational::zero(); st.dim];
    for (i, o) in out.iter_mut().enumerate() {
        let r = s.restrict_ambient(geom, st, stage_of, order_stage_ray, i);
        let form_r = s.form.apply(&r);
        *o = form_r[k].clone();
    }
    let _ = unit;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{full_check, WeightGrid};
    use crate::toric::fan::{smooth_refine, spanning_fan};

    fn pipeline(p: &LatticePolytope) -> StrataComplex {
        let fan = smooth_refine(&spanning_fan(p).unwrap(), p).unwrap();
        let data = LaurentData::standard(p);
        blowup_strata(&fan, p, &data, None).unwrap()
    }

    fn simplex_p3() -> LatticePolytope {
        LatticePolytope::new(vec![[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]])
    }

    fn octahedron() -> LatticePolytope {
        LatticePolytope::new(vec![
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ])
    }

    #[test]
    fn simplex_strata_validate() {
        let s = pipeline(&simplex_p3());
        s.validate().unwrap();
    }

    #[test]
    fn octahedron_strata_validate() {
        let s = pipeline(&octahedron());
        s.validate().unwrap();
    }

    #[test]
    fn simplex_full_suite_and_verdicts() {
        let s = pipeline(&simplex_p3());
        full_check(&s).unwrap();
        let grid = WeightGrid::new(&s, 0).unwrap();
        let model = grid.assemble_rescaling("simplex pipeline").unwrap();
        assert!(model.ht_condition().unwrap().is_hodge_tate);
        assert_eq!(model.f_table().unwrap(), model.h_table().unwrap());
        assert!(model.speciality().unwrap().special);
    }

    #[test]
    fn octahedron_full_suite_and_verdicts() {
        let s = pipeline(&octahedron());
        full_check(&s).unwrap();
        let grid = WeightGrid::new(&s, 0).unwrap();
        let model = grid.assemble_rescaling("octahedron pipeline").unwrap();
        assert!(model.ht_condition().unwrap().is_hodge_tate);
        assert_eq!(model.f_table().unwrap(), model.h_table().unwrap());
        assert!(model.speciality().unwrap().special);
    }

    #[test]
    fn ray_order_invariance() {
        let p = simplex_p3();
        let fan = smooth_refine(&spanning_fan(&p).unwrap(), &p).unwrap();
        let data = LaurentData::standard(&p);
        let l = fan.rays.len();
        let s1 = blowup_strata(&fan, &p, &data, None).unwrap();
        let reversed: Vec<usize> = (0..l).rev().collect();
        let s2 = blowup_strata(&fan, &p, &data, Some(reversed)).unwrap();
        let p1 = WeightGrid::new(&s1, 0).unwrap().second_page().unwrap().summary();
        let p2 = WeightGrid::new(&s2, 0).unwrap().second_page().unwrap().summary();
        assert_eq!(p1.graded, p2.graded);
    }
}
