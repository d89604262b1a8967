//! Complete fans in rank three: the normal fan of a polytope and its
//! deterministic smooth refinement by stellar subdivision.

use super::polytope::{cross, det3, dot, LatticePolytope, Vec3};
use super::ToricError;
use std::collections::BTreeSet;

/// A complete fan given by its rays and maximal cones (ray index sets;
/// cones may be non-simplicial before refinement).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    pub rays: Vec<Vec3>,
    pub max_cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn ray_index(&self, v: Vec3) -> Option<usize> {
        self.rays.iter().position(|&r| r == v)
    }

    /// Walls: two-dimensional faces of the maximal cones. For a smooth
    /// complete fan each wall lies in exactly two maximal cones.
    pub fn walls(&self) -> Result<Vec<([usize; 2], Vec<usize>)>, ToricError> {
        let mut wall_map: std::collections::BTreeMap<[usize; 2], Vec<usize>> =
            std::collections::BTreeMap::new();
        for (ci, cone) in self.max_cones.iter().enumerate() {
            for f in cone_facets(&self.rays, cone) {
                if f.len() != 2 {
                    return Err(ToricError::BadFan(format!(
                        "wall of cone {ci} has {} rays",
                        f.len()
                    )));
                }
                let key = [f[0].min(f[1]), f[0].max(f[1])];
                wall_map.entry(key).or_default().push(ci);
            }
        }
        let mut out = Vec::new();
        for (key, cones) in wall_map {
            if cones.len() != 2 {
                return Err(ToricError::BadFan(format!(
                    "wall {key:?} lies in {} maximal cones",
                    cones.len()
                )));
            }
            out.push((key, cones));
        }
        Ok(out)
    }

    /// Every maximal cone is a unimodular triple.
    pub fn is_smooth(&self) -> Result<(), ToricError> {
        for (ci, cone) in self.max_cones.iter().enumerate() {
            if cone.len() != 3 {
                return Err(ToricError::NotSmooth(ci, 0));
            }
            let d = det3(self.rays[cone[0]], self.rays[cone[1]], self.rays[cone[2]]);
            if d.abs() != 1 {
                return Err(ToricError::NotSmooth(ci, d));
            }
        }
        Ok(())
    }

    /// Completeness surrogate for simplicial fans: every wall bounds two
    /// cones and the cone multiplicities cover the sphere (checked through
    /// the Euler relation for the induced sphere triangulation).
    pub fn check_complete(&self) -> Result<(), ToricError> {
        let walls = self.walls()?;
        let v = self.rays.len() as i64;
        let e = walls.len() as i64;
        let f = self.max_cones.len() as i64;
        if self.max_cones.iter().all(|c| c.len() == 3) && v - e + f != 2 {
            return Err(ToricError::NotComplete);
        }
        Ok(())
    }
}

/// Two-dimensional faces of one cone: maximal ray subsets lying on a
/// supporting plane of the cone.
pub fn cone_facets(rays: &[Vec3], cone: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (ai, &a) in cone.iter().enumerate() {
        for &b in cone.iter().skip(ai + 1) {
            let nrm = cross(rays[a], rays[b]);
            if nrm == [0, 0, 0] {
                continue;
            }
            for sign in [1i64, -1] {
                let n = [sign * nrm[0], sign * nrm[1], sign * nrm[2]];
                let mut on_plane = Vec::new();
                let mut strictly_pos = true;
                for &c in cone {
                    let d = dot(n, rays[c]);
                    if d == 0 {
                        on_plane.push(c);
                    } else if d < 0 {
                        strictly_pos = false;
                        break;
                    }
                }
                if strictly_pos && on_plane.len() >= 2 && on_plane.len() < cone.len() {
                    let mut face = on_plane;
                    face.sort();
                    if !out.contains(&face) {
                        out.push(face);
                    }
                }
            }
        }
    }
    out
}

/// Is `v` in the cone spanned by the given rays (exact nonnegative
/// combination test via enumation of simplicial subcones)?
/// Is `v` in the cone spanned by the given rays? Exact, via Caratheodory:
/// membership in a rank-three pointed cone reduces to a nonnegative
/// combination of some generator triple, rank two to a pair, rank one to a
/// single ray.
pub fn in_cone(rays: &[Vec3], cone: &[usize], v: Vec3) -> bool {
    if v == [0, 0, 0] {
        return true;
    }
    for (ai, &a) in cone.iter().enumerate() {
        for (bi, &b) in cone.iter().enumerate().skip(ai + 1) {
            for &c in cone.iter().skip(bi + 1) {
                let d = det3(rays[a], rays[b], rays[c]);
                if d == 0 {
                    continue;
                }
                let ca = det3(v, rays[b], rays[c]);
                let cb = det3(rays[a], v, rays[c]);
                let cc = det3(rays[a], rays[b], v);
                let s = d.signum();
                if s * ca >= 0 && s * cb >= 0 && s * cc >= 0 {
                    return true;
                }
            }
        }
    }
    // Rank-two pairs.
    for (ai, &a) in cone.iter().enumerate() {
        for &b in cone.iter().skip(ai + 1) {
            let n = cross(rays[a], rays[b]);
            if n == [0, 0, 0] || dot(n, v) != 0 {
                continue;
            }
            let d = det3(rays[a], rays[b], n);
            let ca = det3(v, rays[b], n);
            let cb = det3(rays[a], v, n);
            let s = d.signum();
            if s * ca >= 0 && s * cb >= 0 {
                return true;
            }
        }
    }
    // Rank one.
    for &a in cone {
        if cross(rays[a], v) == [0, 0, 0] && dot(rays[a], v) > 0 {
            return true;
        }
    }
    false
}

/// Normal fan of the polytope: one maximal cone per vertex, generated by
/// the normals of the facets through that vertex.
pub fn spanning_fan(p: &LatticePolytope) -> Result<Fan, ToricError> {
    let facets = p.facets()?;
    let rays: Vec<Vec3> = facets.iter().map(|f| f.normal).collect();
    let mut max_cones = Vec::new();
    for (vi, _) in p.vertices.iter().enumerate() {
        let cone: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.vertex_indices.contains(&vi))
            .map(|(i, _)| i)
            .collect();
        if cone.len() >= 3 {
            max_cones.push(cone);
        }
    }
    Ok(Fan { rays, max_cones })
}

fn cone_multiplicity(rays: &[Vec3], cone: &[usize]) -> i64 {
    if cone.len() != 3 {
        return i64::MAX;
    }
    det3(rays[cone[0]], rays[cone[1]], rays[cone[2]]).abs()
}

/// Deterministic stellar refinement until every maximal cone is a
/// unimodular triple. Candidate rays are the boundary lattice points of
/// the polar polytope, so every output ray pairs to exactly minus one
/// against the polytope; that is re-checked on the way out.
pub fn smooth_refine(fan: &Fan, p: &LatticePolytope) -> Result<Fan, ToricError> {
    let candidates = p.polar_boundary_points()?;
    let mut rays = fan.rays.clone();
    let mut cones: Vec<Vec<usize>> = fan.max_cones.clone();
    for (i, r) in rays.iter().enumerate() {
        let m = p.vertices.iter().map(|v| dot(*v, *r)).min().unwrap();
        if m != -1 {
            return Err(ToricError::BadRayDepth(i));
        }
    }
    for _round in 0..10_000 {
        // Lexicographically first bad cone.
        let mut sorted: Vec<usize> = (0..cones.len()).collect();
        sorted.sort_by_key(|&ci| cones[ci].clone());
        let bad = sorted
            .into_iter()
            .find(|&ci| cones[ci].len() != 3 || cone_multiplicity(&rays, &cones[ci]) != 1);
        let Some(bad) = bad else {
            let out = Fan { rays, max_cones: cones };
            out.is_smooth()?;
            return Ok(out);
        };
        let cone = cones[bad].clone();
        // Lexicographically least candidate strictly inside the cone (not
        // already a generator).
        let existing: BTreeSet<Vec3> = cone.iter().map(|&i| rays[i]).collect();
        let pick = candidates
            .iter()
            .filter(|&&u| !existing.contains(&u))
            .filter(|&&u| in_cone(&rays, &cone, u))
            .min();
        let Some(&u) = pick else { return Err(ToricError::RefinementFailed) };
        let new_ray = match rays.iter().position(|&r| r == u) {
            Some(i) => i,
            None => {
                rays.push(u);
                rays.len() - 1
            }
        };
        // Stellar subdivision at u across the whole fan.
        let mut next_cones = Vec::new();
        for c in &cones {
            if c.contains(&new_ray) || !in_cone(&rays, c, u) {
                next_cones.push(c.clone());
                continue;
            }
            for facet in cone_facets(&rays, c) {
                if in_cone(&rays, &facet, u) {
                    continue;
                }
                let mut nc = facet.clone();
                nc.push(new_ray);
                nc.sort();
                if !next_cones.contains(&nc) {
                    next_cones.push(nc);
                }
            }
        }
        cones = next_cones;
    }
    Err(ToricError::RefinementFailed)
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn simplex_spanning_fan_shape() {
        let fan = spanning_fan(&simplex_p3()).unwrap();
        assert_eq!(fan.rays.len(), 4);
        assert_eq!(fan.max_cones.len(), 4);
        // The normal fan of the unit simplex is singular (determinant 16
        // cones) and needs a genuine refinement.
        assert!(fan.is_smooth().is_err());
        let refined = smooth_refine(&fan, &simplex_p3()).unwrap();
        refined.is_smooth().unwrap();
        refined.check_complete().unwrap();
        assert!(refined.rays.len() > 4);
        // Total multiplicity is conserved: the four determinant-16 cones
        // subdivide into 64 unimodular ones.
        assert_eq!(refined.max_cones.len(), 64);
    }

    #[test]
    fn octahedron_refines_through_square_cones() {
        let fan = spanning_fan(&octahedron()).unwrap();
        assert_eq!(fan.rays.len(), 8);
        // Cones over the cube facets are non-simplicial.
        assert!(fan.max_cones.iter().any(|c| c.len() == 4));
        let refined = smooth_refine(&fan, &octahedron()).unwrap();
        refined.is_smooth().unwrap();
        refined.check_complete().unwrap();
        assert_eq!(refined.max_cones.len(), 48);
        assert_eq!(refined.rays.len(), 26);
    }

    #[test]
    fn bipyramid_refinement_adds_rays() {
        // Spanning fan of this reflexive bipyramid has non-unimodular
        // cones; the refinement strictly increases the ray count.
        let p = LatticePolytope::new(vec![
            [1, 1, 0],
            [1, -1, 0],
            [-1, 1, 0],
            [-1, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ]);
        let fan = spanning_fan(&p).unwrap();
        let refined = smooth_refine(&fan, &p).unwrap();
        refined.is_smooth().unwrap();
        assert!(refined.rays.len() > fan.rays.len());
    }

    #[test]
    fn projective_space_fan_is_smooth() {
        let fan = Fan {
            rays: vec![[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]],
            max_cones: vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        };
        fan.is_smooth().unwrap();
        fan.check_complete().unwrap();
    }
}
