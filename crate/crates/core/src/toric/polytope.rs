//! Lattice polytopes in rank three and the reflexivity test.

use super::ToricError;

pub type Vec3 = [i64; 3];

pub fn dot(a: Vec3, b: Vec3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> i64 {
    dot(a, cross(b, c))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn primitive(v: Vec3) -> Vec3 {
    let g = gcd(gcd(v[0], v[1]), v[2]);
    if g <= 1 { v } else { [v[0] / g, v[1] / g, v[2] / g] }
}

/// Full-dimensional lattice polytope given by its vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePolytope {
    pub vertices: Vec<Vec3>,
}

/// One facet: the primitive outer normal, the lattice distance from the
/// origin (`<m, normal> = -distance` on the facet), and the vertices on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec3,
    pub distance: i64,
    pub vertex_indices: Vec<usize>,
}

/// Report of the reflexivity check.
#[derive(Debug, Clone)]
pub struct ReflexivityReport {
    pub facets: Vec<Facet>,
    pub reflexive: bool,
    pub facets_unimodular: bool,
}

impl LatticePolytope {
    pub fn new(vertices: Vec<Vec3>) -> Self {
        LatticePolytope { vertices }
    }

    /// Facets by exhaustive plane enumeration: every plane through the
    /// origin-side hull spanned by vertex triples with all vertices on one
    /// side. Vertex counts are small, so the cubic scan is fine.
    pub fn facets(&self) -> Result<Vec<Facet>, ToricError> {
        let vs = &self.vertices;
        let n = vs.len();
        if n < 4 {
            return Err(ToricError::NotFullDimensional);
        }
        let mut full_dim = false;
        'outer: for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        if det3(sub(vs[b], vs[a]), sub(vs[c], vs[a]), sub(vs[d], vs[a])) != 0 {
                            full_dim = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !full_dim {
            return Err(ToricError::NotFullDimensional);
        }
        let mut facets: Vec<Facet> = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let nrm = cross(sub(vs[b], vs[a]), sub(vs[c], vs[a]));
                    if nrm == [0, 0, 0] {
                        continue;
                    }
                    let nrm = primitive(nrm);
                    let level = dot(nrm, vs[a]);
                    let mut all_le = true;
                    let mut all_ge = true;
                    for v in vs {
                        let d = dot(nrm, *v);
                        all_le &= d <= level;
                        all_ge &= d >= level;
                    }
                    // Keep the orientation with the polytope on the >= side,
                    // so the facet sits at the minimum pairing value.
                    let (normal, level) = if all_ge {
                        (nrm, level)
                    } else if all_le {
                        ([-nrm[0], -nrm[1], -nrm[2]], -level)
                    } else {
                        continue;
                    };
                    let members: Vec<usize> =
                        (0..n).filter(|&i| dot(normal, vs[i]) == level).collect();
                    if facets.iter().any(|f| f.normal == normal) {
                        continue;
                    }
                    facets.push(Facet {
                        normal,
                        distance: -level,
                        vertex_indices: members,
                    });
                }
            }
        }
        facets.sort_by_key(|f| f.normal);
        Ok(facets)
    }

    /// All lattice points of the polytope, by bounding-box scan against the
    /// facet inequalities.
    pub fn lattice_points(&self) -> Result<Vec<Vec3>, ToricError> {
        let facets = self.facets()?;
        let lo: Vec3 = [0, 1, 2].map(|i| self.vertices.iter().map(|v| v[i]).min().unwrap());
        let hi: Vec3 = [0, 1, 2].map(|i| self.vertices.iter().map(|v| v[i]).max().unwrap());
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let p = [x, y, z];
                    if facets.iter().all(|f| dot(f.normal, p) >= -f.distance) {
                        out.push(p);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Lattice points on the boundary of the polar polytope: exactly the
    /// integer vectors pairing to minimum `-1` against the polytope.
    pub fn polar_boundary_points(&self) -> Result<Vec<Vec3>, ToricError> {
        let facets = self.facets()?;
        let bound = facets
            .iter()
            .flat_map(|f| f.normal.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(1);
        let mut out = Vec::new();
        for x in -bound..=bound {
            for y in -bound..=bound {
                for z in -bound..=bound {
                    let u = [x, y, z];
                    if u == [0, 0, 0] {
                        continue;
                    }
                    let m = self.vertices.iter().map(|v| dot(*v, u)).min().unwrap();
                    if m == -1 {
                        out.push(u);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The reflexivity and facet-basis conditions. Reflexive means every facet
/// lies at lattice distance one; the basis condition asks each facet to be
/// a triangle whose vertices form a lattice basis.
pub fn validate_reflexive(p: &LatticePolytope) -> Result<ReflexivityReport, ToricError> {
    let facets = p.facets()?;
    // Origin strictly inside: positive distance for every facet.
    for f in &facets {
        if f.distance <= 0 {
            return Err(ToricError::OriginNotInterior);
        }
    }
    let mut reflexive = true;
    for (i, f) in facets.iter().enumerate() {
        if f.distance != 1 {
            reflexive = false;
            let _ = i;
        }
    }
    let mut facets_unimodular = true;
    for f in &facets {
        if f.vertex_indices.len() != 3 {
            facets_unimodular = false;
            continue;
        }
        let [a, b, c] = [
            p.vertices[f.vertex_indices[0]],
            p.vertices[f.vertex_indices[1]],
            p.vertices[f.vertex_indices[2]],
        ];
        if det3(a, b, c).abs() != 1 {
            facets_unimodular = false;
        }
    }
    Ok(ReflexivityReport { facets, reflexive, facets_unimodular })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn simplex_p3() -> LatticePolytope {
        LatticePolytope::new(vec![[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]])
    }

    pub fn octahedron() -> LatticePolytope {
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
    fn simplex_facets_by_hand() {
        let p = simplex_p3();
        let report = validate_reflexive(&p).unwrap();
        assert!(report.reflexive);
        assert!(report.facets_unimodular);
        assert_eq!(report.facets.len(), 4);
        let normals: Vec<Vec3> = report.facets.iter().map(|f| f.normal).collect();
        assert!(normals.contains(&[-1, -1, -1]));
        assert!(normals.contains(&[3, -1, -1]));
        assert!(normals.contains(&[-1, 3, -1]));
        assert!(normals.contains(&[-1, -1, 3]));
    }

    #[test]
    fn cube_is_reflexive_but_not_facet_unimodular() {
        let mut vs = Vec::new();
        for x in [-1i64, 1] {
            for y in [-1i64, 1] {
                for z in [-1i64, 1] {
                    vs.push([x, y, z]);
                }
            }
        }
        let report = validate_reflexive(&LatticePolytope::new(vs)).unwrap();
        assert!(report.reflexive);
        assert!(!report.facets_unimodular, "square facets are not triangles");
    }

    #[test]
    fn translated_simplex_is_rejected() {
        let p = LatticePolytope::new(vec![[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, -1, -1]]);
        assert!(matches!(
            validate_reflexive(&p),
            Err(ToricError::OriginNotInterior) | Ok(ReflexivityReport { reflexive: false, .. })
        ));
    }

    #[test]
    fn octahedron_validates() {
        let report = validate_reflexive(&octahedron()).unwrap();
        assert!(report.reflexive);
        assert!(report.facets_unimodular);
        assert_eq!(report.facets.len(), 8);
    }

    #[test]
    fn lattice_point_counts() {
        assert_eq!(simplex_p3().lattice_points().unwrap().len(), 5);
        assert_eq!(octahedron().lattice_points().unwrap().len(), 7);
    }

    #[test]
    fn polar_boundary_of_simplex() {
        // The polar is four times the standard simplex; its boundary has 34
        // lattice points (35 total minus the interior origin... the polar
        // contains the origin as its only interior point).
        let pts = simplex_p3().polar_boundary_points().unwrap();
        assert_eq!(pts.len(), 34);
        assert!(pts.contains(&[1, 0, 0]));
        assert!(pts.contains(&[3, -1, -1]));
    }
}
