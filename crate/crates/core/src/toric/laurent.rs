//! Laurent data on the torus: support validation against the polytope,
//! pole faces per ray, lattice lengths of the shared edge faces, and the
//! sampling-based nondegeneracy probe.

use super::fan::Fan;
use super::polytope::{dot, LatticePolytope, Vec3};
use super::ToricError;
use crate::linalg::{rat, Rational};
use num_traits::Zero;
use rand::Rng;
use std::collections::BTreeMap;

/// Laurent polynomial as exponent-to-coefficient map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentData {
    pub terms: BTreeMap<Vec3, Rational>,
}

impl LaurentData {
    pub fn new(terms: Vec<(Vec3, Rational)>) -> Self {
        LaurentData {
            terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// The standard choice for a reflexive polytope: coefficient one on
    /// every vertex.
    pub fn standard(p: &LatticePolytope) -> Self {
        LaurentData {
            terms: p.vertices.iter().map(|&v| (v, rat(1))).collect(),
        }
    }

    /// Support condition: the convex hull of the support is the polytope,
    /// which for lattice data means support inside the polytope and every
    /// vertex present.
    pub fn check_support(&self, p: &LatticePolytope) -> Result<(), ToricError> {
        let facets = p.facets()?;
        for m in self.terms.keys() {
            if facets.iter().any(|f| dot(f.normal, *m) < -f.distance) {
                return Err(ToricError::SupportViolation);
            }
        }
        for v in &p.vertices {
            if !self.terms.contains_key(v) {
                return Err(ToricError::SupportViolation);
            }
        }
        Ok(())
    }
}

/// Pole data of one ray: the face of the polytope pairing to minus one and
/// its lattice points.
#[derive(Debug, Clone)]
pub struct RayFace {
    pub ray: usize,
    pub pole_order: i64,
    /// Lattice points of the polytope on the face.
    pub face_points: Vec<Vec3>,
}

/// Pole data of a two-dimensional cone: the shared face and its lattice
/// length (zero when the face is a single point).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallFace {
    pub rays: [usize; 2],
    pub lattice_length: i64,
}

#[derive(Debug, Clone)]
pub struct PoleAnalysis {
    pub ray_faces: Vec<RayFace>,
    pub wall_faces: Vec<WallFace>,
}

/// Per ray: the pole order along the associated divisor is the negative
/// minimum of the pairing over the support, which must be one; the face
/// attaining it is never empty. Per wall: the intersection face of the two
/// ray faces with its lattice length.
pub fn pole_analysis(
    fan: &Fan,
    p: &LatticePolytope,
    data: &LaurentData,
) -> Result<PoleAnalysis, ToricError> {
    data.check_support(p)?;
    let lattice = p.lattice_points()?;
    let mut ray_faces = Vec::new();
    for (ri, &u) in fan.rays.iter().enumerate() {
        let min = lattice.iter().map(|&m| dot(m, u)).min().expect("polytope nonempty");
        if min != -1 {
            return Err(ToricError::BadRayDepth(ri));
        }
        let face_points: Vec<Vec3> =
            lattice.iter().copied().filter(|&m| dot(m, u) == -1).collect();
        ray_faces.push(RayFace { ray: ri, pole_order: 1, face_points });
    }
    let mut wall_faces = Vec::new();
    for (wall, _) in fan.walls()? {
        let fa = &ray_faces[wall[0]].face_points;
        let fb = &ray_faces[wall[1]].face_points;
        let shared: Vec<Vec3> = fa.iter().copied().filter(|m| fb.contains(m)).collect();
        if shared.is_empty() {
            return Err(ToricError::BadFan(format!(
                "rays {} and {} share no pole face",
                wall[0], wall[1]
            )));
        }
        // Lattice length of a segment is the point count minus one; a
        // single point has length zero. More than collinear is impossible
        // for distinct rays.
        let length = shared.len() as i64 - 1;
        wall_faces.push(WallFace { rays: wall, lattice_length: length });
    }
    Ok(PoleAnalysis { ray_faces, wall_faces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NondegeneracyVerdict {
    Degenerate,
    ProbablyNondegenerate,
    Inconclusive,
}

/// Restriction of the data to a face, as a polynomial in the face lattice.
fn face_restriction(data: &LaurentData, face: &[Vec3]) -> Vec<(Vec3, Rational)> {
    data.terms
        .iter()
        .filter(|(m, _)| face.contains(m))
        .map(|(m, c)| (*m, c.clone()))
        .collect()
}

fn eval(terms: &[(Vec3, Rational)], x: &[Rational; 3]) -> Rational {
    let mut acc = Rational::zero();
    for (m, c) in terms {
        let mut t = c.clone();
        for (i, &e) in m.iter().enumerate() {
            for _ in 0..e.abs() {
                if e > 0 {
                    t *= &x[i];
                } else {
                    t /= &x[i];
                }
            }
        }
        acc += t;
    }
    acc
}

fn log_derivative(terms: &[(Vec3, Rational)], axis: usize) -> Vec<(Vec3, Rational)> {
    terms
        .iter()
        .filter(|(m, _)| m[axis] != 0)
        .map(|(m, c)| (*m, c * rat(m[axis])))
        .collect()
}

/// Sampling probe for the face nondegeneracy condition: a common torus
/// zero of a face polynomial and its logarithmic derivatives certifies
/// degeneracy; absence of hits over the trials only reports probable
/// nondegeneracy. Faces that are single monomials are exactly
/// nondegenerate.
pub fn nondegeneracy_probe<R: Rng>(
    p: &LatticePolytope,
    data: &LaurentData,
    trials: usize,
    rng: &mut R,
) -> Result<NondegeneracyVerdict, ToricError> {
    data.check_support(p)?;
    let lattice = p.lattice_points()?;
    let facets = p.facets()?;
    // Enumerate faces: the whole polytope, facets, and the edges/vertices
    // as pairwise facet intersections.
    let mut faces: Vec<Vec<Vec3>> = vec![lattice.clone()];
    for f in &facets {
        faces.push(
            lattice.iter().copied().filter(|&m| dot(f.normal, m) == -f.distance).collect(),
        );
    }
    for (i, f) in facets.iter().enumerate() {
        for g in facets.iter().skip(i + 1) {
            let face: Vec<Vec3> = lattice
                .iter()
                .copied()
                .filter(|&m| dot(f.normal, m) == -f.distance && dot(g.normal, m) == -g.distance)
                .collect();
            if !face.is_empty() && !faces.contains(&face) {
                faces.push(face);
            }
        }
    }
    for face in &faces {
        let terms = face_restriction(data, face);
        if terms.len() <= 1 {
            continue;
        }
        let derivs: Vec<Vec<(Vec3, Rational)>> =
            (0..3).map(|axis| log_derivative(&terms, axis)).collect();
        for _ in 0..trials {
            let x: [Rational; 3] = [
                crate::linalg::ratio(rng.gen_range(1..40), rng.gen_range(1..12)),
                crate::linalg::ratio(rng.gen_range(1..40), rng.gen_range(1..12)),
                crate::linalg::ratio(rng.gen_range(1..40), rng.gen_range(1..12)),
            ];
            // Solve along the last axis by sampling: check whether the
            // sampled point happens to kill the polynomial and all
            // logarithmic derivatives.
            let all_zero = eval(&terms, &x).is_zero()
                && derivs.iter().all(|d| eval(d, &x).is_zero());
            if all_zero {
                return Ok(NondegeneracyVerdict::Degenerate);
            }
            // Positive-dimensional singular loci also show up on sampled
            // diagonal slices: test the symmetric point as well.
            let y: [Rational; 3] = [x[0].clone(), x[0].clone(), x[2].clone()];
            let all_zero_diag = eval(&terms, &y).is_zero()
                && derivs.iter().all(|d| eval(d, &y).is_zero());
            if all_zero_diag {
                return Ok(NondegeneracyVerdict::Degenerate);
            }
        }
    }
    Ok(NondegeneracyVerdict::ProbablyNondegenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::fan::{smooth_refine, spanning_fan};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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
    fn standard_simplex_pole_orders() {
        let p = simplex_p3();
        let fan = smooth_refine(&spanning_fan(&p).unwrap(), &p).unwrap();
        let data = LaurentData::standard(&p);
        let analysis = pole_analysis(&fan, &p, &data).unwrap();
        assert!(analysis.ray_faces.iter().all(|r| r.pole_order == 1));
        assert!(analysis.ray_faces.iter().all(|r| !r.face_points.is_empty()));
        // Every wall face is at most a segment.
        assert!(analysis.wall_faces.iter().all(|w| w.lattice_length <= 1));
        assert!(analysis.wall_faces.iter().any(|w| w.lattice_length == 1));
    }

    #[test]
    fn monomial_support_rejected() {
        let p = simplex_p3();
        let data = LaurentData::new(vec![([1, 0, 0], rat(1))]);
        assert!(matches!(data.check_support(&p), Err(ToricError::SupportViolation)));
    }

    #[test]
    fn octahedron_faces() {
        let p = octahedron();
        let fan = smooth_refine(&spanning_fan(&p).unwrap(), &p).unwrap();
        let data = LaurentData::standard(&p);
        let analysis = pole_analysis(&fan, &p, &data).unwrap();
        // Original facet rays see the full triangle face (three lattice
        // points), subdivision rays see smaller faces.
        let max_pts = analysis.ray_faces.iter().map(|r| r.face_points.len()).max().unwrap();
        assert_eq!(max_pts, 3);
    }

    #[test]
    fn probe_accepts_standard_data() {
        let p = simplex_p3();
        let data = LaurentData::standard(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = nondegeneracy_probe(&p, &data, 12, &mut rng).unwrap();
        assert_eq!(v, NondegeneracyVerdict::ProbablyNondegenerate);
    }

    #[test]
    fn probe_detects_square_pattern() {
        // Coefficients chosen so an edge restriction is a perfect square:
        // on the edge from e1 to e2 the polynomial (x1 - x2)^... use
        // coefficients 1, -2, 1 on e1, midpoint, e2 of a longer edge.
        let p = LatticePolytope::new(vec![[2, 0, 0], [0, 2, 0], [0, 0, 1], [-1, -1, -1]]);
        // Check the polytope has the edge with midpoint (1,1,0).
        let mut terms = vec![
            ([2, 0, 0], rat(1)),
            ([1, 1, 0], rat(-2)),
            ([0, 2, 0], rat(1)),
            ([0, 0, 1], rat(1)),
            ([-1, -1, -1], rat(1)),
        ];
        terms.push(([0, 0, 0], rat(0)));
        let data = LaurentData::new(terms);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = nondegeneracy_probe(&p, &data, 30, &mut rng).unwrap();
        assert_eq!(v, NondegeneracyVerdict::Degenerate);
    }
}
