//! Toric pipeline: reflexive polytopes, fans and their smooth refinements,
//! Laurent polynomial pole data, blow-up strata bookkeeping, cohomology
//! rings of smooth complete fans, and the quantum models of projective
//! space.

pub mod blowup;
pub mod fan;
pub mod laurent;
pub mod polytope;
pub mod quantum;
pub mod ring;

pub use blowup::blowup_strata;
pub use fan::{smooth_refine, spanning_fan, Fan};
pub use laurent::{nondegeneracy_probe, pole_analysis, LaurentData, NondegeneracyVerdict};
pub use polytope::{validate_reflexive, LatticePolytope};
pub use quantum::projective_quantum_flatness;
pub use ring::{cohomology_ring, fano_rescaling, CohomologyRing};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToricError {
    #[error("polytope is not full dimensional")]
    NotFullDimensional,
    #[error("polytope is not reflexive: facet {0} has lattice distance {1}")]
    NotReflexive(usize, i64),
    #[error("origin is not interior to the polytope")]
    OriginNotInterior,
    #[error("facet {0} is not a unimodular triangle")]
    FacetNotUnimodular(usize),
    #[error("no unimodular subdivision found within the candidate rays")]
    RefinementFailed,
    #[error("ray {0} violates the unit pole depth against the polytope")]
    BadRayDepth(usize),
    #[error("support of the Laurent data does not span the polytope")]
    SupportViolation,
    #[error("fan is not complete")]
    NotComplete,
    #[error("fan is not smooth: cone {0} has determinant {1}")]
    NotSmooth(usize, i64),
    #[error("fan combinatorics are inconsistent: {0}")]
    BadFan(String),
}
