//! Exact-arithmetic toolkit for Hodge and weight filtrations of
//! Landau-Ginzburg models.
//!
//! Everything is computed over the rationals with arbitrary precision, so
//! every verdict (Hodge-Tate, speciality, spectral-sequence degeneration)
//! is exact rather than numerical.

pub mod double_complex;
pub mod filtration;
pub mod hodge;
pub mod linalg;
pub mod lp;
pub mod rescaling;
pub mod spectral;
pub mod strata;
pub mod toric;
pub mod wheel;

pub use filtration::{Filtration, NilpotentOp};
pub use hodge::{HodgePolynomial, MixedHodgeModel};
pub use linalg::{Rational, RationalMatrix};
pub use rescaling::RescalingModel;
pub use spectral::WeightGrid;
pub use strata::StrataComplex;
