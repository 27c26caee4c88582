//! Generalized Takiff algebras over `sl_{n+1}`, their invariants and Kostant
//! sections, and the hyperbolic Toda lattices they carry.

pub mod algebra;
pub mod cartan;
pub mod checks;
pub mod error;
pub mod invariants;
pub mod kostant;
pub mod linalg;
pub mod ode;
pub mod sampling;
pub mod scalar;
pub mod serial;
pub mod series;
pub mod toda;

pub use algebra::{BasisLabel, Component, LieAlgebraData, NilpotentGroupElement, Takiff, TakiffElement};
pub use cartan::{cartan_matrix, positive_roots, validate_cartan, CartanMatrix, RootSystem};
pub use error::{Error, Result};
pub use invariants::{InvariantSpec, Observable};
pub use kostant::{KostantSection, Reduction, SectionBasis};
pub use scalar::{Rational, Scalar};
pub use series::SeriesSolution;
pub use toda::{CanonicalState, Formulation, Method, OmegaBlock, Settings, TodaState, TodaSystem, Trajectory};

/// Element with exact rational coefficients.
pub type ExactElement = TakiffElement<Rational>;
/// Element with double-precision coefficients.
pub type FloatElement = TakiffElement<f64>;
/// Element with single-precision coefficients.
pub type SingleElement = TakiffElement<f32>;
/// Toda state in double precision.
pub type FloatState = TodaState<f64>;
/// Toda state with exact rational coordinates.
pub type ExactState = TodaState<Rational>;
