//! Certified proof-by-example for polynomial identities.
//!
//! Given polynomials `f_1, …, f_m, g` over the rationals, the engine decides
//! whether `g` vanishes on the variety `V(f)` by evaluating at one explicit,
//! sufficiently generic, approximate point and comparing against rigorous
//! a-priori bounds. All decisions are made with exact rational arithmetic and
//! outward-rounded enclosures; floating point never enters a verdict.

pub mod bounds;
pub mod error;
pub mod exactnum;
pub mod geometry;
pub mod mpoly;
pub mod pipeline;
pub mod valuations;
pub mod witness;

pub use bounds::{BoundContext, ChainKind, ThresholdReport};
pub use error::{Error, Result};
pub use exactnum::{
    compare, compare_certain, ln_enclosure, Comparison, Dyadic, ExactLog, LogBound, Rational,
};
pub use geometry::{compile, parse_program, GeoProgram};
pub use mpoly::{kronecker_substitute, MPoly};
pub use pipeline::{
    certify_identity, dichotomy_decide, dimension_by_example, membership_oracle,
    prove_zero_ambient, verify_certificate, Certificate, Irreducibility, Options, PolySystem,
    Verdict,
};
pub use valuations::{CertifiedValue, Coordinate, PadicApprox, Place, RealBall};
pub use witness::{Branch, FreeStyle, RecipeStep, SolvingRecipe, Witness};
