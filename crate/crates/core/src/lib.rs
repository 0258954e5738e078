//! Certified triangle-network nonlocality via hexagon web-inflation linear programs.

pub mod certify;
pub mod error;
pub mod family;
pub mod inflation;
pub mod linalg;
pub mod localmodel;
pub mod lpcore;
pub mod polytope;
pub mod scalar;

pub use error::{CertifyError, FamilyError, LocalModelError, LpError, PolytopeError};
pub use family::{
    check_consistency, condition_q, eval_P, eval_q, fixed_correlators, BinaryDist3, BinaryDist4,
    CorrelatorPoint, FixedCorrelators, FourOutcome, FourOutcomeDist, Sign, UParam,
};
pub use scalar::{Mode, Rational, Ring, Scalar};
