use thiserror::Error;

use crate::family::Sign;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FamilyError {
    #[error("u = {0} is outside (1/sqrt 2, 1]")]
    OutOfDomain(f64),
    #[error("u = {0} is not a Pythagorean ratio; exact mode needs rational v")]
    NotPythagorean(String),
    #[error("q({i}, {j}, {k}, t={t}) = {value} is negative; F lies outside the feasibility polytope")]
    NegativeConditional {
        i: Sign,
        j: Sign,
        k: Sign,
        t: Sign,
        value: f64,
    },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PolytopeError {
    #[error("the reference vertex violates row {row} (value {value}) at u = {u}")]
    VertexOutsidePolytope { u: f64, row: char, value: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LocalModelError {
    #[error("u = {0} is outside the validity range of the reference model")]
    OutOfValidityRange(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("phase-one optimum {objective:e} is too close to zero to decide (margin {margin:e})")]
    NumericallyAmbiguous { objective: f64, margin: f64 },
    #[error("certificate row `{0}` does not exist in this problem")]
    LabelMismatch(String),
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("the feasibility polytope is empty at u = {0}")]
    EmptyPolytope(f64),
    #[error("the starting point u = {0} is not covered by its certificate")]
    StartNotCovered(f64),
    #[error("no certificate at u = {0}: the inflation LP is feasible")]
    NoCertificate(f64),
}
