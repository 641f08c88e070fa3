use thiserror::Error;

use crate::snf::Certificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("multiplication table is not a Latin square: {0}")]
    NotLatinSquare(String),

    #[error("multiplication table is not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NonAssociative(usize, usize, usize),

    #[error("index 0 is not a two-sided identity")]
    IdentityNotZero,

    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),

    #[error("element index {index} out of range for group of order {order}")]
    InvalidElement { index: usize, order: usize },

    #[error("map is not a group homomorphism at ({0}, {1})")]
    NotHomomorphism(usize, usize),

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("differential is only defined up to degree 3 (got degree {0})")]
    DegreeTooHigh(usize),

    #[error("cochain is not closed")]
    NotClosed,

    #[error("cochain is not normalized")]
    NotNormalized,

    #[error("coboundary solving needs degree 2 or 3 (got degree {0})")]
    UnsupportedDegree(usize),

    #[error("elements {0} and {1} do not commute")]
    NotCommuting(usize, usize),

    #[error("surface relation fails: product of commutators is not the identity")]
    SurfaceRelation,

    #[error("matrix [[{a},{b}],[{c},{d}]] has determinant {det}, expected 1")]
    NotSl2z { a: i64, b: i64, c: i64, d: i64, det: i64 },

    #[error("matrix not in Gamma1({0})")]
    NotInGamma1(u64),

    #[error("enumeration of {0} tuples exceeds the size bound of 10^7")]
    SizeBound(u128),

    #[error("genus {0} is not supported (expected 1 or 2)")]
    UnsupportedGenus(usize),

    #[error("window solve infeasible: a combination of {} equations annihilates the system but pairs to {} with the right-hand side", .0.combination.len(), .0.value)]
    WindowInfeasible(Certificate),

    #[error("lift certificate failed at {0}")]
    LiftVerification(String),

    #[error("argument {0:?} lies outside the solved window of radius {1}")]
    OutsideWindow((i64, i64), i64),

    #[error("lifts are over different representations")]
    RepMismatch,

    #[error("invalid groupoid presentation: {0}")]
    InvalidPresentation(String),

    #[error("cocycle law fails: {0}")]
    InvalidCocycle(String),

    #[error("transport is not functorial: {0}")]
    NonFunctorial(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
