//! Horofunction boundaries of finite-dimensional normed spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: exact polytopes (hull, polarity, face lattice, extreme
//!   sets, exposed-face chains) and set limits of point clouds.
//! - [`lp`]: a small dense exact simplex solver.
//! - [`convexfn`]: max-affine functions, affine-on-polytope functions and
//!   their Legendre–Fenchel transforms, plus probe-based function metrics.
//! - [`normedspace`]: balls, gauges (possibly asymmetric), metrics and the
//!   distance functions `φ_z(x) = ||z - x|| - ||z||`.
//! - [`horoboundary`]: Busemann points `h*_{E,p}`, classification of
//!   horofunctions, the extreme-set closure test, almost-geodesics and
//!   min-decomposition certificates.
//! - [`builtins`]: the named spaces used by the CLI (ℓ∞, ℓ¹, polygonal
//!   discs, and two smooth three- and four-dimensional constructions).
//!
//! Polarity uses the sign convention `B° = {y : <y, x> >= -1 for x in B}`,
//! so that `||z|| = -inf_{y in B°} <y, z>` holds without symmetry.

pub mod arith;
pub mod builtins;
pub mod convexfn;
pub mod geometry;
pub mod horoboundary;
pub mod json;
pub mod lp;
pub mod normedspace;
pub mod quasi;

pub use arith::{Q, QVec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("origin not interior")]
    OriginNotInterior,
    #[error("unbounded set: {0}")]
    Unbounded(String),
    #[error("not full-dimensional: {0}")]
    NotFullDimensional(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a subset: {0}")]
    NotSubset(String),
    #[error("not an extreme set")]
    NotExtreme,
    #[error("improper function: {0}")]
    ImproperFunction(String),
    #[error("conjugate domain leaves the dual ball: {0}")]
    DomainOutsideBall(String),
    #[error("non-finite value at sample {0}")]
    NonFinite(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lambda search diverged: {0}")]
    LambdaSearchDiverged(String),
    #[error("interrupted")]
    Interrupted,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
