//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures surfaced by geometric operations.
///
/// Contract violations that can only arise from programming mistakes
/// (mixing groups of different dimension, mismatched vector lengths)
/// panic instead; the variants here are reachable from well-typed input.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Principal logarithm requested outside its domain.
    #[error("principal logarithm undefined: rotation angle {angle:.6} is at or beyond the cut locus")]
    AngleOutOfRange { angle: f64 },

    /// A base point fell outside the box chart it was expected to live in.
    #[error("point lies outside the chart domain")]
    OutsideChart,

    /// Two automorphisms (or an automorphism and a trivialization) were
    /// combined although they are expressed against different reference
    /// connections.
    #[error("reference connections differ; re-express one operand before combining")]
    ReferenceMismatch,

    /// The base part of an automorphism fails the sampled invertibility check.
    #[error("base part is singular near x = {at:?} (|det| = {det:.3e})")]
    SingularBasePart { at: Vec<f64>, det: f64 },

    /// The scaling family of automorphisms is only defined for nonzero scale.
    #[error("scale factor must be nonzero")]
    ZeroScale,

    /// A one-form handed to the reconstruction routine is not linear on the
    /// cotangent fibre, so it cannot come from a fibrewise-linear map.
    #[error("one-form is not fibrewise linear (sampled residual {residual:.3e})")]
    NotFibrewiseLinear { residual: f64 },

    /// A two-form matrix is singular where an invertible one is required.
    #[error("two-form is degenerate (|det| = {det:.3e})")]
    DegenerateForm { det: f64 },

    /// Reduction was requested at a momentum value whose coadjoint orbit is
    /// not a single point.
    #[error("momentum value is not a coadjoint fixed point")]
    NotFixedPoint,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
