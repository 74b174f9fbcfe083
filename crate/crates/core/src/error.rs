use thiserror::Error;

/// Errors raised by the algebra, calculus and lattice-summation routines.
///
/// Numeric payloads are stored as `f64` whatever the scalar type of the
/// computation, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("paravector norm {norm:e} is below the zero threshold (pole or singular input)")]
    ZeroNorm { norm: f64 },

    #[error("grade-2/3 residue {residue:e} exceeds tolerance {tolerance:e} for a paravector-valued result")]
    GradeLeak { residue: f64, tolerance: f64 },

    #[error("multi-index of length zero has no arrangements")]
    EmptyIndex,

    #[error("1 - lambda x is not invertible")]
    NotInvertible,

    #[error("v(x0, 0) = {value:e} does not vanish on the real axis")]
    AxisSingularity { value: f64 },

    #[error("cotangent pole: |e^(nx) - e^(-nx)| = {norm:e}")]
    PoleOfCotan { norm: f64 },

    #[error("evaluation point lies within {distance:e} of lattice point {lattice_point:?}")]
    NearPole { distance: f64, lattice_point: [f64; 4] },

    #[error("radius {radius:e} is too large: the tail majorant needs radius < {limit:e}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("series not converged: tail bound {tail_bound:e} > target {target:e} after {shells} shells")]
    Unconverged { tail_bound: f64, target: f64, shells: usize },

    #[error("multi-index length {length} is not valid here (expected {expected})")]
    BadIndex { length: u32, expected: u32 },

    #[error("{0:?} is not a half-period of the lattice")]
    NotHalfPeriod([f64; 4]),

    #[error("half-periods are not linearly independent (smallest singular value {min_singular_value:e})")]
    DependentPeriods { min_singular_value: f64 },

    #[error("lattice rank {0} is not supported here")]
    InvalidRank(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
