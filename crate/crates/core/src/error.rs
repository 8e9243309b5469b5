use thiserror::Error;

/// Errors from group-level and pointwise geometric operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rho = {rho} outside the admissible range {range}")]
    RhoOutOfRange { rho: f64, range: &'static str },
    #[error("characteristic point: |grad u - z_perp/2| = {norm:.3e} below threshold {threshold:.3e}")]
    CharacteristicPoint { norm: f64, threshold: f64 },
    #[error("degenerate adapted frame at rho = {rho}")]
    DegenerateFrame { rho: f64 },
    #[error("P_last = 0: straight-line geodesic has no finite pole")]
    StraightLineGeodesic,
}

/// Errors from quadrature and integral evaluations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("non-finite integrand value {value} at node {node}")]
    NonFinite { node: f64, value: f64 },
    #[error("quadrature did not converge: last two refinements differ by {delta:.3e}")]
    NonConverged { delta: f64 },
    #[error("integrand not integrable for n = {n}: near-pole behaviour rho^{exponent} against weight rho^{weight_exponent}")]
    NotIntegrable {
        n: usize,
        exponent: i64,
        weight_exponent: i64,
    },
}

/// Errors from the spectral module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("indicial resonance: recurrence denominator vanishes at l = {l} (m = {m}, mu = {mu})")]
    IndicialResonance { l: usize, m: i64, mu: f64 },
    #[error("evaluation point rho = {rho} must lie in the open interval (0, 1)")]
    EndpointEvaluation { rho: f64 },
    #[error("full operator only supported for n = 1, got n = {n}")]
    UnsupportedDimension { n: usize },
    #[error("eigenvalue solver failed: {reason}")]
    SolverBreakdown { reason: String },
    #[error("mesh not converged: lowest eigenvalue moved by {delta:.3e} under refinement")]
    MeshNotConverged { delta: f64 },
}

/// Errors from the variational module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("test function support [{a}, {b}] violates the precondition {requirement}")]
    SupportViolation {
        a: f64,
        b: f64,
        requirement: String,
    },
    #[error("psi must be positive at rho = {rho}, got {value}")]
    NonPositivePsi { rho: f64, value: f64 },
    #[error("zero denominator in Rayleigh quotient")]
    ZeroDenominator,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}
