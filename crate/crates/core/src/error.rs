use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0}: only N = 1 and N = 2 are implemented")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "quadrature divergence: tail estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    QuadratureDivergence { estimate: f64, tolerance: f64 },

    #[error("decay fit failed: {0}")]
    FitFailure(String),

    #[error("decay exponent mismatch: fitted exponent {fitted:.4} differs from 4/3")]
    DecayExponentMismatch { fitted: f64 },

    #[error("derivative order {requested} exceeds tabulated maximum {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("boundary contamination: |f| = {value:.3e} near the truncation boundary")]
    BoundaryContamination { value: f64 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("tail too fat: boundary sample {value:.3e} exceeds tail tolerance")]
    TailTooFat { value: f64 },

    #[error("interpolation out of range at argument {arg:.4}")]
    InterpolationOutOfRange { arg: f64 },

    #[error("insufficient decay: only {points} usable norms before the floating-point floor")]
    InsufficientDecay { points: usize },

    #[error("thick nodal set: {fraction:.4} of the nodes are near zero")]
    ThickNodalSet { fraction: f64 },

    #[error("vanishing denominator {value:.3e}")]
    VanishingDenominator { value: f64 },

    #[error("degenerate quadratic: leading coefficient {a:.3e}")]
    DegenerateQuadratic { a: f64 },

    #[error("continuum of solutions detected: {0}")]
    ContinuumDetected(String),

    #[error("ill-conditioned resultant: condition number {condition:.3e}")]
    IllConditionedResultant { condition: f64 },

    #[error("shooting did not converge: {0}")]
    ShootingNoConvergence(String),

    #[error(
        "integrator step collapsed at y = {at:.6} (last good interface estimate {last_good:.6})"
    )]
    StiffnessFailure { at: f64, last_good: f64 },

    #[error("fitted growth exponent {fitted:.4} is within the margin of the nonlinear bundle 4/n = {bundle:.4}")]
    WrongBundle { fitted: f64, bundle: f64 },

    #[error("secant iteration stalled: {0}")]
    SecantStall(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
