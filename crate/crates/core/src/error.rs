use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("variable x{index} at byte {position} is out of range for {nvars} variables")]
    VariableOutOfRange { position: usize, index: u64, nvars: usize },
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the zero polynomial has no monomial factor")]
    ZeroPolynomial,
    #[error("power substitution needs k >= 1")]
    InvalidPower,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("empty point set")]
    Empty,
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("point set spans dimension {dim} < {nvars}")]
    Degenerate { dim: usize, nvars: usize },
    #[error("trellis points must be even and affinely independent")]
    InvalidTrellis,
    #[error("column-deletion hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("linear program exceeded the pivot limit")]
    PivotLimit,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("outer coefficients of a circuit must be positive")]
    NonPositiveOuter,
    #[error("outer exponents must form a trellis")]
    NotTrellis,
    #[error("inner exponent is not in the relative interior of the trellis")]
    NotInterior,
    #[error("polynomial must have exactly one term outside its even positive part")]
    NotCircuit,
    #[error("circuit is not at its circuit number")]
    NotBoundary,
    #[error("zero computation failed: residual {0:e}")]
    IllConditioned(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("inner exponent is not interior to the outer support")]
    NonInterior,
    #[error("critical point search did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("polynomial does not have the required shape: {0}")]
    Shape(String),
    #[error("requested coefficient exceeds the critical value")]
    AboveCritical,
    #[error("assembled circuit failed the nonnegativity check: {0}")]
    Assembly(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediatedError {
    #[error("lattice point enumeration exceeds the cap of {0} points")]
    TooManyPoints(usize),
    #[error("inner exponent is not in the mediated set")]
    NotMediated,
    #[error("circuit is not nonnegative")]
    NotNonnegative,
    #[error("k must be at least the number of variables")]
    PowerTooSmall,
    #[error("resupport failed: {0}")]
    Resupport(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

/// Certificate (de)serialization failure, located by JSON pointer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError { pointer: pointer.into(), message: message.into() }
    }
}
