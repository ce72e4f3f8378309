use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} violates {constraint}")]
    Parameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("tensor product of an empty factor list")]
    EmptyFactors,

    #[error("dimension {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit index {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("qubit index set is empty")]
    EmptyQubitSet,

    #[error("operator is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace {0:e} is too close to zero")]
    ZeroTrace(f64),

    #[error(
        "derivative couples null directions of the state (|<i|drho|j>| = {coupling:e}); \
         the Fisher information is ill-defined there"
    )]
    IllDefinedQfi { coupling: f64 },

    #[error("r = 1 together with lambda in {{0, 1}} is an excluded pure-state corner")]
    PureStateCorner,

    #[error("the bound m/(lambda(1-lambda)) is infinite at lambda = {0}")]
    InfiniteBound(f64),

    #[error(
        "outcome {index} has zero probability but nonzero derivative; information is infinite"
    )]
    InfiniteInformation { index: usize },

    #[error("the state is not of X form: residual Pauli coefficient {residual:e}")]
    NotXState { residual: f64 },

    #[error("gain is undefined at r = 0; use the r -> 0 limit instead")]
    GainAtZeroPolarization,

    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    constraint: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            constraint,
        })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")
}

/// Polarization strictly below one.
pub(crate) fn check_mixed_r(r: f64) -> Result<()> {
    if r.is_finite() && (0.0..1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "r",
            value: r,
            constraint: "0 <= r < 1",
        })
    }
}
