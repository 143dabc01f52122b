use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("non-finite value in {what} at node {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("lower bound exceeds upper bound at node {index} ({lower} > {upper})")]
    InconsistentBounds { index: usize, lower: f64, upper: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("fixed-point iteration for p did not converge in {iterations} steps (worst residual {residual:e})")]
    FixedPointCap { iterations: usize, residual: f64 },

    #[error("projected Gauss-Seidel did not converge in {sweeps} sweeps (last update {update:e}, residual {residual:e})")]
    OracleCap {
        sweeps: usize,
        update: f64,
        residual: f64,
    },

    #[error("unknown problem preset `{0}`")]
    UnknownPreset(String),

    #[error("problem `{0}` has no closed-form exact solution")]
    NoExactSolution(String),

    #[error("problem kind {found} cannot be solved by the {solver} solver")]
    WrongKind {
        solver: &'static str,
        found: &'static str,
    },

    #[error("malformed field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
