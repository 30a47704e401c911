use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("sampled functions live on different grids")]
    GridMismatch,

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("non-finite value in {what} at node {node}")]
    NonFinite { what: &'static str, node: usize },

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("unknown builtin problem `{name}` (available: {available})")]
    UnknownBuiltin { name: String, available: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("particular solutions are linearly dependent")]
    LinearlyDependent,

    #[error("particular solution vanishes: {0}")]
    VanishingSolution(String),

    #[error("series evaluated outside its trust radius (|dλ| = {distance:e}, radius = {radius:e})")]
    OutsideTrustRadius { distance: f64, radius: f64 },

    #[error("solver: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
