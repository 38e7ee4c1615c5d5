use thiserror::Error;

pub type Result<T, E = FlockError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FlockError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported Gauss-Lobatto point count {0} (supported: 2, 3, 4)")]
    UnsupportedQuadrature(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error(
        "negative cell average {value:e} at x-cell {x_cell}, v-cell {v_cell} (t = {time}); \
         time step violates the positivity CFL bound"
    )]
    NegativeAverage {
        time: f64,
        x_cell: usize,
        v_cell: usize,
        value: f64,
    },

    #[error("non-finite value in state at t = {time}")]
    NonFinite { time: f64 },

    #[error("marginals are not on nested grids: {0}")]
    NonNestedGrids(String),

    #[error("convergence study needs at least 3 refinement levels including the reference, got {0}")]
    TooFewLevels(usize),

    #[error("no unconditional flock bound: the influence integral beyond S0 = {s0} stays below V0 = {v0}")]
    NoFlockBound { s0: f64, v0: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FlockError {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// stability violations detected while stepping, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            FlockError::Config(_)
            | FlockError::UnknownPreset(_)
            | FlockError::InvalidGrid(_)
            | FlockError::TooFewLevels(_) => 2,
            FlockError::NegativeAverage { .. } | FlockError::NonFinite { .. } => 3,
            _ => 1,
        }
    }

    /// True for errors raised by a time step that broke positivity.
    pub fn is_stability_violation(&self) -> bool {
        self.exit_code() == 3
    }
}
