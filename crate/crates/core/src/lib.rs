//! Positivity-preserving discontinuous Galerkin solver for the kinetic
//! Cucker-Smale and Motsch-Tadmor flocking equations
//!
//! ```text
//! f_t + v f_x + (f L[f])_v = 0,   L[f](x, v) = int (v* - v) G(x, v*) dv*
//! ```
//!
//! Velocity is discretized by a modal DG method of degree `k <= 2` with an
//! upwind flux, a Gauss-Lobatto positivity limiter and SSP Runge-Kutta time
//! stepping; position is handled by finite-volume transport combined through
//! operator splitting.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flocking;
pub mod grid;
pub mod initial;
pub mod interaction;
pub mod presets;
pub mod runner;
pub mod time;
pub mod transport;

pub use config::{load_config, ScenarioConfig};
pub use diagnostics::{
    flock_diameter, l1_error, total_mass, velocity_marginal, DiagnosticsRecord, FlockBound, Marginal,
};
pub use error::{FlockError, Result};
pub use flocking::{CflMode, FlockingOperator};
pub use grid::{DGState, LegendreBasis, PhaseGrid};
pub use interaction::{InfluenceFunction, InteractionModel, Normalization};
pub use presets::preset;
pub use runner::{run_convergence, run_scenario, RateTable, RunSummary, Simulation};
pub use time::Scheme;
