//! Replicator dynamics for two-strategy games whose payoffs respond to a
//! logistic environment and to the spread of two competing opinions.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod integrator;
pub mod output;
pub mod scenario;

pub use analysis::{
    basin_scan, find_fixed_points, threshold_bisect, BasinMap, FixedPointKind, FixedPointRecord,
};
pub use dynamics::{
    ClampMode, EnvParams, Model, Opinion, ProtocolMatrix, StateDerivative, SystemState, TrustMatrix,
};
pub use error::{ConfigError, Error, Result};
pub use game::{
    average_payoff, check_pd_conditions, classify_2x2, expected_payoff, hawk_dove_matrix,
    interpolate, EquilibriumReport, GamePair, Payoff2x2, Strategy,
};
pub use integrator::{simulate, simulate_with, Scheme, Trajectory};
pub use scenario::{Axis, IntegratorSettings, Scenario};
