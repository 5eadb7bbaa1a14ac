//! Informative multi-UAV mission planning.
//!
//! Select, assign and sequence sampling locations for a fleet of
//! flight-time-limited UAVs so that spatially correlated priorities are
//! covered as well as possible. The crate provides the problem model, five
//! coverage objectives, an exact bidirectional labeling solver for small
//! instances, the two-phase multi-start ALNS heuristic, and Gaussian-process
//! tooling to score missions by prediction error.

pub mod alns;
pub mod coverage;
pub mod error;
pub mod exact_dp;
pub mod instance;
pub mod instance_gen;
pub mod metrics;
pub mod objective;
pub mod spatial_gp;

pub use coverage::{CoverageWeights, WeightScheme};
pub use error::{Error, Result};
pub use instance::{Instance, Location, MotionModel, Node, Route, Solution, Vehicle};
pub use objective::{ModelKind, ObjectiveModel, ObjectiveState};
