//! Joint task offloading and communication/computing resource allocation
//! across an IoT-edge-cloud continuum.
//!
//! Subnetworks of sensor elements (SNE), low- and high-capability units
//! (LC, HC) share an edge and a cloud unit. Each episode samples a task
//! batch and a Rayleigh-faded channel snapshot, then places every task on a
//! processing unit and grants it orthogonal radio resources along the way.
//! Three schemes are compared: a GA minimising total execution time, a GA
//! minimising deadline misses, and a random baseline.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod evaluator;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod policies;
pub mod solver;

pub use error::{Error, Result};
pub use evaluator::{Allocation, TaskAllocation, TaskTimes, Violation};
pub use harness::{run_episode, run_sweep, EpisodeOutcome, EpisodeRecord, ExperimentConfig, Scenario, SweepSpec};
pub use metrics::MetricsReport;
pub use model::{build_topology, sample_tasks, ScenarioConfig, TaskSpec, Topology};
pub use policies::PolicyKind;
pub use solver::{run_ga, GaConfig, GaOutcome};
