//! Particle swarm optimization with dynamic swarm dispersion.
//!
//! The crate provides:
//!
//! * [`objective`]: twelve scalable benchmark functions with seeded noise and rotations,
//! * [`swarm`]: particle/swarm state and a single deterministic PSO iteration,
//! * [`diversity`]: L1 dimension-wise position diversity and Euclidean distance,
//! * [`dispersion`]: the external archive and the periodic relocation machinery,
//! * [`optimizers`]: GPSO, LPSO, DMS-PSO and DSDPSO drivers producing [`RunRecord`]s,
//! * [`harness`]: config loading, seeded multi-run experiments, statistics and CSV output.

pub mod diversity;
pub mod dispersion;
pub mod error;
pub mod harness;
pub mod objective;
pub mod optimizers;
pub mod rng;
pub mod swarm;

pub use error::{Error, Result};
pub use objective::{make_problem, FunctionId, ObjectiveProblem};
pub use optimizers::{run, Algorithm, OptimizerConfig, RunRecord};
