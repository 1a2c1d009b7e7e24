//! Power-of-distance (`D^alpha`) seeding for k-means.
//!
//! The crate provides:
//!
//! - [`geometry`]: dense point storage, squared distances, powered cost
//!   functions, and incremental nearest-center maintenance.
//! - [`instances`]: synthetic instance families (Gaussian and student-t
//!   mixtures, three adversarial constructions) plus CSV dataset I/O.
//! - [`seeding`]: `D^alpha` sampling, the greedy multi-candidate variant,
//!   and uniform seeding, all with replayable randomness.
//! - [`lloyd`]: Lloyd refinement from any seeded center set.
//! - [`diagnostics`]: exact instance parameters (per-cluster deviation,
//!   concentration moment, weight classes) and approximation-bound
//!   evaluation.
//! - [`potential`]: an observer that tracks per-weight-class counters and a
//!   potential function over a seeding run, with deterministic and
//!   exact-expectation inequality checks.
//! - [`harness`]: alpha-sweep experiment runner with CSV and SVG output.

pub mod diagnostics;
pub mod geometry;
pub mod harness;
pub mod instances;
pub mod lloyd;
pub mod potential;
pub mod rng;
pub mod seeding;

pub use diagnostics::ParamReport;
pub use geometry::{CenterSet, ClusterCosts, Dataset};
pub use harness::{ExperimentConfig, SummaryRow, TrialResult};
pub use instances::{InstanceSpec, MixtureComponent};
pub use lloyd::{LloydConfig, LloydResult};
pub use potential::{LemmaReport, PotentialState};
pub use seeding::{Method, SeedingConfig, SeedingTrace};
