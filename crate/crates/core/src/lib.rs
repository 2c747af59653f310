//! Simulation and verification library for swarms of extremely myopic
//! processes.
//!
//! The model: `n` anonymous processes live in d-dimensional Euclidean space
//! and move in synchronous rounds. Each process perceives exactly one thing —
//! the position of its *closest* other occupied location — and moves
//! according to a rule of the form `target = p + fx(D)·x̂ + fy(D)·ŷ`, where
//! `D` is the observed distance, `x̂` points at the perceived neighbor, and
//! `ŷ` is orthogonal to `x̂`. An adversary resolves what the process cannot:
//! which of several equally near neighbors is perceived, and which way `ŷ`
//! points.
//!
//! The crate provides:
//!
//! - the round engine and the policy/adversary machinery ([`engine`],
//!   [`policies`]),
//! - geometric primitives including an exact-arithmetic-friendly midpoint
//!   and a smallest-enclosing-ball construction with an independent
//!   brute-force oracle ([`geometry`]),
//! - canned starting configurations ([`scenarios`]),
//! - runnable certificates for the model's contraction, gathering,
//!   fault-tolerance, and impossibility properties ([`analysis`],
//!   [`suites`]).
//!
//! Everything is deterministic given the inputs and seeds; see [`seeds`].

pub mod analysis;
pub mod engine;
pub mod geometry;
pub mod model;
pub mod policies;
pub mod sampling;
pub mod scenarios;
pub mod seeds;
pub mod suites;
pub mod tolerances;

pub use engine::{
    run, step, CrashEvent, EngineError, RunPlan, RunSettings, StepOutcome, StepRecord, StopReason,
    Trace,
};
pub use geometry::{distance, midpoint, smallest_enclosing_ball, Ball, GeometryError, Point, Vector};
pub use model::{Configuration, ModelError, NeighborView, Occupancy, ProcessId, ProcessRecord};
pub use policies::{
    AdversaryScript, MoveRule, OrthogonalChoice, PolicyError, RuleSpec, SignScript, TiePolicy,
};
pub use scenarios::{BuiltScenario, ScenarioError, ScenarioFile, ScenarioSpec};
pub use suites::{run_suite, SuiteOptions, UnknownSuite, SUITES};
