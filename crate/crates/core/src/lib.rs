//! Spatio-temporal model checking for industrial plant layouts.
//!
//! Plant models are logical invariants: conjunctions of implications that
//! attach geometry, topology and ownership to points and intervals of
//! discrete time. This crate provides the term language, a textual format
//! for it, safe over- and under-approximation of the geometry, grounding of
//! models into discrete point sets, and checkers for collision absence,
//! sensor coverage, device proximity and time-dependent connectivity.
//! An event pipeline replays alarm logs against the models and renders
//! decision-support displays.
//!
//! Checking is data-parallel by default (the `parallel` feature, enabled
//! by default, pulls in rayon); every entry point has a sequential twin
//! with a `_seq` suffix and results never depend on the schedule.

pub mod checker;
pub mod dsl;
pub mod geometry;
pub mod model;
pub mod pipeline;
pub mod sat;
pub mod scenario;
pub mod temporal;
pub mod topology;

pub use checker::{check, check_seq, export_dimacs, ground_points, ground_points_seq, Query, Verdict};
pub use dsl::{parse_model, print_model, ParseError};
pub use geometry::{ApproxMode, GridPoint, PointSet4D, Region};
pub use model::{filter_by_owner, list_owners, normalize, AtomValue, Invariant, Tick};
pub use pipeline::{replay, EventRecord, PipelineConfig, PlantModels, ReplayOutcome};
pub use temporal::{flatten, slice_at, TimeGuard, TimedFact};
pub use topology::{TimeIndexedGraph, TransitionSystem};
