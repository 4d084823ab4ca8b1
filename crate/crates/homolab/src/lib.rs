//! Synthetic graphs with controllable local-homophily distributions,
//! homophily metrics, closed-form linear graph models, and a stratified
//! evaluation harness.
//!
//! The crate has five pieces:
//!
//! * [`graph`] — immutable labeled graphs with a canonical JSON form;
//! * [`metrics`] — global/local homophily ratios and the class
//!   compatibility matrix;
//! * [`gen`] — a preferential-attachment generator whose uniformity knob
//!   spreads node-level homophily across the whole [0, 1] range;
//! * [`theory`] — exact solutions of three linear graph models and checks
//!   of their closed-form prediction-shift laws;
//! * [`eval`] — splits, least-squares fits, per-local-homophily-bin macro
//!   F1, and multi-seed sweeps, with [`io`] providing canonical file
//!   formats and run manifests.

pub mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod io;
mod linalg;
pub mod metrics;
pub mod theory;

pub use error::{Error, Result};
pub use graph::Graph;
