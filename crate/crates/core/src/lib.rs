//! Growth models, production-function invariants, and factor-share
//! diagnostics for annual labor/capital/production panels.
//!
//! The pipeline this crate supports, end to end:
//!
//! 1. ingest a panel ([`series`]) and fit exponential or logistic growth to
//!    each series ([`growth`], on top of the solver in [`lsq`]);
//! 2. read production functions off the fitted flows as their invariants
//!    ([`invariants`]): Cobb–Douglas for exponential growth, a bounded
//!    surface for logistic growth, with the rate orthogonality
//!    α·b₁ + β·b₂ = b₃ tying exponents to growth rates;
//! 3. calibrate those surfaces against the data directly ([`prodfit`]);
//! 4. compute factor shares by independent routes and measure how constant
//!    the wage share actually is along each regime's flow ([`shares`]) —
//!    constant for exponential growth under Cobb–Douglas, drifting once
//!    growth saturates.
//!
//! [`cli`] wires the pieces into a reproducible command-line tool with
//! deterministic JSON/CSV reports ([`report`]) and SVG charts ([`plot`]).

pub mod cli;
pub mod error;
pub mod growth;
pub mod invariants;
pub mod lsq;
pub mod plot;
pub mod prodfit;
pub mod report;
pub mod series;
pub mod shares;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
