//! Scientometrics analytics engine: author-period panel construction, four
//! publishing-productivity measurements, top-performer classification,
//! concentration and relative-presence metrics, and fixed-effects logistic
//! regression with diagnostics — plus a deterministic synthetic-cohort
//! generator that provides ground truth for every stage.
//!
//! The data-parallel inner loops run on rayon by default; build with
//! `--no-default-features` for a fully sequential library. Results are
//! identical either way.

pub mod classify;
pub mod config;
pub mod error;
pub mod exec;
pub mod felogit;
pub mod ingest;
pub mod metrics;
pub mod panel;
pub mod productivity;
pub mod report;
pub mod rng;
pub mod simgen;

pub use config::{Measure, Period, Periods, RunConfig, ShareBasis};
pub use error::{Error, Result};
