//! Impact-ranking mobility and inequality analysis for citation corpora.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`corpus`]: ingest and filter publication records, windowed citation counts.
//! * [`disambig`]: rule-based author-mention scoring and clustering.
//! * [`cohort`]: author profiles, same-start-year cohorts, windowed impact.
//! * [`mobility`]: decile ranks, transition matrices, reshuffle null model.
//! * [`rwmodel`]: the Gaussian random-walk transition model and its calibration.
//! * [`inequality`]: Gini coefficients and Gini series.
//! * [`stats`]: Pearson, OLS with confidence bands, t-tests, SEM.
//! * [`synth`]: synthetic corpora and direct transition sampling.
//! * [`pipeline`]: end-to-end runs producing report bundles.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces identical output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cohort;
pub mod corpus;
pub mod disambig;
mod error;
mod exec;
pub mod inequality;
pub mod io;
pub mod mobility;
pub mod pipeline;
pub mod rwmodel;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
