//! Audit engine for credit-decision model pools.
//!
//! A pool of candidate models is trained over a tabular dataset, measured on
//! one shared holdout for accuracy and approval-rate disparity, and then
//! evaluated under two legal doctrines: disparate impact (DI) and the UDAP
//! "unfairness" standard. The engine reports which alternative models each
//! doctrine accepts and where the two disagree.
//!
//! The pipeline, bottom up:
//!
//! * [`dataset`] loads CSV data against a [`dataset::DatasetSchema`], encodes
//!   and splits it, and can generate synthetic fixtures.
//! * [`learners`] trains from-scratch classifiers with optional fairness
//!   interventions.
//! * [`search`] runs a configuration grid and assembles a
//!   [`search::CandidatePool`].
//! * [`metrics`] holds accuracy, selection rates, disparity, AIR, confidence
//!   intervals and the Pareto frontier.
//! * [`doctrine`] turns a pool into per-doctrine verdicts.
//! * [`report`] serializes everything and draws the scatter plot.

pub mod dataset;
pub mod doctrine;
pub mod error;
pub mod learners;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod search;

pub use error::{Error, Result};
pub use par::ExecMode;
