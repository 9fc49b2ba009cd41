//! Rule-adhering synthetic data for tabular datasets.
//!
//! `synthtab` trains a small autoregressive generative model over the columns
//! of a mixed-type table and lets a domain expert declare hard constraints
//! ("a Doctorate holder is at least 25 years old") in a one-line-per-rule
//! DSL. Declared rules can be enforced two ways, separately or combined:
//!
//! * **during training** — an extra loss component penalizes probability
//!   mass assigned to invalid value combinations, and
//! * **during sampling** — invalid values are masked out (probability set to
//!   zero, remainder renormalized), which guarantees the output contains no
//!   violating record.
//!
//! The crate also ships the evaluation stack used to judge the output:
//! per-rule violation rates, contingency tables with invalid cells flagged,
//! total-variation-distance fidelity scores, and a train-synthetic-test-real
//! (TSTR) harness built on an in-crate histogram gradient-boosting
//! classifier with Mann-Whitney AUC.
//!
//! Start with the runnable programs under `examples/` — one per capability:
//!
//! * `make_demo_csv` — materialize the bundled census-like demo table
//! * `ingest_and_split` — CSV ingestion, schema inference, holdout split
//! * `declare_rules` — parse, validate and audit rules against a table
//! * `train_generator` — fit the autoregressive model, with and without
//!   the rule penalty
//! * `constrained_sampling` — masked decoding with dead-end backtracking
//! * `evaluate_quality` — violation rates, contingency tables, TVD, TSTR
//! * `full_experiment` — the end-to-end pipeline across all four arms
//!
//! The same pipeline is scriptable through the thin `synthtab` binary
//! (`split`, `train`, `generate`, `evaluate`, `experiment`, `report`).

pub mod cli;
pub mod data;
pub mod eval;
pub mod fixtures;
pub mod model;
pub mod rules;
pub mod sampler;

pub use data::{ColumnKind, ColumnSpec, Dataset, EncodedRow, SchemaHint, TableSchema, Value};
