//! Core data types: state spaces, DTMCs, pattern mixtures, strategies and
//! traces, plus trace ingestion and the model document format.

mod document;
mod dtmc;
mod ingest;
mod matrix;
mod mixture;
mod space;
mod trace;

pub use document::{FitSummary, ModelDocument, StateEntry, StrategyEntry, MODEL_FORMAT};
pub use dtmc::{validate_dtmc, Dtmc, ValidationReport, Violation};
pub use ingest::{ingest_traces, write_traces, EventMapping, LogFormat, UnmappedPolicy};
pub use matrix::Matrix;
pub use mixture::{PatternMixture, UserStrategy};
pub use space::{StateSpace, INIT_LABEL};
pub use trace::Trace;
pub(crate) use mixture::check_distribution;
