//! Activity-pattern inference and probabilistic model checking over user metamodels.
//!
//! Logged user traces are explained as a mixture of `K` discrete-time Markov
//! chains ("activity patterns") that share one state space. Every user owns a
//! strategy vector `theta` and re-draws the pattern at every step. Combining
//! the patterns with one user's strategy yields a user metamodel (a DTMC on
//! `S x {1..K}` plus a dummy init state) which can be queried with
//! PCTL-style formulas, filtered probabilities and products of them.
//!
//! Module map:
//! - [`model`]: state spaces, DTMCs, mixtures, strategies, traces, ingestion
//!   and the model document format.
//! - [`inference`]: EM fitting with restarts and the generative simulator.
//! - [`umm`]: user metamodel construction and state restriction.
//! - [`checker`]: formula AST, parser and numerical evaluation, plus the
//!   path-enumeration and Monte-Carlo oracles.
//! - [`questions`]: composed product queries and parameter sweeps.
//! - [`prism`]: PRISM model/property export and a round-trip re-parser.

pub mod checker;
pub mod error;
pub mod fixtures;
pub mod inference;
pub mod model;
pub mod numeric;
pub mod prism;
pub mod questions;
pub mod umm;

pub use error::{Error, Result};
