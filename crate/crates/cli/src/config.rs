//! Subcommand arguments. Every field is optional so that a value can come
//! from the command line or from the matching table of the config file;
//! the command line wins.

use std::path::{Path, PathBuf};

use clap::Args;
use patternmc::{Error, Result};
use serde::Deserialize;

macro_rules! mergeable {
    ($name:ident { $($field:ident),* $(,)? }) => {
        impl $name {
            /// Fills fields missing on the command line from the file.
            pub fn merge(self, file: Option<Self>) -> Self {
                match file {
                    None => self,
                    Some(f) => Self { $($field: self.$field.or(f.$field)),* },
                }
            }
        }
    };
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// Model document to draw from.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Trace log to write (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of users sharing `--theta` or `--user` [default: 100].
    #[arg(long)]
    pub users: Option<usize>,
    /// Events per trace [default: 200].
    #[arg(long)]
    pub length: Option<usize>,
    /// RNG seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Strategy shared by all users, e.g. `0.7,0.3`.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Use this user's strategy from the document for all users.
    #[arg(long)]
    pub user: Option<String>,
    /// Log format: tsv or csv [default: tsv].
    #[arg(long)]
    pub format: Option<String>,
}
mergeable!(SimulateArgs { model, out, users, length, seed, theta, user, format });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    /// Trace log to fit.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// Model document whose state space the events map onto.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// State names, in order, when no model document is given.
    #[arg(long, value_delimiter = ',')]
    pub states: Option<Vec<String>>,
    /// Log format: tsv or csv [default: tsv].
    #[arg(long)]
    pub format: Option<String>,
    /// Unmapped events: strict or skip [default: strict].
    #[arg(long)]
    pub unmapped: Option<String>,
    /// Number of patterns [default: 2].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Fitted model document to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration log-likelihood table to write.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}
mergeable!(FitArgs {
    traces, model, states, format, unmapped, k, max_iters, tol, restarts, seed, smoothing, out,
    diagnostics,
});

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UmmArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub user: Option<String>,
    /// Metamodel JSON to write (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(UmmArgs { model, theta, user, out });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub user: Option<String>,
    /// Property text, e.g. `P=? [ F<=5 "feed" ]`.
    #[arg(long, conflicts_with = "question")]
    pub formula: Option<String>,
    /// One of q1, q2, q3, q4.
    #[arg(long)]
    pub question: Option<String>,
    /// Pattern index of the question.
    #[arg(long)]
    pub i: Option<usize>,
    /// Step bound `N` (integer or `inf`).
    #[arg(long)]
    pub n: Option<String>,
    /// Second step bound `N2` of q4 (integer or `inf`).
    #[arg(long)]
    pub n2: Option<String>,
}
mergeable!(CheckArgs { model, theta, user, formula, question, i, n, n2 });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    /// Sweep spec (TOML).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Model document; overrides the spec's `model`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Table to write; overrides the spec's `output` (standard output if
    /// neither is set).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(SweepArgs { spec, model, out });

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub user: Option<String>,
    /// PRISM model file to write (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also emit the property of this question (q1..q4).
    #[arg(long)]
    pub question: Option<String>,
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub n2: Option<String>,
    /// Property file to write (standard output if absent).
    #[arg(long)]
    pub properties_out: Option<PathBuf>,
}
mergeable!(ExportArgs { model, theta, user, out, question, i, n, n2, properties_out });

/// The optional `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulate: Option<SimulateArgs>,
    pub fit: Option<FitArgs>,
    #[serde(rename = "build-umm")]
    pub build_umm: Option<UmmArgs>,
    pub check: Option<CheckArgs>,
    pub sweep: Option<SweepArgs>,
    #[serde(rename = "export-prism")]
    pub export_prism: Option<ExportArgs>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
