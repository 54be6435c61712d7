use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Matrix, PatternMixture, StateSpace, UserStrategy};
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "patternmc-model/1";

/// One action state of the shared space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub user_id: String,
    pub theta: Vec<f64>,
}

/// Fit diagnostics carried alongside a fitted mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub loglik: f64,
    pub iters_per_restart: Vec<usize>,
    pub chosen_restart: usize,
}

/// JSON document holding a pattern mixture and per-user strategies.
///
/// Floats are written in shortest round-trip form, so reading a document
/// back reproduces every probability bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub n: usize,
    pub k: usize,
    pub states: Vec<StateEntry>,
    pub iota_init: Vec<f64>,
    /// `k` matrices, each `n` rows of `n` probabilities.
    pub patterns: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub strategies: Vec<StrategyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

impl ModelDocument {
    pub fn from_mixture(mixture: &PatternMixture, strategies: &[UserStrategy]) -> Self {
        let space = mixture.space();
        let offset = usize::from(space.has_dummy_init());
        let states = (0..mixture.n())
            .map(|s| StateEntry {
                name: space.name(s + offset).unwrap_or_default().to_string(),
                labels: space.labels(s + offset).iter().cloned().collect(),
            })
            .collect();
        Self {
            format: MODEL_FORMAT.to_string(),
            note: None,
            n: mixture.n(),
            k: mixture.k(),
            states,
            iota_init: mixture.iota_init().to_vec(),
            patterns: mixture.patterns().iter().map(Matrix::to_rows).collect(),
            strategies: strategies
                .iter()
                .map(|s| StrategyEntry {
                    user_id: s.user_id.clone(),
                    theta: s.theta().to_vec(),
                })
                .collect(),
            fit: None,
        }
    }

    pub fn space(&self) -> Result<StateSpace> {
        if self.states.len() != self.n {
            return Err(Error::Dimension(format!(
                "document lists {} states but n = {}",
                self.states.len(),
                self.n
            )));
        }
        StateSpace::new(
            self.states
                .iter()
                .map(|s| (s.name.clone(), s.labels.clone()))
                .collect(),
            false,
        )
    }

    pub fn to_mixture(&self) -> Result<PatternMixture> {
        if self.format != MODEL_FORMAT {
            return Err(Error::InvalidModel(format!("unsupported format `{}`", self.format)));
        }
        if self.patterns.len() != self.k {
            return Err(Error::Dimension(format!(
                "document has {} patterns but k = {}",
                self.patterns.len(),
                self.k
            )));
        }
        let patterns = self
            .patterns
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                Matrix::from_rows(rows)
                    .ok_or_else(|| Error::Dimension(format!("pattern {} has ragged rows", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        PatternMixture::new(self.space()?, patterns, self.iota_init.clone())
    }

    pub fn strategies(&self) -> Result<Vec<UserStrategy>> {
        self.strategies
            .iter()
            .map(|s| {
                if s.theta.len() != self.k {
                    return Err(Error::Dimension(format!(
                        "strategy of `{}` has {} entries, k = {}",
                        s.user_id,
                        s.theta.len(),
                        self.k
                    )));
                }
                UserStrategy::new(s.user_id.clone(), s.theta.clone())
            })
            .collect()
    }

    pub fn strategy(&self, user_id: &str) -> Result<UserStrategy> {
        self.strategies()?
            .into_iter()
            .find(|s| s.user_id == user_id)
            .ok_or_else(|| Error::InvalidArgument(format!("no strategy for user `{user_id}`")))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
