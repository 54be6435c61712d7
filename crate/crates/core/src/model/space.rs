use std::collections::{BTreeSet, HashSet};

use crate::{Error, Result};

/// Label carried by the dummy initial state.
pub const INIT_LABEL: &str = "init";

static NO_LABELS: BTreeSet<String> = BTreeSet::new();

/// A finite state set with an atomic-proposition labelling.
///
/// States are addressed by a flat index. When the space has a dummy init
/// state it sits at index 0 and action state `s` (1-based) sits at index
/// `s`; without it, action state `s` sits at index `s - 1`.
///
/// Spaces produced by the user-metamodel product additionally assign each
/// state a pattern class `alpha = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    n_states: usize,
    has_dummy_init: bool,
    names: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    alpha: Vec<Option<usize>>,
    n_patterns: usize,
    propositions: BTreeSet<String>,
}

impl StateSpace {
    /// Creates a space from `(name, labels)` pairs for the action states.
    pub fn new<N, L>(states: Vec<(N, L)>, has_dummy_init: bool) -> Result<Self>
    where
        N: Into<String>,
        L: IntoIterator,
        L::Item: Into<String>,
    {
        let mut names = Vec::with_capacity(states.len() + 1);
        let mut labels = Vec::with_capacity(states.len() + 1);
        if has_dummy_init {
            names.push(INIT_LABEL.to_string());
            labels.push(BTreeSet::from([INIT_LABEL.to_string()]));
        }
        let mut seen = HashSet::new();
        let n_states = states.len();
        for (name, ls) in states {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::InvalidModel("empty state name".into()));
            }
            if !seen.insert(name.clone()) || (has_dummy_init && name == INIT_LABEL) {
                return Err(Error::InvalidModel(format!("duplicate state name `{name}`")));
            }
            let set: BTreeSet<String> = ls.into_iter().map(Into::into).collect();
            if set.iter().any(|l| l.is_empty()) {
                return Err(Error::InvalidModel(format!("empty label on state `{name}`")));
            }
            names.push(name);
            labels.push(set);
        }
        if n_states == 0 {
            return Err(Error::InvalidModel("state space has no action states".into()));
        }
        let propositions = labels.iter().flatten().cloned().collect();
        let len = labels.len();
        Ok(Self {
            n_states,
            has_dummy_init,
            names,
            labels,
            alpha: vec![None; len],
            n_patterns: 0,
            propositions,
        })
    }

    /// Creates a space where every action state is labelled by its own name.
    pub fn with_names<S: AsRef<str>>(names: &[S], has_dummy_init: bool) -> Result<Self> {
        Self::new(
            names
                .iter()
                .map(|n| (n.as_ref().to_string(), [n.as_ref().to_string()]))
                .collect(),
            has_dummy_init,
        )
    }

    /// The same action states with (or without) a dummy init state.
    pub fn with_dummy_init(&self, dummy: bool) -> Result<Self> {
        let offset = usize::from(self.has_dummy_init);
        let states = (offset..self.len())
            .map(|i| (self.names[i].clone(), self.labels[i].clone()))
            .collect();
        Self::new(states, dummy)
    }

    /// Number of addressable states, dummy included.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of action (non-dummy) states.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn has_dummy_init(&self) -> bool {
        self.has_dummy_init
    }

    pub fn init_state(&self) -> Option<usize> {
        self.has_dummy_init.then_some(0)
    }

    /// Flat index of 1-based action state `s`.
    pub fn action_index(&self, s: usize) -> Option<usize> {
        if s == 0 || s > self.n_states {
            return None;
        }
        Some(if self.has_dummy_init { s } else { s - 1 })
    }

    /// 1-based action state of a flat index, `None` for the dummy.
    pub fn action_of(&self, index: usize) -> Option<usize> {
        if index >= self.len() {
            return None;
        }
        if self.has_dummy_init {
            (index > 0).then_some(index)
        } else {
            Some(index + 1)
        }
    }

    /// 1-based action state carrying `name`.
    pub fn action_by_name(&self, name: &str) -> Option<usize> {
        let i = self.names.iter().position(|n| n == name)?;
        self.action_of(i)
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    /// Names of the action states in order.
    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        self.names[usize::from(self.has_dummy_init)..]
            .iter()
            .map(String::as_str)
    }

    /// Labels of a state. Total: out-of-range indices yield the empty set.
    pub fn labels(&self, index: usize) -> &BTreeSet<String> {
        self.labels.get(index).unwrap_or(&NO_LABELS)
    }

    pub fn has_label(&self, index: usize, prop: &str) -> bool {
        self.labels(index).contains(prop)
    }

    /// Pattern class of a state in a metamodel space.
    pub fn alpha(&self, index: usize) -> Option<usize> {
        self.alpha.get(index).copied().flatten()
    }

    /// Number of pattern classes (0 for plain spaces).
    pub fn n_patterns(&self) -> usize {
        self.n_patterns
    }

    /// Whether `prop` belongs to the proposition universe of this space.
    pub fn knows(&self, prop: &str) -> bool {
        self.propositions.contains(prop)
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.propositions
    }

    /// Product space `S x {1..K}` plus dummy init at index 0; state `(s, k)`
    /// sits at `(k - 1) * n + s`.
    pub(crate) fn product(&self, k: usize) -> StateSpace {
        let n = self.n_states;
        let offset = usize::from(self.has_dummy_init);
        let mut names = vec![INIT_LABEL.to_string()];
        let mut labels = vec![BTreeSet::from([INIT_LABEL.to_string()])];
        let mut alpha = vec![None];
        for class in 1..=k {
            for s in 0..n {
                names.push(format!("({},{})", self.names[s + offset], class));
                labels.push(self.labels[s + offset].clone());
                alpha.push(Some(class));
            }
        }
        let mut propositions = self.propositions.clone();
        propositions.insert(INIT_LABEL.to_string());
        StateSpace {
            n_states: n * k,
            has_dummy_init: true,
            names,
            labels,
            alpha,
            n_patterns: k,
            propositions,
        }
    }

    /// Sub-space keeping the given flat indices (ascending). The
    /// proposition universe and pattern count are preserved.
    pub(crate) fn subspace(&self, keep: &[usize]) -> StateSpace {
        let has_dummy_init = self.has_dummy_init && keep.first() == Some(&0);
        StateSpace {
            n_states: keep.len() - usize::from(has_dummy_init),
            has_dummy_init,
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            alpha: keep.iter().map(|&i| self.alpha[i]).collect(),
            n_patterns: self.n_patterns,
            propositions: self.propositions.clone(),
        }
    }
}
