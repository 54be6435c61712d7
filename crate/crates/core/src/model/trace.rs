use crate::{Error, Result};

/// One user's chronological sequence of action states (1-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub user_id: String,
    events: Vec<usize>,
}

impl Trace {
    pub fn new(user_id: impl Into<String>, events: Vec<usize>) -> Result<Self> {
        let user_id = user_id.into();
        if events.is_empty() {
            return Err(Error::InvalidArgument(format!("trace of `{user_id}` is empty")));
        }
        if let Some(pos) = events.iter().position(|&e| e == 0) {
            return Err(Error::InvalidArgument(format!(
                "trace of `{user_id}` refers to the dummy state at position {pos}"
            )));
        }
        Ok(Self { user_id, events })
    }

    pub fn events(&self) -> &[usize] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Consecutive `(from, to)` pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.events.windows(2).map(|w| (w[0], w[1]))
    }

    /// Checks every event against a space with `n` action states.
    pub fn check_states(&self, n: usize) -> Result<()> {
        match self.events.iter().position(|&e| e > n) {
            Some(pos) => Err(Error::Dimension(format!(
                "trace of `{}` has state {} at position {pos}, space has {n} states",
                self.user_id, self.events[pos]
            ))),
            None => Ok(()),
        }
    }
}
