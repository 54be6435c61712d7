use super::{Dtmc, Matrix, StateSpace};
use crate::numeric::{kahan_sum, PROB_TOL};
use crate::{Error, Result};

/// `K` activity patterns sharing one state space and initial distribution.
///
/// Pattern matrices are `n x n` over the action states (0-based rows, so
/// action state `s` is row `s - 1`). Only the transition matrices differ
/// between patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMixture {
    space: StateSpace,
    patterns: Vec<Matrix>,
    iota_init: Vec<f64>,
}

pub(crate) fn check_distribution(what: &str, v: &[f64]) -> Result<()> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidModel(format!("{what}: entry {i} = {x} outside [0,1]")));
    }
    let sum = kahan_sum(v.iter().copied());
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidModel(format!("{what}: sums to {sum}")));
    }
    Ok(())
}

impl PatternMixture {
    pub fn new(space: StateSpace, patterns: Vec<Matrix>, iota_init: Vec<f64>) -> Result<Self> {
        let n = space.n_states();
        if patterns.is_empty() {
            return Err(Error::InvalidModel("a mixture needs at least one pattern".into()));
        }
        for (k, p) in patterns.iter().enumerate() {
            if p.rows() != n || p.cols() != n {
                return Err(Error::Dimension(format!(
                    "pattern {} is {}x{}, expected {n}x{n}",
                    k + 1,
                    p.rows(),
                    p.cols()
                )));
            }
            for s in 0..n {
                check_distribution(&format!("pattern {} row {}", k + 1, s + 1), p.row(s))?;
            }
        }
        if iota_init.len() != n {
            return Err(Error::Dimension(format!(
                "initial distribution has {} entries, expected {n}",
                iota_init.len()
            )));
        }
        check_distribution("initial distribution", &iota_init)?;
        Ok(Self {
            space,
            patterns,
            iota_init,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    /// Number of action states.
    pub fn n(&self) -> usize {
        self.space.n_states()
    }

    /// Number of patterns.
    pub fn k(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> &[Matrix] {
        &self.patterns
    }

    /// Pattern `k` (1-based).
    pub fn pattern(&self, k: usize) -> &Matrix {
        &self.patterns[k - 1]
    }

    pub fn iota_init(&self) -> &[f64] {
        &self.iota_init
    }

    /// `sum_k theta(k) * P_k`, the per-step transition matrix seen by a
    /// user with strategy `theta`.
    pub fn averaged(&self, theta: &[f64]) -> Result<Matrix> {
        self.check_theta(theta)?;
        let n = self.n();
        let mut out = Matrix::zeros(n, n);
        for s in 0..n {
            for t in 0..n {
                out[(s, t)] = kahan_sum(
                    self.patterns
                        .iter()
                        .zip(theta)
                        .map(|(p, &w)| w * p[(s, t)]),
                );
            }
        }
        Ok(out)
    }

    /// Pattern `k` (1-based) as a chain with a dummy init state whose row
    /// is the shared initial distribution.
    pub fn pattern_dtmc(&self, k: usize) -> Result<Dtmc> {
        if k == 0 || k > self.k() {
            return Err(Error::InvalidArgument(format!("pattern index {k} out of range")));
        }
        let space = self.space.with_dummy_init(true)?;
        let n = self.n();
        let mut trans = Matrix::zeros(n + 1, n + 1);
        trans.row_mut(0)[1..].copy_from_slice(&self.iota_init);
        for s in 0..n {
            trans.row_mut(s + 1)[1..].copy_from_slice(self.pattern(k).row(s));
        }
        let mut init = vec![0.0; n + 1];
        init[0] = 1.0;
        Dtmc::new(space, init, trans)
    }

    /// Reorders patterns so that new pattern `i` is old pattern `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.k() {
            return Err(Error::Dimension("permutation length differs from K".into()));
        }
        let patterns = order.iter().map(|&i| self.patterns[i].clone()).collect();
        Ok(Self {
            space: self.space.clone(),
            patterns,
            iota_init: self.iota_init.clone(),
        })
    }

    pub(crate) fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.k() {
            return Err(Error::Dimension(format!(
                "strategy has {} entries, mixture has K = {}",
                theta.len(),
                self.k()
            )));
        }
        Ok(())
    }
}

/// A user's distribution over the `K` patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct UserStrategy {
    pub user_id: String,
    theta: Vec<f64>,
}

impl UserStrategy {
    pub fn new(user_id: impl Into<String>, theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidModel("empty strategy vector".into()));
        }
        let user_id = user_id.into();
        check_distribution(&format!("strategy of `{user_id}`"), &theta)?;
        Ok(Self { user_id, theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            user_id: self.user_id.clone(),
            theta: order.iter().map(|&i| self.theta[i]).collect(),
        }
    }
}
