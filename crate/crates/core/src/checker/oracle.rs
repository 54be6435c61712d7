//! Reference evaluators used to cross-check the numerical checker: exhaustive
//! path enumeration and Monte-Carlo sampling. Both decide a path formula on
//! an explicit finite path prefix rather than by backward recursion.

use rand::Rng;

use super::eval::sat;
use super::formula::{Horizon, PathFormula};
use crate::model::Dtmc;
use crate::numeric::kahan_sum;
use crate::{Error, Result};

/// Largest number of length-`N` prefixes the enumerator will expand.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// Path formula with its state formulas resolved to satisfaction vectors.
#[derive(Debug, Clone)]
enum Compiled {
    Holds(Vec<bool>),
    Next(Box<Compiled>),
    Until(Vec<bool>, Vec<bool>, u32),
}

fn compile(d: &Dtmc, psi: &PathFormula) -> Result<Compiled> {
    Ok(match psi {
        PathFormula::Holds(phi) => Compiled::Holds(sat(d, phi)?),
        PathFormula::Next(inner) => Compiled::Next(Box::new(compile(d, inner)?)),
        PathFormula::Until { lhs, rhs, horizon } => match horizon {
            Horizon::Bounded(n) => Compiled::Until(sat(d, lhs)?, sat(d, rhs)?, *n),
            Horizon::Unbounded => {
                return Err(Error::InvalidArgument(
                    "path oracles need a bounded path formula".into(),
                ))
            }
        },
    })
}

impl Compiled {
    fn depth(&self) -> u32 {
        match self {
            Compiled::Holds(_) => 0,
            Compiled::Next(p) => p.depth() + 1,
            Compiled::Until(_, _, n) => *n,
        }
    }

    /// Decides the formula on a prefix holding at least `depth() + 1`
    /// states. Shorter prefixes come from escaped restricted paths and
    /// are treated as failing once they run out.
    fn holds(&self, path: &[usize]) -> bool {
        match self {
            Compiled::Holds(v) => path.first().is_some_and(|&s| v[s]),
            Compiled::Next(p) => path.len() > 1 && p.holds(&path[1..]),
            Compiled::Until(l, r, n) => {
                for &s in path.iter().take(*n as usize + 1) {
                    if r[s] {
                        return true;
                    }
                    if !l[s] {
                        return false;
                    }
                }
                false
            }
        }
    }
}

/// Checks whether an explicit path prefix satisfies `psi`. The prefix
/// must be at least as long as the formula's depth plus one.
pub fn path_satisfies(d: &Dtmc, path: &[usize], psi: &PathFormula) -> Result<bool> {
    let c = compile(d, psi)?;
    if path.len() < c.depth() as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "path of {} states is too short for a formula of depth {}",
            path.len(),
            c.depth()
        )));
    }
    Ok(c.holds(path))
}

/// Probability of a bounded `psi` from `s`, by summing the probability of
/// every length-`N` prefix that satisfies it. Zero-probability branches are
/// not expanded.
pub fn enumerate_oracle(d: &Dtmc, s: usize, psi: &PathFormula) -> Result<f64> {
    if s >= d.len() {
        return Err(Error::InvalidArgument(format!("state {s} out of range")));
    }
    let c = compile(d, psi)?;
    let depth = c.depth();
    let paths = (d.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if paths > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            paths,
            guard: ENUMERATION_GUARD,
        });
    }
    let mut path = Vec::with_capacity(depth as usize + 1);
    path.push(s);
    let mut accepted = Vec::new();
    expand(d, &c, depth as usize, 1.0, &mut path, &mut accepted);
    Ok(kahan_sum(accepted))
}

fn expand(d: &Dtmc, c: &Compiled, depth: usize, p: f64, path: &mut Vec<usize>, out: &mut Vec<f64>) {
    if path.len() == depth + 1 {
        if c.holds(path) {
            out.push(p);
        }
        return;
    }
    let last = *path.last().expect("path is never empty");
    for (t, &q) in d.row(last).iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        path.push(t);
        expand(d, c, depth, p * q, path, out);
        path.pop();
    }
}

/// Sample mean of the satisfaction indicator with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// Whether `value` lies within `k` standard errors of the mean. A zero
    /// standard error only accepts the mean itself (up to rounding).
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.std_error + 1e-12
    }
}

/// Estimates the probability of a bounded `psi` from `s` by sampling paths.
/// On restricted models, the mass missing from a row ends the path as a
/// failure.
pub fn monte_carlo<R: Rng + ?Sized>(
    d: &Dtmc,
    s: usize,
    psi: &PathFormula,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    if s >= d.len() {
        return Err(Error::InvalidArgument(format!("state {s} out of range")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let c = compile(d, psi)?;
    let depth = c.depth() as usize;
    let mut hits = 0usize;
    let mut path = Vec::with_capacity(depth + 1);
    for _ in 0..samples {
        path.clear();
        path.push(s);
        while path.len() <= depth {
            let row = d.row(*path.last().expect("non-empty"));
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = None;
            for (t, &q) in row.iter().enumerate() {
                acc += q;
                if u < acc {
                    next = Some(t);
                    break;
                }
            }
            match next {
                Some(t) => path.push(t),
                None if d.is_restricted() => break,
                // rounding left the cumulative sum just below 1
                None => path.push(row.iter().rposition(|&q| q > 0.0).expect("stochastic row")),
            }
        }
        if c.holds(&path) {
            hits += 1;
        }
    }
    let mean = hits as f64 / samples as f64;
    let std_error = (mean * (1.0 - mean) / samples as f64).sqrt();
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        samples,
    })
}
