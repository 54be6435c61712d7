//! Numerical evaluation of formulas by backward recursion.

use super::formula::{FilterOp, Horizon, NumExpr, PathFormula, ProbBound, Property, StateFormula};
use crate::model::Dtmc;
use crate::numeric::{kahan_dot, kahan_sum};
use crate::{Error, Result};

/// Max-norm change below which unbounded until iteration stops.
pub const UNBOUNDED_TOL: f64 = 1e-12;
/// Iteration cap for unbounded until.
pub const UNBOUNDED_MAX_ITERS: usize = 1_000_000;

/// Result of checking a [`Property`] at the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
}

/// Satisfaction vector of a state formula over all states of `d`.
pub fn sat(d: &Dtmc, phi: &StateFormula) -> Result<Vec<bool>> {
    let space = d.space();
    let n = d.len();
    Ok(match phi {
        StateFormula::True => vec![true; n],
        StateFormula::Atom(a) => {
            if !space.knows(a) {
                return Err(Error::UnknownProposition(a.clone()));
            }
            (0..n).map(|s| space.has_label(s, a)).collect()
        }
        StateFormula::Alpha(k) => {
            if *k == 0 || *k > space.n_patterns() {
                return Err(Error::UnknownProposition(format!("alpha={k}")));
            }
            (0..n).map(|s| space.alpha(s) == Some(*k)).collect()
        }
        StateFormula::Not(f) => sat(d, f)?.into_iter().map(|b| !b).collect(),
        StateFormula::And(a, b) => {
            let a = sat(d, a)?;
            let b = sat(d, b)?;
            a.into_iter().zip(b).map(|(x, y)| x && y).collect()
        }
        StateFormula::Prob { bound, path } => match bound {
            ProbBound::Query => {
                return Err(Error::InvalidArgument(
                    "P=? yields a number and cannot be used as a state formula".into(),
                ))
            }
            ProbBound::Bound(cmp, p) => prob_vector(d, path)?
                .into_iter()
                .map(|x| cmp.holds(x, *p))
                .collect(),
        },
    })
}

fn step(d: &Dtmc, lhs: &[bool], rhs: &[bool], x: &[f64], out: &mut [f64]) {
    for s in 0..x.len() {
        out[s] = if rhs[s] {
            1.0
        } else if lhs[s] {
            kahan_dot(d.row(s), x)
        } else {
            0.0
        };
    }
}

/// Probability of `lhs U<=h rhs` from every state.
pub fn until_vector(d: &Dtmc, lhs: &[bool], rhs: &[bool], horizon: Horizon) -> Vec<f64> {
    let mut x: Vec<f64> = rhs.iter().map(|&b| f64::from(u8::from(b))).collect();
    let mut next = vec![0.0; x.len()];
    match horizon {
        Horizon::Bounded(n) => {
            for _ in 0..n {
                step(d, lhs, rhs, &x, &mut next);
                if next == x {
                    break;
                }
                std::mem::swap(&mut x, &mut next);
            }
        }
        Horizon::Unbounded => {
            for _ in 0..UNBOUNDED_MAX_ITERS {
                step(d, lhs, rhs, &x, &mut next);
                let delta = x
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                std::mem::swap(&mut x, &mut next);
                if delta < UNBOUNDED_TOL {
                    break;
                }
            }
        }
    }
    x
}

/// Probability of `psi` from every state of `d`. Mass missing from
/// restricted rows counts as failure.
pub fn prob_vector(d: &Dtmc, psi: &PathFormula) -> Result<Vec<f64>> {
    match psi {
        PathFormula::Holds(phi) => Ok(sat(d, phi)?
            .into_iter()
            .map(|b| f64::from(u8::from(b)))
            .collect()),
        PathFormula::Next(inner) => {
            let x = prob_vector(d, inner)?;
            Ok((0..d.len()).map(|s| kahan_dot(d.row(s), &x)).collect())
        }
        PathFormula::Until { lhs, rhs, horizon } => {
            let l = sat(d, lhs)?;
            let r = sat(d, rhs)?;
            Ok(until_vector(d, &l, &r, *horizon))
        }
    }
}

fn check_state(d: &Dtmc, s: usize) -> Result<()> {
    if s >= d.len() {
        return Err(Error::InvalidArgument(format!(
            "state {s} out of range for a model with {} states",
            d.len()
        )));
    }
    Ok(())
}

/// Probability of `psi` from state `s`.
pub fn prob_path(d: &Dtmc, s: usize, psi: &PathFormula) -> Result<f64> {
    check_state(d, s)?;
    Ok(prob_vector(d, psi)?[s])
}

/// Probability of `psi` from the dummy init state.
pub fn prob_from_init(d: &Dtmc, psi: &PathFormula) -> Result<f64> {
    let init = d.space().init_state().ok_or(Error::NoInitState)?;
    prob_path(d, init, psi)
}

/// Aggregates per-state probabilities of `psi` over the states satisfying
/// the propositional formula `phi`.
pub fn filtered_prob(d: &Dtmc, op: FilterOp, phi: &StateFormula, psi: &PathFormula) -> Result<f64> {
    let states = sat(d, phi)?;
    let probs = prob_vector(d, psi)?;
    let selected: Vec<f64> = probs
        .into_iter()
        .zip(states)
        .filter_map(|(p, keep)| keep.then_some(p))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyStateSet(phi.to_string()));
    }
    Ok(match op {
        FilterOp::Min => selected.iter().copied().fold(f64::INFINITY, f64::min),
        FilterOp::Max => selected.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        FilterOp::Avg => kahan_sum(selected.iter().copied()) / selected.len() as f64,
    })
}

/// Evaluates a numeric property expression; products and powers multiply
/// left to right.
pub fn evaluate(d: &Dtmc, expr: &NumExpr) -> Result<f64> {
    match expr {
        NumExpr::Const(c) => Ok(*c),
        NumExpr::Prob(psi) => prob_from_init(d, psi),
        NumExpr::Filter { op, path, states } => filtered_prob(d, *op, states, path),
        NumExpr::Pow(base, e) => {
            let b = evaluate(d, base)?;
            let mut acc = 1.0;
            for _ in 0..*e {
                acc *= b;
            }
            Ok(acc)
        }
        NumExpr::Product(factors) => {
            let mut acc = 1.0;
            for f in factors {
                acc *= evaluate(d, f)?;
            }
            Ok(acc)
        }
        NumExpr::Sum(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += evaluate(d, t)?;
            }
            Ok(acc)
        }
    }
}

/// Checks a property at the dummy init state.
pub fn check(d: &Dtmc, prop: &Property) -> Result<Value> {
    match prop {
        Property::Numeric(e) => evaluate(d, e).map(Value::Number),
        Property::State(f) => {
            let init = d.space().init_state().ok_or(Error::NoInitState)?;
            Ok(Value::Bool(sat(d, f)?[init]))
        }
    }
}
