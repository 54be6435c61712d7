//! Random models and formulas shared by the integration tests.
#![allow(dead_code)]

use patternmc::checker::{Horizon, PathFormula, StateFormula};
use patternmc::model::{Dtmc, Matrix, PatternMixture, StateSpace};
use rand::Rng;

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

/// A stochastic row of length `n` with roughly a third of its entries
/// zero (never all of them).
pub fn random_row<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let row: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            return row.into_iter().map(|x| x / sum).collect();
        }
    }
}

pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_row(rng, n)).collect();
    Matrix::from_rows(&rows).unwrap()
}

/// States `s1..sn`, each carrying a random subset of [`ATOMS`]. Every atom
/// is placed on at least one state so that it belongs to the universe.
pub fn random_space<R: Rng>(rng: &mut R, n: usize, dummy: bool) -> StateSpace {
    let mut labels: Vec<Vec<&str>> = (0..n)
        .map(|_| ATOMS.iter().copied().filter(|_| rng.random_bool(0.4)).collect())
        .collect();
    for a in ATOMS {
        if !labels.iter().any(|l| l.contains(&a)) {
            labels[rng.random_range(0..n)].push(a);
        }
    }
    let states = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| (format!("s{}", i + 1), l))
        .collect();
    StateSpace::new(states, dummy).unwrap()
}

/// A chain on 1..=`max_n` states without a dummy init state.
pub fn random_dtmc<R: Rng>(rng: &mut R, max_n: usize) -> Dtmc {
    let n = rng.random_range(1..=max_n);
    let space = random_space(rng, n, false);
    let init = vec![1.0 / n as f64; n];
    Dtmc::new(space, init, random_stochastic(rng, n)).unwrap()
}

pub fn random_mixture<R: Rng>(rng: &mut R, n: usize, k: usize) -> PatternMixture {
    let space = random_space(rng, n, false);
    let patterns = (0..k).map(|_| random_stochastic(rng, n)).collect();
    PatternMixture::new(space, patterns, random_row(rng, n)).unwrap()
}

pub fn random_theta<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    random_row(rng, k)
}

/// Propositional formula over [`ATOMS`] of nesting depth at most `depth`.
pub fn random_prop<R: Rng>(rng: &mut R, depth: u32) -> StateFormula {
    let leaf = depth == 0 || rng.random_bool(0.4);
    if leaf {
        return match rng.random_range(0..5) {
            0 => StateFormula::True,
            i => StateFormula::atom(ATOMS[(i - 1).min(2)]),
        };
    }
    match rng.random_range(0..3) {
        0 => random_prop(rng, depth - 1).not(),
        1 => random_prop(rng, depth - 1).and(random_prop(rng, depth - 1)),
        _ => random_prop(rng, depth - 1).or(random_prop(rng, depth - 1)),
    }
}

/// Bounded path formula of depth at most `max_n` transitions.
pub fn random_bounded_path<R: Rng>(rng: &mut R, max_n: u32) -> PathFormula {
    let n = rng.random_range(0..=max_n);
    match rng.random_range(0..4) {
        0 => PathFormula::next(random_prop(rng, 2)),
        1 => PathFormula::eventually(random_prop(rng, 2), Horizon::Bounded(n)),
        2 if n >= 1 => PathFormula::next_path(PathFormula::until(
            random_prop(rng, 2),
            random_prop(rng, 2),
            Horizon::Bounded(n - 1),
        )),
        _ => PathFormula::until(random_prop(rng, 2), random_prop(rng, 2), Horizon::Bounded(n)),
    }
}
