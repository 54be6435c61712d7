//! The four Yoshi-game questions as products of filtered probabilities,
//! the generic composition they are instances of, and parameter sweeps.
//!
//! Each question has a dedicated evaluator that calls the checker
//! directly, and a [`ComposedQuery`] encoding. Both multiply the same
//! factors in the same order, so they agree bit for bit.

mod compose;
mod sweep;

pub use compose::{compose, compose_sum, ComposedQuery, ModelSelector, StartSelector, Term};
pub use sweep::{
    ParamGrid, ParamValue, Question, SweepCell, SweepSpec, SweepTable, TermSpec, SWEEP_DIGITS,
};

use compose::power;

use crate::checker::{filtered_prob, prob_from_init, FilterOp, Horizon, PathFormula, StateFormula};
use crate::umm::{restrict, Umm};
use crate::{Error, Result};

/// Entry labels summed over in the pattern-switch question, in summation
/// order.
pub const ENTRY_LABELS: [&str; 4] = ["feed", "pick", "seeY", "seeP"];

/// Exponent of the repeat-visit factors.
pub const REPEATS: u32 = 4;

fn atom(a: &str) -> StateFormula {
    StateFormula::atom(a)
}

fn check_pattern(umm: &Umm, i: usize) -> Result<()> {
    if i == 0 || i > umm.k() {
        return Err(Error::InvalidArgument(format!(
            "pattern index {i} outside 1..={}",
            umm.k()
        )));
    }
    Ok(())
}

/// `(!a) U<=n ((alpha=i) & a)`.
fn first_reach(a: &str, i: usize, n: Horizon) -> PathFormula {
    PathFormula::until(atom(a).not(), StateFormula::alpha(i).and(atom(a)), n)
}

/// `X ((!avoid & !a) U a)`: returns to `a` without passing `avoid`.
fn repeat_visit(a: &str, avoid: &str) -> PathFormula {
    PathFormula::next_path(PathFormula::until(
        atom(avoid).not().and(atom(a).not()),
        atom(a),
        Horizon::Unbounded,
    ))
}

/// `(!(alpha=i) & !feed) U<=n ((alpha=i) & l)`.
fn switch_into(l: &str, i: usize, n: Horizon) -> PathFormula {
    PathFormula::until(
        StateFormula::alpha(i).not().and(atom("feed").not()),
        StateFormula::alpha(i).and(atom(l)),
        n,
    )
}

/// `(!feed) U<=n feed`.
fn then_feed(n: Horizon) -> PathFormula {
    PathFormula::until(atom("feed").not(), atom("feed"), n)
}

/// Probability of feeding for the first time within `n` steps while in
/// pattern `i`.
pub fn q1(umm: &Umm, i: usize, n: Horizon) -> Result<f64> {
    check_pattern(umm, i)?;
    let mut acc = 1.0;
    acc *= prob_from_init(umm.dtmc(), &first_reach("feed", i, n))?;
    Ok(acc)
}

/// Probability of feeding within `n` steps in pattern `i` and then feeding
/// four more times without picking, staying in pattern `i`.
pub fn q2(umm: &Umm, i: usize, n: Horizon) -> Result<f64> {
    check_pattern(umm, i)?;
    let d = umm.dtmc();
    let reach = prob_from_init(d, &PathFormula::eventually(StateFormula::alpha(i).and(atom("feed")), n))?;
    let r = restrict(d, &StateFormula::alpha(i))?;
    let again = filtered_prob(&r, FilterOp::Min, &atom("feed"), &repeat_visit("feed", "pick"))?;
    let mut acc = 1.0;
    acc *= reach;
    acc *= power(again, REPEATS);
    Ok(acc)
}

/// Probability of picking five times without feeding, then feeding five
/// times without picking, all in pattern `i`, the first pick within `n`
/// steps.
pub fn q3(umm: &Umm, i: usize, n: Horizon) -> Result<f64> {
    check_pattern(umm, i)?;
    let d = umm.dtmc();
    let reach = prob_from_init(d, &first_reach("pick", i, n))?;
    let r = restrict(d, &StateFormula::alpha(i))?;
    let picks = filtered_prob(&r, FilterOp::Min, &atom("pick"), &repeat_visit("pick", "feed"))?;
    let to_feed = filtered_prob(&r, FilterOp::Min, &atom("pick"), &then_feed(Horizon::Unbounded))?;
    let feeds = filtered_prob(&r, FilterOp::Min, &atom("feed"), &repeat_visit("feed", "pick"))?;
    let mut acc = 1.0;
    acc *= reach;
    acc *= power(picks, REPEATS);
    acc *= to_feed;
    acc *= power(feeds, REPEATS);
    Ok(acc)
}

/// Probability of switching into pattern `i` within `n` steps without
/// feeding first, then feeding within `n2` further steps while staying in
/// pattern `i`; summed over the entry label. The addends are not proven
/// disjoint, so a sum above 1 is reported as a warning.
pub fn q4(umm: &Umm, i: usize, n: Horizon, n2: Horizon) -> Result<f64> {
    check_pattern(umm, i)?;
    let d = umm.dtmc();
    let r = restrict(d, &StateFormula::alpha(i))?;
    let mut sum = 0.0;
    for l in ENTRY_LABELS {
        let enter = prob_from_init(d, &switch_into(l, i, n))?;
        let feed = filtered_prob(&r, FilterOp::Min, &atom(l), &then_feed(n2))?;
        let mut acc = 1.0;
        acc *= enter;
        acc *= feed;
        sum += acc;
    }
    warn_if_not_probability(sum);
    Ok(sum)
}

pub(crate) fn warn_if_not_probability(sum: f64) {
    if sum > 1.0 {
        log::warn!("pattern-switch sum {sum} exceeds 1; its addends are not disjoint events");
    }
}

pub fn q1_query(i: usize, n: Horizon) -> ComposedQuery {
    ComposedQuery::new(vec![Term::from_init(first_reach("feed", i, n))]).expect("non-empty")
}

pub fn q2_query(i: usize, n: Horizon) -> ComposedQuery {
    let alpha = StateFormula::alpha(i);
    ComposedQuery::new(vec![
        Term::from_init(PathFormula::eventually(alpha.clone().and(atom("feed")), n)),
        Term::min_on(alpha, atom("feed"), repeat_visit("feed", "pick")).pow(REPEATS),
    ])
    .expect("non-empty")
}

pub fn q3_query(i: usize, n: Horizon) -> ComposedQuery {
    let alpha = StateFormula::alpha(i);
    ComposedQuery::new(vec![
        Term::from_init(first_reach("pick", i, n)),
        Term::min_on(alpha.clone(), atom("pick"), repeat_visit("pick", "feed")).pow(REPEATS),
        Term::min_on(alpha.clone(), atom("pick"), then_feed(Horizon::Unbounded)),
        Term::min_on(alpha, atom("feed"), repeat_visit("feed", "pick")).pow(REPEATS),
    ])
    .expect("non-empty")
}

/// One product per entry label, to be added with [`compose_sum`].
pub fn q4_queries(i: usize, n: Horizon, n2: Horizon) -> Vec<ComposedQuery> {
    ENTRY_LABELS
        .iter()
        .map(|l| {
            ComposedQuery::new(vec![
                Term::from_init(switch_into(l, i, n)),
                Term::min_on(StateFormula::alpha(i), atom(l), then_feed(n2)),
            ])
            .expect("non-empty")
        })
        .collect()
}
