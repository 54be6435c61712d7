//! PCTL-style formulas over DTMCs: AST, text parser, numerical evaluation
//! and reference oracles.

mod eval;
mod formula;
mod oracle;
mod parser;

pub use eval::{
    check, evaluate, filtered_prob, prob_from_init, prob_path, prob_vector, sat, until_vector,
    Value, UNBOUNDED_MAX_ITERS, UNBOUNDED_TOL,
};
pub use formula::{
    Comparison, FilterOp, Horizon, NumExpr, PathFormula, ProbBound, Property, StateFormula,
};
pub use oracle::{enumerate_oracle, monte_carlo, path_satisfies, MonteCarloEstimate, ENUMERATION_GUARD};
pub use parser::{parse_path_formula, parse_properties, parse_state_formula, parse_property};
