use std::fmt;

use crate::numeric::format_sig;

/// State formulas: `true | a | alpha=k | !phi | phi & phi | P~p [psi]`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFormula {
    True,
    Atom(String),
    /// Membership in pattern class `k` of a user metamodel.
    Alpha(usize),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Prob {
        bound: ProbBound,
        path: Box<PathFormula>,
    },
}

impl StateFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        StateFormula::Atom(name.into())
    }

    pub fn alpha(k: usize) -> Self {
        StateFormula::Alpha(k)
    }

    pub fn falsum() -> Self {
        StateFormula::True.not()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        StateFormula::Not(Box::new(self))
    }

    pub fn and(self, other: StateFormula) -> Self {
        StateFormula::And(Box::new(self), Box::new(other))
    }

    /// `a | b`, encoded as `!(!a & !b)`.
    pub fn or(self, other: StateFormula) -> Self {
        self.not().and(other.not()).not()
    }

    pub fn prob(bound: ProbBound, path: PathFormula) -> Self {
        StateFormula::Prob {
            bound,
            path: Box::new(path),
        }
    }

    /// Built from `true`, atoms, `alpha=k`, negation and conjunction only.
    pub fn is_propositional(&self) -> bool {
        match self {
            StateFormula::True | StateFormula::Atom(_) | StateFormula::Alpha(_) => true,
            StateFormula::Not(f) => f.is_propositional(),
            StateFormula::And(a, b) => a.is_propositional() && b.is_propositional(),
            StateFormula::Prob { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Comparison::Lt => value < bound,
            Comparison::Le => value <= bound,
            Comparison::Gt => value > bound,
            Comparison::Ge => value >= bound,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbBound {
    /// `P=?`: the probability itself rather than a truth value.
    Query,
    Bound(Comparison, f64),
}

/// Step bound of an until; counts transitions, `Bounded(0)` means the
/// right-hand side must hold immediately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Bounded(u32),
    Unbounded,
}

impl Horizon {
    pub fn bound(self) -> Option<u32> {
        match self {
            Horizon::Bounded(n) => Some(n),
            Horizon::Unbounded => None,
        }
    }
}

impl From<Option<u32>> for Horizon {
    fn from(v: Option<u32>) -> Self {
        v.map_or(Horizon::Unbounded, Horizon::Bounded)
    }
}

/// Path formulas. Besides PCTL's `X phi` and `phi U<=n phi`, `X` may wrap
/// another path formula (`X (a U b)`), which the filtered repeat-visit
/// queries need.
#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    /// The state formula holds in the first state.
    Holds(StateFormula),
    Next(Box<PathFormula>),
    Until {
        lhs: StateFormula,
        rhs: StateFormula,
        horizon: Horizon,
    },
}

impl PathFormula {
    pub fn next(phi: StateFormula) -> Self {
        PathFormula::Next(Box::new(PathFormula::Holds(phi)))
    }

    pub fn next_path(psi: PathFormula) -> Self {
        PathFormula::Next(Box::new(psi))
    }

    pub fn until(lhs: StateFormula, rhs: StateFormula, horizon: Horizon) -> Self {
        PathFormula::Until { lhs, rhs, horizon }
    }

    /// `F<=n phi`, stored as `true U<=n phi`.
    pub fn eventually(phi: StateFormula, horizon: Horizon) -> Self {
        Self::until(StateFormula::True, phi, horizon)
    }

    /// Number of transitions needed to decide the formula on a path, or
    /// `None` if it contains an unbounded until.
    pub fn depth(&self) -> Option<u32> {
        match self {
            PathFormula::Holds(_) => Some(0),
            PathFormula::Next(p) => p.depth().map(|d| d + 1),
            PathFormula::Until { horizon, .. } => horizon.bound(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOp {
    Min,
    Max,
    /// Unweighted mean over the filtered states.
    Avg,
}

impl FilterOp {
    fn name(self) -> &'static str {
        match self {
            FilterOp::Min => "min",
            FilterOp::Max => "max",
            FilterOp::Avg => "avg",
        }
    }
}

/// Numeric property expressions: probabilities from the initial state,
/// filtered probabilities, and their products, sums and integer powers.
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Const(f64),
    /// `P=? [psi]` evaluated at the dummy init state.
    Prob(PathFormula),
    Filter {
        op: FilterOp,
        path: PathFormula,
        states: StateFormula,
    },
    Pow(Box<NumExpr>, u32),
    Product(Vec<NumExpr>),
    Sum(Vec<NumExpr>),
}

/// A top-level property: either a number or a state formula checked at the
/// initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    Numeric(NumExpr),
    State(StateFormula),
}

fn quote(name: &str) -> String {
    format!("\"{name}\"")
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => f.write_str("true"),
            StateFormula::Atom(a) => f.write_str(&quote(a)),
            StateFormula::Alpha(k) => write!(f, "(alpha={k})"),
            StateFormula::Not(inner) => write!(f, "(!{inner})"),
            StateFormula::And(a, b) => write!(f, "({a}&{b})"),
            StateFormula::Prob { bound, path } => match bound {
                ProbBound::Query => write!(f, "P=?[{path}]"),
                ProbBound::Bound(c, p) => write!(f, "P{}{}[{path}]", c.symbol(), format_sig(*p, 17)),
            },
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Bounded(n) => write!(f, "<={n}"),
            Horizon::Unbounded => Ok(()),
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Holds(phi) => write!(f, "{phi}"),
            PathFormula::Next(inner) => match inner.as_ref() {
                PathFormula::Holds(phi) => write!(f, "X {phi}"),
                other => write!(f, "X ({other})"),
            },
            PathFormula::Until { lhs, rhs, horizon } => {
                if *lhs == StateFormula::True {
                    write!(f, "F{horizon} {rhs}")
                } else {
                    write!(f, "{lhs} U{horizon} {rhs}")
                }
            }
        }
    }
}

impl fmt::Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Const(c) => f.write_str(&format_sig(*c, 17)),
            NumExpr::Prob(path) => write!(f, "P=?[{path}]"),
            NumExpr::Filter { op, path, states } => {
                write!(f, "filter({}, P=?[{path}], {states})", op.name())
            }
            NumExpr::Pow(base, e) => write!(f, "pow({base}, {e})"),
            NumExpr::Product(factors) => {
                for (i, x) in factors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    match x {
                        NumExpr::Sum(_) | NumExpr::Product(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            NumExpr::Sum(terms) => {
                for (i, x) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    match x {
                        NumExpr::Sum(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Numeric(e) => write!(f, "{e}"),
            Property::State(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prism_rendering() {
        let psi = PathFormula::until(
            StateFormula::atom("feed").not(),
            StateFormula::alpha(1).and(StateFormula::atom("feed")),
            Horizon::Bounded(5),
        );
        assert_eq!(
            NumExpr::Prob(psi).to_string(),
            r#"P=?[(!"feed") U<=5 ((alpha=1)&"feed")]"#
        );
        let x = PathFormula::next_path(PathFormula::until(
            StateFormula::atom("a"),
            StateFormula::atom("b"),
            Horizon::Unbounded,
        ));
        assert_eq!(x.to_string(), r#"X ("a" U "b")"#);
        assert_eq!(
            PathFormula::eventually(StateFormula::atom("b"), Horizon::Bounded(3)).to_string(),
            r#"F<=3 "b""#
        );
    }

    #[test]
    fn depth() {
        let u = PathFormula::until(StateFormula::True, StateFormula::atom("b"), Horizon::Bounded(4));
        assert_eq!(PathFormula::next_path(u.clone()).depth(), Some(5));
        let v = PathFormula::until(StateFormula::True, StateFormula::atom("b"), Horizon::Unbounded);
        assert_eq!(PathFormula::next_path(v).depth(), None);
    }

    #[test]
    fn propositional_fragment() {
        assert!(StateFormula::alpha(1).and(StateFormula::atom("a").not()).is_propositional());
        let p = StateFormula::prob(ProbBound::Query, PathFormula::next(StateFormula::True));
        assert!(!p.not().is_propositional());
    }
}
