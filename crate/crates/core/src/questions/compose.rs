use crate::checker::{filtered_prob, prob_from_init, FilterOp, PathFormula, StateFormula};
use crate::model::Dtmc;
use crate::umm::restrict;
use crate::{Error, Result};

/// Which chain a term is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSelector {
    Full,
    /// `M|phi` for a propositional `phi`.
    Restricted(StateFormula),
}

/// Where a term's paths start.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSelector {
    /// The dummy init state; only available on the full model.
    Init,
    /// Aggregate over the states satisfying a propositional formula.
    Filter(FilterOp, StateFormula),
}

/// One factor of a composed query, raised to `power`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub model: ModelSelector,
    pub start: StartSelector,
    pub path: PathFormula,
    pub power: u32,
}

impl Term {
    pub fn from_init(path: PathFormula) -> Self {
        Self {
            model: ModelSelector::Full,
            start: StartSelector::Init,
            path,
            power: 1,
        }
    }

    /// `filter(min, P=?[path], start)` on `M|restrict_to`.
    pub fn min_on(restrict_to: StateFormula, start: StateFormula, path: PathFormula) -> Self {
        Self {
            model: ModelSelector::Restricted(restrict_to),
            start: StartSelector::Filter(FilterOp::Min, start),
            path,
            power: 1,
        }
    }

    pub fn pow(mut self, power: u32) -> Self {
        self.power = power;
        self
    }

    /// Probability of the term on `d`, before and after taking the power.
    pub fn evaluate(&self, d: &Dtmc) -> Result<f64> {
        let restricted;
        let model = match &self.model {
            ModelSelector::Full => d,
            ModelSelector::Restricted(phi) => {
                restricted = restrict(d, phi)?;
                &restricted
            }
        };
        let p = match &self.start {
            StartSelector::Init => prob_from_init(model, &self.path)?,
            StartSelector::Filter(op, phi) => filtered_prob(model, *op, phi, &self.path)?,
        };
        Ok(power(p, self.power))
    }
}

/// `p^e` by repeated multiplication, as PRISM's `pow` in the published
/// property listing.
pub(crate) fn power(p: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= p;
    }
    acc
}

/// A non-empty product of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedQuery {
    terms: Vec<Term>,
}

impl ComposedQuery {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a composed query needs at least one term".into()));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

/// Product of the term probabilities, multiplied left to right. Errors
/// carry the failing term's index.
pub fn compose(d: &Dtmc, q: &ComposedQuery) -> Result<f64> {
    let mut acc = 1.0;
    for (index, term) in q.terms.iter().enumerate() {
        let p = term.evaluate(d).map_err(|e| Error::Term {
            index,
            source: Box::new(e),
        })?;
        acc *= p;
    }
    Ok(acc)
}

/// Sum of composed queries, added left to right.
pub fn compose_sum(d: &Dtmc, queries: &[ComposedQuery]) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::InvalidArgument("a sum needs at least one query".into()));
    }
    let mut acc = 0.0;
    for q in queries {
        acc += compose(d, q)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{prob_path, Horizon};
    use crate::model::{Matrix, StateSpace};

    fn chain() -> Dtmc {
        let sp = StateSpace::with_names(&["a", "b"], true).unwrap();
        let t = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.2, 0.8]]).unwrap();
        Dtmc::new(sp, vec![1.0, 0.0, 0.0], t).unwrap()
    }

    #[test]
    fn single_term_equals_direct_call() {
        let d = chain();
        let psi = PathFormula::eventually(StateFormula::atom("b"), Horizon::Bounded(3));
        let q = ComposedQuery::new(vec![Term::from_init(psi.clone())]).unwrap();
        assert_eq!(compose(&d, &q).unwrap(), prob_from_init(&d, &psi).unwrap());
    }

    #[test]
    fn empty_product_rejected() {
        assert!(ComposedQuery::new(vec![]).is_err());
    }

    #[test]
    fn restricted_power_term() {
        let d = chain();
        // stay in a for one step: 0.5, squared
        let t = Term::min_on(
            StateFormula::atom("a"),
            StateFormula::atom("a"),
            PathFormula::next(StateFormula::atom("a")),
        )
        .pow(2);
        assert_eq!(t.evaluate(&d).unwrap(), 0.25);
        let direct = prob_path(&d, 1, &PathFormula::next(StateFormula::atom("a"))).unwrap();
        assert_eq!(direct, 0.5);
    }

    #[test]
    fn errors_name_the_term() {
        let d = chain();
        let q = ComposedQuery::new(vec![
            Term::from_init(PathFormula::next(StateFormula::atom("a"))),
            Term::from_init(PathFormula::next(StateFormula::atom("zzz"))),
        ])
        .unwrap();
        assert!(matches!(compose(&d, &q), Err(Error::Term { index: 1, .. })));
        // init is gone once restricted
        let r = ComposedQuery::new(vec![Term {
            model: ModelSelector::Restricted(StateFormula::atom("a")),
            start: StartSelector::Init,
            path: PathFormula::next(StateFormula::atom("a")),
            power: 1,
        }])
        .unwrap();
        assert!(matches!(compose(&d, &r), Err(Error::Term { index: 0, .. })));
    }
}
