//! User metamodels: the product of a pattern mixture with one user's
//! strategy, and restriction of a chain to the states satisfying a
//! propositional formula.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checker::{sat, StateFormula};
use crate::model::{Dtmc, Matrix, PatternMixture, UserStrategy};
use crate::{Error, Result};

pub const UMM_FORMAT: &str = "patternmc-umm/1";

/// A user metamodel: a DTMC over `S x {1..K}` plus a dummy init state.
///
/// State `(s, k)` (both 1-based) sits at flat index `(k - 1) * n + s`; the
/// dummy sits at 0. Every state `(s, k)` moves to `(s', k')` with
/// probability `theta(k') * P_k'(s, s')`, independent of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Umm {
    dtmc: Dtmc,
    n: usize,
    k: usize,
    theta: Vec<f64>,
    user_id: Option<String>,
    back_map: Vec<Option<(usize, usize)>>,
}

/// Builds the metamodel of a user with strategy `theta`.
pub fn build_umm(mixture: &PatternMixture, theta: &[f64]) -> Result<Umm> {
    mixture.check_theta(theta)?;
    crate::model::check_distribution("strategy", theta)?;
    let n = mixture.n();
    let k = mixture.k();
    let size = n * k + 1;
    let mut trans = Matrix::zeros(size, size);
    for kk in 0..k {
        for s in 0..n {
            trans[(0, kk * n + s + 1)] = theta[kk] * mixture.iota_init()[s];
        }
    }
    for s in 0..n {
        let mut row = vec![0.0; size];
        for (kk, p) in mixture.patterns().iter().enumerate() {
            for t in 0..n {
                row[kk * n + t + 1] = theta[kk] * p[(s, t)];
            }
        }
        for from_k in 0..k {
            trans.row_mut(from_k * n + s + 1).copy_from_slice(&row);
        }
    }
    let mut init = vec![0.0; size];
    init[0] = 1.0;
    let space = mixture.space().with_dummy_init(false)?.product(k);
    let mut back_map = vec![None];
    for kk in 1..=k {
        for s in 1..=n {
            back_map.push(Some((s, kk)));
        }
    }
    Ok(Umm {
        dtmc: Dtmc::new(space, init, trans)?,
        n,
        k,
        theta: theta.to_vec(),
        user_id: None,
        back_map,
    })
}

impl Umm {
    pub fn for_user(mixture: &PatternMixture, strategy: &UserStrategy) -> Result<Self> {
        let mut u = build_umm(mixture, strategy.theta())?;
        u.user_id = Some(strategy.user_id.clone());
        Ok(u)
    }

    pub fn dtmc(&self) -> &Dtmc {
        &self.dtmc
    }

    pub fn into_dtmc(self) -> Dtmc {
        self.dtmc
    }

    /// Number of action states of the underlying mixture.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn user_id(&self) -> Option<&str> {
        self.user_id.as_deref()
    }

    /// Flat index of `(s, k)`, both 1-based.
    pub fn index(&self, s: usize, k: usize) -> Option<usize> {
        ((1..=self.n).contains(&s) && (1..=self.k).contains(&k)).then(|| (k - 1) * self.n + s)
    }

    /// `(s, k)` of a flat index; `None` for the dummy or out of range.
    pub fn state_of(&self, index: usize) -> Option<(usize, usize)> {
        self.back_map.get(index).copied().flatten()
    }

    pub fn back_map(&self) -> &[Option<(usize, usize)>] {
        &self.back_map
    }

    pub fn to_document(&self) -> UmmDocument {
        let space = self.dtmc.space();
        UmmDocument {
            format: UMM_FORMAT.to_string(),
            user_id: self.user_id.clone(),
            n: self.n,
            k: self.k,
            theta: self.theta.clone(),
            states: (0..self.dtmc.len())
                .map(|i| {
                    let (s, k) = self.state_of(i).unwrap_or((0, 0));
                    UmmStateEntry {
                        index: i,
                        s,
                        k,
                        name: space.name(i).unwrap_or_default().to_string(),
                        labels: space.labels(i).iter().cloned().collect(),
                    }
                })
                .collect(),
            transitions: self.dtmc.trans().to_rows(),
        }
    }
}

/// One state of a serialized metamodel; the dummy has `s = k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmmStateEntry {
    pub index: usize,
    pub s: usize,
    pub k: usize,
    pub name: String,
    pub labels: Vec<String>,
}

/// JSON form of a metamodel, including the flat-index back-map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmmDocument {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
    pub n: usize,
    pub k: usize,
    pub theta: Vec<f64>,
    pub states: Vec<UmmStateEntry>,
    pub transitions: Vec<Vec<f64>>,
}

impl UmmDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format != UMM_FORMAT {
            return Err(Error::InvalidModel(format!("unsupported format `{}`", doc.format)));
        }
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// `D|phi`: the chain restricted to states satisfying the propositional
/// formula `phi`. Transitions into dropped states are lost, so rows may
/// become substochastic and the result is flagged restricted. If every
/// state satisfies `phi` the chain is returned unchanged.
pub fn restrict(d: &Dtmc, phi: &StateFormula) -> Result<Dtmc> {
    restrict_with_map(d, phi).map(|(r, _)| r)
}

/// Like [`restrict`], also returning the original flat index of every kept
/// state.
pub fn restrict_with_map(d: &Dtmc, phi: &StateFormula) -> Result<(Dtmc, Vec<usize>)> {
    if !phi.is_propositional() {
        return Err(Error::InvalidArgument(format!(
            "restriction needs a propositional formula, got {phi}"
        )));
    }
    let keep: Vec<usize> = sat(d, phi)?
        .into_iter()
        .enumerate()
        .filter_map(|(i, b)| b.then_some(i))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyStateSet(phi.to_string()));
    }
    if keep.len() == d.len() {
        return Ok((d.clone(), keep));
    }
    let mut trans = Matrix::zeros(keep.len(), keep.len());
    for (i, &from) in keep.iter().enumerate() {
        for (j, &to) in keep.iter().enumerate() {
            trans[(i, j)] = d.prob(from, to);
        }
    }
    let init = keep.iter().map(|&i| d.init()[i]).collect();
    let space = d.space().subspace(&keep);
    Ok((Dtmc::from_parts(space, init, trans, true)?, keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{prob_path, Horizon, PathFormula};
    use crate::model::{validate_dtmc, StateSpace};

    fn space2() -> StateSpace {
        StateSpace::with_names(&["a", "b"], false).unwrap()
    }

    fn mixture() -> PatternMixture {
        let p1 = Matrix::from_rows(&[[0.2, 0.8], [0.5, 0.5]]).unwrap();
        let p2 = Matrix::from_rows(&[[0.6, 0.4], [1.0, 0.0]]).unwrap();
        PatternMixture::new(space2(), vec![p1, p2], vec![0.3, 0.7]).unwrap()
    }

    #[test]
    fn substitution_into_definition() {
        let u = build_umm(&mixture(), &[0.5, 0.5]).unwrap();
        for k in 1..=2 {
            let from = u.index(1, k).unwrap();
            assert_eq!(u.dtmc().prob(from, u.index(2, 1).unwrap()), 0.4);
            assert_eq!(u.dtmc().prob(from, u.index(2, 2).unwrap()), 0.2);
        }
        assert_eq!(u.dtmc().prob(0, u.index(1, 2).unwrap()), 0.5 * 0.3);
        assert_eq!(u.dtmc().len(), 5);
    }

    #[test]
    fn single_pattern_collapse() {
        let p = Matrix::from_rows(&[[0.2, 0.8], [0.5, 0.5]]).unwrap();
        let m = PatternMixture::new(space2(), vec![p.clone()], vec![0.3, 0.7]).unwrap();
        let u = build_umm(&m, &[1.0]).unwrap();
        assert_eq!(u.dtmc().row(0), &[0.0, 0.3, 0.7]);
        for s in 0..2 {
            assert_eq!(&u.dtmc().row(s + 1)[1..], p.row(s));
        }
    }

    #[test]
    fn layout_and_labels() {
        let u = build_umm(&mixture(), &[0.25, 0.75]).unwrap();
        assert_eq!(u.index(2, 2), Some(4));
        assert_eq!(u.index(3, 1), None);
        assert_eq!(u.index(1, 0), None);
        assert_eq!(u.state_of(3), Some((1, 2)));
        assert_eq!(u.state_of(0), None);
        let sp = u.dtmc().space();
        assert!(sp.has_label(0, "init"));
        assert_eq!(sp.alpha(0), None);
        assert_eq!(sp.alpha(3), Some(2));
        assert!(sp.has_label(3, "a") && !sp.has_label(3, "b"));
        assert_eq!(sp.name(4), Some("(b,2)"));
        assert!(validate_dtmc(u.dtmc()).is_valid());
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(matches!(build_umm(&mixture(), &[1.0]), Err(Error::Dimension(_))));
        assert!(build_umm(&mixture(), &[0.5, 0.6]).is_err());
    }

    fn ab_chain() -> Dtmc {
        let sp = StateSpace::with_names(&["A", "B"], false).unwrap();
        let t = Matrix::from_rows(&[[0.6, 0.4], [0.3, 0.7]]).unwrap();
        Dtmc::new(sp, vec![1.0, 0.0], t).unwrap()
    }

    #[test]
    fn restrict_drops_mass() {
        let r = restrict(&ab_chain(), &StateFormula::atom("A")).unwrap();
        assert!(r.is_restricted());
        assert_eq!(r.len(), 1);
        assert_eq!(r.row(0), &[0.6]);
        assert!(validate_dtmc(&r).is_valid());
    }

    #[test]
    fn restrict_true_is_identity() {
        let d = ab_chain();
        let r = restrict(&d, &StateFormula::True).unwrap();
        assert_eq!(r, d);
        assert!(!r.is_restricted());
    }

    #[test]
    fn restrict_errors() {
        let d = ab_chain();
        assert!(matches!(
            restrict(&d, &StateFormula::falsum()),
            Err(Error::EmptyStateSet(_))
        ));
        let p = StateFormula::prob(
            crate::checker::ProbBound::Bound(crate::checker::Comparison::Ge, 0.5),
            PathFormula::next(StateFormula::atom("A")),
        );
        assert!(matches!(restrict(&d, &p), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn restricted_umm_keeps_one_class() {
        let u = build_umm(&mixture(), &[0.5, 0.5]).unwrap();
        let (r, map) = restrict_with_map(u.dtmc(), &StateFormula::alpha(2)).unwrap();
        assert_eq!(map, vec![3, 4]);
        assert!(r.space().init_state().is_none());
        // (a,2) -> (b,2) keeps theta(2) * P2(a,b)
        assert_eq!(r.prob(0, 1), 0.5 * 0.4);
        let psi = PathFormula::eventually(StateFormula::atom("b"), Horizon::Bounded(1));
        assert_eq!(prob_path(&r, 0, &psi).unwrap(), 0.2);
    }

    #[test]
    fn document_carries_back_map() {
        let mut u = build_umm(&mixture(), &[0.5, 0.5]).unwrap();
        u.user_id = Some("u7".into());
        let doc = UmmDocument::from_json(&u.to_document().to_json().unwrap()).unwrap();
        assert_eq!(doc.states.len(), 5);
        assert_eq!((doc.states[4].s, doc.states[4].k), (2, 2));
        assert_eq!(doc.states[0].labels, vec!["init".to_string()]);
        assert_eq!(doc.user_id.as_deref(), Some("u7"));
        assert_eq!(doc.transitions[1], u.dtmc().row(1));
    }
}
