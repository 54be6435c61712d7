//! Parameter sweeps over the questions or a composed-query template.
//!
//! A sweep spec is TOML:
//!
//! ```toml
//! question = "q1"            # q1..q4 or "composed"
//! theta = [0.7, 0.3]         # or: user = "m"
//!
//! [[param]]
//! name = "N"
//! range = [1, 20]            # inclusive; or values = [1, 5, "inf"]
//!
//! [[param]]
//! name = "i"
//! values = [1, 2]
//!
//! # composed only; `{name}` is replaced by the parameter value
//! [[term]]
//! path = '(!"feed") U<={N} ((alpha={i}) & "feed")'
//! restrict = "alpha={i}"     # optional, default: full model
//! start = '"feed"'           # optional filter states, default: init
//! op = "min"                 # filter aggregate, default min
//! power = 1
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer};

use super::compose::{compose, ComposedQuery, ModelSelector, StartSelector, Term};
use super::{q1, q2, q3, q4};
use crate::checker::{parse_path_formula, parse_state_formula, FilterOp, Horizon};
use crate::model::{ModelDocument, UserStrategy};
use crate::numeric::format_sig;
use crate::umm::Umm;
use crate::{Error, Result};

/// Significant digits of probabilities in sweep tables.
pub const SWEEP_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Question {
    Q1,
    Q2,
    Q3,
    Q4,
    Composed,
}

impl Question {
    fn required(self) -> &'static [&'static str] {
        match self {
            Question::Q1 | Question::Q2 | Question::Q3 => &["i", "N"],
            Question::Q4 => &["i", "N", "N2"],
            Question::Composed => &[],
        }
    }
}

impl std::str::FromStr for Question {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q1" => Ok(Question::Q1),
            "q2" => Ok(Question::Q2),
            "q3" => Ok(Question::Q3),
            "q4" => Ok(Question::Q4),
            "composed" => Ok(Question::Composed),
            _ => Err(Error::InvalidArgument(format!("unknown question `{s}`"))),
        }
    }
}

/// A grid value: a step count or `inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamValue {
    Finite(u32),
    Infinite,
}

impl ParamValue {
    pub fn horizon(self) -> Horizon {
        match self {
            ParamValue::Finite(n) => Horizon::Bounded(n),
            ParamValue::Infinite => Horizon::Unbounded,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Finite(n) => write!(f, "{n}"),
            ParamValue::Infinite => f.write_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ParamValue {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(n) => u32::try_from(n)
                .map(ParamValue::Finite)
                .map_err(|_| serde::de::Error::custom(format!("parameter value {n} out of range"))),
            Raw::Text(s) if s.eq_ignore_ascii_case("inf") => Ok(ParamValue::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "parameter value `{s}` is neither an integer nor `inf`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub name: String,
    #[serde(default)]
    pub values: Option<Vec<ParamValue>>,
    /// Inclusive `[lo, hi]`.
    #[serde(default)]
    pub range: Option<[u32; 2]>,
}

impl ParamGrid {
    pub fn points(&self) -> Result<Vec<ParamValue>> {
        let pts = match (&self.values, self.range) {
            (Some(v), None) => v.clone(),
            (None, Some([lo, hi])) if lo <= hi => (lo..=hi).map(ParamValue::Finite).collect(),
            (None, Some([lo, hi])) => {
                return Err(Error::Config(format!(
                    "parameter `{}`: range [{lo}, {hi}] is empty",
                    self.name
                )))
            }
            _ => {
                return Err(Error::Config(format!(
                    "parameter `{}` needs exactly one of `values` or `range`",
                    self.name
                )))
            }
        };
        if pts.is_empty() {
            return Err(Error::Config(format!("parameter `{}` has no values", self.name)));
        }
        Ok(pts)
    }
}

/// One factor of a composed-query template.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub path: String,
    #[serde(default)]
    pub restrict: Option<String>,
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default)]
    pub op: Option<String>,
    #[serde(default = "one")]
    pub power: u32,
}

fn one() -> u32 {
    1
}

fn substitute(template: &str, names: &[String], values: &[ParamValue]) -> String {
    let mut out = template.to_string();
    for (name, v) in names.iter().zip(values) {
        if *v == ParamValue::Infinite {
            out = out.replace(&format!("<={{{name}}}"), "");
        }
        out = out.replace(&format!("{{{name}}}"), &v.to_string());
    }
    out
}

impl TermSpec {
    fn instantiate(&self, names: &[String], values: &[ParamValue]) -> Result<Term> {
        let model = match &self.restrict {
            None => ModelSelector::Full,
            Some(t) => ModelSelector::Restricted(parse_state_formula(&substitute(t, names, values))?),
        };
        let op = match self.op.as_deref().unwrap_or("min") {
            "min" => FilterOp::Min,
            "max" => FilterOp::Max,
            "avg" => FilterOp::Avg,
            other => return Err(Error::Config(format!("unknown filter `{other}`"))),
        };
        let start = match &self.start {
            None => StartSelector::Init,
            Some(t) => StartSelector::Filter(op, parse_state_formula(&substitute(t, names, values))?),
        };
        Ok(Term {
            model,
            start,
            path: parse_path_formula(&substitute(&self.path, names, values))?,
            power: self.power,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub question: Question,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub user: Option<String>,
    /// Model document the strategy is resolved against.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default, rename = "param")]
    pub params: Vec<ParamGrid>,
    #[serde(default, rename = "term")]
    pub terms: Vec<TermSpec>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in &self.params {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::Config(format!("parameter `{}` declared twice", p.name)));
            }
            p.points()?;
        }
        for r in self.question.required() {
            if !seen.contains(r) {
                return Err(Error::Config(format!("question needs parameter `{r}`")));
            }
        }
        if let Some(i) = self.params.iter().find(|p| p.name == "i") {
            if i.points()?.contains(&ParamValue::Infinite) && self.question != Question::Composed {
                return Err(Error::Config("pattern index `i` cannot be `inf`".into()));
            }
        }
        match (self.question, self.terms.is_empty()) {
            (Question::Composed, true) => {
                Err(Error::Config("a composed sweep needs at least one [[term]]".into()))
            }
            (q, false) if q != Question::Composed => {
                Err(Error::Config("[[term]] is only allowed with question = \"composed\"".into()))
            }
            _ => Ok(()),
        }
    }

    /// Resolves the strategy from `theta` or from `user` in `doc`.
    pub fn strategy(&self, doc: Option<&ModelDocument>) -> Result<UserStrategy> {
        match (&self.theta, &self.user) {
            (Some(t), None) => UserStrategy::new("theta", t.clone()),
            (None, Some(u)) => doc
                .ok_or_else(|| Error::Config("`user` needs a model document".into()))?
                .strategy(u),
            (Some(_), Some(_)) => Err(Error::Config("give either `theta` or `user`, not both".into())),
            (None, None) => Err(Error::Config("a sweep needs `theta` or `user`".into())),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    /// Grid points in row-major order: the last parameter varies fastest.
    pub fn grid(&self) -> Result<Vec<Vec<ParamValue>>> {
        let mut rows = vec![Vec::new()];
        for p in &self.params {
            let pts = p.points()?;
            rows = rows
                .into_iter()
                .flat_map(|r| {
                    pts.iter().map(move |v| {
                        let mut r = r.clone();
                        r.push(*v);
                        r
                    })
                })
                .collect();
        }
        Ok(rows)
    }

    fn value(&self, values: &[ParamValue], name: &str) -> Option<ParamValue> {
        self.params.iter().position(|p| p.name == name).map(|i| values[i])
    }

    fn evaluate(&self, umm: &Umm, values: &[ParamValue]) -> Result<f64> {
        let get = |name: &str| {
            self.value(values, name)
                .ok_or_else(|| Error::Config(format!("parameter `{name}` unbound")))
        };
        let pattern = || match get("i")? {
            ParamValue::Finite(i) => Ok(i as usize),
            ParamValue::Infinite => Err(Error::Config("pattern index `i` cannot be `inf`".into())),
        };
        match self.question {
            Question::Q1 => q1(umm, pattern()?, get("N")?.horizon()),
            Question::Q2 => q2(umm, pattern()?, get("N")?.horizon()),
            Question::Q3 => q3(umm, pattern()?, get("N")?.horizon()),
            Question::Q4 => q4(umm, pattern()?, get("N")?.horizon(), get("N2")?.horizon()),
            Question::Composed => {
                let names = self.names();
                let terms = self
                    .terms
                    .iter()
                    .map(|t| t.instantiate(&names, values))
                    .collect::<Result<Vec<_>>>()?;
                compose(umm.dtmc(), &ComposedQuery::new(terms)?)
            }
        }
    }

    /// Evaluates every grid cell. Cells run concurrently; the table keeps
    /// grid order and records per-cell errors instead of aborting.
    pub fn run(&self, umm: &Umm) -> Result<SweepTable> {
        self.validate()?;
        let cells = self
            .grid()?
            .into_par_iter()
            .map(|values| {
                let result = self.evaluate(umm, &values).map_err(|e| e.to_string());
                SweepCell { values, result }
            })
            .collect();
        Ok(SweepTable {
            names: self.names(),
            cells,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub values: Vec<ParamValue>,
    pub result: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub names: Vec<String>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn all_failed(&self) -> bool {
        !self.cells.is_empty() && self.cells.iter().all(|c| c.result.is_err())
    }

    /// Comma-separated table: parameter columns, `probability`, `error`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.names.clone();
        header.push("probability".into());
        header.push("error".into());
        w.write_record(&header).map_err(csv_err)?;
        for c in &self.cells {
            let mut rec: Vec<String> = c.values.iter().map(ToString::to_string).collect();
            match &c.result {
                Ok(p) => {
                    rec.push(format_sig(*p, SWEEP_DIGITS));
                    rec.push(String::new());
                }
                Err(e) => {
                    rec.push(String::new());
                    rec.push(e.clone());
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
