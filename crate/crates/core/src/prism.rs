//! PRISM export of user metamodels and of the question properties, plus a
//! re-parser for the exported model text.
//!
//! The model is one module with variables `s` (action state, 0 for the
//! dummy) and `k` (pattern, 0 for the dummy), and `n + 1` commands: the
//! dummy command draws `(s, k)` with `theta(k) * iota(s)`, and the command
//! for `s` moves to `(s', k')` with `theta(k') * P_k'(s, s')`. Updates with
//! probability zero are omitted. `alpha` is declared as a formula equal
//! to `k`, so properties can say `(alpha=1)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::checker::{FilterOp, Horizon, NumExpr, PathFormula, StateFormula};
use crate::model::{Matrix, PatternMixture};
use crate::numeric::format_sig;
use crate::questions::{Question, ENTRY_LABELS, REPEATS};
use crate::{Error, Result};

/// Significant digits of exported probabilities.
pub const PRISM_DIGITS: usize = 17;

/// Exported model text, split into the module and its label block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrismDocument {
    pub module: String,
    pub labels: String,
}

impl PrismDocument {
    /// Model file contents: module followed by labels.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.module, self.labels)
    }
}

/// Turns a user id into a PRISM identifier suffix.
fn identifier(user_id: &str) -> String {
    let id: String = user_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if id.is_empty() {
        "m".to_string()
    } else {
        id
    }
}

fn update(p: f64, s: usize, k: usize) -> String {
    format!("{}:(s'={s})&(k'={k})", format_sig(p, PRISM_DIGITS))
}

fn command(guard: usize, updates: &[String]) -> String {
    format!("  [] (s={guard}) -> {};\n", updates.join(" + "))
}

/// Exports the metamodel of `theta` over `mixture` as a PRISM DTMC.
/// Labels are taken from the mixture's state labelling; PRISM's built-in
/// `"init"` already denotes the dummy state and is not redeclared.
pub fn export_prism(mixture: &PatternMixture, theta: &[f64], user_id: &str) -> Result<PrismDocument> {
    crate::umm::build_umm(mixture, theta)?;
    let n = mixture.n();
    let k = mixture.k();
    let mut m = String::new();
    let _ = writeln!(m, "// user metamodel of `{user_id}`: {n} action states, {k} patterns");
    m.push_str("dtmc\n\nformula alpha = k;\n\n");
    let _ = writeln!(m, "module UserMetamodel_{}", identifier(user_id));
    let _ = writeln!(m, "  s:[0..{n}] init 0;");
    let _ = writeln!(m, "  k:[0..{k}] init 0;");
    m.push('\n');
    let mut first = Vec::new();
    for (kk, &w) in theta.iter().enumerate() {
        for (s, &p) in mixture.iota_init().iter().enumerate() {
            let q = w * p;
            if q != 0.0 {
                first.push(update(q, s + 1, kk + 1));
            }
        }
    }
    m.push_str(&command(0, &first));
    for s in 0..n {
        let mut ups = Vec::new();
        for (kk, (pat, &w)) in mixture.patterns().iter().zip(theta).enumerate() {
            for t in 0..n {
                let q = w * pat[(s, t)];
                if q != 0.0 {
                    ups.push(update(q, t + 1, kk + 1));
                }
            }
        }
        m.push_str(&command(s + 1, &ups));
    }
    m.push_str("endmodule\n");

    let space = mixture.space();
    let offset = usize::from(space.has_dummy_init());
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for s in 0..n {
        for l in space.labels(s + offset) {
            if l != crate::model::INIT_LABEL {
                by_label.entry(l).or_default().push(s + 1);
            }
        }
    }
    let mut labels = String::new();
    for (l, states) in &by_label {
        let guard: Vec<String> = states.iter().map(|s| format!("s={s}")).collect();
        let _ = writeln!(labels, "label \"{l}\" = {};", guard.join("|"));
    }
    for kk in 1..=k {
        let _ = writeln!(labels, "label \"alpha{kk}\" = k={kk};");
    }
    Ok(PrismDocument { module: m, labels })
}

/// Metamodel recovered from exported text.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparsedUmm {
    pub n: usize,
    pub k: usize,
    /// Transition matrix in the metamodel's flat layout.
    pub trans: Matrix,
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::PrismSyntax {
        line,
        msg: msg.into(),
    }
}

fn parse_range_decl(rest: &str, line: usize) -> Result<usize> {
    // `[0..n] init 0;`
    let inner = rest
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix("] init 0;"))
        .ok_or_else(|| syntax(line, "expected `[0..N] init 0;`"))?;
    let upper = inner
        .strip_prefix("0..")
        .ok_or_else(|| syntax(line, "range must start at 0"))?;
    upper
        .parse()
        .map_err(|_| syntax(line, format!("bad range bound `{upper}`")))
}

fn parse_update(text: &str, line: usize) -> Result<(f64, usize, usize)> {
    let (p, target) = text
        .split_once(':')
        .ok_or_else(|| syntax(line, format!("update `{text}` lacks `:`")))?;
    let p: f64 = p
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad probability `{}`", p.trim())))?;
    let target = target.replace(' ', "");
    let (s, k) = target
        .strip_prefix("(s'=")
        .and_then(|t| t.strip_suffix(')'))
        .and_then(|t| t.split_once(")&(k'="))
        .ok_or_else(|| syntax(line, format!("bad update target `{target}`")))?;
    let s = s.parse().map_err(|_| syntax(line, format!("bad state `{s}`")))?;
    let k = k.parse().map_err(|_| syntax(line, format!("bad pattern `{k}`")))?;
    Ok((p, s, k))
}

/// Rebuilds the transition matrix from text produced by [`export_prism`].
/// Not a general PRISM parser: anything else is rejected with the line
/// number.
pub fn reparse(text: &str) -> Result<ReparsedUmm> {
    let mut n = None;
    let mut k = None;
    let mut commands: Vec<(usize, usize, Vec<(f64, usize, usize)>)> = Vec::new();
    let mut in_module = false;
    let mut saw_module = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with("//") {
            continue;
        }
        if l == "dtmc" || l == "formula alpha = k;" || l.starts_with("label \"") {
            continue;
        }
        if let Some(name) = l.strip_prefix("module ") {
            if saw_module || name.trim().is_empty() {
                return Err(syntax(line, "unexpected module declaration"));
            }
            in_module = true;
            saw_module = true;
            continue;
        }
        if l == "endmodule" {
            if !in_module {
                return Err(syntax(line, "`endmodule` outside a module"));
            }
            in_module = false;
            continue;
        }
        if !in_module {
            return Err(syntax(line, format!("unrecognised line `{l}`")));
        }
        if let Some(rest) = l.strip_prefix("s:") {
            n = Some(parse_range_decl(rest, line)?);
        } else if let Some(rest) = l.strip_prefix("k:") {
            k = Some(parse_range_decl(rest, line)?);
        } else if let Some(rest) = l.strip_prefix("[] (s=") {
            let (guard, body) = rest
                .split_once(") -> ")
                .ok_or_else(|| syntax(line, "expected `[] (s=N) -> ...;`"))?;
            let guard: usize = guard
                .parse()
                .map_err(|_| syntax(line, format!("bad guard `{guard}`")))?;
            let body = body
                .strip_suffix(';')
                .ok_or_else(|| syntax(line, "command must end with `;`"))?;
            let ups = body
                .split(" + ")
                .map(|u| parse_update(u, line))
                .collect::<Result<Vec<_>>>()?;
            commands.push((line, guard, ups));
        } else {
            return Err(syntax(line, format!("unrecognised line `{l}`")));
        }
    }
    let last = text.lines().count().max(1);
    if !saw_module || in_module {
        return Err(syntax(last, "missing or unterminated module"));
    }
    let n = n.ok_or_else(|| syntax(last, "missing `s` declaration"))?;
    let k = k.ok_or_else(|| syntax(last, "missing `k` declaration"))?;
    if n == 0 || k == 0 {
        return Err(syntax(last, "empty state or pattern range"));
    }
    let size = n * k + 1;
    let mut trans = Matrix::zeros(size, size);
    let mut seen = vec![false; n + 1];
    for (line, guard, ups) in commands {
        if guard > n {
            return Err(syntax(line, format!("guard s={guard} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[guard], true) {
            return Err(syntax(line, format!("second command for s={guard}")));
        }
        let mut row = vec![0.0; size];
        for (p, s, kk) in ups {
            if s == 0 || s > n || kk == 0 || kk > k {
                return Err(syntax(line, format!("update target ({s},{kk}) out of range")));
            }
            row[(kk - 1) * n + s] += p;
        }
        if guard == 0 {
            trans.row_mut(0).copy_from_slice(&row);
        } else {
            for kk in 0..k {
                trans.row_mut(kk * n + guard).copy_from_slice(&row);
            }
        }
    }
    if let Some(s) = seen.iter().position(|&b| !b) {
        return Err(syntax(last, format!("no command for s={s}")));
    }
    Ok(ReparsedUmm { n, k, trans })
}

/// Parameters substituted into a question's property text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuestionParams {
    pub i: usize,
    pub n: Horizon,
    pub n2: Horizon,
}

fn atom(a: &str) -> StateFormula {
    StateFormula::atom(a)
}

/// `filter(min, P=?[X ((alpha & !avoid & !a) U (alpha & a))], alpha & a)`,
/// the repeat-visit factor of the restricted model written on the full
/// model.
fn repeat_visit(alpha: &StateFormula, a: &str, avoid: &str) -> NumExpr {
    NumExpr::Filter {
        op: FilterOp::Min,
        path: PathFormula::next_path(PathFormula::until(
            alpha.clone().and(atom(avoid).not()).and(atom(a).not()),
            alpha.clone().and(atom(a)),
            Horizon::Unbounded,
        )),
        states: alpha.clone().and(atom(a)),
    }
}

/// `filter(min, P=?[(alpha & !feed) U<=n (alpha & feed)], alpha & from)`.
fn on_to_feed(alpha: &StateFormula, from: &str, n: Horizon) -> NumExpr {
    NumExpr::Filter {
        op: FilterOp::Min,
        path: PathFormula::until(
            alpha.clone().and(atom("feed").not()),
            alpha.clone().and(atom("feed")),
            n,
        ),
        states: alpha.clone().and(atom(from)),
    }
}

/// Full-model property expression of a question. Factors on the
/// restricted model `M|alpha=i` are encoded by conjoining `alpha=i` to
/// both until operands and to the filter.
pub fn question_expr(question: Question, p: QuestionParams) -> Result<NumExpr> {
    if p.i == 0 {
        return Err(Error::InvalidArgument("pattern index must be at least 1".into()));
    }
    let alpha = StateFormula::alpha(p.i);
    let pow = |e: NumExpr| NumExpr::Pow(Box::new(e), REPEATS);
    Ok(match question {
        Question::Q1 => NumExpr::Prob(PathFormula::until(
            atom("feed").not(),
            alpha.clone().and(atom("feed")),
            p.n,
        )),
        Question::Q2 => NumExpr::Product(vec![
            NumExpr::Prob(PathFormula::eventually(alpha.clone().and(atom("feed")), p.n)),
            pow(repeat_visit(&alpha, "feed", "pick")),
        ]),
        Question::Q3 => NumExpr::Product(vec![
            NumExpr::Prob(PathFormula::until(
                atom("pick").not(),
                alpha.clone().and(atom("pick")),
                p.n,
            )),
            pow(repeat_visit(&alpha, "pick", "feed")),
            on_to_feed(&alpha, "pick", Horizon::Unbounded),
            pow(repeat_visit(&alpha, "feed", "pick")),
        ]),
        Question::Q4 => NumExpr::Sum(
            ENTRY_LABELS
                .iter()
                .map(|l| {
                    NumExpr::Product(vec![
                        NumExpr::Prob(PathFormula::until(
                            alpha.clone().not().and(atom("feed").not()),
                            alpha.clone().and(atom(l)),
                            p.n,
                        )),
                        on_to_feed(&alpha, l, p.n2),
                    ])
                })
                .collect(),
        ),
        Question::Composed => {
            return Err(Error::InvalidArgument(
                "property export covers q1 to q4 only".into(),
            ))
        }
    })
}

/// Property file text for a question with its parameters substituted.
pub fn export_properties(question: Question, p: QuestionParams) -> Result<String> {
    let expr = question_expr(question, p)?;
    let h = |h: Horizon| h.bound().map_or("inf".to_string(), |n| n.to_string());
    Ok(format!(
        "// {question:?} with i={}, N={}, N2={}\n{expr}\n",
        p.i,
        h(p.n),
        h(p.n2)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{evaluate, parse_properties, parse_property, Property};
    use crate::fixtures::{yoshi_mixture, WORKED_THETA};
    use crate::model::StateSpace;
    use crate::questions::{q1, q2, q3, q4};
    use crate::umm::build_umm;

    fn flip_flop() -> PatternMixture {
        let sp = StateSpace::with_names(&["a", "b"], false).unwrap();
        let p = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        PatternMixture::new(sp, vec![p], vec![1.0, 0.0]).unwrap()
    }

    const FLIP_FLOP_GOLDEN: &str = "\
// user metamodel of `m`: 2 action states, 1 patterns
dtmc

formula alpha = k;

module UserMetamodel_m
  s:[0..2] init 0;
  k:[0..1] init 0;

  [] (s=0) -> 1:(s'=1)&(k'=1);
  [] (s=1) -> 1:(s'=2)&(k'=1);
  [] (s=2) -> 1:(s'=1)&(k'=1);
endmodule

label \"a\" = s=1;
label \"b\" = s=2;
label \"alpha1\" = k=1;
";

    #[test]
    fn two_state_golden() {
        let doc = export_prism(&flip_flop(), &[1.0], "m").unwrap();
        assert_eq!(doc.text(), FLIP_FLOP_GOLDEN);
    }

    #[test]
    fn zero_updates_are_omitted() {
        let doc = export_prism(&yoshi_mixture(), &WORKED_THETA, "m").unwrap();
        // pattern 2 never feeds from seeY
        let seey = doc.module.lines().find(|l| l.contains("[] (s=1)")).unwrap();
        assert!(!seey.contains("(s'=2)&(k'=2)"));
        assert!(seey.contains("(s'=2)&(k'=1)"));
        assert_eq!(doc.module.matches("[] (s=").count(), 5);
    }

    #[test]
    fn round_trip() {
        let m = yoshi_mixture();
        let doc = export_prism(&m, &WORKED_THETA, "m").unwrap();
        let back = reparse(&doc.text()).unwrap();
        let umm = build_umm(&m, &WORKED_THETA).unwrap();
        assert_eq!((back.n, back.k), (4, 2));
        assert!(back.trans.max_abs_diff(umm.dtmc().trans()).unwrap() <= 1e-12);
    }

    #[test]
    fn reparse_errors() {
        assert!(matches!(reparse(""), Err(Error::PrismSyntax { .. })));
        let bad = FLIP_FLOP_GOLDEN.replace("[] (s=1) -> 1:", "[] (s=1) -> one:");
        assert!(matches!(reparse(&bad), Err(Error::PrismSyntax { line: 11, .. })));
        let stray = FLIP_FLOP_GOLDEN.replace("dtmc", "mdp");
        assert!(matches!(reparse(&stray), Err(Error::PrismSyntax { line: 2, .. })));
        let missing = FLIP_FLOP_GOLDEN.replace("  [] (s=2) -> 1:(s'=1)&(k'=1);\n", "");
        assert!(reparse(&missing).is_err());
    }

    #[test]
    fn tampered_probability_is_detected() {
        let m = yoshi_mixture();
        let text = export_prism(&m, &WORKED_THETA, "m").unwrap().text();
        let tampered = text.replacen("0.52499999999999991", "0.5", 1);
        assert_ne!(tampered, text);
        let back = reparse(&tampered).unwrap();
        let umm = build_umm(&m, &WORKED_THETA).unwrap();
        assert!(back.trans.max_abs_diff(umm.dtmc().trans()).unwrap() > 1e-3);
    }

    #[test]
    fn q1_property_text() {
        let p = QuestionParams {
            i: 1,
            n: Horizon::Bounded(5),
            n2: Horizon::Unbounded,
        };
        let text = export_properties(Question::Q1, p).unwrap();
        assert!(text.contains(r#"P=?[(!"feed") U<=5 ((alpha=1)&"feed")]"#));
        let props = parse_properties(&text).unwrap();
        assert_eq!(props, vec![Property::Numeric(question_expr(Question::Q1, p).unwrap())]);
    }

    #[test]
    fn q2_property_text() {
        let p = QuestionParams {
            i: 1,
            n: Horizon::Bounded(7),
            n2: Horizon::Unbounded,
        };
        let text = export_properties(Question::Q2, p).unwrap();
        assert!(text.contains("pow(filter(min,"));
        assert!(text.trim_end().ends_with(", 4)"));
    }

    #[test]
    fn invalid_requests() {
        let p = QuestionParams {
            i: 0,
            n: Horizon::Bounded(5),
            n2: Horizon::Unbounded,
        };
        assert!(export_properties(Question::Q1, p).is_err());
        let p = QuestionParams { i: 1, ..p };
        assert!(export_properties(Question::Composed, p).is_err());
    }

    /// The exported full-model expressions evaluate to the restricted-model
    /// computations of the question operators.
    #[test]
    fn exported_expressions_agree_with_questions() {
        let umm = build_umm(&yoshi_mixture(), &WORKED_THETA).unwrap();
        let d = umm.dtmc();
        for i in 1..=2 {
            for n in [1u32, 4, 9] {
                let p = QuestionParams {
                    i,
                    n: Horizon::Bounded(n),
                    n2: Horizon::Bounded(3),
                };
                let eval = |q| {
                    let text = export_properties(q, p).unwrap();
                    let Property::Numeric(e) = parse_property(text.lines().nth(1).unwrap()).unwrap() else {
                        panic!()
                    };
                    evaluate(d, &e).unwrap()
                };
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
                assert!(close(eval(Question::Q1), q1(&umm, i, p.n).unwrap()));
                assert!(close(eval(Question::Q2), q2(&umm, i, p.n).unwrap()));
                assert!(close(eval(Question::Q3), q3(&umm, i, p.n).unwrap()));
                assert!(close(eval(Question::Q4), q4(&umm, i, p.n, p.n2).unwrap()));
            }
        }
    }
}
