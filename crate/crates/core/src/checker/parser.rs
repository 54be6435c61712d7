//! Recursive-descent parser for PRISM-style property text.
//!
//! ```text
//! property := numeric | state
//! numeric  := product ('+' product)*
//! product  := factor ('*' factor)*
//! factor   := number | 'P=?' '[' path ']' | '(' numeric ')'
//!           | 'filter' '(' ('min'|'max'|'avg') ',' 'P=?' '[' path ']' (',' state)? ')'
//!           | 'pow' '(' numeric ',' int ')'
//! state    := conj ('|' conj)*
//! conj     := unary ('&' unary)*
//! unary    := '!' unary | 'true' | 'false' | '"label"' | label
//!           | ('alpha' | 'k') '=' int | 'P' cmp number '[' path ']' | '(' state ')'
//! path     := 'X' path | 'F' bound? state | '(' path ')' | state ('U' bound? state)?
//! bound    := '<=' int
//! ```

use super::formula::{
    Comparison, FilterOp, Horizon, NumExpr, PathFormula, ProbBound, Property, StateFormula,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Amp,
    Pipe,
    Bang,
    Star,
    Plus,
    Eq,
    Query,
    Cmp(Comparison),
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Num(s) => format!("number {s}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '!' => Tok::Bang,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '=' if bytes.get(i + 1) == Some(&b'?') => {
                i += 1;
                Tok::Query
            }
            '=' => Tok::Eq,
            '<' | '>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                if eq {
                    i += 1;
                }
                Tok::Cmp(match (c, eq) {
                    ('<', true) => Comparison::Le,
                    ('<', false) => Comparison::Lt,
                    ('>', true) => Comparison::Ge,
                    _ => Comparison::Gt,
                })
            }
            '"' => {
                let end = text[i + 1..].find('"').ok_or(Error::Parse {
                    pos: start,
                    msg: "unterminated label".into(),
                })?;
                let s = text[i + 1..i + 1 + end].to_string();
                i += end + 1;
                Tok::Str(s)
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < bytes.len() {
                    let d = bytes[j] as char;
                    let exp_sign = (d == '-' || d == '+')
                        && j > i
                        && matches!(bytes[j - 1], b'e' | b'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s = text[i..j].to_string();
                i = j - 1;
                Tok::Num(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let s = text[i..j].to_string();
                i = j - 1;
                Tok::Ident(s)
            }
            other => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "true", "false", "P", "X", "F", "U", "G", "filter", "pow", "min", "max", "avg",
];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", describe(&want), describe(self.peek())))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn expect_ident(&mut self, name: &str) -> Result<()> {
        if self.is_ident(name) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{name}`, found {}", describe(self.peek())))
        }
    }

    fn expect_end(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", describe(self.peek())))
        }
    }

    fn integer(&mut self) -> Result<u32> {
        match self.peek().clone() {
            Tok::Num(s) => match s.parse::<u32>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(format!("expected a non-negative integer, found {s}")),
            },
            other => self.error(format!("expected an integer, found {}", describe(&other))),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek().clone() {
            Tok::Num(s) => match s.parse::<f64>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(format!("malformed number {s}")),
            },
            other => self.error(format!("expected a number, found {}", describe(&other))),
        }
    }

    // numeric expressions

    fn numeric(&mut self) -> Result<NumExpr> {
        let mut terms = vec![self.product()?];
        while *self.peek() == Tok::Plus {
            self.bump();
            terms.push(self.product()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            NumExpr::Sum(terms)
        })
    }

    fn product(&mut self) -> Result<NumExpr> {
        let mut factors = vec![self.factor()?];
        while *self.peek() == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            NumExpr::Product(factors)
        })
    }

    fn query_path(&mut self) -> Result<PathFormula> {
        self.expect_ident("P")?;
        self.expect(Tok::Query)?;
        self.expect(Tok::LBrack)?;
        let p = self.path()?;
        self.expect(Tok::RBrack)?;
        Ok(p)
    }

    fn factor(&mut self) -> Result<NumExpr> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(NumExpr::Const(self.number()?)),
            Tok::LParen => {
                self.bump();
                let e = self.numeric()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "P" => Ok(NumExpr::Prob(self.query_path()?)),
            Tok::Ident(s) if s == "filter" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let op = match self.bump() {
                    Tok::Ident(s) if s == "min" => FilterOp::Min,
                    Tok::Ident(s) if s == "max" => FilterOp::Max,
                    Tok::Ident(s) if s == "avg" => FilterOp::Avg,
                    other => {
                        self.pos -= 1;
                        return self.error(format!(
                            "expected min, max or avg, found {}",
                            describe(&other)
                        ));
                    }
                };
                self.expect(Tok::Comma)?;
                let path = self.query_path()?;
                let states = if *self.peek() == Tok::Comma {
                    self.bump();
                    self.state()?
                } else {
                    StateFormula::True
                };
                self.expect(Tok::RParen)?;
                Ok(NumExpr::Filter { op, path, states })
            }
            Tok::Ident(s) if s == "pow" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let base = self.numeric()?;
                self.expect(Tok::Comma)?;
                let e = self.integer()?;
                self.expect(Tok::RParen)?;
                Ok(NumExpr::Pow(Box::new(base), e))
            }
            other => self.error(format!("expected a numeric query, found {}", describe(&other))),
        }
    }

    // state formulas

    fn state(&mut self) -> Result<StateFormula> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            f = f.or(self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<StateFormula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<StateFormula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let f = self.state()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Str(s) => {
                self.bump();
                Ok(StateFormula::Atom(s))
            }
            Tok::Ident(s) if (s == "alpha" || s == "k") && *self.peek_at(1) == Tok::Eq => {
                self.bump();
                self.bump();
                let k = self.integer()?;
                Ok(StateFormula::Alpha(k as usize))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(StateFormula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(StateFormula::falsum())
            }
            Tok::Ident(s) if s == "P" => {
                self.bump();
                let bound = match self.bump() {
                    Tok::Cmp(c) => {
                        let p = self.number()?;
                        if !(0.0..=1.0).contains(&p) {
                            return self.error(format!("probability bound {p} outside [0,1]"));
                        }
                        ProbBound::Bound(c, p)
                    }
                    Tok::Query => {
                        self.pos -= 1;
                        return self.error("P=? yields a number, not a state formula");
                    }
                    other => {
                        self.pos -= 1;
                        return self.error(format!(
                            "expected a comparison after P, found {}",
                            describe(&other)
                        ));
                    }
                };
                self.expect(Tok::LBrack)?;
                let path = self.path()?;
                self.expect(Tok::RBrack)?;
                Ok(StateFormula::prob(bound, path))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(StateFormula::Atom(s))
            }
            other => self.error(format!("expected a state formula, found {}", describe(&other))),
        }
    }

    // path formulas

    fn horizon(&mut self) -> Result<Horizon> {
        if *self.peek() == Tok::Cmp(Comparison::Le) {
            self.bump();
            Ok(Horizon::Bounded(self.integer()?))
        } else {
            Ok(Horizon::Unbounded)
        }
    }

    fn path(&mut self) -> Result<PathFormula> {
        if self.is_ident("X") {
            self.bump();
            return Ok(PathFormula::next_path(self.path()?));
        }
        if self.is_ident("F") {
            self.bump();
            let h = self.horizon()?;
            return Ok(PathFormula::eventually(self.unary_or_state()?, h));
        }
        if *self.peek() == Tok::LParen {
            let save = self.pos;
            self.bump();
            if let Ok(p) = self.path() {
                if !matches!(p, PathFormula::Holds(_)) && *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let lhs = self.state()?;
        if self.is_ident("U") {
            self.bump();
            let h = self.horizon()?;
            let rhs = self.state()?;
            return Ok(PathFormula::until(lhs, rhs, h));
        }
        Ok(PathFormula::Holds(lhs))
    }

    fn unary_or_state(&mut self) -> Result<StateFormula> {
        self.state()
    }
}

/// Parses a single property (numeric expression or state formula).
pub fn parse_property(text: &str) -> Result<Property> {
    let mut p = Parser::new(text)?;
    let numeric = p.numeric().and_then(|e| p.expect_end().map(|_| e));
    match numeric {
        Ok(e) => Ok(Property::Numeric(e)),
        Err(num_err) => {
            let num_pos = p.offset();
            p.pos = 0;
            match p.state().and_then(|f| p.expect_end().map(|_| f)) {
                Ok(f) => Ok(Property::State(f)),
                Err(state_err) => {
                    if p.offset() >= num_pos {
                        Err(state_err)
                    } else {
                        Err(num_err)
                    }
                }
            }
        }
    }
}

/// Parses every non-empty, non-comment (`//`) line as a property.
pub fn parse_properties(text: &str) -> Result<Vec<Property>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.split("//").next().unwrap_or("");
        if !body.trim().is_empty() {
            out.push(parse_property(body).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos: pos + offset,
                    msg,
                },
                other => other,
            })?);
        }
        offset += line.len();
    }
    if out.is_empty() {
        return Err(Error::Parse {
            pos: 0,
            msg: "no properties".into(),
        });
    }
    Ok(out)
}

pub fn parse_state_formula(text: &str) -> Result<StateFormula> {
    let mut p = Parser::new(text)?;
    let f = p.state()?;
    p.expect_end()?;
    Ok(f)
}

pub fn parse_path_formula(text: &str) -> Result<PathFormula> {
    let mut p = Parser::new(text)?;
    let f = p.path()?;
    p.expect_end()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(a: &str) -> StateFormula {
        StateFormula::atom(a)
    }

    #[test]
    fn question_one_text() {
        let p = parse_property(r#"P=? [ (!"feed") U<=5 ((alpha=1) & "feed") ]"#).unwrap();
        let want = NumExpr::Prob(PathFormula::until(
            atom("feed").not(),
            StateFormula::alpha(1).and(atom("feed")),
            Horizon::Bounded(5),
        ));
        assert_eq!(p, Property::Numeric(want));
    }

    #[test]
    fn next_over_until_with_parens() {
        let p = parse_path_formula(r#"X(((alpha=2)&(!"pick")&(!"feed"))U((alpha=2)&"feed"))"#)
            .unwrap();
        match p {
            PathFormula::Next(inner) => match *inner {
                PathFormula::Until { horizon, .. } => assert_eq!(horizon, Horizon::Unbounded),
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pow_filter_product() {
        let text = r#"P=?[F<=7((alpha=1)&"feed")]*pow(filter(min,P=?[X(((alpha=1)&(!"pick")&(!"feed"))U((alpha=1)&"feed"))], ((alpha=1)&"feed")),4)"#;
        match parse_property(text).unwrap() {
            Property::Numeric(NumExpr::Product(f)) => {
                assert_eq!(f.len(), 2);
                assert!(matches!(&f[1], NumExpr::Pow(b, 4) if matches!(**b, NumExpr::Filter { op: FilterOp::Min, .. })));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn state_property_and_bare_labels() {
        let p = parse_property("P>=0.5 [ X feed ] & !init").unwrap();
        assert!(matches!(p, Property::State(StateFormula::And(_, _))));
        assert_eq!(parse_state_formula("k=2").unwrap(), StateFormula::Alpha(2));
        assert_eq!(
            parse_state_formula("a | b").unwrap(),
            atom("a").or(atom("b"))
        );
        assert_eq!(parse_state_formula("false").unwrap(), StateFormula::falsum());
    }

    #[test]
    fn display_round_trip() {
        let texts = [
            r#"P=?[(!"feed") U<=5 ((alpha=1)&"feed")]"#,
            r#"filter(avg, P=?[X ("a" U<=3 "b")], (!"c"))"#,
            r#"pow(P=?[F "b"], 4)*0.5 + P=?[X "a"]"#,
            r#"P>=0.25[X "a"]"#,
        ];
        for t in texts {
            let p = parse_property(t).unwrap();
            let again = parse_property(&p.to_string()).unwrap();
            assert_eq!(p, again, "{t}");
        }
    }

    #[test]
    fn errors_carry_position() {
        match parse_property(r#"P=?[ "a" U<= "b" ]"#) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 13),
            other => panic!("{other:?}"),
        }
        assert!(parse_property("").is_err());
        assert!(parse_property("P=?[X a").is_err());
        assert!(parse_property("P>=1.5[X a]").is_err());
        assert!(parse_state_formula("P=?[X a]").is_err());
        assert!(parse_property("\"unterminated").is_err());
    }

    #[test]
    fn property_file_lines() {
        let text = "// header\nP=?[F \"a\"]\n\n  P=?[X \"b\"] // trailing\n";
        assert_eq!(parse_properties(text).unwrap().len(), 2);
        assert!(parse_properties("// nothing\n").is_err());
    }
}
