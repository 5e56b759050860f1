//! Textual syntax for counting constraints.
//!
//! Expressions combine atoms `x>=k`, `x<=k`, `x=k` and `x=lo..hi` (with
//! `inf` allowed as `hi`) using `&`, `|`, `!` and parentheses; `true` and
//! `false` denote the full and empty sets. The serialized form of a
//! constraint lists one minterm per line as `name=lo..hi` tokens in declared
//! variable order.

use crate::constraint::{Bound, CountingConstraint, Minterm};
use crate::error::{Error, Result};

pub(crate) fn is_name_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_name_start(c)) && chars.all(is_name_char)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Ge,
    Le,
    Eq,
    Range,
    And,
    Or,
    Not,
    LParen,
    RParen,
}

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
    end: (usize, usize),
}

fn lex(text: &str) -> Result<Lexed> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        let two = |a: char, b: char| c == a && chars.get(i + 1) == Some(&b);
        let tok = if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        } else if c.is_whitespace() {
            None
        } else if two('>', '=') {
            Some((Tok::Ge, 2))
        } else if two('<', '=') {
            Some((Tok::Le, 2))
        } else if two('.', '.') {
            Some((Tok::Range, 2))
        } else {
            match c {
                '=' => Some((Tok::Eq, 1)),
                '&' => Some((Tok::And, 1)),
                '|' => Some((Tok::Or, 1)),
                '!' => Some((Tok::Not, 1)),
                '(' => Some((Tok::LParen, 1)),
                ')' => Some((Tok::RParen, 1)),
                c if is_name_start(c) => {
                    let start = i;
                    let mut j = i;
                    while j < chars.len() && is_name_char(chars[j]) {
                        j += 1;
                    }
                    let name: String = chars[start..j].iter().collect();
                    Some((Tok::Name(name), j - start))
                }
                other => {
                    return Err(Error::parse(
                        l,
                        cl,
                        format!("unexpected character `{other}`"),
                    ))
                }
            }
        };
        match tok {
            Some((t, len)) => {
                toks.push((t, l, cl));
                i += len;
                col += len;
            }
            None => {
                i += 1;
                col += 1;
            }
        }
    }
    Ok(Lexed {
        toks,
        end: (line, col),
    })
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn loc(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.1, t.2))
            .unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.loc();
        Error::parse(l, c, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn or(&mut self) -> Result<CountingConstraint> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            acc = acc.union(&self.and()?)?;
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<CountingConstraint> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            acc = acc.intersect(&self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<CountingConstraint> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                self.unary()?.complement()
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Name(_)) => self.atom(),
            _ => Err(self.err("expected `!`, `(`, `true`, `false` or an atom")),
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Name(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn number(&mut self) -> Result<u64> {
        let loc = self.loc();
        let n = self.name()?;
        n.parse::<u64>().map_err(|_| {
            Error::parse(
                loc.0,
                loc.1,
                format!("expected a natural number, found `{n}`"),
            )
        })
    }

    fn upper(&mut self) -> Result<Bound> {
        if self.peek() == Some(&Tok::Name("inf".into())) {
            self.pos += 1;
            Ok(Bound::Inf)
        } else {
            Ok(Bound::Fin(self.number()?))
        }
    }

    fn atom(&mut self) -> Result<CountingConstraint> {
        let dim = self.vars.len();
        let loc = self.loc();
        let name = self.name()?;
        let is_keyword = !matches!(self.peek(), Some(Tok::Ge | Tok::Le | Tok::Eq));
        if is_keyword && name == "true" {
            return Ok(CountingConstraint::full(dim));
        }
        if is_keyword && name == "false" {
            return Ok(CountingConstraint::empty(dim));
        }
        let var = self
            .vars
            .iter()
            .position(|v| *v == name)
            .ok_or_else(|| Error::parse(loc.0, loc.1, format!("unknown variable `{name}`")))?;
        let (lo, hi) = match self.peek() {
            Some(Tok::Ge) => {
                self.pos += 1;
                (self.number()?, Bound::Inf)
            }
            Some(Tok::Le) => {
                self.pos += 1;
                (0, Bound::Fin(self.number()?))
            }
            Some(Tok::Eq) => {
                self.pos += 1;
                let lo = self.number()?;
                if self.peek() == Some(&Tok::Range) {
                    self.pos += 1;
                    (lo, self.upper()?)
                } else {
                    (lo, Bound::Fin(lo))
                }
            }
            _ => return Err(self.err("expected `>=`, `<=` or `=`")),
        };
        Ok(CountingConstraint::from_minterm(
            Minterm::full(dim).with_range(var, lo, hi),
        ))
    }
}

/// Parses a constraint expression over the given variables into CoNF.
pub fn parse_constraint(text: &str, vars: &[String]) -> Result<CountingConstraint> {
    let lexed = lex(text)?;
    let mut p = Parser {
        toks: lexed.toks,
        pos: 0,
        end: lexed.end,
        vars,
    };
    let g = p.or()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(g)
}

/// One minterm per line, `name=lo..hi` in declared order.
pub fn serialize_constraint(g: &CountingConstraint, vars: &[String]) -> String {
    let mut out = String::new();
    for m in g.minterms() {
        let line: Vec<String> = vars
            .iter()
            .zip(m.lower().iter().zip(m.upper()))
            .map(|(v, (l, u))| format!("{v}={l}..{u}"))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Inverse of [`serialize_constraint`]. Blank lines are ignored.
pub fn parse_serialized(text: &str, vars: &[String]) -> Result<CountingConstraint> {
    let dim = vars.len();
    let mut minterms = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut m = Minterm::full(dim);
        let mut seen = vec![false; dim];
        for token in line.split_whitespace() {
            let err = |msg: String| Error::parse(ln + 1, 1, msg);
            let (name, range) = token
                .split_once('=')
                .ok_or_else(|| err(format!("expected `name=lo..hi`, found `{token}`")))?;
            let var = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| err(format!("unknown variable `{name}`")))?;
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| err(format!("expected `lo..hi`, found `{range}`")))?;
            let lo: u64 = lo
                .parse()
                .map_err(|_| err(format!("bad lower bound `{lo}`")))?;
            let hi = if hi == "inf" {
                Bound::Inf
            } else {
                Bound::Fin(
                    hi.parse()
                        .map_err(|_| err(format!("bad upper bound `{hi}`")))?,
                )
            };
            if std::mem::replace(&mut seen[var], true) {
                return Err(err(format!("variable `{name}` repeated")));
            }
            m = m.with_range(var, lo, hi);
        }
        minterms.push(m);
    }
    CountingConstraint::new(dim, minterms)
}
