//! Station match rules: a small closed predicate language.
//!
//! ```text
//! expr    := and ("or" and)*
//! and     := unary ("and" unary)*
//! unary   := "not" unary | atom
//! atom    := "(" expr ")" | "true" | "false"
//!          | "has" "(" category ")" | "hv_connects" "(" "external_grid" ")"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::kinds::PrimaryCategory;
use crate::grid_io::PowerGridModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Predicate {
    True,
    False,
    Has(PrimaryCategory),
    HvConnectsExternalGrid,
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

/// Facts about one aggregated station that match rules are evaluated against.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StationProfile {
    pub element_counts: BTreeMap<PrimaryCategory, usize>,
    pub hv_connects_external_grid: bool,
}

impl StationProfile {
    /// Profile of the primary elements attached to a bus group. Transformers
    /// count towards the group holding their HV bus.
    pub fn from_bus_group(grid: &PowerGridModel, buses: &BTreeSet<String>) -> Self {
        let mut counts = BTreeMap::new();
        let mut bump = |c: PrimaryCategory, n: usize| {
            if n > 0 {
                *counts.entry(c).or_insert(0) += n;
            }
        };
        bump(
            PrimaryCategory::Bus,
            grid.buses.iter().filter(|b| buses.contains(&b.id)).count(),
        );
        let trafos: Vec<_> = grid
            .transformers
            .iter()
            .filter(|t| buses.contains(&t.hv_bus))
            .collect();
        bump(PrimaryCategory::Transformer, trafos.len());
        bump(
            PrimaryCategory::Load,
            grid.loads.iter().filter(|l| buses.contains(&l.bus)).count(),
        );
        bump(
            PrimaryCategory::Generator,
            grid.generators
                .iter()
                .filter(|g| buses.contains(&g.bus))
                .count(),
        );
        bump(
            PrimaryCategory::Switch,
            grid.switches
                .iter()
                .filter(|s| buses.contains(&s.bus))
                .count(),
        );
        bump(
            PrimaryCategory::Branch,
            grid.branches
                .iter()
                .filter(|b| buses.contains(&b.from_bus) || buses.contains(&b.to_bus))
                .count(),
        );
        StationProfile {
            element_counts: counts,
            hv_connects_external_grid: trafos.iter().any(|t| t.hv_bus == grid.external_grid),
        }
    }

    pub fn has(&self, category: PrimaryCategory) -> bool {
        self.element_counts.get(&category).copied().unwrap_or(0) > 0
    }

    pub fn is_empty(&self) -> bool {
        self.element_counts.is_empty()
    }
}

impl Predicate {
    pub fn eval(&self, profile: &StationProfile) -> bool {
        match self {
            Predicate::True => true,
            Predicate::False => false,
            Predicate::Has(c) => profile.has(*c),
            Predicate::HvConnectsExternalGrid => profile.hv_connects_external_grid,
            Predicate::And(a, b) => a.eval(profile) && b.eval(profile),
            Predicate::Or(a, b) => a.eval(profile) || b.eval(profile),
            Predicate::Not(a) => !a.eval(profile),
        }
    }

    pub fn parse(input: &str) -> Result<Self, String> {
        let tokens = tokenize(input)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.or()?;
        match parser.peek() {
            None => Ok(expr),
            Some(tok) => Err(format!("unexpected token {tok:?} in {input:?}")),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(p: &Predicate, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                Predicate::And(..) | Predicate::Or(..) => write!(f, "({p})"),
                _ => write!(f, "{p}"),
            }
        }
        match self {
            Predicate::True => f.write_str("true"),
            Predicate::False => f.write_str("false"),
            Predicate::Has(c) => write!(f, "has({c})"),
            Predicate::HvConnectsExternalGrid => f.write_str("hv_connects(external_grid)"),
            Predicate::And(a, b) => {
                operand(a, f)?;
                f.write_str(" and ")?;
                operand(b, f)
            }
            Predicate::Or(a, b) => {
                operand(a, f)?;
                f.write_str(" or ")?;
                operand(b, f)
            }
            Predicate::Not(a) => {
                f.write_str("not ")?;
                match **a {
                    Predicate::And(..) | Predicate::Or(..) | Predicate::Not(..) => {
                        write!(f, "({a})")
                    }
                    _ => write!(f, "{a}"),
                }
            }
        }
    }
}

impl TryFrom<String> for Predicate {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Predicate::parse(&value)
    }
}

impl From<Predicate> for String {
    fn from(p: Predicate) -> Self {
        p.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Open,
    Close,
}

fn tokenize(input: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Ident(ident));
            }
            other => return Err(format!("unexpected character {other:?} in {input:?}")),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token::Ident(w)) if w == word)
    }

    fn expect(&mut self, want: Token) -> Result<(), String> {
        match self.next() {
            Some(tok) if tok == want => Ok(()),
            other => Err(format!("expected {want:?}, found {other:?}")),
        }
    }

    fn or(&mut self) -> Result<Predicate, String> {
        let mut lhs = self.and()?;
        while self.keyword("or") {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Predicate::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Predicate, String> {
        let mut lhs = self.unary()?;
        while self.keyword("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Predicate::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Predicate, String> {
        if self.keyword("not") {
            self.pos += 1;
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Predicate, String> {
        match self.next() {
            Some(Token::Open) => {
                let inner = self.or()?;
                self.expect(Token::Close)?;
                Ok(inner)
            }
            Some(Token::Ident(word)) => match word.as_str() {
                "true" => Ok(Predicate::True),
                "false" => Ok(Predicate::False),
                "has" | "hv_connects" => {
                    self.expect(Token::Open)?;
                    let arg = match self.next() {
                        Some(Token::Ident(arg)) => arg,
                        other => return Err(format!("expected argument, found {other:?}")),
                    };
                    self.expect(Token::Close)?;
                    if word == "has" {
                        Ok(Predicate::Has(arg.parse()?))
                    } else if arg == "external_grid" {
                        Ok(Predicate::HvConnectsExternalGrid)
                    } else {
                        Err(format!(
                            "hv_connects supports only external_grid, got {arg:?}"
                        ))
                    }
                }
                other => Err(format!("unknown predicate {other:?}")),
            },
            other => Err(format!("unexpected {other:?}")),
        }
    }
}
