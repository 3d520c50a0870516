//! Textual rule language and its translation into FreeCHR programs.
//!
//! ```text
//! program  := { rule } ;
//! rule     := NAME "@" heads arrow [ guard "|" ] body ";" ;
//! heads    := patterns [ "\" patterns ] ;
//! arrow    := "<=>" | "==>" ;
//! patterns := pattern { "," pattern } ;
//! pattern  := INT | SYMBOL | VAR | "true" | "false" | "(" pattern { "," pattern } ")" ;
//! guard    := expr { "," expr } ;
//! body     := [ expr { "," expr } ] ;
//! ```
//!
//! `%` starts a comment running to the end of the line. With `<=>` and no
//! `\` every head is removed; with `==>` every head is kept and `\` is
//! rejected. Expressions use, loosest first: `or`, `and`, the comparisons
//! `< =< <= > >= = !=` (non-associative), `+ -`, `* div mod`, and prefix
//! `-` / `not`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::classic::{ClassicError, ClassicRule};
use crate::program::{
    make_rule, BuildError, FreeRule, HeadPredicate, Program, RuleBody, RuleGuard,
};
use crate::terms::{
    equiv_true, eval, is_var_name, match_into, match_pattern, BinOp, EvalError, Substitution,
    Symbol, Term, Value,
};

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{pos}: {message}")]
    Parse { pos: Pos, message: String },
    #[error("{pos}: duplicate rule name `{name}`")]
    DuplicateRuleName { pos: Pos, name: String },
    #[error("{pos}: rule `{name}` has no heads")]
    BothHeadsEmpty { pos: Pos, name: String },
    #[error("{pos}: variable `{var}` of rule `{name}` does not occur in its heads")]
    UnboundBodyVar { pos: Pos, name: String, var: String },
}

impl FrontendError {
    pub fn pos(&self) -> Pos {
        match self {
            FrontendError::Parse { pos, .. }
            | FrontendError::DuplicateRuleName { pos, .. }
            | FrontendError::BothHeadsEmpty { pos, .. }
            | FrontendError::UnboundBodyVar { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Lower(String),
    Upper(String),
    At,
    Backslash,
    Simp,
    Prop,
    Bar,
    Semi,
    Comma,
    LParen,
    RParen,
    Op(BinOp),
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::At => f.write_str("`@`"),
            Tok::Backslash => f.write_str("`\\`"),
            Tok::Simp => f.write_str("`<=>`"),
            Tok::Prop => f.write_str("`==>`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Op(op) => write!(f, "`{}`", op.symbol()),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: [&str; 7] = ["and", "or", "not", "div", "mod", "true", "false"];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, FrontendError> {
    const PUNCT: [(&str, Tok); 17] = [
        ("<=>", Tok::Simp),
        ("==>", Tok::Prop),
        ("<=", Tok::Op(BinOp::Le)),
        ("=<", Tok::Op(BinOp::Le)),
        (">=", Tok::Op(BinOp::Ge)),
        ("!=", Tok::Op(BinOp::Ne)),
        ("<", Tok::Op(BinOp::Lt)),
        (">", Tok::Op(BinOp::Gt)),
        ("=", Tok::Op(BinOp::Eq)),
        ("+", Tok::Op(BinOp::Add)),
        ("*", Tok::Op(BinOp::Mul)),
        ("-", Tok::Minus),
        ("@", Tok::At),
        ("\\", Tok::Backslash),
        ("|", Tok::Bar),
        (";", Tok::Semi),
        (",", Tok::Comma),
    ];
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut i = 0;
        while i < line.len() {
            let pos = Pos {
                line: li + 1,
                column: line[..i].chars().count() + 1,
            };
            let rest = &line[i..];
            let c = rest.chars().next().expect("non-empty rest");
            if c == '%' {
                break;
            }
            if c.is_whitespace() {
                i += c.len_utf8();
                continue;
            }
            if c.is_ascii_digit() {
                let len = rest.bytes().take_while(u8::is_ascii_digit).count();
                let n = rest[..len]
                    .parse::<i64>()
                    .map_err(|_| FrontendError::Parse {
                        pos,
                        message: format!("integer literal `{}` out of range", &rest[..len]),
                    })?;
                out.push((Tok::Int(n), pos));
                i += len;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let len = rest
                    .bytes()
                    .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                    .count();
                let word = &rest[..len];
                let tok = match word {
                    "and" => Tok::Op(BinOp::And),
                    "or" => Tok::Op(BinOp::Or),
                    "div" => Tok::Op(BinOp::Div),
                    "mod" => Tok::Op(BinOp::Mod),
                    _ if is_var_name(word) => Tok::Upper(word.to_string()),
                    _ if c.is_ascii_lowercase() => Tok::Lower(word.to_string()),
                    _ => {
                        return Err(FrontendError::Parse {
                            pos,
                            message: format!("invalid identifier `{word}`"),
                        });
                    }
                };
                out.push((tok, pos));
                i += len;
                continue;
            }
            if c == '(' || c == ')' {
                out.push((if c == '(' { Tok::LParen } else { Tok::RParen }, pos));
                i += 1;
                continue;
            }
            match PUNCT.iter().find(|(s, _)| rest.starts_with(s)) {
                Some((s, tok)) => {
                    out.push((tok.clone(), pos));
                    i += s.len();
                }
                None => {
                    return Err(FrontendError::Parse {
                        pos,
                        message: format!("unexpected character `{c}`"),
                    });
                }
            }
        }
    }
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(0, |l| l.chars().count()) + 1,
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn prev_end(&self) -> Pos {
        self.toks[self.at.saturating_sub(1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Parse {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), FrontendError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.peek()))
        }
    }

    fn patterns(&mut self) -> Result<Vec<Term>, FrontendError> {
        let mut out = vec![self.pattern()?];
        while self.eat(&Tok::Comma) {
            out.push(self.pattern()?);
        }
        Ok(out)
    }

    fn pattern(&mut self) -> Result<Term, FrontendError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::int(n))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Term::int(-n)),
                    other => self.error(format!("expected integer after `-`, found {other}")),
                }
            }
            Tok::Upper(name) => {
                self.bump();
                Ok(Term::Var(name))
            }
            Tok::Lower(name) if name != "not" => {
                self.bump();
                Ok(Term::Lit(lower_value(&name)))
            }
            Tok::LParen => {
                self.bump();
                let items = self.patterns()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(if items.len() == 1 {
                    items.into_iter().next().expect("one item")
                } else {
                    Term::Tuple(items)
                })
            }
            other => self.error(format!("expected a pattern, found {other}")),
        }
    }

    fn exprs(&mut self) -> Result<Vec<Term>, FrontendError> {
        let mut out = vec![self.expr(0)?];
        while self.eat(&Tok::Comma) {
            out.push(self.expr(0)?);
        }
        Ok(out)
    }

    /// Precedence climbing over binary operators binding at least `min`.
    fn expr(&mut self, min: u8) -> Result<Term, FrontendError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op(op) => *op,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let p = op.precedence();
            if p < min {
                break;
            }
            self.bump();
            let rhs = self.expr(p + 1)?;
            lhs = Term::bin(op, lhs, rhs);
            if op.is_comparison() && matches!(self.peek(), Tok::Op(next) if next.is_comparison()) {
                return self.error("comparisons do not chain; use parentheses");
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, FrontendError> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = *self.peek() {
                    self.bump();
                    return Ok(Term::int(-n));
                }
                Ok(Term::Neg(Box::new(self.unary()?)))
            }
            Tok::Lower(w) if w == "not" => {
                self.bump();
                Ok(Term::Not(Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, FrontendError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::int(n))
            }
            Tok::Upper(name) => {
                self.bump();
                Ok(Term::Var(name))
            }
            Tok::Lower(name) if name != "not" => {
                self.bump();
                Ok(Term::Lit(lower_value(&name)))
            }
            Tok::LParen => {
                self.bump();
                let items = self.exprs()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(if items.len() == 1 {
                    items.into_iter().next().expect("one item")
                } else {
                    Term::Tuple(items)
                })
            }
            other => self.error(format!("expected an expression, found {other}")),
        }
    }
}

fn lower_value(word: &str) -> Value {
    match word {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::Sym(Symbol::new(word).expect("lexer only yields valid lower-case words")),
    }
}

fn conjunction(guards: Vec<Term>) -> Term {
    guards
        .into_iter()
        .reduce(|a, b| Term::bin(BinOp::And, a, b))
        .unwrap_or(Term::Lit(Value::Bool(true)))
}

/// Parsed and validated rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub rules: Vec<ClassicRule>,
    pub spans: Vec<Span>,
}

impl fmt::Display for SourceProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn parse_program(text: &str) -> Result<SourceProgram, FrontendError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut rules = Vec::new();
    let mut spans = Vec::new();
    let mut names = BTreeSet::new();
    while *p.peek() != Tok::Eof {
        let start = p.pos();
        let name = match p.bump() {
            Tok::Lower(n) if !KEYWORDS.contains(&n.as_str()) => n,
            other => {
                return Err(FrontendError::Parse {
                    pos: start,
                    message: format!("expected a rule name, found {other}"),
                })
            }
        };
        p.expect(&Tok::At, "`@`")?;
        let (mut kept, mut removed) = (Vec::new(), Vec::new());
        let mut simpagation = false;
        if !matches!(p.peek(), Tok::Simp | Tok::Prop) {
            if *p.peek() != Tok::Backslash {
                kept = p.patterns()?;
            }
            if p.eat(&Tok::Backslash) {
                simpagation = true;
                if !matches!(p.peek(), Tok::Simp | Tok::Prop) {
                    removed = p.patterns()?;
                }
            }
        }
        let arrow_pos = p.pos();
        match p.bump() {
            Tok::Simp => {
                if !simpagation {
                    removed = std::mem::take(&mut kept);
                }
            }
            Tok::Prop => {
                if simpagation {
                    return Err(FrontendError::Parse {
                        pos: arrow_pos,
                        message: "`==>` rules cannot use `\\`".into(),
                    });
                }
            }
            other => {
                return Err(FrontendError::Parse {
                    pos: arrow_pos,
                    message: format!("expected `<=>` or `==>`, found {other}"),
                });
            }
        }
        let mut guard = Vec::new();
        let mut body = if matches!(p.peek(), Tok::Semi | Tok::Bar) {
            Vec::new()
        } else {
            p.exprs()?
        };
        if p.eat(&Tok::Bar) {
            guard = body;
            body = if *p.peek() == Tok::Semi {
                Vec::new()
            } else {
                p.exprs()?
            };
        }
        p.expect(&Tok::Semi, "`;`")?;
        let span = Span {
            start,
            end: p.prev_end(),
        };
        if kept.is_empty() && removed.is_empty() {
            return Err(FrontendError::BothHeadsEmpty { pos: start, name });
        }
        if !names.insert(name.clone()) {
            return Err(FrontendError::DuplicateRuleName { pos: start, name });
        }
        let rule = ClassicRule::new(name.clone(), kept, removed, conjunction(guard), body)
            .map_err(|e| match e {
                ClassicError::UnboundVar { var, .. } => FrontendError::UnboundBodyVar {
                    pos: start,
                    name: name.clone(),
                    var,
                },
                other => FrontendError::Parse {
                    pos: start,
                    message: other.to_string(),
                },
            })?;
        rules.push(rule);
        spans.push(span);
    }
    Ok(SourceProgram { rules, spans })
}

/// Parses a comma-separated list of ground values, as used for queries.
pub fn parse_values(text: &str) -> Result<Vec<Value>, FrontendError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    if *p.peek() == Tok::Eof {
        return Ok(Vec::new());
    }
    let start = p.pos();
    let terms = p.patterns()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", p.peek()));
    }
    terms
        .iter()
        .map(|t| {
            eval(t, &Substitution::new()).map_err(|e| FrontendError::Parse {
                pos: start,
                message: match e {
                    EvalError::UnboundVar(v) => {
                        format!("query values must be ground, found variable `{v}`")
                    }
                    other => other.to_string(),
                },
            })
        })
        .collect()
}

/// Translates one textual rule into a FreeCHR rule.
///
/// Each head becomes a predicate testing only its own shape. The guard
/// re-matches all heads jointly, so variables shared between heads must
/// agree, and then evaluates the guard term. The body re-matches and
/// evaluates the body terms.
pub fn compile_rule(r: &ClassicRule) -> Result<FreeRule, BuildError> {
    let predicate = |p: &Term| {
        let pattern = p.clone();
        HeadPredicate::new(p.to_string(), move |v| {
            match_pattern(&pattern, v, &Substitution::new()).is_some()
        })
    };
    let heads: Vec<Term> = r.heads().cloned().collect();
    let joint = move |vs: &[Value]| -> Option<Substitution> {
        let mut sigma = Substitution::new();
        (vs.len() == heads.len()
            && heads
                .iter()
                .zip(vs)
                .all(|(p, v)| match_into(p, v, &mut sigma)))
        .then_some(sigma)
    };
    let guard_term = r.guard().clone();
    let guard_match = joint.clone();
    let guard = RuleGuard::fallible(guard_term.to_string(), move |vs| match guard_match(vs) {
        Some(sigma) => equiv_true(&guard_term, &sigma),
        None => Ok(false),
    });
    let body_terms = r.body().to_vec();
    let name = r.name().to_string();
    let body_desc = body_terms
        .iter()
        .map(Term::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let body = RuleBody::fallible(body_desc, move |vs| {
        let sigma = joint(vs).ok_or_else(|| EvalError::HeadMismatch(name.clone()))?;
        body_terms.iter().map(|t| eval(t, &sigma)).collect()
    });
    make_rule(
        r.name(),
        r.kept().iter().map(predicate).collect(),
        r.removed().iter().map(predicate).collect(),
        guard,
        body,
    )
}

/// Compiles every rule and composes them left to right.
pub fn compile(sp: &SourceProgram) -> Result<Program, BuildError> {
    Program::from_rules(
        sp.rules
            .iter()
            .map(compile_rule)
            .collect::<Result<Vec<_>, _>>()?,
    )
}

/// Parses and compiles in one go.
pub fn load(text: &str) -> Result<(SourceProgram, Program), LoadError> {
    let sp = parse_program(text)?;
    let p = compile(&sp)?;
    Ok((sp, p))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Build(#[from] BuildError),
}
