//! The constraint domain and the expression language evaluated over it.
//!
//! Values are integers, booleans, symbols and tuples. Terms are the
//! expressions that appear in heads, guards and bodies of textual rules;
//! [`eval`] folds a term bottom-up into a [`Value`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A symbol name, `[a-z][A-Za-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Self, ValueError> {
        if is_symbol_name(name) {
            Ok(Symbol(Arc::from(name)))
        } else {
            Err(ValueError::BadSymbol(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_symbol_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("invalid symbol name `{0}`")]
    BadSymbol(String),
    #[error("tuples need at least two components, got {0}")]
    TupleArity(usize),
}

/// An element of the constraint domain.
///
/// Tuples always have at least two components; use [`Value::tuple`] to
/// build them with the arity check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Sym(Symbol),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn sym(name: &str) -> Result<Self, ValueError> {
        Symbol::new(name).map(Value::Sym)
    }

    pub fn tuple(items: Vec<Value>) -> Result<Self, ValueError> {
        if items.len() < 2 {
            return Err(ValueError::TupleArity(items.len()));
        }
        Ok(Value::Tuple(items))
    }

    /// Typed rendering used by the JSON trace format: `int:6`, `sym:a`,
    /// `bool:true`, `tuple:[sym:a,sym:b]`.
    pub fn tagged(&self) -> String {
        match self {
            Value::Int(n) => format!("int:{n}"),
            Value::Bool(b) => format!("bool:{b}"),
            Value::Sym(s) => format!("sym:{s}"),
            Value::Tuple(items) => {
                let inner: Vec<String> = items.iter().map(Value::tagged).collect();
                format!("tuple:[{}]", inner.join(","))
            }
        }
    }

    fn tag_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Sym(_) => "sym",
            Value::Tuple(_) => "tuple",
        }
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                f.write_str("(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Lt => "<",
            BinOp::Le => "=<",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub(crate) fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

/// Expression over the domain: literals, variables, arithmetic,
/// comparisons, boolean connectives and tuple construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Lit(Value),
    Var(String),
    Neg(Box<Term>),
    Not(Box<Term>),
    Bin(BinOp, Box<Term>, Box<Term>),
    Tuple(Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Self {
        Term::Lit(Value::Int(n))
    }

    pub fn bin(op: BinOp, lhs: Term, rhs: Term) -> Self {
        Term::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// True for the constructor-only terms allowed in rule heads.
    pub fn is_pattern(&self) -> bool {
        match self {
            Term::Lit(_) | Term::Var(_) => true,
            Term::Tuple(items) => items.iter().all(Term::is_pattern),
            _ => false,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Term::Lit(v) => write!(f, "{v}"),
            Term::Var(name) => f.write_str(name),
            // `-3` reads back as a literal, so negated literals keep parens
            Term::Neg(t) if matches!(**t, Term::Lit(Value::Int(_))) => write!(f, "-({t})"),
            Term::Neg(t) => {
                f.write_str("-")?;
                t.fmt_prec(f, 6)
            }
            Term::Not(t) => {
                f.write_str("not ")?;
                t.fmt_prec(f, 6)
            }
            Term::Tuple(items) => {
                f.write_str("(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    t.fmt_prec(f, 0)?;
                }
                f.write_str(")")
            }
            Term::Bin(op, lhs, rhs) => {
                let p = op.precedence();
                let paren = p < min;
                if paren {
                    f.write_str("(")?;
                }
                // comparisons do not chain, so both sides bind tighter
                let left_min = if op.is_comparison() { p + 1 } else { p };
                lhs.fmt_prec(f, left_min)?;
                write!(f, " {} ", op.symbol())?;
                rhs.fmt_prec(f, p + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Finite map from variable names to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(BTreeMap<String, Value>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    /// Binds `name`, replacing any earlier binding.
    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.0.insert(name.into(), value);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<S: Into<String>> FromIterator<(S, Value)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Self {
        Substitution(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("division by zero")]
    DivByZero,
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
    #[error("tuples need at least two components")]
    TupleArity,
    #[error("matched values do not fit the head patterns of rule `{0}`")]
    HeadMismatch(String),
}

fn expect_int(op: &'static str, v: &Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(n) => Ok(*n),
        other => Err(EvalError::TypeMismatch(format!(
            "`{op}` expects int, got {} `{other}`",
            other.tag_name()
        ))),
    }
}

fn expect_bool(op: &'static str, v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(EvalError::TypeMismatch(format!(
            "`{op}` expects bool, got {} `{other}`",
            other.tag_name()
        ))),
    }
}

fn apply_bin(op: BinOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    let name = op.symbol();
    let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Value, EvalError> {
        let (x, y) = (expect_int(name, a)?, expect_int(name, b)?);
        f(x, y).map(Value::Int).ok_or(EvalError::Overflow(name))
    };
    let cmp = |f: fn(&i64, &i64) -> bool| -> Result<Value, EvalError> {
        Ok(Value::Bool(f(&expect_int(name, a)?, &expect_int(name, b)?)))
    };
    match op {
        BinOp::Add => arith(i64::checked_add),
        BinOp::Sub => arith(i64::checked_sub),
        BinOp::Mul => arith(i64::checked_mul),
        BinOp::Div | BinOp::Mod => {
            let (x, y) = (expect_int(name, a)?, expect_int(name, b)?);
            if y == 0 {
                return Err(EvalError::DivByZero);
            }
            let r = if op == BinOp::Div {
                x.checked_div_euclid(y)
            } else {
                x.checked_rem_euclid(y)
            };
            r.map(Value::Int).ok_or(EvalError::Overflow(name))
        }
        BinOp::Lt => cmp(i64::lt),
        BinOp::Le => cmp(i64::le),
        BinOp::Gt => cmp(i64::gt),
        BinOp::Ge => cmp(i64::ge),
        BinOp::Eq => Ok(Value::Bool(a == b)),
        BinOp::Ne => Ok(Value::Bool(a != b)),
        BinOp::And => Ok(Value::Bool(expect_bool(name, a)? & expect_bool(name, b)?)),
        BinOp::Or => Ok(Value::Bool(expect_bool(name, a)? | expect_bool(name, b)?)),
    }
}

/// Evaluates `t` under `s`. Both operands of every operator are evaluated,
/// including `and`/`or`. `div`/`mod` are Euclidean.
pub fn eval(t: &Term, s: &Substitution) -> Result<Value, EvalError> {
    match t {
        Term::Lit(v) => Ok(v.clone()),
        Term::Var(name) => s
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVar(name.clone())),
        Term::Neg(inner) => {
            let n = expect_int("-", &eval(inner, s)?)?;
            n.checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow("-"))
        }
        Term::Not(inner) => Ok(Value::Bool(!expect_bool("not", &eval(inner, s)?)?)),
        Term::Bin(op, lhs, rhs) => {
            let a = eval(lhs, s)?;
            let b = eval(rhs, s)?;
            apply_bin(*op, &a, &b)
        }
        Term::Tuple(items) => {
            if items.len() < 2 {
                return Err(EvalError::TupleArity);
            }
            items
                .iter()
                .map(|t| eval(t, s))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Tuple)
        }
    }
}

/// Whether `t` evaluates to `true`. A non-boolean result is a type mismatch.
pub fn equiv_true(t: &Term, s: &Substitution) -> Result<bool, EvalError> {
    expect_bool("guard", &eval(t, s)?)
}

/// One-sided matching of a constructor pattern against a ground value.
///
/// Extends `s` so that `p` instantiated by the result equals `v`. Variables
/// already bound in `s` must agree with `v`. Returns `None` when the pattern
/// does not match, including when `p` contains operator nodes.
pub fn match_pattern(p: &Term, v: &Value, s: &Substitution) -> Option<Substitution> {
    let mut out = s.clone();
    if match_into(p, v, &mut out) {
        Some(out)
    } else {
        None
    }
}

pub(crate) fn match_into(p: &Term, v: &Value, s: &mut Substitution) -> bool {
    match (p, v) {
        (Term::Lit(lit), _) => lit == v,
        (Term::Var(name), _) => match s.get(name) {
            Some(bound) => bound == v,
            None => {
                s.bind(name.clone(), v.clone());
                true
            }
        },
        (Term::Tuple(ps), Value::Tuple(vs)) => {
            ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| match_into(p, v, s))
        }
        _ => false,
    }
}

/// The variable names occurring in `t`.
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_vars(t, &mut out);
    out
}

fn collect_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Lit(_) => {}
        Term::Var(name) => {
            out.insert(name.clone());
        }
        Term::Neg(inner) | Term::Not(inner) => collect_vars(inner, out),
        Term::Bin(_, lhs, rhs) => {
            collect_vars(lhs, out);
            collect_vars(rhs, out);
        }
        Term::Tuple(items) => items.iter().for_each(|t| collect_vars(t, out)),
    }
}

/// Replaces every bound variable of `t` with its value.
pub fn instantiate(t: &Term, s: &Substitution) -> Term {
    match t {
        Term::Lit(_) => t.clone(),
        Term::Var(name) => s.get(name).cloned().map_or_else(|| t.clone(), Term::Lit),
        Term::Neg(inner) => Term::Neg(Box::new(instantiate(inner, s))),
        Term::Not(inner) => Term::Not(Box::new(instantiate(inner, s))),
        Term::Bin(op, lhs, rhs) => Term::bin(*op, instantiate(lhs, s), instantiate(rhs, s)),
        Term::Tuple(items) => Term::Tuple(items.iter().map(|t| instantiate(t, s)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(name: &str) -> Value {
        Value::sym(name).unwrap()
    }

    fn subst<const N: usize>(pairs: [(&str, Value); N]) -> Substitution {
        pairs.into_iter().collect()
    }

    #[test]
    fn subtract_body_evaluates() {
        let t = Term::bin(BinOp::Sub, Term::var("M"), Term::var("N"));
        let s = subst([("N", Value::Int(3)), ("M", Value::Int(6))]);
        assert_eq!(eval(&t, &s), Ok(Value::Int(3)));
    }

    #[test]
    fn literal_evaluates_to_itself() {
        assert_eq!(eval(&Term::int(0), &Substitution::new()), Ok(Value::Int(0)));
    }

    #[test]
    fn division_by_zero() {
        let t = Term::bin(BinOp::Div, Term::int(1), Term::int(0));
        assert_eq!(eval(&t, &Substitution::new()), Err(EvalError::DivByZero));
        let t = Term::bin(BinOp::Mod, Term::int(1), Term::int(0));
        assert_eq!(eval(&t, &Substitution::new()), Err(EvalError::DivByZero));
    }

    #[test]
    fn conjunction_of_comparisons() {
        // 0 < 9 and 9 =< 6
        let t = Term::bin(
            BinOp::And,
            Term::bin(BinOp::Lt, Term::int(0), Term::var("N")),
            Term::bin(BinOp::Le, Term::var("N"), Term::var("M")),
        );
        let s = subst([("N", Value::Int(9)), ("M", Value::Int(6))]);
        assert_eq!(eval(&t, &s), Ok(Value::Bool(false)));
    }

    #[test]
    fn overflow_is_an_error() {
        let t = Term::bin(BinOp::Add, Term::int(i64::MAX), Term::int(1));
        assert_eq!(
            eval(&t, &Substitution::new()),
            Err(EvalError::Overflow("+"))
        );
        let t = Term::Neg(Box::new(Term::int(i64::MIN)));
        assert!(eval(&t, &Substitution::new()).is_err());
    }

    #[test]
    fn strict_connectives_surface_errors() {
        // the right operand is evaluated even though the left decides
        let t = Term::bin(
            BinOp::And,
            Term::Lit(Value::Bool(false)),
            Term::bin(BinOp::Div, Term::int(1), Term::int(0)),
        );
        assert_eq!(eval(&t, &Substitution::new()), Err(EvalError::DivByZero));
    }

    #[test]
    fn unbound_and_mismatch() {
        assert_eq!(
            eval(&Term::var("X"), &Substitution::new()),
            Err(EvalError::UnboundVar("X".into()))
        );
        let t = Term::bin(BinOp::Add, Term::int(1), Term::Lit(Value::Bool(true)));
        assert!(matches!(
            eval(&t, &Substitution::new()),
            Err(EvalError::TypeMismatch(_))
        ));
    }

    #[test]
    fn euclidean_division() {
        let e = |op, a, b| {
            eval(
                &Term::bin(op, Term::int(a), Term::int(b)),
                &Substitution::new(),
            )
        };
        assert_eq!(e(BinOp::Div, -7, 2), Ok(Value::Int(-4)));
        assert_eq!(e(BinOp::Mod, -7, 2), Ok(Value::Int(1)));
        assert_eq!(e(BinOp::Mod, 7, 3), Ok(Value::Int(1)));
    }

    #[test]
    fn equiv_true_cases() {
        assert_eq!(
            equiv_true(&Term::Lit(Value::Bool(true)), &Substitution::new()),
            Ok(true)
        );
        let t = Term::bin(BinOp::Ne, Term::var("X"), Term::var("Z"));
        let s = subst([("X", sym("a")), ("Z", sym("c"))]);
        assert_eq!(equiv_true(&t, &s), Ok(true));
        assert!(matches!(
            equiv_true(&Term::int(1), &Substitution::new()),
            Err(EvalError::TypeMismatch(_))
        ));
    }

    #[test]
    fn matching_binds_tuple_components() {
        let p = Term::Tuple(vec![Term::var("X"), Term::var("Y")]);
        let v = Value::tuple(vec![sym("a"), sym("b")]).unwrap();
        assert_eq!(
            match_pattern(&p, &v, &Substitution::new()),
            Some(subst([("X", sym("a")), ("Y", sym("b"))]))
        );
    }

    #[test]
    fn matching_respects_existing_bindings() {
        let p = Term::Tuple(vec![Term::var("Y"), Term::var("Z")]);
        let s = subst([("Y", sym("b"))]);
        let bc = Value::tuple(vec![sym("b"), sym("c")]).unwrap();
        assert_eq!(
            match_pattern(&p, &bc, &s),
            Some(subst([("Y", sym("b")), ("Z", sym("c"))]))
        );
        let cd = Value::tuple(vec![sym("c"), sym("d")]).unwrap();
        assert_eq!(match_pattern(&p, &cd, &s), None);
    }

    #[test]
    fn matching_failures() {
        let none = Substitution::new();
        assert_eq!(match_pattern(&Term::int(0), &Value::Int(3), &none), None);
        let pair = Term::Tuple(vec![Term::var("X"), Term::var("Y")]);
        assert_eq!(match_pattern(&pair, &Value::Int(3), &none), None);
        let triple = Value::tuple(vec![1.into(), 2.into(), 3.into()]).unwrap();
        assert_eq!(match_pattern(&pair, &triple, &none), None);
        let op = Term::bin(BinOp::Add, Term::var("X"), Term::int(1));
        assert_eq!(match_pattern(&op, &Value::Int(3), &none), None);
    }

    #[test]
    fn nonlinear_pattern() {
        let p = Term::Tuple(vec![Term::var("X"), Term::var("X")]);
        let same = Value::tuple(vec![sym("a"), sym("a")]).unwrap();
        let diff = Value::tuple(vec![sym("a"), sym("b")]).unwrap();
        assert!(match_pattern(&p, &same, &Substitution::new()).is_some());
        assert!(match_pattern(&p, &diff, &Substitution::new()).is_none());
    }

    #[test]
    fn free_vars_cases() {
        let t = Term::bin(BinOp::Sub, Term::var("M"), Term::var("N"));
        assert_eq!(free_vars(&t), ["M", "N"].map(String::from).into());
        assert!(free_vars(&Term::int(0)).is_empty());
        let t = Term::Tuple(vec![Term::var("X"), Term::var("X")]);
        assert_eq!(free_vars(&t), ["X"].map(String::from).into());
    }

    #[test]
    fn value_constructors_validate() {
        assert!(Value::sym("Abc").is_err());
        assert!(Value::sym("").is_err());
        assert!(Value::sym("a_1B").is_ok());
        assert_eq!(Value::tuple(vec![1.into()]), Err(ValueError::TupleArity(1)));
        assert_eq!(Value::tuple(vec![]), Err(ValueError::TupleArity(0)));
    }

    #[test]
    fn tagged_rendering() {
        let v = Value::tuple(vec![sym("a"), Value::Int(-2), Value::Bool(true)]).unwrap();
        assert_eq!(v.tagged(), "tuple:[sym:a,int:-2,bool:true]");
        assert_eq!(v.to_string(), "(a,-2,true)");
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![
            (-50i64..50).prop_map(Value::Int),
            any::<bool>().prop_map(Value::Bool),
            prop::sample::select(vec!["a", "b", "c"]).prop_map(|s| Value::sym(s).unwrap()),
        ];
        leaf.prop_recursive(2, 8, 3, |inner| {
            prop::collection::vec(inner, 2..4).prop_map(Value::Tuple)
        })
    }

    fn arb_pattern() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["X", "Y", "Z"]).prop_map(Term::var),
            (-3i64..3).prop_map(Term::int),
        ];
        leaf.prop_recursive(2, 8, 3, |inner| {
            prop::collection::vec(inner, 2..4).prop_map(Term::Tuple)
        })
    }

    fn arb_arith() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (-20i64..20).prop_map(Term::int),
            prop::sample::select(vec!["X", "Y"]).prop_map(Term::var),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            let ops = prop::sample::select(vec![
                BinOp::Add,
                BinOp::Sub,
                BinOp::Mul,
                BinOp::Mod,
                BinOp::Lt,
                BinOp::Eq,
            ]);
            prop_oneof![
                (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Term::bin(op, a, b)),
                inner.prop_map(|t| Term::Neg(Box::new(t))),
            ]
        })
    }

    proptest! {
        #[test]
        fn match_roundtrip(p in arb_pattern(), v in arb_value()) {
            if let Some(s) = match_pattern(&p, &v, &Substitution::new()) {
                let ground = instantiate(&p, &s);
                prop_assert!(free_vars(&ground).is_empty());
                prop_assert_eq!(eval(&ground, &Substitution::new()), Ok(v));
            }
        }

        #[test]
        fn ground_terms_ignore_substitution(t in arb_arith(), x in -5i64..5, y in -5i64..5) {
            let s = subst([("X", Value::Int(x)), ("Y", Value::Int(y))]);
            let ground = instantiate(&t, &s);
            prop_assert!(free_vars(&ground).is_empty());
            let other = subst([("X", Value::Int(99)), ("Q", Value::Bool(true))]);
            prop_assert_eq!(eval(&ground, &other), eval(&ground, &Substitution::new()));
            prop_assert_eq!(eval(&t, &s), eval(&ground, &Substitution::new()));
        }

        #[test]
        fn eval_is_deterministic(t in arb_arith(), x in -5i64..5) {
            let s = subst([("X", Value::Int(x)), ("Y", Value::Int(1))]);
            prop_assert_eq!(eval(&t, &s), eval(&t, &s.clone()));
        }
    }
}
