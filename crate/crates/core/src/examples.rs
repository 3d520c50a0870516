//! Hand-built programs used by tests, the CLI and the bindings.

use crate::program::{compose, make_rule, FreeRule, HeadPredicate, Program, RuleBody, RuleGuard};
use crate::terms::Value;

fn int(v: &Value) -> Option<i64> {
    match v {
        Value::Int(n) => Some(*n),
        _ => None,
    }
}

/// `zero @ 0 <=> .`
pub fn zero_rule() -> FreeRule {
    make_rule(
        "zero",
        vec![],
        vec![HeadPredicate::new("n = 0", |v| int(v) == Some(0))],
        RuleGuard::always(),
        RuleBody::empty(),
    )
    .expect("zero has a head")
}

/// `subtract @ N \ M <=> 0 < N, 0 < M, N =< M | M - N.`
pub fn subtract_rule() -> FreeRule {
    let positive = |v: &Value| int(v).is_some_and(|n| n > 0);
    make_rule(
        "subtract",
        vec![HeadPredicate::new("0 < n", positive)],
        vec![HeadPredicate::new("0 < m", positive)],
        RuleGuard::new(
            "n =< m",
            |vs| matches!(vs, [Value::Int(n), Value::Int(m)] if n <= m),
        ),
        RuleBody::new("m - n", |vs| match vs {
            [Value::Int(n), Value::Int(m)] => vec![Value::Int(m - n)],
            _ => Vec::new(),
        }),
    )
    .expect("subtract has heads")
}

/// Euclid's algorithm by repeated subtraction: `zero ⊙ subtract`.
pub fn gcd() -> Program {
    compose(zero_rule(), subtract_rule()).expect("distinct names")
}

fn pair(v: &Value) -> Option<(&Value, &Value)> {
    match v {
        Value::Tuple(items) if items.len() == 2 => Some((&items[0], &items[1])),
        _ => None,
    }
}

/// `trans @ (X,Y), (Y,Z) ==> X != Z | (X,Z).`
pub fn trans() -> Program {
    let is_pair = |v: &Value| pair(v).is_some();
    let rule = make_rule(
        "trans",
        vec![
            HeadPredicate::new("(x,y)", is_pair),
            HeadPredicate::new("(y,z)", is_pair),
        ],
        vec![],
        RuleGuard::new("y1 = y2, x != z", |vs| match (pair(&vs[0]), pair(&vs[1])) {
            (Some((x, y1)), Some((y2, z))) => y1 == y2 && x != z,
            _ => false,
        }),
        RuleBody::new("(x,z)", |vs| match (pair(&vs[0]), pair(&vs[1])) {
            (Some((x, _)), Some((_, z))) => vec![Value::Tuple(vec![x.clone(), z.clone()])],
            _ => Vec::new(),
        }),
    )
    .expect("trans has heads");
    Program::Rule(rule)
}
