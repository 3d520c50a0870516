//! Seeded generators for random rule programs and goals over integers.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::classic::ClassicRule;
use crate::frontend::compile_rule;
use crate::program::{FreeRule, Program};
use crate::terms::{BinOp, Term, Value};

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_rules: usize,
    pub max_heads: usize,
    pub max_goal_len: usize,
    pub max_goal_value: i64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_rules: 4,
            max_heads: 3,
            max_goal_len: 6,
            max_goal_value: 20,
        }
    }
}

const VARS: [&str; 3] = ["X", "Y", "Z"];

fn arith<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> Term {
    let var = |rng: &mut R| Term::Var(vars.choose(rng).expect("rules bind a variable").clone());
    match rng.random_range(0..5) {
        0 => Term::bin(BinOp::Add, var(rng), var(rng)),
        1 => Term::bin(BinOp::Mod, var(rng), Term::int(rng.random_range(2..5))),
        2 => Term::bin(BinOp::Sub, var(rng), Term::int(rng.random_range(0..4))),
        _ => var(rng),
    }
}

fn comparison<R: Rng + ?Sized>(rng: &mut R, vars: &[String]) -> Term {
    let ops = [
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
    ];
    let op = *ops.choose(rng).expect("non-empty");
    let rhs = if rng.random_bool(0.5) {
        Term::int(rng.random_range(0..8))
    } else {
        arith(rng, vars)
    };
    Term::bin(op, arith(rng, vars), rhs)
}

/// One rule with 1..=`max_heads` integer heads (at most three). Bodies only produce values
/// strictly below a matched value and never below zero, and only rules that
/// remove something (or have a single head) have a body. The store therefore
/// stays bounded even when a run does not terminate.
pub fn random_rule<R: Rng + ?Sized>(rng: &mut R, name: String, max_heads: usize) -> ClassicRule {
    let heads = rng.random_range(1..=max_heads.clamp(1, VARS.len()));
    let mut patterns = Vec::with_capacity(heads);
    let mut bound: Vec<String> = Vec::new();
    for var in VARS.iter().take(heads) {
        let p = match rng.random_range(0..10) {
            0 => Term::int(rng.random_range(0..4)),
            1 if !bound.is_empty() => Term::Var(bound.choose(rng).expect("non-empty").clone()),
            _ => {
                bound.push(var.to_string());
                Term::var(var)
            }
        };
        patterns.push(p);
    }
    if bound.is_empty() {
        patterns[0] = Term::var("X");
        bound.push("X".to_string());
    }
    let kept_count = rng.random_range(0..=heads);
    let removed = patterns.split_off(kept_count);
    let kept = patterns;

    let mut guards: Vec<Term> = (0..rng.random_range(0..=2))
        .map(|_| comparison(rng, &bound))
        .collect();
    let mut body = Vec::new();
    // a propagation body over several heads can pair every new value with an
    // old one forever, so only single-head propagation rules produce values
    let body_len = match (removed.len(), heads) {
        (0, 1) => rng.random_range(0..=1),
        (0, _) => 0,
        (r, _) => rng.random_range(0..=r),
    };
    for _ in 0..body_len {
        let v = Term::Var(bound.choose(rng).expect("non-empty").clone());
        let term = if rng.random_bool(0.5) {
            let c = rng.random_range(1..4);
            guards.push(Term::bin(BinOp::Ge, v.clone(), Term::int(c)));
            Term::bin(BinOp::Sub, v, Term::int(c))
        } else {
            guards.push(Term::bin(BinOp::Gt, v.clone(), Term::int(0)));
            Term::bin(BinOp::Div, v, Term::int(2))
        };
        body.push(term);
    }
    let guard = guards
        .into_iter()
        .reduce(|a, b| Term::bin(BinOp::And, a, b))
        .unwrap_or(Term::Lit(Value::Bool(true)));
    ClassicRule::new(name, kept, removed, guard, body)
        .expect("generated rules are range-restricted")
}

/// 1..=`max_rules` rules named `r0`, `r1`, ...
pub fn random_rules<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Vec<ClassicRule> {
    (0..rng.random_range(1..=cfg.max_rules.max(1)))
        .map(|i| random_rule(rng, format!("r{i}"), cfg.max_heads))
        .collect()
}

/// Up to `max_goal_len` integers in `0..=max_goal_value`.
pub fn random_goal<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Vec<Value> {
    (0..rng.random_range(0..=cfg.max_goal_len))
        .map(|_| Value::Int(rng.random_range(0..=cfg.max_goal_value)))
        .collect()
}

/// Composes `rules` (in order) under a randomly shaped `⊙` tree.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, mut rules: Vec<FreeRule>) -> Program {
    assert!(!rules.is_empty(), "a program needs at least one rule");
    if rules.len() == 1 {
        return Program::Rule(rules.pop().expect("one rule"));
    }
    let right = rules.split_off(rng.random_range(1..rules.len()));
    Program::Compose(
        Box::new(random_tree(rng, rules)),
        Box::new(random_tree(rng, right)),
    )
}

/// Compiled random program under a random composition tree.
pub fn random_program<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &GenConfig,
) -> (Vec<ClassicRule>, Program) {
    let rules = random_rules(rng, cfg);
    let compiled = rules
        .iter()
        .map(|r| compile_rule(r).expect("generated rules are valid"))
        .collect();
    let p = random_tree(rng, compiled);
    (rules, p)
}
