//! FreeCHR programs: rules built from host-language functions, composed
//! with `⊙` into a binary tree, and their pattern enumeration.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::terms::{EvalError, Value};

type PredicateFn = dyn Fn(&Value) -> bool + Send + Sync;
type GuardFn = dyn Fn(&[Value]) -> Result<bool, EvalError> + Send + Sync;
type BodyFn = dyn Fn(&[Value]) -> Result<Vec<Value>, EvalError> + Send + Sync;

fn same_fn<T: ?Sized>(a: &Arc<T>, b: &Arc<T>) -> bool {
    std::ptr::addr_eq(Arc::as_ptr(a), Arc::as_ptr(b))
}

/// Unary test deciding whether a single value fits a head position.
#[derive(Clone)]
pub struct HeadPredicate {
    test: Arc<PredicateFn>,
    descriptor: String,
}

impl HeadPredicate {
    pub fn new(
        descriptor: impl Into<String>,
        test: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) -> Self {
        HeadPredicate {
            test: Arc::new(test),
            descriptor: descriptor.into(),
        }
    }

    /// Accepts every value.
    pub fn any() -> Self {
        Self::new("_", |_| true)
    }

    pub fn test(&self, v: &Value) -> bool {
        (self.test)(v)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

impl PartialEq for HeadPredicate {
    fn eq(&self, other: &Self) -> bool {
        same_fn(&self.test, &other.test) && self.descriptor == other.descriptor
    }
}

impl fmt::Debug for HeadPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HeadPredicate({})", self.descriptor)
    }
}

/// Joint condition over all matched values, in head order.
#[derive(Clone)]
pub struct RuleGuard {
    func: Arc<GuardFn>,
    descriptor: String,
}

impl RuleGuard {
    pub fn new(
        descriptor: impl Into<String>,
        f: impl Fn(&[Value]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::fallible(descriptor, move |vs| Ok(f(vs)))
    }

    /// A guard whose evaluation may fail, e.g. one compiled from a term.
    pub fn fallible(
        descriptor: impl Into<String>,
        f: impl Fn(&[Value]) -> Result<bool, EvalError> + Send + Sync + 'static,
    ) -> Self {
        RuleGuard {
            func: Arc::new(f),
            descriptor: descriptor.into(),
        }
    }

    pub fn always() -> Self {
        Self::new("true", |_| true)
    }

    pub fn check(&self, values: &[Value]) -> Result<bool, EvalError> {
        (self.func)(values)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

impl PartialEq for RuleGuard {
    fn eq(&self, other: &Self) -> bool {
        same_fn(&self.func, &other.func) && self.descriptor == other.descriptor
    }
}

impl fmt::Debug for RuleGuard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RuleGuard({})", self.descriptor)
    }
}

/// Maps the matched values, in head order, to the values it adds.
#[derive(Clone)]
pub struct RuleBody {
    func: Arc<BodyFn>,
    descriptor: String,
}

impl RuleBody {
    pub fn new(
        descriptor: impl Into<String>,
        f: impl Fn(&[Value]) -> Vec<Value> + Send + Sync + 'static,
    ) -> Self {
        Self::fallible(descriptor, move |vs| Ok(f(vs)))
    }

    pub fn fallible(
        descriptor: impl Into<String>,
        f: impl Fn(&[Value]) -> Result<Vec<Value>, EvalError> + Send + Sync + 'static,
    ) -> Self {
        RuleBody {
            func: Arc::new(f),
            descriptor: descriptor.into(),
        }
    }

    pub fn empty() -> Self {
        Self::new("", |_| Vec::new())
    }

    pub fn produce(&self, values: &[Value]) -> Result<Vec<Value>, EvalError> {
        (self.func)(values)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }
}

impl PartialEq for RuleBody {
    fn eq(&self, other: &Self) -> bool {
        same_fn(&self.func, &other.func) && self.descriptor == other.descriptor
    }
}

impl fmt::Debug for RuleBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RuleBody({})", self.descriptor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("rule `{0}` has neither kept nor removed heads")]
    EmptyHeads(String),
    #[error("rule names must not be empty")]
    EmptyName,
    #[error("duplicate rule name `{0}`")]
    DuplicateRuleName(String),
    #[error("a program needs at least one rule")]
    EmptyProgram,
}

/// A single rule `name @ kept \ removed <=> guard | body`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeRule {
    name: String,
    kept: Vec<HeadPredicate>,
    removed: Vec<HeadPredicate>,
    guard: RuleGuard,
    body: RuleBody,
}

impl FreeRule {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kept(&self) -> &[HeadPredicate] {
        &self.kept
    }

    pub fn removed(&self) -> &[HeadPredicate] {
        &self.removed
    }

    pub fn guard(&self) -> &RuleGuard {
        &self.guard
    }

    pub fn body(&self) -> &RuleBody {
        &self.body
    }

    pub fn head_count(&self) -> usize {
        self.kept.len() + self.removed.len()
    }

    /// Kept heads followed by removed heads.
    pub fn heads(&self) -> impl Iterator<Item = &HeadPredicate> {
        self.kept.iter().chain(&self.removed)
    }
}

/// Builds a validated rule.
pub fn make_rule(
    name: impl Into<String>,
    kept: Vec<HeadPredicate>,
    removed: Vec<HeadPredicate>,
    guard: RuleGuard,
    body: RuleBody,
) -> Result<FreeRule, BuildError> {
    let name = name.into();
    if name.is_empty() {
        return Err(BuildError::EmptyName);
    }
    if kept.is_empty() && removed.is_empty() {
        return Err(BuildError::EmptyHeads(name));
    }
    Ok(FreeRule {
        name,
        kept,
        removed,
        guard,
        body,
    })
}

/// A FreeCHR program: a single rule or the composition of two programs.
#[derive(Debug, Clone, PartialEq)]
pub enum Program {
    Rule(FreeRule),
    Compose(Box<Program>, Box<Program>),
}

impl From<FreeRule> for Program {
    fn from(r: FreeRule) -> Self {
        Program::Rule(r)
    }
}

/// `p1 ⊙ p2`, rejecting rule names that occur on both sides.
pub fn compose(p1: impl Into<Program>, p2: impl Into<Program>) -> Result<Program, BuildError> {
    let (p1, p2) = (p1.into(), p2.into());
    let left: BTreeSet<&str> = p1.rules().into_iter().map(FreeRule::name).collect();
    if let Some(dup) = p2.rules().into_iter().find(|r| left.contains(r.name())) {
        return Err(BuildError::DuplicateRuleName(dup.name.clone()));
    }
    Ok(Program::Compose(Box::new(p1), Box::new(p2)))
}

impl Program {
    /// Left-nested composition of `rules` in order.
    pub fn from_rules(rules: impl IntoIterator<Item = FreeRule>) -> Result<Program, BuildError> {
        let mut iter = rules.into_iter();
        let first = iter.next().ok_or(BuildError::EmptyProgram)?;
        iter.try_fold(Program::Rule(first), compose)
    }

    /// Structural fold; rules are visited left to right.
    pub fn fold<R>(
        &self,
        on_rule: &mut impl FnMut(&FreeRule) -> R,
        on_compose: &mut impl FnMut(R, R) -> R,
    ) -> R {
        match self {
            Program::Rule(r) => on_rule(r),
            Program::Compose(a, b) => {
                let left = a.fold(on_rule, on_compose);
                let right = b.fold(on_rule, on_compose);
                on_compose(left, right)
            }
        }
    }

    /// The flattened rule sequence.
    pub fn rules(&self) -> Vec<&FreeRule> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules<'a>(&'a self, out: &mut Vec<&'a FreeRule>) {
        match self {
            Program::Rule(r) => out.push(r),
            Program::Compose(a, b) => {
                a.collect_rules(out);
                b.collect_rules(out);
            }
        }
    }

    pub fn rule_count(&self) -> usize {
        self.fold(&mut |_| 1, &mut |a, b| a + b)
    }

    pub fn head_count(&self) -> usize {
        self.fold(&mut FreeRule::head_count, &mut |a, b| a + b)
    }
}

/// Free function form of [`Program::fold`].
pub fn fold_program<R>(
    p: &Program,
    mut on_rule: impl FnMut(&FreeRule) -> R,
    mut on_compose: impl FnMut(R, R) -> R,
) -> R {
    p.fold(&mut on_rule, &mut on_compose)
}

/// Which side of `\` a head sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Kept,
    Removed,
}

/// Location of one head inside its rule. Indices are 0-based; `position`
/// counts kept heads first, then removed heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadSlot {
    pub side: Side,
    pub index: usize,
    pub position: usize,
}

/// A rule whose heads carry pattern indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumRule {
    rule: FreeRule,
    kept_labels: Vec<usize>,
    removed_labels: Vec<usize>,
}

impl EnumRule {
    pub fn rule(&self) -> &FreeRule {
        &self.rule
    }

    pub fn name(&self) -> &str {
        &self.rule.name
    }

    pub fn kept_labels(&self) -> &[usize] {
        &self.kept_labels
    }

    pub fn removed_labels(&self) -> &[usize] {
        &self.removed_labels
    }

    /// Pattern indices in head order (kept, then removed).
    pub fn labels_in_head_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept_labels.iter().chain(&self.removed_labels).copied()
    }

    pub fn labels(&self) -> BTreeSet<usize> {
        self.labels_in_head_order().collect()
    }

    pub fn slot_of(&self, label: usize) -> Option<HeadSlot> {
        let n = self.kept_labels.len();
        let position = self.labels_in_head_order().position(|l| l == label)?;
        Some(if position < n {
            HeadSlot {
                side: Side::Kept,
                index: position,
                position,
            }
        } else {
            HeadSlot {
                side: Side::Removed,
                index: position - n,
                position,
            }
        })
    }
}

/// A program whose head predicates carry pattern indices.
#[derive(Debug, Clone, PartialEq)]
pub enum EnumProgram {
    Rule(EnumRule),
    Compose(Box<EnumProgram>, Box<EnumProgram>),
}

/// Assigns pattern indices `1..=K`. Within a rule, indices grow right to
/// left through the removed heads and then the kept heads; rules are
/// numbered in textual order.
pub fn enumerate(p: &Program) -> EnumProgram {
    fn go(p: &Program, used: &mut usize) -> EnumProgram {
        match p {
            Program::Rule(r) => {
                let (n, m, base) = (r.kept.len(), r.removed.len(), *used);
                *used += n + m;
                EnumProgram::Rule(EnumRule {
                    rule: r.clone(),
                    kept_labels: (0..n).map(|i| base + m + n - i).collect(),
                    removed_labels: (0..m).map(|j| base + m - j).collect(),
                })
            }
            Program::Compose(a, b) => {
                let left = go(a, used);
                let right = go(b, used);
                EnumProgram::Compose(Box::new(left), Box::new(right))
            }
        }
    }
    go(p, &mut 0)
}

/// Strips the pattern indices again.
pub fn unenumerate(p: &EnumProgram) -> Program {
    match p {
        EnumProgram::Rule(r) => Program::Rule(r.rule.clone()),
        EnumProgram::Compose(a, b) => {
            Program::Compose(Box::new(unenumerate(a)), Box::new(unenumerate(b)))
        }
    }
}

impl EnumProgram {
    pub fn rules(&self) -> Vec<&EnumRule> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules<'a>(&'a self, out: &mut Vec<&'a EnumRule>) {
        match self {
            EnumProgram::Rule(r) => out.push(r),
            EnumProgram::Compose(a, b) => {
                a.collect_rules(out);
                b.collect_rules(out);
            }
        }
    }

    pub fn labels(&self) -> BTreeSet<usize> {
        self.rules()
            .iter()
            .flat_map(|r| r.labels_in_head_order())
            .collect()
    }

    /// The rule owning pattern index `label` and the head it labels.
    pub fn rule_for_label(&self, label: usize) -> Option<(&EnumRule, HeadSlot)> {
        self.rules()
            .into_iter()
            .find_map(|r| r.slot_of(label).map(|slot| (r, slot)))
    }

    pub fn rule_named(&self, name: &str) -> Option<&EnumRule> {
        self.rules().into_iter().find(|r| r.name() == name)
    }

    /// One line per rule: `name @ kept[desc#idx ...] \ removed[desc#idx ...]`.
    pub fn dump(&self) -> String {
        fn side(preds: &[HeadPredicate], labels: &[usize]) -> String {
            preds
                .iter()
                .zip(labels)
                .map(|(p, l)| format!("{}#{l}", p.descriptor()))
                .collect::<Vec<_>>()
                .join(" ")
        }
        self.rules()
            .iter()
            .map(|r| {
                format!(
                    "{} @ kept[{}] \\ removed[{}]\n",
                    r.name(),
                    side(&r.rule.kept, &r.kept_labels),
                    side(&r.rule.removed, &r.removed_labels)
                )
            })
            .collect()
    }
}

/// Union of all pattern indices of `p`.
pub fn labels(p: &EnumProgram) -> BTreeSet<usize> {
    p.labels()
}

pub fn labels_of_rule(r: &EnumRule) -> BTreeSet<usize> {
    r.labels()
}
