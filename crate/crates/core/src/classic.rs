//! Classical ground CHR over the fixed domain.
//!
//! Rules here are textual: head patterns, a boolean guard term and body
//! terms. Groundings are computed lazily by [`ground_instance`]. The
//! embedding [`theta_embed`] turns an enumerated FreeCHR program into
//! classical rules whose guard is the conjunction of all head predicates and
//! the FreeCHR guard; [`ClassicEngine`] executes such rules under the refined
//! semantics of CHR, where matching consults only that combined guard.
//! [`check_equivalence`] runs both engines in lockstep.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::program::{enumerate, BuildError, EnumProgram, Program, RuleBody, RuleGuard};
use crate::refined::{
    initial_state, EngineError, EventKind, HistoryEntry, Matching, QueryItem, RefinedEngine,
    RefinedState, Stepper, TraceEvent,
};
use crate::terms::{equiv_true, eval, free_vars, match_into, EvalError, Substitution, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("head `{head}` of rule `{rule}` is not a constructor pattern")]
    NonPatternHead { rule: String, head: String },
    #[error("variable `{var}` of rule `{rule}` does not occur in its heads")]
    UnboundVar { rule: String, var: String },
}

/// `name @ kept \ removed <=> guard | body` with terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicRule {
    name: String,
    kept: Vec<Term>,
    removed: Vec<Term>,
    guard: Term,
    body: Vec<Term>,
}

impl ClassicRule {
    /// Validates heads and range restriction: every variable of the guard
    /// and body occurs in some head.
    pub fn new(
        name: impl Into<String>,
        kept: Vec<Term>,
        removed: Vec<Term>,
        guard: Term,
        body: Vec<Term>,
    ) -> Result<Self, ClassicError> {
        let name = name.into();
        if name.is_empty() {
            return Err(BuildError::EmptyName.into());
        }
        if kept.is_empty() && removed.is_empty() {
            return Err(BuildError::EmptyHeads(name).into());
        }
        if let Some(h) = kept.iter().chain(&removed).find(|h| !h.is_pattern()) {
            return Err(ClassicError::NonPatternHead {
                rule: name,
                head: h.to_string(),
            });
        }
        let bound: BTreeSet<String> = kept.iter().chain(&removed).flat_map(free_vars).collect();
        let used = std::iter::once(&guard).chain(&body).flat_map(free_vars);
        for var in used {
            if !bound.contains(&var) {
                return Err(ClassicError::UnboundVar { rule: name, var });
            }
        }
        Ok(ClassicRule {
            name,
            kept,
            removed,
            guard,
            body,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kept(&self) -> &[Term] {
        &self.kept
    }

    pub fn removed(&self) -> &[Term] {
        &self.removed
    }

    pub fn guard(&self) -> &Term {
        &self.guard
    }

    pub fn body(&self) -> &[Term] {
        &self.body
    }

    pub fn head_count(&self) -> usize {
        self.kept.len() + self.removed.len()
    }

    pub fn heads(&self) -> impl Iterator<Item = &Term> {
        self.kept.iter().chain(&self.removed)
    }

    pub fn has_guard(&self) -> bool {
        self.guard != Term::Lit(Value::Bool(true))
    }
}

fn join(terms: &[Term]) -> String {
    terms.iter().map(Term::to_string).join(", ")
}

/// Source syntax accepted by the frontend parser.
impl fmt::Display for ClassicRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.name)?;
        let arrow = if self.removed.is_empty() {
            write!(f, "{}", join(&self.kept))?;
            "==>"
        } else if self.kept.is_empty() {
            write!(f, "{}", join(&self.removed))?;
            "<=>"
        } else {
            write!(f, "{} \\ {}", join(&self.kept), join(&self.removed))?;
            "<=>"
        };
        write!(f, " {arrow}")?;
        if self.has_guard() {
            write!(f, " {} |", self.guard)?;
        }
        if !self.body.is_empty() {
            write!(f, " {}", join(&self.body))?;
        }
        f.write_str(";")
    }
}

/// A classical rule with pattern indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumClassicRule {
    pub rule: ClassicRule,
    pub kept_labels: Vec<usize>,
    pub removed_labels: Vec<usize>,
}

/// Pattern indices for a rule sequence: right to left within a rule,
/// removed heads before kept heads, rules top to bottom, starting at 1.
pub fn enum_classic(rules: &[ClassicRule]) -> Vec<EnumClassicRule> {
    let mut next = 1;
    rules
        .iter()
        .map(|r| {
            let mut removed_labels = vec![0; r.removed.len()];
            for slot in removed_labels.iter_mut().rev() {
                *slot = next;
                next += 1;
            }
            let mut kept_labels = vec![0; r.kept.len()];
            for slot in kept_labels.iter_mut().rev() {
                *slot = next;
                next += 1;
            }
            EnumClassicRule {
                rule: r.clone(),
                kept_labels,
                removed_labels,
            }
        })
        .collect()
}

pub fn labels_classic(rules: &[EnumClassicRule]) -> BTreeSet<usize> {
    rules
        .iter()
        .flat_map(|r| r.kept_labels.iter().chain(&r.removed_labels).copied())
        .collect()
}

/// A ground instance of a rule for one sequence of head values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CInstance {
    pub name: String,
    pub kept: Vec<Value>,
    pub removed: Vec<Value>,
    pub guard: bool,
    /// Evaluated body; only computed when the guard holds.
    pub body: Option<Vec<Value>>,
}

/// Matches the heads of `r` against `values` (head order) and, if they fit,
/// evaluates the guard and, when it holds, the body.
pub fn ground_instance(r: &ClassicRule, values: &[Value]) -> Result<Option<CInstance>, EvalError> {
    if values.len() != r.head_count() {
        return Ok(None);
    }
    let mut sigma = Substitution::new();
    if !r
        .heads()
        .zip(values)
        .all(|(p, v)| match_into(p, v, &mut sigma))
    {
        return Ok(None);
    }
    let guard = equiv_true(&r.guard, &sigma)?;
    let body = if guard {
        Some(
            r.body
                .iter()
                .map(|t| eval(t, &sigma))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let (kept, removed) = values.split_at(r.kept.len());
    Ok(Some(CInstance {
        name: r.name.clone(),
        kept: kept.to_vec(),
        removed: removed.to_vec(),
        guard,
        body,
    }))
}

/// A classical rule produced by the embedding: heads are plain positions,
/// all applicability checks live in `combined_guard`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedRule {
    pub name: String,
    pub kept_labels: Vec<usize>,
    pub removed_labels: Vec<usize>,
    pub combined_guard: RuleGuard,
    pub body: RuleBody,
}

impl EmbeddedRule {
    pub fn head_count(&self) -> usize {
        self.kept_labels.len() + self.removed_labels.len()
    }

    fn labels_in_head_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept_labels.iter().chain(&self.removed_labels).copied()
    }

    /// `name @ #idx.. \ #idx.. <=> <combined guard> | <body>`
    pub fn dump_line(&self) -> String {
        let side = |ls: &[usize]| ls.iter().map(|l| format!("#{l}")).join(" ");
        format!(
            "{} @ {} \\ {} <=> {} | {}",
            self.name,
            side(&self.kept_labels),
            side(&self.removed_labels),
            self.combined_guard.descriptor(),
            self.body.descriptor()
        )
    }
}

/// Embeds an enumerated FreeCHR program into classical rules, one per rule
/// in textual order, with head predicates folded into the guard.
pub fn theta_embed(p: &EnumProgram) -> Vec<EmbeddedRule> {
    p.rules()
        .into_iter()
        .map(|er| {
            let rule = er.rule().clone();
            let descriptor = rule
                .heads()
                .enumerate()
                .map(|(i, h)| format!("[{}](c{})", h.descriptor(), i + 1))
                .chain(std::iter::once(format!(
                    "[{}](c1..c{})",
                    rule.guard().descriptor(),
                    rule.head_count()
                )))
                .join(" and ");
            let body = rule.body().clone();
            let combined_guard = RuleGuard::fallible(descriptor, move |vs: &[Value]| {
                if vs.len() != rule.head_count() || !rule.heads().zip(vs).all(|(h, v)| h.test(v)) {
                    return Ok(false);
                }
                rule.guard().check(vs)
            });
            EmbeddedRule {
                name: er.name().to_string(),
                kept_labels: er.kept_labels().to_vec(),
                removed_labels: er.removed_labels().to_vec(),
                combined_guard,
                body,
            }
        })
        .collect()
}

/// Executable form of textual rules: the guard is "a ground instance exists
/// and its guard holds", the body is the instance's evaluated body.
pub fn ground_embed(rules: &[EnumClassicRule]) -> Vec<EmbeddedRule> {
    rules
        .iter()
        .map(|er| {
            let for_guard = er.rule.clone();
            let for_body = er.rule.clone();
            let name = er.rule.name.clone();
            EmbeddedRule {
                name: er.rule.name.clone(),
                kept_labels: er.kept_labels.clone(),
                removed_labels: er.removed_labels.clone(),
                combined_guard: RuleGuard::fallible(er.rule.to_string(), move |vs| {
                    Ok(ground_instance(&for_guard, vs)?.is_some_and(|i| i.guard))
                }),
                body: RuleBody::fallible(join(&er.rule.body), move |vs| {
                    ground_instance(&for_body, vs)?
                        .and_then(|i| i.body)
                        .ok_or_else(|| EvalError::HeadMismatch(name.clone()))
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CandidateOrder {
    Ascending,
    #[cfg(test)]
    Descending,
}

/// Refined semantics of classical CHR over embedded rules.
pub struct ClassicEngine<'p> {
    rules: &'p [EmbeddedRule],
    order: CandidateOrder,
}

impl<'p> ClassicEngine<'p> {
    pub fn new(rules: &'p [EmbeddedRule]) -> Self {
        ClassicEngine {
            rules,
            order: CandidateOrder::Ascending,
        }
    }

    pub fn step(
        &self,
        s: &RefinedState,
    ) -> Result<Option<(RefinedState, TraceEvent)>, EngineError> {
        let mut next = s.clone();
        Ok(self.step_in_place(&mut next)?.map(|ev| (next, ev)))
    }

    /// First assignment of distinct store ids to the heads of `rule` with
    /// `active_id` at `position`, in lexicographic order of the id tuple,
    /// that is not in the history and satisfies the combined guard.
    fn matching(
        &self,
        rule: &EmbeddedRule,
        active_id: u64,
        position: usize,
        s: &RefinedState,
    ) -> Result<Option<Matching>, EngineError> {
        if !s.store.contains_key(&active_id) {
            return Ok(None);
        }
        let mut partners: Vec<u64> = s
            .store
            .keys()
            .copied()
            .filter(|&id| id != active_id)
            .collect();
        if self.order != CandidateOrder::Ascending {
            partners.reverse();
        }
        for others in partners.into_iter().permutations(rule.head_count() - 1) {
            let mut ids = others;
            ids.insert(position, active_id);
            if s.history
                .contains(&HistoryEntry::new(rule.name.clone(), ids.clone()))
            {
                continue;
            }
            let values: Vec<Value> = ids.iter().map(|id| s.store[id].clone()).collect();
            let ok = rule
                .combined_guard
                .check(&values)
                .map_err(|source| EngineError::Guard {
                    rule: rule.name.clone(),
                    source,
                })?;
            if ok {
                return Ok(Some(Matching { ids, values }));
            }
        }
        Ok(None)
    }
}

impl Stepper for ClassicEngine<'_> {
    fn step_in_place(&self, s: &mut RefinedState) -> Result<Option<TraceEvent>, EngineError> {
        let (id, value, label) = match s.query.pop_front() {
            None => return Ok(None),
            Some(QueryItem::Inactive(c)) => {
                let id = s.next_id;
                s.next_id += 1;
                s.store.insert(id, c.clone());
                s.query.push_front(QueryItem::Active {
                    id,
                    value: c.clone(),
                    pattern_index: 1,
                });
                return Ok(Some(plain_event(EventKind::Activate, None, id, c, 1)));
            }
            Some(QueryItem::Active {
                id,
                value,
                pattern_index,
            }) => (id, value, pattern_index),
        };
        let found = self.rules.iter().find_map(|r| {
            r.labels_in_head_order()
                .position(|l| l == label)
                .map(|pos| (r, pos))
        });
        let Some((rule, position)) = found else {
            return Ok(Some(plain_event(EventKind::Drop, None, id, value, label)));
        };
        let active = QueryItem::Active {
            id,
            value: value.clone(),
            pattern_index: label,
        };
        let matched = match self.matching(rule, id, position, s) {
            Ok(m) => m,
            Err(e) => {
                s.query.push_front(active);
                return Err(e);
            }
        };
        let Some(Matching { ids, values }) = matched else {
            s.query.push_front(QueryItem::Active {
                id,
                value: value.clone(),
                pattern_index: label + 1,
            });
            return Ok(Some(plain_event(
                EventKind::Default,
                Some(&rule.name),
                id,
                value,
                label,
            )));
        };
        let body = match rule.body.produce(&values) {
            Ok(b) => b,
            Err(source) => {
                s.query.push_front(active);
                return Err(EngineError::Body {
                    rule: rule.name.clone(),
                    source,
                });
            }
        };
        s.query.push_front(active);
        for v in body.iter().rev() {
            s.query.push_front(QueryItem::Inactive(v.clone()));
        }
        for removed in &ids[rule.kept_labels.len()..] {
            s.store.remove(removed);
        }
        s.history
            .insert(HistoryEntry::new(rule.name.clone(), ids.clone()));
        let mut ev = plain_event(EventKind::Apply, Some(&rule.name), id, value, label);
        ev.matched_ids = ids;
        ev.body = body;
        Ok(Some(ev))
    }
}

fn plain_event(
    kind: EventKind,
    rule: Option<&str>,
    id: u64,
    value: Value,
    label: usize,
) -> TraceEvent {
    TraceEvent {
        kind,
        rule: rule.map(String::from),
        active_id: id,
        value,
        pattern_index: label,
        matched_ids: vec![],
        body: vec![],
    }
}

/// Free-function form of [`ClassicEngine::step`].
pub fn step_classic(
    p: &[EmbeddedRule],
    s: &RefinedState,
) -> Result<Option<(RefinedState, TraceEvent)>, EngineError> {
    ClassicEngine::new(p).step(s)
}

type StepResult = Result<Option<(RefinedState, TraceEvent)>, EngineError>;

/// The first step at which two engines disagree.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("engines diverge at step {step}")]
pub struct Divergence {
    pub step: usize,
    pub left: Box<StepResult>,
    pub right: Box<StepResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LockstepEnd {
    Terminated,
    StepLimit,
    /// Both engines failed identically.
    Failed(EngineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub steps: usize,
    pub end: LockstepEnd,
    pub final_state: RefinedState,
}

/// Runs two engines from the same initial state and requires identical
/// events and identical states after every step.
pub fn check_lockstep(
    left: &impl Stepper,
    right: &impl Stepper,
    goal: Vec<Value>,
    max_steps: usize,
) -> Result<EquivalenceReport, Divergence> {
    let mut a = initial_state(goal);
    let mut b = a.clone();
    for step in 0..=max_steps {
        let ra = left.step_in_place(&mut a);
        let rb = right.step_in_place(&mut b);
        let end = match (&ra, &rb) {
            (Ok(None), Ok(None)) => Some(LockstepEnd::Terminated),
            (Ok(Some(ea)), Ok(Some(eb))) if ea == eb && a == b => None,
            (Err(ea), Err(eb)) if ea == eb && a == b => Some(LockstepEnd::Failed(ea.clone())),
            _ => {
                let pack = |r: Result<Option<TraceEvent>, EngineError>, s: RefinedState| {
                    r.map(|o| o.map(|e| (s, e)))
                };
                return Err(Divergence {
                    step,
                    left: Box::new(pack(ra, a)),
                    right: Box::new(pack(rb, b)),
                });
            }
        };
        if let Some(end) = end {
            return Ok(EquivalenceReport {
                steps: step,
                end,
                final_state: a,
            });
        }
        if step == max_steps {
            break;
        }
    }
    Ok(EquivalenceReport {
        steps: max_steps,
        end: LockstepEnd::StepLimit,
        final_state: a,
    })
}

/// Lockstep comparison of the FreeCHR refined engine on `enumerate(p)` and
/// the classical engine on `theta_embed(enumerate(p))`.
pub fn check_equivalence(
    p: &Program,
    goal: Vec<Value>,
    max_steps: usize,
) -> Result<EquivalenceReport, Divergence> {
    let e = enumerate(p);
    let embedded = theta_embed(&e);
    check_lockstep(
        &RefinedEngine::new(&e),
        &ClassicEngine::new(&embedded),
        goal,
        max_steps,
    )
}
