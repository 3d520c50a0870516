//! Refined operational semantics for FreeCHR programs.
//!
//! A state holds the query (an execution stack whose head is the active
//! item), the store of identified values, the propagation history and the
//! next fresh identifier. [`RefinedEngine::step`] performs exactly one of
//! ACTIVATE, APPLY, DEFAULT or DROP; SELECT is the label lookup that decides
//! which rule APPLY/DEFAULT refer to.
//!
//! Matching partners are chosen deterministically: head positions are filled
//! left to right (kept heads, then removed heads) and store entries are tried
//! in ascending id order. The first complete assignment wins.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::program::{enumerate, EnumProgram, EnumRule, Program};
use crate::terms::{EvalError, Value};

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryItem {
    Inactive(Value),
    Active {
        id: u64,
        value: Value,
        pattern_index: usize,
    },
}

/// `(rule name, ids in head order)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryEntry {
    pub rule: String,
    pub ids: Vec<u64>,
}

impl HistoryEntry {
    pub fn new(rule: impl Into<String>, ids: Vec<u64>) -> Self {
        HistoryEntry {
            rule: rule.into(),
            ids,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinedState {
    pub query: VecDeque<QueryItem>,
    pub store: BTreeMap<u64, Value>,
    pub history: BTreeSet<HistoryEntry>,
    pub next_id: u64,
}

/// The goal as inactive query items; empty store and history; ids start at 1.
pub fn initial_state(goal: impl IntoIterator<Item = Value>) -> RefinedState {
    RefinedState {
        query: goal.into_iter().map(QueryItem::Inactive).collect(),
        store: BTreeMap::new(),
        history: BTreeSet::new(),
        next_id: 1,
    }
}

impl RefinedState {
    pub fn is_terminal(&self) -> bool {
        self.query.is_empty()
    }
}

impl fmt::Display for RefinedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let query: Vec<String> = self
            .query
            .iter()
            .map(|q| match q {
                QueryItem::Inactive(v) => v.to_string(),
                QueryItem::Active {
                    id,
                    value,
                    pattern_index,
                } => format!("({id},{value})#{pattern_index}"),
            })
            .collect();
        let store: Vec<String> = self
            .store
            .iter()
            .map(|(id, v)| format!("({id},{v})"))
            .collect();
        let history: Vec<String> = self
            .history
            .iter()
            .map(|h| {
                let ids: Vec<String> = h.ids.iter().map(u64::to_string).collect();
                format!("({},{})", h.rule, ids.join(","))
            })
            .collect();
        write!(
            f,
            "<[{}], {{{}}}, {{{}}}, {}>",
            query.join(", "),
            store.join(", "),
            history.join(", "),
            self.next_id
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    Activate,
    Apply,
    Default,
    Drop,
}

/// One applied transition.
///
/// `active_id`, `value` and `pattern_index` describe the query head the
/// transition acted on; for `Activate` they are the fresh id, the activated
/// value and the initial index 1. `Default` reports the index that was tried.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub rule: Option<String>,
    pub active_id: u64,
    pub value: Value,
    pub pattern_index: usize,
    pub matched_ids: Vec<u64>,
    pub body: Vec<Value>,
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    kind: EventKind,
    rule: Option<&'a str>,
    active_id: u64,
    pattern_index: usize,
    matched_ids: &'a [u64],
    body: Vec<String>,
    value: String,
}

impl TraceEvent {
    /// One-line JSON rendering with tagged values.
    pub fn to_json_line(&self) -> String {
        let json = JsonEvent {
            kind: self.kind,
            rule: self.rule.as_deref(),
            active_id: self.active_id,
            pattern_index: self.pattern_index,
            matched_ids: &self.matched_ids,
            body: self.body.iter().map(Value::tagged).collect(),
            value: self.value.tagged(),
        };
        serde_json::to_string(&json).expect("trace events always serialize")
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let active = format!("{}:{}#{}", self.active_id, self.value, self.pattern_index);
        match self.kind {
            EventKind::Activate => write!(f, "activate {active}"),
            EventKind::Drop => write!(f, "drop {active}"),
            EventKind::Default => write!(
                f,
                "default {active} rule={}",
                self.rule.as_deref().unwrap_or("")
            ),
            EventKind::Apply => {
                let ids: Vec<String> = self.matched_ids.iter().map(u64::to_string).collect();
                let body: Vec<String> = self.body.iter().map(Value::to_string).collect();
                write!(
                    f,
                    "apply {active} rule={} ids=[{}] body=[{}]",
                    self.rule.as_deref().unwrap_or(""),
                    ids.join(","),
                    body.join(",")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("guard of rule `{rule}` failed: {source}")]
    Guard { rule: String, source: EvalError },
    #[error("body of rule `{rule}` failed: {source}")]
    Body { rule: String, source: EvalError },
}

/// Matched store entries in head order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub ids: Vec<u64>,
    pub values: Vec<Value>,
}

/// Anything that advances a refined state by one transition.
pub trait Stepper {
    /// Performs one transition in place; `Ok(None)` means the state is
    /// terminal and was left untouched.
    fn step_in_place(&self, s: &mut RefinedState) -> Result<Option<TraceEvent>, EngineError>;
}

/// Executes an enumerated FreeCHR program.
pub struct RefinedEngine<'p> {
    rules: Vec<&'p EnumRule>,
    /// label -> (rule index, head position)
    by_label: Vec<Option<(usize, usize)>>,
}

impl<'p> RefinedEngine<'p> {
    pub fn new(program: &'p EnumProgram) -> Self {
        let rules = program.rules();
        let mut by_label = Vec::new();
        for (ri, r) in rules.iter().enumerate() {
            for (pos, l) in r.labels_in_head_order().enumerate() {
                if by_label.len() <= l {
                    by_label.resize(l + 1, None);
                }
                by_label[l] = Some((ri, pos));
            }
        }
        RefinedEngine { rules, by_label }
    }

    fn select(&self, label: usize) -> Option<(&'p EnumRule, usize)> {
        let (ri, pos) = (*self.by_label.get(label)?)?;
        Some((self.rules[ri], pos))
    }

    /// Performs one transition, returning the successor state, or `None`
    /// when `s` is terminal.
    pub fn step(
        &self,
        s: &RefinedState,
    ) -> Result<Option<(RefinedState, TraceEvent)>, EngineError> {
        let mut next = s.clone();
        Ok(self.step_in_place(&mut next)?.map(|ev| (next, ev)))
    }
}

impl Stepper for RefinedEngine<'_> {
    fn step_in_place(&self, s: &mut RefinedState) -> Result<Option<TraceEvent>, EngineError> {
        let Some(head) = s.query.front() else {
            return Ok(None);
        };
        let (id, value, label) = match head {
            QueryItem::Inactive(c) => {
                let c = c.clone();
                let id = s.next_id;
                s.query[0] = QueryItem::Active {
                    id,
                    value: c.clone(),
                    pattern_index: 1,
                };
                s.store.insert(id, c.clone());
                s.next_id += 1;
                return Ok(Some(event(EventKind::Activate, None, id, c, 1)));
            }
            QueryItem::Active {
                id,
                value,
                pattern_index,
            } => (*id, value.clone(), *pattern_index),
        };
        let Some((rule, position)) = self.select(label) else {
            s.query.pop_front();
            return Ok(Some(event(EventKind::Drop, None, id, value, label)));
        };
        match find_matching(rule, (id, &value), position, s)? {
            Some(m) => {
                let body =
                    rule.rule()
                        .body()
                        .produce(&m.values)
                        .map_err(|source| EngineError::Body {
                            rule: rule.name().to_string(),
                            source,
                        })?;
                for removed in &m.ids[rule.kept_labels().len()..] {
                    s.store.remove(removed);
                }
                s.history
                    .insert(HistoryEntry::new(rule.name(), m.ids.clone()));
                for v in body.iter().rev() {
                    s.query.push_front(QueryItem::Inactive(v.clone()));
                }
                let mut ev = event(EventKind::Apply, Some(rule.name()), id, value, label);
                ev.matched_ids = m.ids;
                ev.body = body;
                Ok(Some(ev))
            }
            None => {
                if let Some(QueryItem::Active { pattern_index, .. }) = s.query.front_mut() {
                    *pattern_index += 1;
                }
                Ok(Some(event(
                    EventKind::Default,
                    Some(rule.name()),
                    id,
                    value,
                    label,
                )))
            }
        }
    }
}

fn event(kind: EventKind, rule: Option<&str>, id: u64, value: Value, label: usize) -> TraceEvent {
    TraceEvent {
        kind,
        rule: rule.map(str::to_string),
        active_id: id,
        value,
        pattern_index: label,
        matched_ids: Vec::new(),
        body: Vec::new(),
    }
}

/// Finds the first matching for `rule` with the active entry fixed at head
/// `position`, or `None` if no APPLY is possible (DEFAULT applies).
///
/// Every head predicate must accept its value, the ids must not be recorded
/// in the history under this rule, and the guard must accept the values.
pub fn find_matching(
    rule: &EnumRule,
    active: (u64, &Value),
    position: usize,
    s: &RefinedState,
) -> Result<Option<Matching>, EngineError> {
    let (active_id, active_value) = active;
    if !s.store.contains_key(&active_id) {
        return Ok(None);
    }
    let preds: Vec<_> = rule.rule().heads().collect();
    if !preds[position].test(active_value) {
        return Ok(None);
    }
    let mut search = Search {
        rule,
        preds: &preds,
        position,
        active: (active_id, active_value),
        state: s,
        ids: Vec::with_capacity(preds.len()),
        values: Vec::with_capacity(preds.len()),
    };
    search.fill()
}

struct Search<'a> {
    rule: &'a EnumRule,
    preds: &'a [&'a crate::program::HeadPredicate],
    position: usize,
    active: (u64, &'a Value),
    state: &'a RefinedState,
    ids: Vec<u64>,
    values: Vec<Value>,
}

impl Search<'_> {
    fn fill(&mut self) -> Result<Option<Matching>, EngineError> {
        let at = self.ids.len();
        if at == self.preds.len() {
            return self.complete();
        }
        if at == self.position {
            let (id, v) = self.active;
            return self.try_with(id, v.clone());
        }
        for (&id, v) in &self.state.store {
            if id == self.active.0 || self.ids.contains(&id) || !self.preds[at].test(v) {
                continue;
            }
            if let Some(m) = self.try_with(id, v.clone())? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn try_with(&mut self, id: u64, v: Value) -> Result<Option<Matching>, EngineError> {
        self.ids.push(id);
        self.values.push(v);
        let found = self.fill()?;
        self.ids.pop();
        self.values.pop();
        Ok(found)
    }

    fn complete(&self) -> Result<Option<Matching>, EngineError> {
        let name = self.rule.name();
        let entry = HistoryEntry::new(name, self.ids.clone());
        if self.state.history.contains(&entry) {
            return Ok(None);
        }
        let ok = self
            .rule
            .rule()
            .guard()
            .check(&self.values)
            .map_err(|source| EngineError::Guard {
                rule: name.to_string(),
                source,
            })?;
        Ok(ok.then(|| Matching {
            ids: self.ids.clone(),
            values: self.values.clone(),
        }))
    }
}

/// A finished (or interrupted) execution.
///
/// When snapshots were requested, `snapshots[i]` is the state before
/// `trace[i]` and the last snapshot equals `state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub state: RefinedState,
    pub trace: Vec<TraceEvent>,
    pub snapshots: Option<Vec<RefinedState>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("no terminal state within {limit} steps")]
    StepLimit { limit: usize, partial: Box<Run> },
    #[error("{error}")]
    Engine {
        error: EngineError,
        partial: Box<Run>,
    },
}

impl RunError {
    pub fn partial(&self) -> &Run {
        match self {
            RunError::StepLimit { partial, .. } | RunError::Engine { partial, .. } => partial,
        }
    }
}

/// Drives `stepper` from `initial` to a terminal state.
pub fn drive(
    stepper: &impl Stepper,
    initial: RefinedState,
    max_steps: usize,
    snapshots: bool,
) -> Result<Run, RunError> {
    let mut run = Run {
        state: initial,
        trace: Vec::new(),
        snapshots: snapshots.then(Vec::new),
    };
    loop {
        if run.state.is_terminal() {
            if let Some(snaps) = run.snapshots.as_mut() {
                snaps.push(run.state.clone());
            }
            return Ok(run);
        }
        if run.trace.len() >= max_steps {
            if let Some(snaps) = run.snapshots.as_mut() {
                snaps.push(run.state.clone());
            }
            return Err(RunError::StepLimit {
                limit: max_steps,
                partial: Box::new(run),
            });
        }
        let before = run.snapshots.is_some().then(|| run.state.clone());
        match stepper.step_in_place(&mut run.state) {
            Ok(Some(ev)) => {
                if let (Some(snaps), Some(b)) = (run.snapshots.as_mut(), before) {
                    snaps.push(b);
                }
                run.trace.push(ev);
            }
            Ok(None) => unreachable!("non-terminal state yielded no transition"),
            Err(error) => {
                if let Some(snaps) = run.snapshots.as_mut() {
                    snaps.push(run.state.clone());
                }
                return Err(RunError::Engine {
                    error,
                    partial: Box::new(run),
                });
            }
        }
    }
}

/// Enumerates `p` and runs it on `goal`.
pub fn run(p: &Program, goal: Vec<Value>, max_steps: usize) -> Result<Run, RunError> {
    let e = enumerate(p);
    drive(
        &RefinedEngine::new(&e),
        initial_state(goal),
        max_steps,
        false,
    )
}

/// Like [`run`], retaining the state before every transition.
pub fn run_with_snapshots(
    p: &EnumProgram,
    goal: Vec<Value>,
    max_steps: usize,
) -> Result<Run, RunError> {
    drive(&RefinedEngine::new(p), initial_state(goal), max_steps, true)
}

/// Free-function form of [`RefinedEngine::step`].
pub fn step(
    p: &EnumProgram,
    s: &RefinedState,
) -> Result<Option<(RefinedState, TraceEvent)>, EngineError> {
    RefinedEngine::new(p).step(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{gcd, trans};

    fn sym(s: &str) -> Value {
        Value::sym(s).unwrap()
    }

    fn edge(a: &str, b: &str) -> Value {
        Value::tuple(vec![sym(a), sym(b)]).unwrap()
    }

    fn active(id: u64, value: impl Into<Value>, pattern_index: usize) -> QueryItem {
        QueryItem::Active {
            id,
            value: value.into(),
            pattern_index,
        }
    }

    #[test]
    fn initial_states() {
        let s = initial_state(vec![6.into(), 9.into()]);
        assert_eq!(
            s.query,
            [QueryItem::Inactive(6.into()), QueryItem::Inactive(9.into())]
        );
        assert!(s.store.is_empty() && s.history.is_empty());
        assert_eq!(s.next_id, 1);
        assert!(initial_state(vec![]).is_terminal());
        let s = initial_state(vec![edge("a", "b"), edge("b", "c")]);
        assert_eq!(s.query.len(), 2);
        assert_eq!(s.to_string(), "<[(a,b), (b,c)], {}, {}, 1>");
    }

    #[test]
    fn activate_first_goal_value() {
        let g = enumerate(&gcd());
        let (s, ev) = step(&g, &initial_state(vec![6.into(), 9.into()]))
            .unwrap()
            .unwrap();
        assert_eq!(ev.kind, EventKind::Activate);
        assert_eq!(s.query, [active(1, 6, 1), QueryItem::Inactive(9.into())]);
        assert_eq!(s.store, BTreeMap::from([(1, 6.into())]));
        assert_eq!(s.next_id, 2);
    }

    #[test]
    fn drop_past_last_label() {
        let g = enumerate(&gcd());
        let mut s = initial_state(vec![]);
        s.query.push_back(active(1, 6, 4));
        s.store.insert(1, 6.into());
        s.next_id = 2;
        let (after, ev) = step(&g, &s).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Drop);
        assert!(after.query.is_empty());
        assert_eq!(after.store, s.store);
    }

    #[test]
    fn trans_applies_then_history_blocks() {
        let t = enumerate(&trans());
        let mut s = initial_state(vec![]);
        s.query.push_back(active(2, edge("b", "c"), 1));
        s.store.insert(1, edge("a", "b"));
        s.store.insert(2, edge("b", "c"));
        s.next_id = 3;
        let (after, ev) = step(&t, &s).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Apply);
        assert_eq!(ev.rule.as_deref(), Some("trans"));
        assert_eq!(ev.matched_ids, [1, 2]);
        assert_eq!(ev.body, [edge("a", "c")]);
        assert_eq!(after.query[0], QueryItem::Inactive(edge("a", "c")));
        assert!(after
            .history
            .contains(&HistoryEntry::new("trans", vec![1, 2])));
        assert_eq!(after.store.len(), 2);

        let rule = t.rules()[0];
        let b = edge("b", "c");
        assert_eq!(find_matching(rule, (2, &b), 1, &after).unwrap(), None);
        assert!(find_matching(rule, (2, &b), 1, &s).unwrap().is_some());
    }

    #[test]
    fn subtract_removes_partner() {
        let g = enumerate(&gcd());
        // active 3 (kept N, label 3) against stored 6 (removed M)
        let mut s = initial_state(vec![]);
        s.query.push_back(active(3, 3, 3));
        s.store.insert(1, 6.into());
        s.store.insert(3, 3.into());
        s.next_id = 4;
        let (after, ev) = step(&g, &s).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Apply);
        assert_eq!(ev.matched_ids, [3, 1]);
        assert_eq!(ev.body, [Value::Int(3)]);
        assert_eq!(after.store, BTreeMap::from([(3, 3.into())]));
        assert_eq!(
            after.query,
            [QueryItem::Inactive(3.into()), active(3, 3, 3)]
        );
    }

    #[test]
    fn zero_matches_active_zero() {
        let g = enumerate(&gcd());
        let mut s = initial_state(vec![]);
        s.query.push_back(active(6, 0, 1));
        s.store.insert(6, 0.into());
        s.next_id = 7;
        let zero = g.rules()[0];
        let m = find_matching(zero, (6, &Value::Int(0)), 0, &s).unwrap();
        assert_eq!(
            m,
            Some(Matching {
                ids: vec![6],
                values: vec![0.into()]
            })
        );
    }

    #[test]
    fn no_matching_once_removed() {
        let g = enumerate(&gcd());
        let s = RefinedState {
            query: VecDeque::from([active(2, 9, 2)]),
            store: BTreeMap::from([(1, 6.into())]),
            history: BTreeSet::new(),
            next_id: 3,
        };
        let sub = g.rules()[1];
        assert_eq!(
            find_matching(sub, (2, &Value::Int(9)), 1, &s).unwrap(),
            None
        );
        let (after, ev) = step(&g, &s).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Default);
        assert_eq!(after.query[0], active(2, 9, 3));
    }

    #[test]
    fn gcd_golden_run() {
        let r = run(&gcd(), vec![6.into(), 9.into()], DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(r.state.store, BTreeMap::from([(3, 3.into())]));
        let applies = |name: &str| {
            r.trace
                .iter()
                .filter(|e| e.kind == EventKind::Apply && e.rule.as_deref() == Some(name))
                .count()
        };
        assert_eq!(applies("subtract"), 3);
        assert_eq!(applies("zero"), 1);
        // the first subtraction replaces 9 by 9 - 6
        let first = r.trace.iter().find(|e| e.kind == EventKind::Apply).unwrap();
        assert_eq!(
            (first.matched_ids.as_slice(), first.body.as_slice()),
            (&[1, 2][..], &[Value::Int(3)][..])
        );
    }

    #[test]
    fn trans_golden_run() {
        let r = run(
            &trans(),
            vec![edge("a", "b"), edge("b", "c")],
            DEFAULT_MAX_STEPS,
        )
        .unwrap();
        let values: Vec<_> = r.state.store.values().cloned().collect();
        assert_eq!(values, [edge("a", "b"), edge("b", "c"), edge("a", "c")]);
        assert_eq!(
            r.trace
                .iter()
                .filter(|e| e.kind == EventKind::Apply)
                .count(),
            1
        );
        assert_eq!(
            r.state.history,
            BTreeSet::from([HistoryEntry::new("trans", vec![1, 2])])
        );
        // (a,c) is dropped after activation and two defaults
        let kinds: Vec<_> = r
            .trace
            .iter()
            .filter(|e| e.active_id == 3)
            .map(|e| e.kind)
            .collect();
        assert_eq!(
            kinds,
            [
                EventKind::Activate,
                EventKind::Default,
                EventKind::Default,
                EventKind::Drop
            ]
        );
    }

    #[test]
    fn empty_goal() {
        let r = run(&gcd(), vec![], 0).unwrap();
        assert!(r.trace.is_empty());
        assert_eq!(r.state, initial_state(vec![]));
    }

    #[test]
    fn step_limit_keeps_partial_trace() {
        let err = run(&gcd(), vec![6.into(), 9.into()], 5).unwrap_err();
        match err {
            RunError::StepLimit { limit, partial } => {
                assert_eq!(limit, 5);
                assert_eq!(partial.trace.len(), 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn body_error_aborts() {
        use crate::program::{make_rule, HeadPredicate, RuleBody, RuleGuard};
        let r = make_rule(
            "boom",
            vec![],
            vec![HeadPredicate::any()],
            RuleGuard::always(),
            RuleBody::fallible("1 div 0", |_| Err(EvalError::DivByZero)),
        )
        .unwrap();
        let err = run(&Program::Rule(r), vec![1.into()], 100).unwrap_err();
        assert!(
            matches!(&err, RunError::Engine { error: EngineError::Body { rule, .. }, .. } if rule == "boom")
        );
        assert_eq!(err.partial().trace.len(), 1);
    }

    #[test]
    fn snapshots_line_up_with_trace() {
        let g = enumerate(&gcd());
        let r = run_with_snapshots(&g, vec![6.into(), 9.into()], 1000).unwrap();
        let snaps = r.snapshots.as_ref().unwrap();
        assert_eq!(snaps.len(), r.trace.len() + 1);
        assert_eq!(snaps.last(), Some(&r.state));
        let engine = RefinedEngine::new(&g);
        for (i, ev) in r.trace.iter().enumerate() {
            let (next, e) = engine.step(&snaps[i]).unwrap().unwrap();
            assert_eq!(&e, ev);
            assert_eq!(next, snaps[i + 1]);
        }
    }

    #[test]
    fn event_renderings() {
        let r = run(&trans(), vec![edge("a", "b"), edge("b", "c")], 100).unwrap();
        let apply = r.trace.iter().find(|e| e.kind == EventKind::Apply).unwrap();
        assert_eq!(
            apply.to_json_line(),
            r#"{"kind":"Apply","rule":"trans","active_id":2,"pattern_index":1,"matched_ids":[1,2],"body":["tuple:[sym:a,sym:c]"],"value":"tuple:[sym:b,sym:c]"}"#
        );
        assert_eq!(
            apply.to_string(),
            "apply 2:(b,c)#1 rule=trans ids=[1,2] body=[(a,c)]"
        );
        assert_eq!(r.trace[0].to_string(), "activate 1:(a,b)#1");
        assert_eq!(
            r.trace[0].to_json_line(),
            r#"{"kind":"Activate","rule":null,"active_id":1,"pattern_index":1,"matched_ids":[],"body":[],"value":"tuple:[sym:a,sym:b]"}"#
        );
    }
}
