//! Very abstract semantics: nondeterministic multiset rewriting.
//!
//! Also home of the abstraction from refined states to multisets and of the
//! trace checker asserting that every refined transition is either
//! invisible after abstraction or one abstract rule application.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::program::{EnumProgram, FreeRule, Program};
use crate::refined::{EventKind, QueryItem, RefinedState, Run, TraceEvent};
use crate::terms::{EvalError, Value};

/// Finite multiset of values, kept as sorted value -> count.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset(BTreeMap<Value, usize>);

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: Value) {
        *self.0.entry(v).or_default() += 1;
    }

    /// Removes one occurrence; false if there was none.
    pub fn remove_one(&mut self, v: &Value) -> bool {
        match self.0.get_mut(v) {
            Some(1) => {
                self.0.remove(v);
                true
            }
            Some(n) => {
                *n -= 1;
                true
            }
            None => false,
        }
    }

    pub fn count(&self, v: &Value) -> usize {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Distinct values with their multiplicities, ascending.
    pub fn counts(&self) -> impl Iterator<Item = (&Value, usize)> {
        self.0.iter().map(|(v, n)| (v, *n))
    }

    /// Every occurrence, ascending.
    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter().flat_map(|(v, n)| std::iter::repeat_n(v, *n))
    }
}

impl FromIterator<Value> for Multiset {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let mut m = Multiset::new();
        iter.into_iter().for_each(|v| m.insert(v));
        m
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(Value::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

/// Store values plus inactive query values. Active query items are already
/// represented by their store entry, or by nothing once removed.
pub fn abstract_r(s: &RefinedState) -> Multiset {
    let pending = s.query.iter().filter_map(|q| match q {
        QueryItem::Inactive(v) => Some(v.clone()),
        QueryItem::Active { .. } => None,
    });
    s.store.values().cloned().chain(pending).collect()
}

/// One way to apply a rule to a multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractInstance {
    /// Matched values in head order.
    pub values: Vec<Value>,
    pub result: Multiset,
}

/// All applicable instances of `rule` in `m`, one per distinct value
/// sequence (occurrences of equal values are interchangeable), in ascending
/// lexicographic order of the matched values.
pub fn abstract_applicable(
    rule: &FreeRule,
    m: &Multiset,
) -> Result<Vec<AbstractInstance>, EvalError> {
    fn pick(
        rule: &FreeRule,
        preds: &[&crate::program::HeadPredicate],
        left: &mut BTreeMap<Value, usize>,
        chosen: &mut Vec<Value>,
        out: &mut Vec<Vec<Value>>,
    ) -> Result<(), EvalError> {
        if chosen.len() == preds.len() {
            if rule.guard().check(chosen)? {
                out.push(chosen.clone());
            }
            return Ok(());
        }
        let candidates: Vec<Value> = left
            .iter()
            .filter(|(v, n)| **n > 0 && preds[chosen.len()].test(v))
            .map(|(v, _)| v.clone())
            .collect();
        for v in candidates {
            *left.get_mut(&v).expect("candidate present") -= 1;
            chosen.push(v.clone());
            pick(rule, preds, left, chosen, out)?;
            chosen.pop();
            *left.get_mut(&v).expect("candidate present") += 1;
        }
        Ok(())
    }

    let preds: Vec<_> = rule.heads().collect();
    let mut sequences = Vec::new();
    pick(
        rule,
        &preds,
        &mut m.0.clone(),
        &mut Vec::new(),
        &mut sequences,
    )?;
    sequences
        .into_iter()
        .map(|values| {
            let mut result = m.clone();
            for v in &values[rule.kept().len()..] {
                result.remove_one(v);
            }
            rule.body()
                .produce(&values)?
                .into_iter()
                .for_each(|v| result.insert(v));
            Ok(AbstractInstance { values, result })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractError {
    #[error("no fixpoint within {limit} steps")]
    StepLimit { limit: usize, state: Multiset },
    #[error("rule `{rule}` failed: {source}")]
    Eval { rule: String, source: EvalError },
}

/// Applies uniformly chosen applicable instances until none is left.
///
/// Candidates from all rules are listed in canonical order (rules left to
/// right, instances ascending) before sampling, so a seed replays exactly.
pub fn abstract_run(
    p: &Program,
    m: Multiset,
    seed: u64,
    max_steps: usize,
) -> Result<Multiset, AbstractError> {
    let rules = p.rules();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = m;
    for _ in 0..max_steps {
        let mut candidates = Vec::new();
        for r in &rules {
            let found = abstract_applicable(r, &state).map_err(|source| AbstractError::Eval {
                rule: r.name().to_string(),
                source,
            })?;
            candidates.extend(found);
        }
        if candidates.is_empty() {
            return Ok(state);
        }
        let pick = rng.random_range(0..candidates.len());
        state = candidates.swap_remove(pick).result;
    }
    let done = rules
        .iter()
        .try_fold(true, |done, r| {
            Ok::<_, EvalError>(done && abstract_applicable(r, &state)?.is_empty())
        })
        .unwrap_or(false);
    if done {
        Ok(state)
    } else {
        Err(AbstractError::StepLimit {
            limit: max_steps,
            state,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {reason}")]
pub struct Violation {
    pub step: usize,
    pub reason: String,
}

fn violation(step: usize, reason: impl Into<String>) -> Violation {
    Violation {
        step,
        reason: reason.into(),
    }
}

/// Checks every transition of a refined execution against the very
/// abstract semantics.
///
/// `snapshots[i]` must be the state before `trace[i]`, with one extra final
/// snapshot. ACTIVATE, DEFAULT and DROP must leave the abstraction
/// unchanged. APPLY must equal one abstract application of the same rule to
/// the matched values: predicates and guard hold, the body reproduces the
/// recorded values, and the multiset changes by exactly removed-out,
/// body-in.
pub fn check_refined_trace(
    p: &EnumProgram,
    snapshots: &[RefinedState],
    trace: &[TraceEvent],
) -> Result<(), Violation> {
    if snapshots.len() != trace.len() + 1 {
        return Err(violation(
            0,
            format!("{} snapshots for {} events", snapshots.len(), trace.len()),
        ));
    }
    for (i, ev) in trace.iter().enumerate() {
        let before = abstract_r(&snapshots[i]);
        let after = abstract_r(&snapshots[i + 1]);
        let expected = match ev.kind {
            EventKind::Activate | EventKind::Default | EventKind::Drop => before,
            EventKind::Apply => {
                expected_after_apply(p, &snapshots[i], ev, before).map_err(|r| violation(i, r))?
            }
        };
        if after != expected {
            return Err(violation(
                i,
                format!("{:?}: abstract state {after}, expected {expected}", ev.kind),
            ));
        }
    }
    Ok(())
}

/// [`check_refined_trace`] over a run recorded with snapshots.
pub fn check_run(p: &EnumProgram, run: &Run) -> Result<(), Violation> {
    match &run.snapshots {
        Some(snaps) => check_refined_trace(p, snaps, &run.trace),
        None => Err(violation(0, "run was recorded without snapshots")),
    }
}

fn expected_after_apply(
    p: &EnumProgram,
    before_state: &RefinedState,
    ev: &TraceEvent,
    mut before: Multiset,
) -> Result<Multiset, String> {
    let name = ev.rule.as_deref().ok_or("apply without a rule name")?;
    let rule = p
        .rule_named(name)
        .ok_or_else(|| format!("unknown rule `{name}`"))?
        .rule();
    if ev.matched_ids.len() != rule.head_count() {
        return Err(format!(
            "{} ids for {} heads",
            ev.matched_ids.len(),
            rule.head_count()
        ));
    }
    let values = ev
        .matched_ids
        .iter()
        .map(|id| {
            before_state
                .store
                .get(id)
                .cloned()
                .ok_or_else(|| format!("id {id} not in store"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((pred, v)) = rule.heads().zip(&values).find(|(pred, v)| !pred.test(v)) {
        return Err(format!("head `{}` rejects {v}", pred.descriptor()));
    }
    match rule.guard().check(&values) {
        Ok(true) => {}
        Ok(false) => return Err("guard rejects the matched values".into()),
        Err(e) => return Err(format!("guard failed: {e}")),
    }
    let body = rule
        .body()
        .produce(&values)
        .map_err(|e| format!("body failed: {e}"))?;
    if body != ev.body {
        return Err("recorded body differs from the rule body".into());
    }
    for v in &values[rule.kept().len()..] {
        if !before.remove_one(v) {
            return Err(format!("removed value {v} missing from abstract state"));
        }
    }
    body.into_iter().for_each(|v| before.insert(v));
    Ok(before)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{gcd, subtract_rule, trans, zero_rule};
    use crate::program::{compose, enumerate};
    use crate::refined::{initial_state, run_with_snapshots};
    use std::collections::{BTreeSet, VecDeque};

    fn ms(values: &[i64]) -> Multiset {
        values.iter().map(|&n| Value::Int(n)).collect()
    }

    #[test]
    fn abstraction_of_states() {
        assert!(abstract_r(&initial_state(vec![])).is_empty());
        let s = RefinedState {
            query: VecDeque::from([
                QueryItem::Active {
                    id: 1,
                    value: 6.into(),
                    pattern_index: 1,
                },
                QueryItem::Inactive(9.into()),
            ]),
            store: BTreeMap::from([(1, 6.into())]),
            history: BTreeSet::new(),
            next_id: 2,
        };
        assert_eq!(abstract_r(&s), ms(&[6, 9]));
        assert_eq!(
            abstract_r(&initial_state(vec![4.into(), 4.into()])),
            ms(&[4, 4])
        );
    }

    #[test]
    fn multiset_basics() {
        let mut m = ms(&[3, 1, 3]);
        assert_eq!(m.len(), 3);
        assert_eq!(m.count(&3.into()), 2);
        assert_eq!(m.to_string(), "{1, 3, 3}");
        assert!(m.remove_one(&3.into()));
        assert!(!m.remove_one(&7.into()));
        assert_eq!(m, ms(&[1, 3]));
    }

    #[test]
    fn subtract_instances() {
        let found = abstract_applicable(&subtract_rule(), &ms(&[6, 9])).unwrap();
        assert_eq!(
            found,
            [AbstractInstance {
                values: vec![6.into(), 9.into()],
                result: ms(&[6, 3])
            }]
        );
        let found = abstract_applicable(&subtract_rule(), &ms(&[3, 3])).unwrap();
        assert_eq!(
            found,
            [AbstractInstance {
                values: vec![3.into(), 3.into()],
                result: ms(&[3, 0])
            }]
        );
        assert!(abstract_applicable(&zero_rule(), &ms(&[3]))
            .unwrap()
            .is_empty());
        // a single occurrence cannot fill two heads
        assert!(abstract_applicable(&subtract_rule(), &ms(&[3]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn instances_never_keep_removed_occurrences() {
        for inst in abstract_applicable(&subtract_rule(), &ms(&[2, 4, 4, 6])).unwrap() {
            let mut check = ms(&[2, 4, 4, 6]);
            check.remove_one(&inst.values[1]);
            check.insert(Value::Int(match (&inst.values[0], &inst.values[1]) {
                (Value::Int(n), Value::Int(m)) => m - n,
                _ => unreachable!(),
            }));
            assert_eq!(inst.result, check);
        }
    }

    #[test]
    fn abstract_gcd() {
        for seed in 0..10 {
            assert_eq!(
                abstract_run(&gcd(), ms(&[6, 9]), seed, 10_000),
                Ok(ms(&[3]))
            );
        }
        assert_eq!(abstract_run(&gcd(), ms(&[0]), 0, 10), Ok(ms(&[])));
        assert_eq!(abstract_run(&gcd(), ms(&[]), 0, 10), Ok(ms(&[])));
    }

    #[test]
    fn abstract_run_is_seeded() {
        let a = abstract_run(&gcd(), ms(&[12, 18, 30]), 7, 10_000);
        let b = abstract_run(&gcd(), ms(&[12, 18, 30]), 7, 10_000);
        assert_eq!(a, b);
        assert_eq!(a, Ok(ms(&[6])));
    }

    #[test]
    fn abstract_run_step_limit() {
        let err = abstract_run(&gcd(), ms(&[1, 1000]), 0, 3).unwrap_err();
        assert!(matches!(err, AbstractError::StepLimit { limit: 3, .. }));
        // exactly enough steps reaches the fixpoint without error
        assert_eq!(abstract_run(&gcd(), ms(&[0]), 0, 1), Ok(ms(&[])));
    }

    #[test]
    fn reassociation_does_not_matter() {
        use crate::program::{make_rule, HeadPredicate, RuleBody, RuleGuard};
        let dec = make_rule(
            "dec",
            vec![],
            vec![HeadPredicate::new(
                "n > 5",
                |v| matches!(v, Value::Int(n) if *n > 5),
            )],
            RuleGuard::always(),
            RuleBody::new("n - 5", |vs| match vs {
                [Value::Int(n)] => vec![Value::Int(n - 5)],
                _ => vec![],
            }),
        )
        .unwrap();
        let left = compose(compose(zero_rule(), subtract_rule()).unwrap(), dec.clone()).unwrap();
        let right = compose(zero_rule(), compose(subtract_rule(), dec).unwrap()).unwrap();
        for seed in 0..5 {
            let m = ms(&[14, 21, 35]);
            assert_eq!(
                abstract_run(&left, m.clone(), seed, 10_000),
                abstract_run(&right, m, seed, 10_000)
            );
        }
    }

    #[test]
    fn golden_traces_are_sound() {
        let g = enumerate(&gcd());
        let r = run_with_snapshots(&g, vec![6.into(), 9.into()], 10_000).unwrap();
        assert_eq!(check_run(&g, &r), Ok(()));
        assert_eq!(abstract_r(&r.state), ms(&[3]));

        let t = enumerate(&trans());
        let edge = |a: &str, b: &str| {
            Value::tuple(vec![Value::sym(a).unwrap(), Value::sym(b).unwrap()]).unwrap()
        };
        let r = run_with_snapshots(&t, vec![edge("a", "b"), edge("b", "c")], 10_000).unwrap();
        assert_eq!(check_run(&t, &r), Ok(()));
    }

    #[test]
    fn tampered_apply_is_caught() {
        let t = enumerate(&trans());
        let edge = |a: &str, b: &str| {
            Value::tuple(vec![Value::sym(a).unwrap(), Value::sym(b).unwrap()]).unwrap()
        };
        let r = run_with_snapshots(&t, vec![edge("a", "b"), edge("b", "c")], 10_000).unwrap();
        let mut snaps = r.snapshots.clone().unwrap();
        let at = r
            .trace
            .iter()
            .position(|e| e.kind == EventKind::Apply)
            .unwrap();
        // the apply "forgets" the kept value (a,b)
        snaps[at + 1].store.remove(&1);
        let err = check_refined_trace(&t, &snaps, &r.trace).unwrap_err();
        assert_eq!(err.step, at);
    }

    #[test]
    fn tampered_body_and_default_are_caught() {
        let g = enumerate(&gcd());
        let r = run_with_snapshots(&g, vec![6.into(), 9.into()], 10_000).unwrap();
        let snaps = r.snapshots.clone().unwrap();

        let mut trace = r.trace.clone();
        let at = trace
            .iter()
            .position(|e| e.kind == EventKind::Apply)
            .unwrap();
        trace[at].body = vec![4.into()];
        assert_eq!(
            check_refined_trace(&g, &snaps, &trace).unwrap_err().step,
            at
        );

        let mut snaps2 = snaps.clone();
        let d = r
            .trace
            .iter()
            .position(|e| e.kind == EventKind::Default)
            .unwrap();
        snaps2[d + 1].query.push_back(QueryItem::Inactive(1.into()));
        assert_eq!(
            check_refined_trace(&g, &snaps2, &r.trace).unwrap_err().step,
            d
        );

        assert!(check_refined_trace(&g, &snaps[1..], &r.trace).is_err());
    }
}
