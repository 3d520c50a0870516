//! Python bindings: parse a program, run it, trace it, and run the checkers.
//!
//! Values map to Python as `int`, `bool`, `str` (symbols) and `tuple`.

use freechr::classic::{check_equivalence, theta_embed, LockstepEnd};
use freechr::frontend::{load, parse_values, SourceProgram};
use freechr::refined::{
    run, run_with_snapshots, RefinedState, RunError, TraceEvent, DEFAULT_MAX_STEPS,
};
use freechr::very_abstract::{abstract_r, abstract_run, check_run, AbstractError, Multiset};
use freechr::{enumerate, Program as CoreProgram, Value};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString, PyTuple};

create_exception!(
    freechr_py,
    FreeChrError,
    PyException,
    "Base class of all freechr errors."
);
create_exception!(
    freechr_py,
    ParseError,
    FreeChrError,
    "Program or query text did not parse."
);
create_exception!(
    freechr_py,
    EvaluationError,
    FreeChrError,
    "A guard or body failed to evaluate."
);
create_exception!(
    freechr_py,
    StepLimitError,
    FreeChrError,
    "No terminal state within the step limit."
);
create_exception!(
    freechr_py,
    CheckError,
    FreeChrError,
    "A checker found a violation or divergence."
);

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Int(n) => n.into_pyobject(py)?.into_any(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Sym(s) => PyString::new(py, s.as_str()).into_any(),
        Value::Tuple(items) => {
            let items = items
                .iter()
                .map(|x| value_to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyTuple::new(py, items)?.into_any()
        }
    })
}

fn value_from_py(ob: &Bound<'_, PyAny>) -> PyResult<Value> {
    if let Ok(b) = ob.cast::<PyBool>() {
        return Ok(Value::Bool(b.is_true()));
    }
    if let Ok(s) = ob.cast::<PyString>() {
        return Value::sym(s.to_str()?).map_err(|e| ParseError::new_err(e.to_string()));
    }
    if let Ok(t) = ob.cast::<PyTuple>() {
        let items = t
            .iter()
            .map(|x| value_from_py(&x))
            .collect::<PyResult<Vec<_>>>()?;
        return Value::tuple(items).map_err(|e| ParseError::new_err(e.to_string()));
    }
    Ok(Value::Int(ob.extract::<i64>()?))
}

/// A query is either text in the rule language (`"6,9"`) or a sequence of
/// Python values.
fn goal_from_py(query: &Bound<'_, PyAny>) -> PyResult<Vec<Value>> {
    if let Ok(s) = query.cast::<PyString>() {
        return parse_values(s.to_str()?).map_err(|e| ParseError::new_err(e.to_string()));
    }
    query.try_iter()?.map(|x| value_from_py(&x?)).collect()
}

fn values_to_list<'py>(py: Python<'py>, vs: &[Value]) -> PyResult<Bound<'py, PyList>> {
    let items = vs
        .iter()
        .map(|v| value_to_py(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn multiset_to_list<'py>(py: Python<'py>, m: &Multiset) -> PyResult<Bound<'py, PyList>> {
    let items = m
        .iter()
        .map(|v| value_to_py(py, v))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

fn event_to_dict<'py>(py: Python<'py>, ev: &TraceEvent) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let kind = format!("{:?}", ev.kind).to_lowercase();
    d.set_item("kind", kind)?;
    d.set_item("rule", ev.rule.as_deref())?;
    d.set_item("active_id", ev.active_id)?;
    d.set_item("value", value_to_py(py, &ev.value)?)?;
    d.set_item("pattern_index", ev.pattern_index)?;
    d.set_item("matched_ids", ev.matched_ids.clone())?;
    d.set_item("body", values_to_list(py, &ev.body)?)?;
    Ok(d)
}

fn run_error(e: RunError) -> PyErr {
    match e {
        RunError::StepLimit { .. } => StepLimitError::new_err(e.to_string()),
        RunError::Engine { .. } => EvaluationError::new_err(e.to_string()),
    }
}

/// Result of a refined run.
#[pyclass(frozen, module = "freechr_py")]
pub struct RunResult {
    state: RefinedState,
    trace: Vec<TraceEvent>,
}

#[pymethods]
impl RunResult {
    /// Final store as `{id: value}`.
    #[getter]
    fn store<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (id, v) in &self.state.store {
            d.set_item(id, value_to_py(py, v)?)?;
        }
        Ok(d)
    }

    /// Final store values as a sorted list with repetitions.
    #[getter]
    fn multiset<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        multiset_to_list(py, &abstract_r(&self.state))
    }

    #[getter]
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let events = self
            .trace
            .iter()
            .map(|e| event_to_dict(py, e))
            .collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, events)
    }

    /// Propagation history as `(rule, [ids])` pairs.
    #[getter]
    fn history(&self) -> Vec<(String, Vec<u64>)> {
        self.state
            .history
            .iter()
            .map(|h| (h.rule.clone(), h.ids.clone()))
            .collect()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.trace.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(steps={}, multiset={})",
            self.trace.len(),
            abstract_r(&self.state)
        )
    }
}

/// A parsed and compiled rule program.
#[pyclass(frozen, module = "freechr_py")]
pub struct Program {
    source: SourceProgram,
    program: CoreProgram,
}

#[pymethods]
impl Program {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let (source, program) = load(text).map_err(|e| ParseError::new_err(e.to_string()))?;
        Ok(Program { source, program })
    }

    #[getter]
    fn rule_names(&self) -> Vec<String> {
        self.program
            .rules()
            .iter()
            .map(|r| r.name().to_string())
            .collect()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        enumerate(&self.program).labels().into_iter().collect()
    }

    #[pyo3(signature = (query, max_steps = DEFAULT_MAX_STEPS))]
    fn run(&self, query: &Bound<'_, PyAny>, max_steps: usize) -> PyResult<RunResult> {
        let r = run(&self.program, goal_from_py(query)?, max_steps).map_err(run_error)?;
        Ok(RunResult {
            state: r.state,
            trace: r.trace,
        })
    }

    /// Trace of a run as JSON lines, one per event.
    #[pyo3(signature = (query, max_steps = DEFAULT_MAX_STEPS))]
    fn trace_jsonl(&self, query: &Bound<'_, PyAny>, max_steps: usize) -> PyResult<Vec<String>> {
        let r = run(&self.program, goal_from_py(query)?, max_steps).map_err(run_error)?;
        Ok(r.trace.iter().map(TraceEvent::to_json_line).collect())
    }

    /// Seeded multiset rewriting to a fixpoint; returns the sorted multiset.
    #[pyo3(signature = (query, seed = 0, max_steps = DEFAULT_MAX_STEPS))]
    fn abstract_run<'py>(
        &self,
        py: Python<'py>,
        query: &Bound<'py, PyAny>,
        seed: u64,
        max_steps: usize,
    ) -> PyResult<Bound<'py, PyList>> {
        let m: Multiset = goal_from_py(query)?.into_iter().collect();
        let out = abstract_run(&self.program, m, seed, max_steps).map_err(|e| match e {
            AbstractError::StepLimit { .. } => StepLimitError::new_err(e.to_string()),
            AbstractError::Eval { .. } => EvaluationError::new_err(e.to_string()),
        })?;
        multiset_to_list(py, &out)
    }

    /// Checks every step of a refined run; returns the number of steps.
    #[pyo3(signature = (query, max_steps = DEFAULT_MAX_STEPS))]
    fn check_soundness(&self, query: &Bound<'_, PyAny>, max_steps: usize) -> PyResult<usize> {
        let e = enumerate(&self.program);
        let r = run_with_snapshots(&e, goal_from_py(query)?, max_steps).map_err(run_error)?;
        check_run(&e, &r).map_err(|v| CheckError::new_err(v.to_string()))?;
        Ok(r.trace.len())
    }

    /// Runs the refined and classical engines in lockstep; returns the
    /// number of agreeing steps.
    #[pyo3(signature = (query, max_steps = DEFAULT_MAX_STEPS))]
    fn check_embedding(&self, query: &Bound<'_, PyAny>, max_steps: usize) -> PyResult<usize> {
        let report = check_equivalence(&self.program, goal_from_py(query)?, max_steps)
            .map_err(|d| CheckError::new_err(d.to_string()))?;
        match report.end {
            LockstepEnd::Terminated => Ok(report.steps),
            LockstepEnd::StepLimit => Err(StepLimitError::new_err(format!(
                "no terminal state within {max_steps} steps"
            ))),
            LockstepEnd::Failed(e) => Err(EvaluationError::new_err(e.to_string())),
        }
    }

    fn enumerate_dump(&self) -> String {
        enumerate(&self.program).dump()
    }

    fn embed_dump(&self) -> String {
        theta_embed(&enumerate(&self.program))
            .iter()
            .map(|r| r.dump_line() + "\n")
            .collect()
    }

    fn __str__(&self) -> String {
        self.source.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Program(rules={:?})", self.rule_names())
    }
}

/// Parses comma-separated ground values, e.g. `"6, (a,b), true"`.
#[pyfunction]
fn parse_query<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyList>> {
    let values = parse_values(text).map_err(|e| ParseError::new_err(e.to_string()))?;
    values_to_list(py, &values)
}

/// Adds the classes, functions and exceptions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<Program>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(parse_query, m)?)?;
    m.add("FreeChrError", py.get_type::<FreeChrError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("EvaluationError", py.get_type::<EvaluationError>())?;
    m.add("StepLimitError", py.get_type::<StepLimitError>())?;
    m.add("CheckError", py.get_type::<CheckError>())?;
    Ok(())
}

#[pymodule]
fn freechr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
