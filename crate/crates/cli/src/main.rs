use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freechr::classic::{check_equivalence, theta_embed, LockstepEnd};
use freechr::frontend::{load, parse_values};
use freechr::refined::{
    initial_state, run, run_with_snapshots, RefinedEngine, RefinedState, RunError, Stepper,
};
use freechr::very_abstract::{abstract_r, abstract_run, check_run, Multiset};
use freechr::{enumerate, Program, Value};
use serde_json::json;

#[derive(Parser)]
#[command(name = "freechr", version, about = "Run and check FreeCHR programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program and print the final store and its multiset.
    Run {
        #[command(flatten)]
        common: Common,
        /// Use the seeded nondeterministic multiset rewriter instead.
        #[arg(long = "abstract")]
        use_abstract: bool,
    },
    /// Print every transition of a run.
    Trace(Common),
    /// Print the enumerated rules with their head labels.
    EnumerateDump(Common),
    /// Print the rules after embedding into classical form.
    EmbedDump(Common),
    /// Check a refined run against the multiset rewriting semantics.
    CheckSoundness(Common),
    /// Run the refined and classical engines in lockstep.
    CheckEmbedding(Common),
}

#[derive(Args)]
struct Common {
    /// Program file.
    program: PathBuf,
    /// Comma-separated goal values, e.g. "6,9" or "(a,b),(b,c)".
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long, default_value_t = freechr::refined::DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Seed for the abstract runner.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

enum Failure {
    Violation(String),
    Input(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Input(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("output error: {e}"))
    }
}

struct Loaded {
    program: Program,
    goal: Vec<Value>,
    max_steps: usize,
    seed: u64,
    format: Format,
}

fn prepare(c: &Common) -> Result<Loaded, Failure> {
    let path = c.program.display();
    let text =
        fs::read_to_string(&c.program).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    let (_, program) = load(&text).map_err(|e| Failure::Input(format!("{path}:{e}")))?;
    let goal = parse_values(&c.query).map_err(|e| Failure::Input(format!("--query:{e}")))?;
    Ok(Loaded {
        program,
        goal,
        max_steps: c.max_steps,
        seed: c.seed,
        format: c.format,
    })
}

fn store_lines(out: &mut impl Write, state: &RefinedState, format: Format) -> io::Result<()> {
    let m = abstract_r(state);
    match format {
        Format::Text => {
            for (id, v) in &state.store {
                writeln!(out, "{id}: {v}")?;
            }
            writeln!(out, "{m}")
        }
        Format::Jsonl => {
            let store: Vec<_> = state
                .store
                .iter()
                .map(|(id, v)| json!({"id": id, "value": v.tagged()}))
                .collect();
            writeln!(
                out,
                "{}",
                json!({"store": store, "multiset": multiset_json(&m)})
            )
        }
    }
}

fn multiset_json(m: &Multiset) -> Vec<String> {
    m.iter().map(Value::tagged).collect()
}

fn cmd_run(l: Loaded, use_abstract: bool, out: &mut impl Write) -> Result<(), Failure> {
    if use_abstract {
        let m: Multiset = l.goal.into_iter().collect();
        let result = abstract_run(&l.program, m, l.seed, l.max_steps)
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        match l.format {
            Format::Text => writeln!(out, "{result}")?,
            Format::Jsonl => writeln!(out, "{}", json!({"multiset": multiset_json(&result)}))?,
        }
        return Ok(());
    }
    let r = run(&l.program, l.goal, l.max_steps).map_err(|e| Failure::Runtime(e.to_string()))?;
    store_lines(out, &r.state, l.format)?;
    Ok(())
}

fn cmd_trace(l: Loaded, out: &mut impl Write) -> Result<(), Failure> {
    let e = enumerate(&l.program);
    let engine = RefinedEngine::new(&e);
    let mut state = initial_state(l.goal);
    for _ in 0..l.max_steps {
        match engine
            .step_in_place(&mut state)
            .map_err(|e| Failure::Runtime(e.to_string()))?
        {
            Some(ev) => match l.format {
                Format::Text => writeln!(out, "{ev}")?,
                Format::Jsonl => writeln!(out, "{}", ev.to_json_line())?,
            },
            None => return Ok(()),
        }
    }
    if state.is_terminal() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "no terminal state within {} steps",
            l.max_steps
        )))
    }
}

fn cmd_soundness(l: Loaded, out: &mut impl Write) -> Result<(), Failure> {
    let e = enumerate(&l.program);
    let (r, stopped) = match run_with_snapshots(&e, l.goal, l.max_steps) {
        Ok(r) => (r, None),
        Err(err) => {
            let msg = err.to_string();
            let partial = match err {
                RunError::StepLimit { partial, .. } | RunError::Engine { partial, .. } => *partial,
            };
            (partial, Some(msg))
        }
    };
    check_run(&e, &r).map_err(|v| Failure::Violation(format!("violation at {v}")))?;
    if let Some(msg) = stopped {
        return Err(Failure::Runtime(format!(
            "{} steps checked, then: {msg}",
            r.trace.len()
        )));
    }
    match l.format {
        Format::Text => writeln!(out, "OK: {} steps", r.trace.len())?,
        Format::Jsonl => writeln!(out, "{}", json!({"result": "ok", "steps": r.trace.len()}))?,
    }
    Ok(())
}

fn cmd_embedding(l: Loaded, out: &mut impl Write) -> Result<(), Failure> {
    let report = check_equivalence(&l.program, l.goal, l.max_steps).map_err(|d| {
        Failure::Violation(format!(
            "{d}: refined {:?}, classical {:?}",
            d.left, d.right
        ))
    })?;
    match report.end {
        LockstepEnd::Terminated => {}
        LockstepEnd::StepLimit => {
            return Err(Failure::Runtime(format!(
                "engines agreed for {} steps without reaching a terminal state",
                report.steps
            )))
        }
        LockstepEnd::Failed(e) => {
            return Err(Failure::Runtime(format!(
                "both engines failed at step {}: {e}",
                report.steps
            )))
        }
    }
    match l.format {
        Format::Text => writeln!(out, "OK: {} steps", report.steps)?,
        Format::Jsonl => writeln!(out, "{}", json!({"result": "ok", "steps": report.steps}))?,
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            common,
            use_abstract,
        } => cmd_run(prepare(&common)?, use_abstract, out),
        Command::Trace(c) => cmd_trace(prepare(&c)?, out),
        Command::EnumerateDump(c) => {
            let l = prepare(&c)?;
            write!(out, "{}", enumerate(&l.program).dump())?;
            Ok(())
        }
        Command::EmbedDump(c) => {
            let l = prepare(&c)?;
            for r in theta_embed(&enumerate(&l.program)) {
                writeln!(out, "{}", r.dump_line())?;
            }
            Ok(())
        }
        Command::CheckSoundness(c) => cmd_soundness(prepare(&c)?, out),
        Command::CheckEmbedding(c) => cmd_embedding(prepare(&c)?, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = execute(cli, &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("freechr: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
