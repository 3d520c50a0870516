use std::path::PathBuf;
use std::process::{Command, Output};

fn program(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("programs")
        .join(name)
        .display()
        .to_string()
}

fn freechr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freechr"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_prints_store_and_multiset() {
    let o = freechr(&["run", &program("gcd.chr"), "--query", "6,9"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3: 3\n{3}\n");

    let o = freechr(&["run", &program("trans.chr"), "--query", "(a,b),(b,c)"]);
    assert_eq!(
        stdout(&o),
        "1: (a,b)\n2: (b,c)\n3: (a,c)\n{(a,b), (a,c), (b,c)}\n"
    );
}

#[test]
fn run_jsonl() {
    let o = freechr(&[
        "run",
        &program("gcd.chr"),
        "--query",
        "6,9",
        "--format",
        "jsonl",
    ]);
    assert_eq!(
        stdout(&o),
        "{\"multiset\":[\"int:3\"],\"store\":[{\"id\":3,\"value\":\"int:3\"}]}\n"
    );
}

#[test]
fn abstract_run_uses_seed() {
    for seed in ["0", "1", "99"] {
        let o = freechr(&[
            "run",
            &program("gcd.chr"),
            "--query",
            "12,18,27",
            "--abstract",
            "--seed",
            seed,
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "{3}\n");
    }
}

#[test]
fn empty_query_is_an_empty_goal() {
    let o = freechr(&["run", &program("gcd.chr")]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "{}\n".to_string()));
}

#[test]
fn trace_formats_carry_the_same_events() {
    let text = freechr(&["trace", &program("trans.chr"), "--query", "(a,b),(b,c)"]);
    let jsonl = freechr(&[
        "trace",
        &program("trans.chr"),
        "--query",
        "(a,b),(b,c)",
        "--format",
        "jsonl",
    ]);
    let text = stdout(&text);
    let jsonl = stdout(&jsonl);
    assert_eq!(text.lines().count(), jsonl.lines().count());
    assert!(text.contains("apply 2:(b,c)#1 rule=trans ids=[1,2] body=[(a,c)]"));
    let applies: Vec<&str> = jsonl.lines().filter(|l| l.contains("\"Apply\"")).collect();
    assert_eq!(applies.len(), 1);
    assert!(applies[0].contains("\"matched_ids\":[1,2]"));
    assert!(applies[0].contains("\"body\":[\"tuple:[sym:a,sym:c]\"]"));
}

#[test]
fn dumps() {
    let o = freechr(&["enumerate-dump", &program("gcd.chr")]);
    assert_eq!(
        stdout(&o),
        "zero @ kept[] \\ removed[0#1]\nsubtract @ kept[N#3] \\ removed[M#2]\n"
    );
    let o = freechr(&["embed-dump", &program("gcd.chr")]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("zero @  \\ #1 <=> "));
    assert!(lines[1].starts_with("subtract @ #3 \\ #2 <=> "));
    assert!(lines[1].ends_with("| M - N"));
}

#[test]
fn checkers_report_ok() {
    let o = freechr(&["check-soundness", &program("gcd.chr"), "--query", "6,9"]);
    assert_eq!(
        (o.status.code(), stdout(&o)),
        (Some(0), "OK: 29 steps\n".to_string())
    );
    let o = freechr(&[
        "check-embedding",
        &program("trans.chr"),
        "--query",
        "(a,b),(b,c)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("OK"));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let o = freechr(&["run", &program("bad.chr"), "--query", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.chr:2:22:"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);

    let o = freechr(&["run", &program("gcd.chr"), "--query", "6,X"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ground"));

    let o = freechr(&["run", "/nonexistent/prog.chr"]);
    assert_eq!(o.status.code(), Some(2));

    let o = freechr(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let o = freechr(&[
        "run",
        &program("gcd.chr"),
        "--query",
        "6,9",
        "--max-steps",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("5 steps"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("div.chr");
    std::fs::write(&path, "half @ X <=> X div 0 > 1 | 0;\n").unwrap();
    let o = freechr(&["run", path.to_str().unwrap(), "--query", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("half"));

    let o = freechr(&["check-embedding", path.to_str().unwrap(), "--query", "4"]);
    assert_eq!(o.status.code(), Some(3));

    let o = freechr(&[
        "trace",
        &program("gcd.chr"),
        "--query",
        "6,9",
        "--max-steps",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).lines().count(), 3);
}
