use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redistnet")).args(args).env_remove("REDISTNET_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_prints_trace() {
    let o = run(&["run", "--input", &fixture("graph.toml"), "--mechanism", "nrm", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("winner: p\n"));
    assert!(text.contains("R_a = 2.4"));
    assert!(text.contains("step surplus = 2.2"));
}

#[test]
fn run_json_mirrors_outcome() {
    let o = run(&["run", "--input", &fixture("tree.toml"), "--mechanism", "nrm", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["winner"], "l");
    assert_eq!(v["surplus"], "1.5");
    assert_eq!(v["social_welfare"], "18");
    assert_eq!(v["payments"]["l"], "17");
    assert_eq!(v["trace"].as_array().unwrap().len(), 0);
}

#[test]
fn neighbour_baseline() {
    let o = run(&["run", "--input", &fixture("tree.toml"), "--mechanism", "cavallo-neighbours"]);
    assert!(stdout(&o).starts_with("winner: b\n"));
}

#[test]
fn parse_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "owner = \"o\"\n[[agents]]\nid = \"a\"\nvaluation = -2\nneighbours = [\"o\"]\n").unwrap();
    let o = run(&["run", "--input", bad.to_str().unwrap(), "--mechanism", "nrm"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("E203"));

    let o = run(&["run", "--input", "/nonexistent/instance.toml", "--mechanism", "nrm"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["run", "--mechanism", "nrm"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--input", &fixture("line.toml"), "--mechanism", "vcg"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["sweep", "--family", "tree", "--sizes", "20,10", "--trials", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_exit_codes() {
    let clean = run(&["audit", "--input", &fixture("tree.toml"), "--mechanism", "nrm"]);
    assert_eq!(clean.status.code(), Some(0));
    assert!(stdout(&clean).contains("ic: 0 violation(s)"));

    let dirty = run(&["audit", "--input", &fixture("cavallo_deficit.toml"), "--mechanism", "cavallo"]);
    assert_eq!(dirty.status.code(), Some(4));
    assert!(stdout(&dirty).contains("non_deficit: violated"));
}

#[test]
fn sampled_agents_are_reported() {
    let o = run(&["audit", "--input", &fixture("graph.toml"), "--mechanism", "nrm", "--degree-cap", "1", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sampled, not exhaustive: "));
}

#[test]
fn sweep_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&[
        "sweep", "--family", "tree", "--sizes", "5,10", "--trials", "3", "--seed", "4", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,trial,mechanism,surplus,social_welfare,optimal_welfare,winner_depth,runtime_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(',')), "runtime column is empty without --timing");
    assert!(stdout(&o).contains("nrm mean surplus/welfare: n=5"));

    let timed = dir.path().join("t.csv");
    run(&["sweep", "--family", "tree", "--sizes", "5", "--trials", "1", "--timing", "--out", timed.to_str().unwrap()]);
    let row = std::fs::read_to_string(&timed).unwrap().lines().nth(1).unwrap().to_string();
    assert!(!row.ends_with(','));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_redistnet"));
        cmd.args(["sweep", "--family", "graph", "--sizes", "8", "--trials", "3", "--format", "json", "--out"]);
        cmd.arg(&out).env_remove("REDISTNET_SEED");
        if let Some(s) = seed {
            cmd.env("REDISTNET_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(out).unwrap()
    };
    let env = sweep("a.json", Some("31"));
    let flag = {
        let out = dir.path().join("b.json");
        let o = run(&[
            "sweep", "--family", "graph", "--sizes", "8", "--trials", "3", "--format", "json", "--seed", "31", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(env, flag);
    assert_ne!(env, sweep("c.json", None));
}

#[test]
fn golden_suite() {
    let list = run(&["golden", "--list"]);
    assert_eq!(stdout(&list), "line\ncavallo-deficit\ncavallo-diffusion\ntree\ngraph\ndiffusion-example\n");
    let all = run(&["golden"]);
    assert_eq!(all.status.code(), Some(0));
    assert!(!stdout(&all).contains("FAIL"));
    let one = run(&["golden", "--name", "graph"]);
    assert!(stdout(&one).lines().all(|l| l.starts_with("PASS graph:")));
    assert_eq!(run(&["golden", "--name", "nope"]).status.code(), Some(1));
}
