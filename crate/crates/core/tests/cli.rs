use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn evoforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoforge")).args(args).env_remove("EVOFORGE_API_KEY").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn square_config(dir: &Path, run: &str) -> PathBuf {
    write(dir, "sq.json", r#"{"name": "sq", "points": [[0,0],[0,1],[1,1],[1,0],[0.5,1.5]]}"#);
    write(
        dir,
        "config.json",
        &format!(r#"{{"config_version": 1, "problem": {{"instance": "sq.json"}}, "output_dir": "out", "run": {run}}}"#),
    )
}

fn small_run(dir: &Path) -> PathBuf {
    let cfg = square_config(dir, r#"{"mode": "solution_search", "generations": 6, "population_size": 4}"#);
    let out = evoforge(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("out/run.jsonl")
}

#[test]
fn run_writes_log_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let log = small_run(dir.path());
    let result: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/result.json")).unwrap()).unwrap();
    for key in ["best_cost", "best_candidate", "generations_run", "backend_calls", "evaluations"] {
        assert!(result.get(key).is_some(), "result.json lacks {key}");
    }
    assert_eq!(result["generations_run"], 6);
    let first: Value = serde_json::from_str(fs::read_to_string(&log).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "meta");
    assert_eq!(first["seq"], 0);
}

#[test]
fn seed_override_changes_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = square_config(dir.path(), r#"{"mode": "solution_search", "generations": 3, "population_size": 4}"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&evoforge(&["run", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()])), 0);
    assert_eq!(
        code(&evoforge(&["run", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "99"])),
        0
    );
    let meta = |d: &Path| -> Value {
        serde_json::from_str(fs::read_to_string(d.join("run.jsonl")).unwrap().lines().next().unwrap()).unwrap()
    };
    assert_eq!(meta(&a)["body"]["config"]["seed"], 1);
    assert_eq!(meta(&b)["body"]["config"]["seed"], 99);
}

#[test]
fn bad_population_size_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = square_config(dir.path(), r#"{"mode": "solution_search", "population_size": 1}"#);
    let out = evoforge(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("population_size"));
}

#[test]
fn missing_instance_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"config_version": 1, "problem": {"instance": "nowhere.json"}, "run": {"mode": "solution_search"}}"#,
    );
    assert_eq!(code(&evoforge(&["run", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn http_backend_without_key_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = square_config(dir.path(), r#"{"mode": "solution_search"}"#);
    let out = evoforge(&["run", "--config", cfg.to_str().unwrap(), "--backend", "http"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("EVOFORGE_API_KEY"));
}

#[test]
fn scripted_backend_needs_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = square_config(dir.path(), r#"{"mode": "solution_search"}"#);
    assert_eq!(code(&evoforge(&["run", "--config", cfg.to_str().unwrap(), "--backend", "scripted"])), 1);
}

#[test]
fn scripted_run_from_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = square_config(dir.path(), r#"{"mode": "solution_search", "generations": 1, "population_size": 2}"#);
    let script = write(dir.path(), "s.txt", &"<candidate>0,1,2,4,3</candidate>\n---\n".repeat(8));
    let out = evoforge(&["run", "--config", cfg.to_str().unwrap(), "--script", script.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn replay_matches_untouched_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = small_run(dir.path());
    let out = evoforge(&["replay", log.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("replay matches: 7 generation(s)"));
}

#[test]
fn replay_detects_altered_response() {
    let dir = tempfile::tempdir().unwrap();
    let log = small_run(dir.path());
    let text = fs::read_to_string(&log).unwrap();
    let mut altered = false;
    let lines: Vec<String> = text
        .lines()
        .map(|line| {
            let mut v: Value = serde_json::from_str(line).unwrap();
            if !altered && v["kind"] == "response" && v["generation"] == 2 {
                v["body"]["text"] = Value::String("no candidates here".into());
                altered = true;
            }
            serde_json::to_string(&v).unwrap()
        })
        .collect();
    assert!(altered);
    fs::write(&log, lines.join("\n") + "\n").unwrap();
    let out = evoforge(&["replay", log.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("diverged at generation"), "{err}");
}

#[test]
fn replay_rejects_truncated_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = small_run(dir.path());
    let text = fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    fs::write(&log, lines[..lines.len() - 1].join("\n") + "\n").unwrap();
    assert_eq!(code(&evoforge(&["replay", log.to_str().unwrap()])), 2);
    fs::write(&log, "{not json\n").unwrap();
    assert_eq!(code(&evoforge(&["replay", log.to_str().unwrap()])), 2);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.json", r#"{"name": "a", "capacity": 10, "items": [5, 5, 4, 3, 3]}"#);
    write(dir.path(), "b.json", r#"{"name": "b", "capacity": 10, "items": [6, 6, 6, 6]}"#);
    let suite = write(dir.path(), "suite.json", r#"{"instances": ["a.json", "b.json"], "heuristics": ["min(cap, item)"]}"#);
    let csv = dir.path().join("report.csv");
    let out = evoforge(&["bench", "--suite", suite.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "heuristic,instance,bins,lb,excess");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines.contains(&"first_fit,b.json,4,3,0.333333"));
    assert!(lines.iter().any(|l| l.starts_with("\"min(cap, item)\",a.json,")));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("heuristic,mean_excess\n"));
}

#[test]
fn eval_expr_prints_score_or_caret() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "a.json", r#"{"name": "a", "capacity": 10, "items": [6, 6, 6, 6]}"#);
    let out = evoforge(&["eval-expr", "-index", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "bins=4 lb=3 excess=0.3333");
    let out = evoforge(&["eval-expr", "cap + * item", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains('^'));
}

#[test]
fn gen_instances_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = evoforge(&["gen-instances", "--kind", "bpp", "--seed", "5", "--count", "3", "--out", d.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    for i in 0..3 {
        let name = format!("bpp-5-{i}.json");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    assert_ne!(fs::read(a.join("bpp-5-0.json")).unwrap(), fs::read(a.join("bpp-5-1.json")).unwrap());
    let out = evoforge(&["gen-instances", "--kind", "tsp", "--count", "1", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(a.join("tsp-0-0.json").exists());
}

#[test]
fn unknown_subcommand_is_input_error() {
    assert_eq!(code(&evoforge(&["frobnicate"])), 1);
    assert_eq!(code(&evoforge(&["--help"])), 0);
}
