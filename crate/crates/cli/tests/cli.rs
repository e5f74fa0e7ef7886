use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use critgraph::ore::OreTrace;
use critgraph::Graph;
use serde_json::Value;

const C5K3: &str = "Ghf~~{";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_critgraph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("CRITGRAPH_BUDGET").output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child =
        bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/c5_join_k3_ledger.json")
}

fn assert_schema(schema: &str, v: &Value) {
    let s: Value = serde_json::from_str(&std::fs::read_to_string(repo(&format!("schemas/{schema}"))).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

#[test]
fn gen_sizes_follow_ops() {
    let o = run(&["gen", "--k", "6", "--ops", "2", "--count", "10", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 10);
    for l in &lines {
        assert_eq!(Graph::from_graph6(l).unwrap().n(), 16);
    }
    let o = run(&["gen", "--ops", "0"]);
    assert_eq!(stdout(&o), "E~~w\n");
}

#[test]
fn gen_is_deterministic_and_traces_replay() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a.g6", "b.g6"] {
        let p = dir.path().join(name);
        let o = run(&["gen", "--ops", "3", "--count", "5", "--seed", "11", "-o", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let traces = std::fs::read_to_string(dir.path().join(format!("{name}.traces.json"))).unwrap();
        texts.push((std::fs::read(&p).unwrap(), traces));
    }
    assert_eq!(texts[0], texts[1]);
    let side: Value = serde_json::from_str(&texts[0].1).unwrap();
    assert_schema("gen-traces.v1.schema.json", &side);
    let lines: Vec<&str> = std::str::from_utf8(&texts[0].0).unwrap().lines().collect();
    for (entry, line) in side["graphs"].as_array().unwrap().iter().zip(&lines) {
        assert_eq!(entry["graph6"], *line);
        let trace: OreTrace = serde_json::from_value(entry["trace"].clone()).unwrap();
        assert_eq!(trace.replay().unwrap(), Graph::from_graph6(line).unwrap());
    }
    // a different seed gives different graphs
    let o = run(&["gen", "--ops", "3", "--count", "5", "--seed", "12"]);
    assert_ne!(o.stdout, texts[0].0);
}

#[test]
fn assumption_one_reports_equality_clauses() {
    let o = run(&["verify", "--suite", "assumption1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_schema("verify-report.v1.schema.json", &v);
    assert_eq!(v["status"], "pass");
    for c in v["clauses"].as_array().unwrap() {
        assert_eq!(c["holds"], true);
        if (3..=5).contains(&c["number"].as_u64().unwrap()) {
            assert_eq!(c["equality"], true, "{c}");
        }
    }
    let gamma = v["clauses"].as_array().unwrap().iter().find(|c| c["clause"] == "Gamma <= k - 2").unwrap();
    assert_eq!(gamma["equality"], false);
    assert_eq!(v["params"]["big_delta"], "32/21");
}

#[test]
fn epsilon_override_is_exact_and_validated() {
    let o = run(&["verify", "--suite", "assumption1", "--epsilon", "1/105"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["params"]["delta"], "2/21");
    let o = run(&["verify", "--suite", "assumption1", "--epsilon", "1/10"]);
    assert_eq!(code(&o), 64);
    assert_eq!(code(&run(&["verify", "--suite", "assumption1", "--epsilon", "1/0"])), 64);
    assert_eq!(code(&run(&["verify", "--suite", "assumption1", "--epsilon", "0.01"])), 64);
}

#[test]
fn params_file_is_validated_before_use() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let mut p = serde_json::json!({
        "k": 6, "epsilon": "1/105", "delta": "10/105", "p": "20/21", "q": "2/7", "big_delta": "32/21", "gamma": "220/105"
    });
    assert_schema("params.v1.schema.json", &p);
    std::fs::write(&good, p.to_string()).unwrap();
    let o = run(&["verify", "--suite", "ky", "--params", good.to_str().unwrap(), "-g", C5K3]);
    assert_eq!(code(&o), 0);
    p["big_delta"] = "2/1".into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, p.to_string()).unwrap();
    let o = run(&["verify", "--suite", "ky", "--params", bad.to_str().unwrap(), "-g", C5K3]);
    assert_eq!(code(&o), 64);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Delta"));
}

#[test]
fn ky_passes_strictly_on_c5_join_k3() {
    let o = run(&["verify", "--suite", "ky", "-g", C5K3]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_schema("verify-report.v1.schema.json", &v);
    let g = &v["graphs"][0];
    assert_eq!(g["status"], "pass");
    assert_eq!(g["report"]["density"]["ky_potential"], -6);
    let strict: Vec<&str> = g["report"]["strict"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(strict.contains(&"strong-ky") && strict.contains(&"ky-bound"), "{strict:?}");
}

#[test]
fn ky_on_non_critical_graph_is_inapplicable() {
    // K8 and the 5-cycle
    let o = run(&["verify", "--suite", "ky", "-g", "G~~~~{", "-g", "Dhc"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "inapplicable");
    assert!(v["graphs"].as_array().unwrap().iter().all(|g| g["status"] == "inapplicable"));
}

#[test]
fn every_suite_passes_on_generated_ore_graphs() {
    let gen = stdout(&run(&["gen", "--ops", "2", "--count", "3", "--seed", "5"]));
    for suite in ["ky", "ore-bounds", "gems", "collapse", "lemmas"] {
        let o = run_stdin(&["verify", "--suite", suite, "--jobs", "2"], &gen);
        assert_eq!(code(&o), 0, "{suite}: {}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert_schema("verify-report.v1.schema.json", &v);
        assert_eq!(v["graphs"].as_array().unwrap().len(), 3);
        let want = if suite == "lemmas" { "inapplicable" } else { "pass" };
        assert_eq!(v["status"], want, "{suite}");
    }
}

#[test]
fn jobs_do_not_change_output() {
    let gen = stdout(&run(&["gen", "--ops", "1", "--count", "6", "--seed", "1"]));
    let one = run_stdin(&["verify", "--suite", "gems", "--jobs", "1"], &gen);
    let four = run_stdin(&["verify", "--suite", "gems", "--jobs", "4"], &gen);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn collapse_with_explicit_subset() {
    // R = C5 edge {0,1} plus the K3: a K5 that is not collapsible
    let o = run(&["verify", "--suite", "collapse", "-g", C5K3, "--subset", "0,1,5,6,7"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let row = &v["graphs"][0]["report"]["details"][0];
    assert_eq!(row["collapsible"], false);
    assert_eq!(row["i_collapsible"]["verdict"], "not_collapsible");
    assert_eq!(v["graphs"][0]["report"]["failures"].as_array().unwrap().len(), 0);
    assert_eq!(code(&run(&["verify", "--suite", "collapse", "-g", C5K3, "--subset", "0,99"])), 64);
}

#[test]
fn discharge_matches_committed_golden() {
    let g = golden();
    let o = run(&["discharge", "-g", C5K3, "--epsilon", "1/105", "--golden", g.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["discharge", "-g", C5K3]);
    assert_eq!(o.stdout, std::fs::read(&g).unwrap());
    assert_schema("ledger.v1.schema.json", &json(&o));
}

#[test]
fn discharge_golden_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("golden.json");
    let text = std::fs::read_to_string(golden()).unwrap().replacen("\"1/105\"", "\"1/106\"", 1);
    std::fs::write(&p, text).unwrap();
    let o = run(&["discharge", "-g", C5K3, "--golden", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn discharge_k6_is_trivial() {
    let o = run(&["discharge", "-g", "E~~w"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["transfers"].as_array().unwrap().is_empty());
    let stages = v["stages"].as_array().unwrap();
    assert!(stages.iter().all(|s| s["total"] == stages[0]["total"]));
}

#[test]
fn discharge_with_annotations() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ann.json");
    let ann = serde_json::json!({ "degrees": [8, 5, 5, 5, 5, 5, 5, 5, 5] });
    assert_schema("annotations.v1.schema.json", &ann);
    std::fs::write(&p, ann.to_string()).unwrap();
    // star K_{1,8}
    let star = Graph::complete(1).join(&Graph::new(8)).to_graph6();
    let o = run(&["discharge", "-g", &star, "--annotations", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let r1 = v["transfers"].as_array().unwrap().iter().filter(|t| t["rule"] == "1").count();
    assert_eq!(r1, 8);
    std::fs::write(&p, r#"{"degrees": [8, 5]}"#).unwrap();
    assert_eq!(code(&run(&["discharge", "-g", &star, "--annotations", p.to_str().unwrap()])), 65);
}

#[test]
fn several_ledgers_form_an_array() {
    let o = run(&["discharge", "-g", C5K3, "-g", "E~~w", "--jobs", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_schema("ledger.v1.schema.json", &v);
    assert_eq!(code(&run(&["discharge", "-g", C5K3, "-g", "E~~w", "--golden", "x.json"])), 64);
}

#[test]
fn analyze_output_matches_schema() {
    let gen = stdout(&run(&["gen", "--ops", "2", "--count", "2", "--seed", "3"]));
    let o = run_stdin(&["analyze"], &gen);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_schema("analyze-report.v1.schema.json", &v);
    assert_eq!(v["graphs"][0]["potential"], "1856/105");
    let o = run_stdin(&["analyze", "--format", "text"], &gen);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["verify", "--suite", "bogus", "-g", C5K3])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["verify", "--suite", "ky", "-g", "not graph6 at all"])), 65);
    assert_eq!(code(&run(&["verify", "--suite", "ky", "/nonexistent/graphs.g6"])), 74);
    assert_eq!(code(&run(&["verify", "--suite", "ky", "-g", C5K3, "--jobs", "0"])), 64);
    assert_eq!(code(&run(&["discharge", "-g", "E~~w", "--k", "5"])), 64);
    assert_eq!(code(&run(&["verify", "--suite", "ky", "-g", C5K3, "--k", "5"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    let o = bin().args(["verify", "--suite", "ky", "-g", C5K3]).env("CRITGRAPH_BUDGET", "zero").output().unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn budget_scaling_keeps_results() {
    let plain = run(&["verify", "--suite", "gems", "-g", "E~~w"]);
    let scaled = bin().args(["verify", "--suite", "gems", "-g", "E~~w"]).env("CRITGRAPH_BUDGET", "4").output().unwrap();
    assert_eq!(code(&scaled), 0);
    assert_eq!(plain.stdout, scaled.stdout);
}

#[test]
fn text_format_is_one_line_per_graph() {
    let o = run(&["verify", "--suite", "ky", "-g", C5K3, "-g", "E~~w", "--format", "text"]);
    assert_eq!(stdout(&o), "ky k=6 pass\n  0 Ghf~~{ pass\n  1 E~~w pass\n");
}
