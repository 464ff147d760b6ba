use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TWO: &str = r#"{"flavor": "ModalHeyting", "size": 2, "leq": [[1,1],[0,1]], "box": [0,1]}"#;
const THREE: &str = r#"{"flavor": "ModalHeyting", "size": 3, "leq": [[1,1,1],[0,1,1],[0,0,1]], "box": [0,1,2]}"#;

fn stabcan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabcan")).args(args).env_remove("STABCAN_BUDGET").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_p_over_box_p_on_two() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "two.json", TWO);
    let o = stabcan(&["check", "--algebra", s(&a), "--rule", "p / box p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o)["valid"], true);
}

#[test]
fn refuted_rule_exits_one() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "three.json", THREE);
    let o = stabcan(&["check", "--algebra", s(&a), "--rule", "./p \\/ (p -> F)"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o)["countervaluation"]["p"], 1);
}

#[test]
fn input_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.json", "{\"flavor\": ");
    assert_eq!(code(&stabcan(&["check", "--algebra", s(&bad), "--rule", "p / p"])), 2);
    assert_eq!(code(&stabcan(&["parse", "box (p ->"])), 2);
    assert_eq!(code(&stabcan(&["parse", "boxI p", "--sig", "im"])), 2);
    assert_eq!(code(&stabcan(&["verify", "--cap", "2", "--checks", "nope"])), 2);
}

#[test]
fn budget_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "three.json", THREE);
    let o = Command::new(env!("CARGO_BIN_EXE_stabcan"))
        .args(["check", "--algebra", s(&a), "--rule", "p, q, r / p /\\ q /\\ r \\/ F"])
        .env("STABCAN_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn printing() {
    let o = stabcan(&["parse", "boxI boxM boxI p <-> boxM p", "--sig", "bi"]);
    assert_eq!(stdout(&o)["text"], "boxI boxM boxI p <-> boxM p");
    let o = stabcan(&["parse", "g / ."]);
    assert_eq!(stdout(&o)["text"], "g / .");
}

#[test]
fn validate_reports_the_equation() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "bad.json", r#"{"flavor": "ModalHeyting", "size": 2, "leq": [[1,1],[0,1]], "box": [0,0]}"#);
    let o = stabcan(&["validate", s(&a)]);
    assert_eq!(code(&o), 1);
    let v = stdout(&o);
    assert_eq!(v["ok"], false);
    assert!(!v["failures"][0]["equation"].as_str().unwrap().is_empty());
}

#[test]
fn filtrate_then_scr_matches_the_library() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "three.json", THREE);
    let o = stabcan(&["filtrate", "--algebra", s(&a), "--rule", "./p \\/ (p -> F)"]);
    assert_eq!(code(&o), 0);
    let pat = write(d.path(), "pat.json", std::str::from_utf8(&o.stdout).unwrap());
    let o = stabcan(&["scr", "--pattern", s(&pat)]);
    assert_eq!(code(&o), 0);
    let p: stabcan::filtration::RefutationPattern =
        serde_json::from_str(&std::fs::read_to_string(&pat).unwrap()).unwrap();
    let lib = stabcan::rules::build_scr(&p).unwrap();
    assert_eq!(stdout(&o)["rule"], stabcan::syntax::print_rule(&lib.rule));
}

#[test]
fn dualize_sigma_rho_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "three.json", THREE);
    let o = stabcan(&["dualize", "--algebra", s(&a)]);
    let fr = write(d.path(), "fr.json", std::str::from_utf8(&o.stdout).unwrap());
    assert_eq!(stdout(&o)["size"], 2);
    let back = stabcan(&["dualize", "--frame", s(&fr)]);
    assert_eq!(stdout(&back)["size"], 3);
    let o = stabcan(&["sigma", "--frame", s(&fr)]);
    assert_eq!(stdout(&o)["kind"], "bi");
    let sf = write(d.path(), "sigma.json", std::str::from_utf8(&o.stdout).unwrap());
    let o = stabcan(&["rho", "--frame", s(&sf)]);
    let v = stdout(&o);
    assert_eq!((v["kind"].clone(), v["size"].clone()), ("im".into(), 2.into()));
}

#[test]
fn translate_rule() {
    let o = stabcan(&["translate", "p / box p"]);
    assert_eq!(stdout(&o)["text"], "boxI p / boxI boxM boxI p");
}

#[test]
fn companion_check_holds_for_excluded_middle() {
    let o = stabcan(&["companion-check", "--l", "./p \\/ (p -> F)", "--m", "./boxI p \\/ boxI ~boxI p", "--cap", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn dummett_lemmon_check_over_a_directory() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "a.json", THREE);
    write(
        d.path(),
        "b.json",
        r#"{"flavor": "Bimodal", "size": 4, "leq": [[1,1,1,1],[0,1,0,1],[0,0,1,1],[0,0,0,1]], "boxI": [0,0,0,3], "boxM": [0,0,0,3]}"#,
    );
    let o = stabcan(&["dummett-lemmon-check", "--dir", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o)["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_is_byte_stable_and_explains() {
    let d = tempfile::tempdir().unwrap();
    let r1 = d.path().join("r1.json");
    let r2 = d.path().join("r2.json");
    assert_eq!(code(&stabcan(&["verify", "--cap", "3", "--output", s(&r1)])), 0);
    assert_eq!(code(&stabcan(&["verify", "--cap", "3", "--jobs", "1", "--output", s(&r2)])), 0);
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    let o = stabcan(&["verify", "--report", s(&r1), "--explain", "geometric"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "no failure");
}

#[test]
fn verify_with_faults() {
    let o = stabcan(&["verify", "--cap", "3", "--checks", "corpus-integrity", "--faults", "5", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o)["faults"].as_array().unwrap().len(), 5);
}
