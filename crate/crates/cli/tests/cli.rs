use std::path::Path;
use std::process::{Command, Output};

fn lossav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lossav"))
        .args(args)
        .env_remove("LOSSAV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = lossav(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn actions(verdict: &serde_json::Value) -> Vec<&str> {
    verdict["satisfying_actions"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect()
}

#[test]
fn leximin_proof_game_separates_the_concepts() {
    let r = json(&["analyze", "--curated", "leximin-proof-game", "--concepts", "loss-averse,multi-leximin"]);
    let v = r["verdicts"].as_array().unwrap();
    assert_eq!(v[0]["concept"], "loss-averse");
    assert_eq!(actions(&v[0]), ["a", "b"]);
    assert_eq!(v[1]["concept"], "multi-leximin");
    assert_eq!(actions(&v[1]), ["b"]);
    assert_eq!(r["game"]["schema"], "lossav/game");
}

#[test]
fn dfpa_bids() {
    let r = json(&["auction", "dfpa", "--value", "1", "--epsilon", "3/10"]);
    assert_eq!(r["loss_averse_bid"], "9/10");
    assert_eq!(r["min_max_regret_bid"], "3/10");
}

#[test]
fn example_e1_outcome_under_clarke() {
    let o = lossav(&["vcg", "run", "--curated", "example-e1", "--payment-rule", "clarke"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("A1      {a,b}"), "{text}");
    assert!(text.contains("A2      {c,d}"), "{text}");
    let r = json(&["vcg", "run", "--curated", "example-e1", "--payment-rule", "clarke", "--epsilon", "1/10"]);
    // Real welfare is 6 epsilon.
    assert_eq!(r["outcome"]["real_welfare"], "3/5");
    assert_eq!(r["flags"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_byte_stable() {
    for format in ["json", "csv", "table"] {
        let args = ["analyze", "--curated", "dominant-leximin", "--hierarchy", "--format", format];
        assert_eq!(lossav(&args).stdout, lossav(&args).stdout);
    }
}

#[test]
fn decimal_columns_are_marked_display_only() {
    let o = lossav(&["auction", "dfpa", "--value", "1", "--epsilon", "3/10", "--decimal", "3", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.contains("value ~3dp (display only)"), "{text}");
    assert!(text.contains("result,loss_averse_bid,9/10,0.900"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    let cases: [(&[&str], i32); 5] = [
        (&["analyze", broken.to_str().unwrap()], 2),
        (&["auction", "dfpa", "--value", "one", "--epsilon", "1"], 2),
        (&["auction", "dfpa", "--value", "1", "--epsilon", "0"], 3),
        (&["analyze", "--curated", "no-such-game"], 3),
        (&["vcg", "verify-theorem", "--items", "4"], 4),
    ];
    for (args, code) in cases {
        let o = lossav(args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn export_round_trips_curated_games() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["aim-big", "leximin-proof-game", "safety-wrong-monotone"] {
        let first = stdout(&lossav(&["export", "--curated", name]));
        let path = write(dir.path(), &format!("{name}.json"), &first);
        assert_eq!(stdout(&lossav(&["export", &path])), first, "{name}");
        let from_file = json(&["analyze", &path]);
        let curated = json(&["analyze", "--curated", name]);
        assert_eq!(from_file["verdicts"], curated["verdicts"], "{name}");
    }
}

#[test]
fn exported_instance_runs_like_the_curated_one() {
    let dir = tempfile::tempdir().unwrap();
    let doc = stdout(&lossav(&["export", "--curated", "example-e2"]));
    let path = write(dir.path(), "e2.json", &doc);
    let a = json(&["vcg", "run", &path, "--payment-rule", "paper"]);
    let b = json(&["vcg", "run", "--curated", "example-e2", "--payment-rule", "paper"]);
    assert_eq!(a["outcome"], b["outcome"]);
    let c = json(&["vcg", "classify", &path]);
    assert_eq!(c["agents"][0]["kind"], "underbidding");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lossav"))
        .args(["facility", "--agents", "3", "--theta", "2/5", "--format", "json"])
        .env("LOSSAV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(report, stdout(&o));
    let game = std::fs::read_to_string(dir.path().join("game.json")).unwrap();
    assert!(game.contains("\"lossav/game\""));
}

#[test]
fn scenario_matches_direct_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "s.json",
        r#"{"schema": "lossav/scenario", "version": 1,
            "analysis": {"kind": "voting", "rule": "approval", "utilities": ["1", "9/10", "1/10", "0"]}}"#,
    );
    let via_file = json(&["run", &path]);
    let direct = json(&["voting", "--rule", "approval", "--utilities", "1,9/10,1/10,0"]);
    assert_eq!(via_file, direct);
    assert_eq!(direct["top_k"], "2");
    assert_eq!(direct["top_k_max_regret"], "1/10");

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"schema": "lossav/scenario", "version": 1, "analysis": {"kind": "dfpa", "value": "1", "epsilon": "1", "extra": 0}}"#,
    );
    assert_eq!(lossav(&["run", &bad]).status.code(), Some(2));
}

#[test]
fn fpa_witness_and_adversary() {
    let w = json(&["auction", "fpa-witness", "--value", "1", "--bid", "1/2"]);
    assert_eq!(w["verified"], true);
    let a = json(&["vcg", "adversary", "--curated", "example-e1"]);
    assert_eq!(a["kind"], "overbidding");
    assert_eq!(a["holds"], true);
}

#[test]
fn monotone_sybil_claims_hold_for_two_items() {
    let r = json(&["vcg", "verify-theorem", "--items", "2", "--monotone-only"]);
    for c in r["claims"].as_array().unwrap() {
        assert_eq!(c["failed"], 0, "{c}");
    }
}

#[test]
fn verify_all_tiny_reports_every_check() {
    let o = lossav(&["verify-all", "--budget", "tiny", "--format", "json"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 13);
    let failed = checks.iter().filter(|c| c["passed"] == false).count();
    assert_eq!(r["failed"], failed);
    let expected = if failed == 0 { 0 } else { 5 };
    assert_eq!(o.status.code(), Some(expected));
}
