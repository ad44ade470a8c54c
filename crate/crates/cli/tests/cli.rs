//! End-to-end driver tests: every command through `run_cli` in-process,
//! exit-code contract, determinism, and the golden report.

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use smpswap::cli::run_cli;
use smpswap::format::{parse_instance, serialize_instance};
use smpswap_core::gen::{random_instance, sample_3x3, RandomSpec};

fn run(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["smpswap".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let mut out = Vec::new();
    let code = run_cli(&argv, &mut out);
    (code, String::from_utf8(out).expect("utf8 output"))
}

fn fixture(name: &str) -> String {
    format!("fixtures/{name}")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("smpswap-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_sample_round_trips_through_the_parser() {
    let (code, text) = run(&["gen", "sample"]);
    assert_eq!(code, 0);
    assert_eq!(parse_instance(&text).unwrap(), sample_3x3());
}

#[test]
fn gen_path_writes_a_parsable_instance() {
    let path = tmp("p2.smp");
    let (code, _) = run(&["gen", "path", "--n", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let inst = parse_instance(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst.n_a() + inst.n_b(), 6);
}

#[test]
fn gen_path_rejects_zero() {
    let (code, _) = run(&["gen", "path", "--n", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn gen_random_is_deterministic_across_runs() {
    let args = ["gen", "random", "--na", "4", "--nb", "3", "--density", "0.8", "--seed", "7"];
    let (c1, t1) = run(&args);
    let (c2, t2) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(t1, t2);
}

#[test]
fn check_reports_the_four_blocking_edges() {
    let (code, text) = run(&[
        "check",
        "--instance",
        &fixture("sample3x3.smp"),
        "--subgraph",
        &fixture("sample3x3.sub"),
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("stable: false"));
    assert!(text.contains("blocking_count: 4"));
}

#[test]
fn check_json_matches_the_golden_report() {
    let (code, text) = run(&[
        "check",
        "--instance",
        &fixture("sample3x3.smp"),
        "--subgraph",
        &fixture("sample3x3.sub"),
        "--format",
        "json-like",
    ]);
    assert_eq!(code, 0);
    let mut got: serde_json::Value = serde_json::from_str(&text).unwrap();
    got["wall_clock_ms"] = serde_json::json!(0.0);
    let golden: serde_json::Value =
        serde_json::from_str(&fs::read_to_string("tests/golden/check_sample3x3.json").unwrap())
            .unwrap();
    assert_eq!(got, golden);
}

#[test]
fn reports_are_deterministic_modulo_wall_clock() {
    let args = [
        "repair",
        "--instance",
        &fixture("sample3x3.smp"),
        "--subgraph",
        &fixture("sample3x3.sub"),
        "--format",
        "json-like",
    ];
    let (c1, t1) = run(&args);
    let (c2, t2) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    let strip = |t: &str| -> String {
        t.lines().filter(|l| !l.contains("wall_clock_ms")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&t1), strip(&t2));
}

#[test]
fn repair_apply_out_produces_a_stable_instance() {
    let repaired = tmp("repaired.smp");
    let (code, text) = run(&[
        "repair",
        "--instance",
        &fixture("sample3x3.smp"),
        "--subgraph",
        &fixture("sample3x3.sub"),
        "--method",
        "sfm",
        "--apply-out",
        repaired.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("cost: 4"));
    let (code, text) = run(&[
        "check",
        "--instance",
        repaired.to_str().unwrap(),
        "--subgraph",
        &fixture("sample3x3.sub"),
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("stable: true"));
}

#[test]
fn repair_methods_report_the_same_cost() {
    let mut costs = Vec::new();
    for method in ["brute", "sfm"] {
        let (code, text) = run(&[
            "repair",
            "--instance",
            &fixture("sample3x3.smp"),
            "--subgraph",
            &fixture("sample3x3.sub"),
            "--method",
            method,
            "--format",
            "json-like",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        costs.push(v["result"]["cost"].as_u64().unwrap());
    }
    assert_eq!(costs[0], costs[1]);
}

#[test]
fn infeasible_repair_exits_with_code_two() {
    let (code, text) = run(&[
        "repair",
        "--instance",
        &fixture("infeasible.smp"),
        "--subgraph",
        &fixture("empty.sub"),
    ]);
    assert_eq!(code, 2);
    assert!(text.contains("feasible: false"));
}

#[test]
fn da_output_feeds_back_as_a_stable_subgraph() {
    let sub = tmp("da.sub");
    let (code, _) = run(&[
        "da",
        "--instance",
        &fixture("sample3x3.smp"),
        "--side",
        "b",
        "--out",
        sub.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, text) = run(&[
        "check",
        "--instance",
        &fixture("sample3x3.smp"),
        "--subgraph",
        sub.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("stable: true"));
}

#[test]
fn psm_decides_the_short_path() {
    let path = tmp("path1.smp");
    run(&["gen", "path", "--n", "1", "--out", path.to_str().unwrap()]);
    let (code, text) = run(&["psm", "--instance", path.to_str().unwrap(), "--k", "1"]);
    assert_eq!(code, 0);
    assert!(text.contains("decision: yes"));
    assert!(text.contains("cost: 1"));
    let (code, text) = run(&["psm", "--instance", path.to_str().unwrap(), "--k", "0"]);
    assert_eq!(code, 0, "a computed `no` is still exit 0");
    assert!(text.contains("decision: no"));
    let (code, text) = run(&[
        "psm",
        "--instance",
        path.to_str().unwrap(),
        "--k",
        "1",
        "--method",
        "enum",
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("decision: yes"));
}

#[test]
fn psm_state_budget_exits_with_code_two() {
    let path = tmp("path3.smp");
    run(&["gen", "path", "--n", "3", "--out", path.to_str().unwrap()]);
    let (code, text) = run(&[
        "psm",
        "--instance",
        path.to_str().unwrap(),
        "--k",
        "3",
        "--budget-states",
        "5",
    ]);
    assert_eq!(code, 2);
    assert!(text.contains("budget_exceeded: states"));
}

#[test]
fn psm_maximum_target_requires_enum_method() {
    let (code, _) = run(&[
        "psm",
        "--instance",
        &fixture("sample3x3.smp"),
        "--k",
        "1",
        "--target",
        "maximum",
    ]);
    assert_eq!(code, 1);
    // The stable matching of the sample has size 2 but maximum matchings
    // have size 3, one swap away from stability.
    let (code, text) = run(&[
        "psm",
        "--instance",
        &fixture("sample3x3.smp"),
        "--k",
        "0",
        "--method",
        "enum",
        "--target",
        "maximum",
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("decision: no"), "{text}");
    assert!(text.contains("cost: 1"), "{text}");
    let (code, text) = run(&[
        "psm",
        "--instance",
        &fixture("sample3x3.smp"),
        "--k",
        "1",
        "--method",
        "enum",
        "--target",
        "maximum",
    ]);
    assert_eq!(code, 0);
    assert!(text.contains("decision: yes"), "{text}");
}

#[test]
fn validate_reports_violations_without_failing() {
    let bad = tmp("bad.smp");
    fs::write(&bad, "smp 1\nA 1\nB 1\ncap a 1 0\npref a 1 : 1\npref b 1 : 1\n").unwrap();
    let (code, text) = run(&["validate", "--instance", bad.to_str().unwrap()]);
    assert_eq!(code, 0, "validation verdicts are decisions, not failures");
    assert!(text.contains("valid: false"));
    assert!(text.contains("capacity"));
    let (code, text) = run(&["validate", "--instance", &fixture("sample3x3.smp")]);
    assert_eq!(code, 0);
    assert!(text.contains("valid: true"));
    assert!(text.contains("edges: 8"));
}

#[test]
fn usage_and_io_errors_exit_with_code_one() {
    let (code, _) = run(&["check", "--instance", "no-such-file.smp", "--subgraph", "x.sub"]);
    assert_eq!(code, 1);
    let (code, _) = run(&["repair", "--no-such-flag"]);
    assert_eq!(code, 1);
    let syntax = tmp("syntax.smp");
    fs::write(&syntax, "not an instance\n").unwrap();
    let (code, _) = run(&["validate", "--instance", syntax.to_str().unwrap()]);
    assert_eq!(code, 1, "syntax errors are input failures");
}

#[test]
fn help_exits_zero() {
    let (code, text) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(text.contains("smpswap"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serialize-then-parse is the identity on generated instances.
    #[test]
    fn instance_round_trip(
        n_a in 1usize..6,
        n_b in 1usize..6,
        density in 0.0f64..=1.0,
        cap_max in 1u32..4,
        seed in any::<u64>(),
    ) {
        let inst = random_instance(&RandomSpec { n_a, n_b, edge_density: density, cap_max, seed });
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }
}
