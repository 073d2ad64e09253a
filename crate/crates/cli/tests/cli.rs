use std::process::{Command, Output};

use qexch::field::ExactScalar;
use serde_json::Value;

fn qexch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qexch")).args(args).output().expect("spawn qexch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn json(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("json stdout");
    assert_eq!(v["format"], "qexch-report v1");
    v
}

#[test]
fn list_and_show() {
    let out = qexch(&["list-codes"]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["shor9", "exch9", "rep3"] {
        assert!(stdout(&out).contains(name));
    }

    let out = qexch(&["show", "exch9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("{0:1, 6:84}") && text.contains("{3:84, 9:1}"), "{text}");

    let out = qexch(&["show", "--code", "shor9", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["result"]["words"][0]["terms"], 4);
    assert_eq!(v["result"]["words"][1]["terms"], 4);

    let out = qexch(&["show", "--code", "missing-file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    assert_eq!(qexch(&["check", "exch9", "--errors", "pauli,exchange"]).status.code(), Some(0));
    assert_eq!(qexch(&["check", "--code", "rep3", "--errors", "x,exchange"]).status.code(), Some(0));

    let out = qexch(&["check", "shor9", "--errors", "z,exchange"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("E_34") && text.contains("Z_7"), "{text}");
    assert!(text.trim_end().ends_with("violating entries)"));

    assert_eq!(qexch(&["check", "exch9", "--strict"]).status.code(), Some(1));
    assert_eq!(qexch(&["check", "exch9", "--float", "--tol", "1e-9"]).status.code(), Some(0));
    assert_eq!(qexch(&["check", "rep3", "--n", "4"]).status.code(), Some(2));
    assert_eq!(qexch(&["check", "rep3", "--errors", "w"]).status.code(), Some(2));
    assert_eq!(qexch(&["check"]).status.code(), Some(2));
    assert_eq!(qexch(&["check", "exch9", "--extended"]).status.code(), Some(2));
    assert_eq!(qexch(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn check_json_lists_witnesses() {
    let out = qexch(&["check", "shor9", "--errors", "z,exchange", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let report = &v["result"]["report"];
    assert_eq!(report["passed"], false);
    let errors: Vec<String> =
        report["errors"].as_array().unwrap().iter().map(|e| e.as_str().unwrap().to_string()).collect();
    let witnessed = report["witnesses"].as_array().unwrap().iter().any(|w| {
        let p = &errors[w["p"].as_u64().unwrap() as usize];
        let q = &errors[w["q"].as_u64().unwrap() as usize];
        (p == "E_34" && q.starts_with('Z')) || (q == "E_34" && p.starts_with('Z'))
    });
    assert!(witnessed);
}

#[test]
fn dmatrix_reports_rank_blocks_and_span() {
    let out = qexch(&["dmatrix", "exch9", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["d"]["rank"], 28);
    assert_eq!(v["result"]["d"]["block_sizes"], serde_json::json!([37, 9, 9, 9]));
    assert_eq!(v["result"]["span"]["dimension"], 56);
    assert_eq!(v["result"]["span"]["published"], 54);

    let text = stdout(&qexch(&["dmatrix", "exch9"]));
    assert!(text.contains("rank(D) = 28"));
    assert!(text.contains("block 0 (37x37)"));

    let csv = stdout(&qexch(&["dmatrix", "rep3", "--errors", "x,exchange", "--format", "csv"]));
    assert_eq!(csv.lines().next(), Some("error_p,error_q,block,value"));
    assert_eq!(csv.lines().count(), 1 + 7 * 7);

    assert_eq!(qexch(&["dmatrix", "shor9", "--errors", "z,exchange"]).status.code(), Some(1));
}

#[test]
fn gram_entries_round_trip() {
    let out = qexch(&["gram", "exch9", "--errors", "x", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let radicand = v["result"]["radicand"].as_u64().unwrap();
    let block = &v["result"]["blocks"][0]["entries"];
    assert_eq!(block[1][2], "3/2");
    assert_eq!(block[1][1], "4");
    for row in v["result"]["blocks"].as_array().unwrap().iter().flat_map(|b| b["entries"].as_array().unwrap()) {
        for cell in row.as_array().unwrap() {
            let text = cell.as_str().unwrap();
            let parsed = ExactScalar::parse(text, radicand).unwrap();
            assert_eq!(parsed.to_string(), text);
        }
    }

    let text = stdout(&qexch(&["gram", "exch9", "--errors", "z"]));
    let row = text.lines().find(|l| l.trim_start().starts_with("Z_1 ")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells[1..], ["0", "4", "1", "1", "1", "1", "1", "1", "1", "1"]);

    let csv = stdout(&qexch(&["gram", "rep3", "--errors", "x", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 4 * 4);
}

#[test]
fn shor_demo() {
    let out = qexch(&["demo", "shor-exchange"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for ket in ["|001011111⟩", "|110100111⟩", "|110100000⟩", "|001011000⟩"] {
        assert!(text.contains(ket), "missing {ket}");
    }
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("degenerate KL: FAIL"), "{last}");
}

#[test]
fn recover_test_runs() {
    let out = qexch(&["recover-test", "exch9", "--errors", "pauli,exchange", "--trials", "20", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("syndromes: 28"));

    let out = qexch(&["recover-test", "rep3", "--errors", "x,exchange", "--format", "json", "--plan"]);
    let v = json(&out);
    assert_eq!(v["result"]["passed"], true);
    assert_eq!(v["result"]["plan"]["syndromes"].as_array().unwrap().len(), 4);

    let out = qexch(&["recover-test", "shor9", "--errors", "z,exchange"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(qexch(&["recover-test", "rep3", "--threshold", "2"]).status.code(), Some(2));
}

#[test]
fn bounds_command() {
    let out = qexch(&["bounds", "--model", "all_two_bit"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("n >= 10"));
    let v = json(&qexch(&["bounds", "--format", "json"]));
    let ns: Vec<u64> = v["result"].as_array().unwrap().iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, [5, 7, 10, 9]);
    assert_eq!(qexch(&["bounds", "--model", "tiny"]).status.code(), Some(2));
}

#[test]
fn search_command() {
    let out = qexch(&["search", "--n", "9", "--patterns", "0,6/3,9", "--restarts", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("code found"));

    let out = qexch(&[
        "search",
        "--n",
        "5",
        "--errors",
        "pauli,exchange",
        "--patterns",
        "all-dual",
        "--restarts",
        "50",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("residual floor") && text.contains("not a proof"), "{text}");

    assert_eq!(qexch(&["search", "--n", "5", "--patterns", "0,9"]).status.code(), Some(2));
    assert_eq!(qexch(&["search", "--n", "5", "--restarts", "0"]).status.code(), Some(2));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["dmatrix", "exch9", "--format", "json"],
        &["check", "exch9", "--strict", "--format", "json"],
        &["search", "--n", "4", "--patterns", "all-dual", "--restarts", "5", "--seed", "3", "--format", "json"],
    ];
    for args in runs {
        let a = qexch(args);
        let b = qexch(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn code_files_by_path() {
    let dir = std::env::temp_dir().join(format!("qexch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let shipped = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/codes/exch9.json");
    let out = qexch(&["check", "--code", shipped, "--errors", "x,exchange"]);
    assert_eq!(out.status.code(), Some(0));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"format": "qexch-code v1", "name": "x", "n": 2, "radicand": 1, "words": [], "extra": 1}"#)
        .unwrap();
    assert_eq!(qexch(&["show", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
