use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

use chansteer_cli::commands::{self, ExtremalityMode, Target, VerifyMode};
use chansteer_cli::doc::{ChannelDoc, Payload, StateDoc};
use chansteer_cli::{parse, DocError, Document, Status};
use chansteer::Tolerances;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs the binary and returns (exit code, stdout).
fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_chansteer")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let (code, out) = run(args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn c(re: f64) -> [f64; 2] {
    [re, 0.0]
}

/// The channel assemblage of the bundled example, with `bump` added to the
/// diagonal of member (00|00).
fn example1_channel_assemblage(dir: &TempDir, bump: f64) -> PathBuf {
    let (code, report) = run_json(&["choi", s(&fixture("example1.json"))]);
    assert_eq!(code, 0);
    let mut doc = report["details"]["document"].clone();
    assert_eq!(doc["kind"], "channel_assemblage");
    let members = doc["payload"]["members"].as_array_mut().unwrap();
    let m = members.iter_mut().find(|m| m["a"] == json!([0, 0]) && m["x"] == json!([0, 0])).unwrap();
    for i in 0..4 {
        let re = m["matrix"][i][i][0].as_f64().unwrap();
        m["matrix"][i][i][0] = json!(re + bump);
    }
    write(dir, "chanasm.json", &serde_json::to_string(&doc).unwrap())
}

#[test]
fn reproduce_targets_pass() {
    for t in ["example1", "asym-nonextremal", "appendix", "key"] {
        let (code, report) = run_json(&["reproduce", t]);
        assert_eq!(code, 0, "{t}: {report}");
        assert_eq!(report["status"], "PASS");
        assert_eq!(report["details"]["target"], t);
    }
    let (_, key) = run_json(&["reproduce", "key"]);
    for row in key["details"]["probabilities"].as_array().unwrap() {
        assert_eq!(row["p000"], 0.5);
        assert_eq!(row["p111"], 0.5);
    }
    let (_, app) = run_json(&["reproduce", "appendix"]);
    assert!(app["details"]["max_ratio_deviation"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_example1_and_a_perturbed_copy() {
    let dir = TempDir::new().unwrap();
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&fixture("example1.json"))]);
    assert_eq!((code, report["status"].as_str()), (0, Some("PASS")));

    let clean = example1_channel_assemblage(&dir, 0.0);
    assert_eq!(run(&["verify", "--mode", "ns", s(&clean)]).0, 0);
    assert_eq!(run(&["verify", "--mode", "asym", s(&clean)]).0, 0);

    let bumped = example1_channel_assemblage(&dir, 0.01);
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&bumped)]);
    assert_eq!((code, report["status"].as_str()), (1, Some("FAIL")));
    let violations = report["details"]["choi_ns"]["violations"].as_array().unwrap();
    let marginal = violations.iter().find(|v| v["constraint"] == "marginal").expect("a marginal violation");
    assert!(marginal["magnitude"].as_f64().unwrap() >= 0.01 - 1e-12);
    assert!(marginal["parties"].as_array().unwrap().len() == 1);
}

#[test]
fn split_components_are_asymmetric_only() {
    let split = fixture("example1_split_1.json");
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&split)]);
    assert_eq!(code, 1);
    assert!((report["details"]["max_deviation"].as_f64().unwrap() - 0.0625).abs() < 1e-12);
    assert_eq!(run(&["verify", "--mode", "asym", s(&split)]).0, 0);
}

#[test]
fn kind_mismatches_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let state = Document::new(Payload::State(StateDoc { dims: vec![2], matrix: vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]] }));
    let path = write(&dir, "state.json", &state.to_json());
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&path)]);
    assert_eq!(code, 3);
    assert_eq!(report["status"], "INPUT_ERROR");
    assert_eq!(report["details"]["error"], "kind_mismatch");
    assert_eq!(report["details"]["found"], "state");
    assert_eq!(run(&["verify", "--mode", "cptp", s(&fixture("example1_expected.json"))]).0, 3);
    assert_eq!(run(&["lhs", s(&path)]).0, 3);
}

#[test]
fn truncated_and_malformed_files() {
    let dir = TempDir::new().unwrap();
    let text = std::fs::read_to_string(fixture("example1.json")).unwrap();
    let cut = write(&dir, "cut.json", &text[..500]);
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&cut)]);
    assert_eq!(code, 3);
    assert_eq!(report["details"]["error"], "syntax");
    assert_eq!(report["details"]["offset"], 500);

    let huge = write(&dir, "huge.json", &text.replacen("1.0", "1e999", 1));
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&huge)]);
    assert_eq!(code, 3);
    assert!(report["details"]["message"].as_str().unwrap().contains("line"));

    let binary = dir.path().join("bin.json");
    std::fs::write(&binary, [b'{', 0xff, b'}']).unwrap();
    let (code, report) = run_json(&["verify", "--mode", "ns", s(&binary)]);
    assert_eq!((code, report["details"]["offset"].as_u64()), (3, Some(1)));

    let (code, report) = run_json(&["verify", "--mode", "ns", "/nonexistent/file.json"]);
    assert_eq!((code, report["status"].as_str()), (3, Some("INPUT_ERROR")));
}

#[test]
fn schema_errors_carry_paths() {
    let text = std::fs::read_to_string(fixture("example1.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["payload"]["rho"]["colour"] = json!(1);
    match parse(v.to_string().as_bytes()) {
        Err(DocError::Schema { path, .. }) => assert_eq!(path, "$.payload.rho.colour"),
        other => panic!("{other:?}"),
    }

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["payload"]["povms"][1]["effects"][0][1].as_array_mut().unwrap().pop();
    match parse(v.to_string().as_bytes()) {
        Err(DocError::Dimension { path, .. }) => assert_eq!(path, "$.payload.povms[1].effects[0][1]"),
        other => panic!("{other:?}"),
    }

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["payload"]["rho"]["dims"] = json!([2, 3]);
    assert!(matches!(parse(v.to_string().as_bytes()), Err(DocError::Dimension { .. })));

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["version"] = json!(2);
    assert!(matches!(parse(v.to_string().as_bytes()), Err(DocError::Schema { .. })));

    let members = std::fs::read_to_string(fixture("example1_expected.json")).unwrap();
    let mut v: Value = serde_json::from_str(&members).unwrap();
    v["payload"]["members"].as_array_mut().unwrap().pop();
    match parse(v.to_string().as_bytes()) {
        Err(e @ DocError::Dimension { .. }) => assert!(e.to_string().contains("(11|11) is missing")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_finite_entries_are_rejected() {
    // JSON has no NaN literal; the check still guards documents built in code.
    let doc = Document::new(Payload::State(StateDoc { dims: vec![1], matrix: vec![vec![[f64::NAN, 0.0]]] }));
    match doc.check_dims() {
        Err(DocError::Schema { path, message }) => {
            assert_eq!(path, "$.payload.matrix[0][0]");
            assert!(message.contains("non-finite"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse(br#"{"kind":"state","version":1,"payload":{"dims":[1],"matrix":[[[NaN,0]]]}}"#), Err(DocError::Syntax { .. })));
}

#[test]
fn extremality_verdicts() {
    let dir = TempDir::new().unwrap();
    let cert_path = dir.path().join("cert.json");
    let (code, full) = run_json(&["extremality", "--mode", "full", s(&fixture("example1.json")), "--certificate", s(&cert_path)]);
    assert_eq!(code, 0);
    assert_eq!(full["details"]["certificate"]["verdict"], "UNIQUE_EXTREME");
    assert_eq!(full["details"]["certificate"]["nullity"], 0);
    assert_eq!(full["details"]["structural_check"]["settings"], json!([1, 1]));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert_eq!(written, full["details"]["certificate"]);

    let (code, asym) = run_json(&["extremality", "--mode", "asym", s(&fixture("example1.json"))]);
    assert_eq!(code, 0);
    let cert = &asym["details"]["certificate"];
    assert_eq!(cert["verdict"], "NON_UNIQUE");
    assert_eq!(cert["nullity"], 1);
    assert!(cert["witness_pair"]["plus"].is_array());
    assert!(asym["details"].get("structural_check").is_none());

    let (code, app) = run_json(&["extremality", "--mode", "asym", s(&fixture("appendix.json"))]);
    assert_eq!(code, 0);
    assert_eq!(app["details"]["certificate"]["verdict"], "UNIQUE_EXTREME");
}

/// One party, one setting, both members `I/4`.
fn mixed_assemblage(dir: &TempDir) -> PathBuf {
    let quarter = vec![vec![c(0.25), c(0.0)], vec![c(0.0), c(0.25)]];
    let doc = json!({
        "kind": "assemblage",
        "version": 1,
        "payload": {
            "settings": [1], "outcomes": [2], "trusted_dims": [2],
            "members": [
                { "a": [0], "x": [0], "matrix": quarter },
                { "a": [1], "x": [0], "matrix": quarter },
            ]
        }
    });
    write(dir, "mixed.json", &doc.to_string())
}

#[test]
fn rank_two_members_are_named() {
    let dir = TempDir::new().unwrap();
    let path = mixed_assemblage(&dir);
    assert_eq!(run(&["verify", "--mode", "ns", s(&path)]).0, 0);
    let (code, report) = run_json(&["extremality", "--mode", "full", s(&path)]);
    assert_eq!(code, 3);
    assert!(report["details"]["message"].as_str().unwrap().contains("(0|0)"));
}

#[test]
fn lhs_decisions() {
    let (code, report) = run_json(&["lhs", s(&fixture("example1.json"))]);
    assert_eq!((code, report["details"]["verdict"].as_str()), (1, Some("NO_LHS")));

    // Outcome a always prepares |a>, whatever the setting.
    let dir = TempDir::new().unwrap();
    let zero = vec![vec![c(0.5), c(0.0)], vec![c(0.0), c(0.0)]];
    let one = vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(0.5)]];
    let members: Vec<Value> = (0..2)
        .flat_map(|x| [json!({ "a": [0], "x": [x], "matrix": zero }), json!({ "a": [1], "x": [x], "matrix": one })])
        .collect();
    let doc = json!({
        "kind": "assemblage", "version": 1,
        "payload": { "settings": [2], "outcomes": [2], "trusted_dims": [2], "members": members }
    });
    let path = write(&dir, "local.json", &doc.to_string());
    let (code, report) = run_json(&["lhs", s(&path)]);
    assert_eq!(code, 0);
    let model = &report["details"]["model"];
    let total: f64 = model["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn security_certificate() {
    let (code, report) = run_json(&["security-cert", s(&fixture("example1.json"))]);
    assert_eq!(code, 0);
    assert_eq!(report["details"]["perfect_key"], true);
    assert_eq!(report["details"]["pinning"]["certified"], true);
    let (code, report) = run_json(&["security-cert", "--x-star", "1", s(&fixture("example1.json"))]);
    assert_eq!(code, 1);
    assert_eq!(report["details"]["pinning"]["certified"], false);

    let dir = TempDir::new().unwrap();
    let plus = Document::new(Payload::State(StateDoc { dims: vec![2], matrix: vec![vec![c(0.5), c(0.5)], vec![c(0.5), c(0.5)]] }));
    let rho = write(&dir, "plus.json", &plus.to_json());
    let (code, report) = run_json(&["security-cert", "--rho", s(&rho), s(&fixture("example1.json"))]);
    assert_eq!(code, 1);
    assert_eq!(report["details"]["perfect_key"], false);
}

#[test]
fn cptp_verification() {
    let dir = TempDir::new().unwrap();
    let id = |f: f64| vec![vec![c(f), c(0.0)], vec![c(0.0), c(f)]];
    let channel = |f: f64| {
        Document::new(Payload::Channel(ChannelDoc { out_dims: vec![2], in_dims: vec![2], choi: None, kraus: Some(vec![id(f)]) }))
    };
    let good = write(&dir, "good.json", &channel(1.0).to_json());
    let bad = write(&dir, "bad.json", &channel(0.9).to_json());
    assert_eq!(run(&["verify", "--mode", "cptp", s(&good)]).0, 0);
    let (code, report) = run_json(&["verify", "--mode", "cptp", s(&bad)]);
    assert_eq!(code, 1);
    assert_eq!(report["details"]["cp"], true);
    assert_eq!(report["details"]["tp"], false);
    assert_eq!(run(&["verify", "--mode", "cptp", s(&fixture("example1.json"))]).0, 0);

    let out = dir.path().join("choi.json");
    assert_eq!(run(&["choi", s(&good), "--out", s(&out)]).0, 0);
    let produced = commands::load(&out).unwrap();
    match produced.payload {
        Payload::Channel(c) => assert!(c.choi.is_some() && c.kraus.is_none()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reports_are_byte_deterministic() {
    for args in [
        vec!["reproduce", "asym-nonextremal"],
        vec!["extremality", "--mode", "asym", "FILE"],
        vec!["--output", "text", "verify", "--mode", "ns", "FILE"],
    ] {
        let f = fixture("example1.json");
        let args: Vec<&str> = args.iter().map(|a| if *a == "FILE" { s(&f) } else { a }).collect();
        let first = run(&args);
        assert_eq!(first, run(&args));
    }
    let (_, text) = run(&["--output", "text", "--timing", "reproduce", "key"]);
    assert!(text.starts_with("reproduce PASS\n"));
    assert!(!text.contains("elapsed"));
}

#[test]
fn tolerance_flags() {
    let (code, report) = run_json(&["--abs-tol", "1e-3", "reproduce", "key"]);
    assert_eq!(code, 0);
    assert_eq!(report["tolerances"]["abs_tol"], 1e-3);
    assert_eq!(run(&["--abs-tol=-1", "reproduce", "key"]).0, 3);
    assert_eq!(run(&["--rank-tol", "0", "reproduce", "key"]).0, 3);
    // Usage errors share the input-error code.
    assert_eq!(run(&["reproduce", "nothing"]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn schema_lists_every_kind() {
    let (code, report) = run_json(&["schema"]);
    assert_eq!(code, 0);
    let payloads = report["details"]["payloads"].as_object().unwrap();
    for k in ["state", "povm", "channel", "assemblage", "channel_assemblage", "realization"] {
        assert!(payloads.contains_key(k), "{k}");
    }
}

#[test]
fn library_entry_points_match_the_binary() {
    let tol = Tolerances::default();
    let doc = commands::load(&fixture("example1.json")).unwrap();
    assert_eq!(commands::verify(&doc, VerifyMode::Ns, tol).status, Status::Pass);
    assert_eq!(commands::extremality(&doc, ExtremalityMode::Full, None, tol).status, Status::Pass);
    assert_eq!(commands::reproduce(Target::Example1, tol).status, Status::Pass);
    let (_, text) = run(&["reproduce", "example1"]);
    assert_eq!(text.trim_end(), commands::reproduce(Target::Example1, tol).to_json());
}
