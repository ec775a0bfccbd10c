use std::process::Command;

use serde_json::Value;

fn ramify(args: &[&str]) -> (Value, i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(args)
        .env_remove("RAMIFY_PRECISION")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    (json, out.status.code().unwrap(), text)
}

fn spec_file(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("ramify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn converse_h11() {
    let (j, code, _) = ramify(&["verify", "converse", "--p", "3", "--b", "1", "--a", "4"]);
    assert_eq!(code, 0);
    assert_eq!(j["nonlog"], serde_json::json!(["2", "5", "16/3"]));
    assert_eq!(j["group"], "H(1,1)");
}

#[test]
fn converse_constraint_is_input_error() {
    let (j, code, _) = ramify(&["verify", "converse", "--p", "3", "--b", "1", "--a", "2"]);
    assert_eq!(code, 2);
    assert!(j["error"].as_str().unwrap().contains("-b mod 3"));
    assert!(j["hint"].is_string());
}

#[test]
fn breaks_of_s3_file() {
    let path = spec_file(
        "s3.json",
        r#"{"field": {"p": 3}, "steps": [{"type": "tame", "m": 2}, {"type": "artin_schreier", "rhs": "g1^-1"}]}"#,
    );
    let (j, code, _) = ramify(&["breaks", "--spec", &path]);
    assert_eq!(code, 0);
    assert_eq!(j["nonlog"], serde_json::json!(["1", "3/2"]));
    assert_eq!(j["theorem_imperfect"], "CONFIRMED");
}

#[test]
fn unramified_step_exits_2_with_step_index() {
    let path = spec_file(
        "bad.json",
        r#"{"field": {"p": 3}, "steps": [{"type": "artin_schreier", "rhs": "t^-1"}, {"type": "artin_schreier", "rhs": "1"}]}"#,
    );
    let (j, code, _) = ramify(&["build", "--spec", &path]);
    assert_eq!(code, 2);
    assert_eq!(j["step"], 2);
    assert!(j["hint"].as_str().unwrap().contains("unramified"));
}

#[test]
fn missing_file_and_bad_json() {
    assert_eq!(ramify(&["breaks", "--spec", "/nonexistent/x.json"]).1, 2);
    assert_eq!(ramify(&["breaks", "--spec", "{\"field\": 3}"]).1, 2);
}

#[test]
fn precision_failure_exits_3() {
    let args = ["verify", "converse", "--p", "3", "--b", "1", "--a", "7", "--precision", "64"];
    let (j, code, _) = ramify(&args);
    assert_eq!(code, 3, "{j}");
}

#[test]
fn build_summary() {
    let (j, code, _) = ramify(&["build", "--spec", "h11"]);
    assert_eq!(code, 0);
    assert_eq!(j["degree"], 27);
    assert_eq!(j["e"], 27);
    let breaks: Vec<i64> = j["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["break"].as_i64().unwrap())
        .collect();
    assert_eq!(breaks, [1, 10, 13]);
}

#[test]
fn galois_table() {
    let (j, code, _) = ramify(&["galois", "--spec", "s3"]);
    assert_eq!(code, 0);
    assert_eq!(j["group"], "S_3");
    assert_eq!(j["table"]["order"], 6);
    assert_eq!(j["automorphisms"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_verdicts() {
    assert_eq!(ramify(&["verify", "hasse-arf", "--spec", "c3xc3"]).1, 0);
    let (j, code, _) = ramify(&["verify", "imperfect", "--spec", "s3"]);
    assert_eq!((code, j["theorem_imperfect"].as_str()), (0, Some("CONFIRMED")));
    let (j, code, _) = ramify(&["verify", "composite", "--spec", "c3", "--with", "c3"]);
    assert_eq!(code, 2);
    assert!(j["hint"].as_str().unwrap().contains("disjoint"));
    let two = r#"{"field": {"p": 3}, "steps": [{"type": "artin_schreier", "rhs": "t^-2"}]}"#;
    let (j, code, _) = ramify(&["verify", "composite", "--spec", "c3", "--with", two]);
    assert_eq!(code, 0);
    assert_eq!(j["group"], "C_3 x C_3");
    assert_eq!(ramify(&["verify", "cp", "--p", "3", "--b", "3"]).1, 2);
    assert_eq!(ramify(&["verify", "s3"]).1, 0);
}

#[test]
fn random_composites_are_seeded() {
    let a = ramify(&["verify", "composite", "--random", "3", "--seed", "7"]);
    let b = ramify(&["verify", "composite", "--random", "3", "--seed", "7"]);
    assert_eq!(a.1, 0);
    assert_eq!(a.2, b.2);
    assert_eq!(a.0["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_byte_identical() {
    let args = ["breaks", "--spec", "h11_b2_a5"];
    assert_eq!(ramify(&args).2, ramify(&args).2);
}

#[test]
fn precision_flag_and_env() {
    let args = ["verify", "converse", "--p", "3", "--b", "1", "--a", "7"];
    let plain = ramify(&args).2;
    let mut fixed = args.to_vec();
    fixed.extend(["--precision", "256"]);
    assert_eq!(plain, ramify(&fixed).2);
    let out = Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(args)
        .env("RAMIFY_PRECISION", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_ramify"))
        .args(fixed)
        .env("RAMIFY_PRECISION", "64")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), plain);
}

#[test]
fn catalog_lists_specs() {
    let (j, code, _) = ramify(&["catalog"]);
    assert_eq!(code, 0);
    assert!(j["h11"]["steps"].is_array());
    let (j, _, _) = ramify(&["catalog", "s3"]);
    assert_eq!(j["steps"][0]["type"], "tame");
}

#[test]
fn table_format() {
    let (_, code, text) = ramify(&["breaks", "--spec", "c3", "--format", "table"]);
    assert_eq!(code, 0);
    assert!(text.lines().any(|l| l.starts_with("nonlog") && l.contains("\"2\"")));
}
