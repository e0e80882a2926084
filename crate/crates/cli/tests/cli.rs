use std::process::{Command, Output};

fn seqfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqfam"))
        .args(args)
        .env_remove("SEQFAM_TABLE_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn base_sequence_over_gf5() {
    // beta = 2: log(2) = 1, log(3) = 3, 4 + 1 = 0, log(4) = 2
    let out = seqfam(&["generate", "--p", "5", "--n", "1", "--M", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "# q=5 d=1 M=4 l=- c=-\n1,3,0,2\n");
}

#[test]
fn single_column_is_one_line() {
    let out = seqfam(&["generate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--column", "3", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let symbols: Vec<u32> = lines[0].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(symbols.len(), 15);
    assert!(symbols.iter().all(|&s| s < 5));

    let text = stdout(&seqfam(&["generate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--column", "3"]));
    assert_eq!(text.lines().next(), Some("# q=16 d=2 M=5 l=3 c=1"));
    assert_eq!(text.lines().nth(1), Some(lines[0]));
}

#[test]
fn incompatible_alphabet_is_a_usage_error() {
    let out = seqfam(&["generate", "--p", "2", "--n", "4", "--M", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("M must divide q−1"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

#[test]
fn bad_parameters_exit_2() {
    assert_eq!(seqfam(&["generate", "--p", "4", "--M", "3"]).status.code(), Some(2));
    assert_eq!(seqfam(&["family", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--policy", "loose"]).status.code(), Some(2));
    assert_eq!(seqfam(&["generate", "--p", "5"]).status.code(), Some(2));
    assert_eq!(seqfam(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn table_limit_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_seqfam"))
        .args(["generate", "--p", "2", "--n", "4", "--d", "2", "--M", "5"])
        .env("SEQFAM_TABLE_LIMIT", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("table limit"));

    let out = seqfam(&["generate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--table-limit", "255"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_manifest_and_payload() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    let payload = dir.path().join("payload.txt");
    let out = seqfam(&[
        "family", "--p", "2", "--n", "4", "--d", "2", "--M", "5",
        "--out", manifest.to_str().unwrap(),
        "--payload", payload.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(json["size"], 32);
    assert_eq!(json["M"], 5);
    assert_eq!(json["columns"].as_array().unwrap().len(), 8);
    let text = std::fs::read_to_string(&payload).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 64);
    assert_eq!(lines[0], "# q=16 d=2 M=5 l=1 c=1");
    assert_eq!(lines[62], "# q=16 d=2 M=5 l=8 c=4");
}

#[test]
fn strict_restriction_violation_exits_1() {
    let out = seqfam(&["family", "--p", "13", "--d", "2", "--M", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("restriction violated"));
    let out = seqfam(&["family", "--p", "13", "--d", "2", "--M", "3", "--policy", "relaxed-d2"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

fn without_elapsed(mut v: serde_json::Value) -> serde_json::Value {
    v["correlation"].as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn correlate_is_deterministic() {
    let args = ["correlate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--jobs", "2"];
    let first = seqfam(&args);
    let second = seqfam(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    let a: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!(without_elapsed(a.clone()), without_elapsed(b));
    assert_eq!(a["correlation"]["family_size"], 32);
    assert_eq!(a["correlation"]["within_bound"], true);
    assert_eq!(a["inequivalence"]["inequivalent"], true);
}

#[test]
fn correlate_histogram_csv() {
    let out = seqfam(&["correlate", "--p", "2", "--n", "4", "--d", "2", "--M", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("magnitude,count\n"));
    let total: u64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    // 16 members, all pairs i ≤ j over 15 shifts, minus the 16 trivial ones
    assert_eq!(total, 136 * 15 - 16);
}

#[test]
fn correlate_single_pair() {
    let out = seqfam(&["correlate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--column", "1", "3", "--tau", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tau"], 2);
    assert_eq!(v["bound"], 13.0);
    assert!(v["magnitude"].as_f64().unwrap() <= 13.0);

    let out = seqfam(&["correlate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--column", "1", "1", "--tau", "0"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["magnitude"].as_f64().unwrap() - 15.0).abs() < 1e-9);

    let out = seqfam(&["correlate", "--p", "2", "--n", "4", "--d", "2", "--M", "5", "--column", "1", "17", "--tau", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn count_single_and_sweep() {
    let out = seqfam(&["count", "--p", "2", "--n", "4", "--d", "2", "--M", "5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lambda_size_formula"], 9);
    assert_eq!(v["family_size"], 32);

    let out = seqfam(&["count", "--p", "3", "--sweep", "2..4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,d,M,lambda,family_size,asymptotic,ratio");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("3,2,2,3,2,"));
}

#[test]
fn verify_reports_every_check() {
    let out = seqfam(&["verify", "--p", "2", "--n", "4", "--d", "2", "--M", "5"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    assert!(checks.iter().all(|c| c["passed"] == true));

    let out = seqfam(&["verify", "--p", "13", "--d", "2", "--M", "3", "--policy", "relaxed-d2", "--format", "text"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("overall: PASS\n"));
}
