//! End-to-end tests of the command-line surface: output formats, file
//! artifacts, determinism, and exit codes.

use std::fs;
use std::process::Command;

use tempfile::tempdir;

fn run(args: &[&str]) -> (i32, String) {
    let mut full = vec!["emq"];
    full.extend_from_slice(args);
    let mut out = Vec::new();
    let code = emq::cli::run_with(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn kv_value(output: &str, key: &str) -> Option<String> {
    output
        .lines()
        .find_map(|line| line.strip_prefix(&format!("{key}=")).map(str::to_string))
}

#[test]
fn analyze_nemo_reports_asymptotic_compression() {
    let (code, out) = run(&["analyze", "--family", "nemo", "--p", "0.666"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(kv_value(&out, "R").as_deref(), Some("inf"));
    assert_eq!(kv_value(&out, "k").as_deref(), Some("inf"));
    let cq_inf: f64 = kv_value(&out, "Cq_inf").unwrap().parse().unwrap();
    assert!((cq_inf - 1.0332).abs() < 5e-4, "Cq_inf = {cq_inf}");
    let e: f64 = kv_value(&out, "E").unwrap().parse().unwrap();
    let c_mu: f64 = kv_value(&out, "C_mu").unwrap().parse().unwrap();
    assert!(e < cq_inf && cq_inf < c_mu);
}

#[test]
fn analyze_flags_nonminimal_and_minimizes_on_request() {
    let (code, out) = run(&["analyze", "--family", "biased-coins", "--p", "0.5"]);
    assert_eq!(code, 0);
    assert!(out.contains("warning=machine is not minimal"));

    let (code, out) = run(&[
        "analyze",
        "--family",
        "biased-coins",
        "--p",
        "0.5",
        "--minimize",
    ]);
    assert_eq!(code, 0);
    assert_eq!(kv_value(&out, "C_mu").as_deref(), Some("0"));
    assert_eq!(kv_value(&out, "E").as_deref(), Some("0"));
    assert_eq!(kv_value(&out, "Cq_0").as_deref(), Some("0"));
    assert_eq!(kv_value(&out, "R").as_deref(), Some("0"));
    assert_eq!(kv_value(&out, "k").as_deref(), Some("0"));
}

#[test]
fn analyze_single_state_machine_is_all_zero() {
    let (code, out) = run(&[
        "analyze",
        "--family",
        "random",
        "--n-states",
        "1",
        "--machine-seed",
        "5",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(kv_value(&out, "C_mu").as_deref(), Some("0"));
    assert_eq!(kv_value(&out, "Cq_0").as_deref(), Some("0"));
}

#[test]
fn analyze_csv_format_emits_measure_row() {
    let (code, out) = run(&[
        "analyze",
        "--family",
        "rk-golden-mean",
        "--R",
        "4",
        "--k",
        "3",
        "--p",
        "0.505",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("name,param,h_mu,C_mu,E,E_status,R,k"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("rk-golden-mean,0.505,"));
    assert!(row.ends_with(",converged,4,3"));
}

#[test]
fn analyze_rejects_invalid_document_with_exit_2() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"name":"bad","alphabet":["0","1"],"states":["A"],
            "transitions":[{"from":"A","symbol":"0","to":"A","prob":0.5},
                           {"from":"A","symbol":"1","to":"A","prob":0.6}]}"#,
    )
    .unwrap();
    let (code, out) = run(&["analyze", "--machine", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("stochasticity"), "{out}");
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--family",
        "nemo",
        "--grid",
        "0.2:0.8:4",
        "--L",
        "0,1,2",
        "--inf",
        "--out",
        path.to_str().unwrap(),
    ];
    let (code, _) = run(&args);
    assert_eq!(code, 0);
    let first = fs::read_to_string(&path).unwrap();
    let (code, _) = run(&args);
    assert_eq!(code, 0);
    let second = fs::read_to_string(&path).unwrap();
    assert_eq!(first, second, "sweep output is not byte-stable");

    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("name,param,L,Cq,method,err_bound,C_mu,E,E_status")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 4); // 4 params × (3 horizons + inf)
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], "nemo");
        let cq: f64 = cols[3].parse().unwrap();
        let c_mu: f64 = cols[6].parse().unwrap();
        let e: f64 = cols[7].parse().unwrap();
        assert!(e - 1e-6 <= cq && cq <= c_mu + 1e-9, "row violates bounds: {row}");
    }
    // Asymptotic rows carry the solver's error bound.
    assert!(rows.iter().any(|r| r.contains(",inf,") && r.contains("asymptotic")));
}

#[test]
fn sweep_single_point_grid_and_brute_method() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let (code, _) = run(&[
        "sweep",
        "--family",
        "biased-coins",
        "--grid",
        "0.666:0.666:1",
        "--L",
        "0,1,2",
        "--method",
        "both",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6); // one param × 3 horizons × 2 methods
    // gram and brute rows agree.
    for pair in rows.chunks(2) {
        let a: Vec<&str> = pair[0].split(',').collect();
        let b: Vec<&str> = pair[1].split(',').collect();
        assert_eq!(a[2], b[2]);
        let va: f64 = a[3].parse().unwrap();
        let vb: f64 = b[3].parse().unwrap();
        assert!((va - vb).abs() < 1e-10);
        assert_eq!(a[4], "gram");
        assert_eq!(b[4], "brute");
    }
}

#[test]
fn verify_small_corpus_passes() {
    let (code, out) = run(&[
        "verify",
        "--Lmax",
        "3",
        "--n-random",
        "4",
        "--skip-measurement-test",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ok   nemo(p=0.666): gram equals brute-force overlaps"));
    assert!(out.contains("verify: 0 failure(s)"));
}

#[test]
fn verify_rejects_corrupted_machine_with_named_rule() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("corrupt.json");
    fs::write(
        &path,
        r#"{"name":"corrupt","alphabet":["0","1"],"states":["A","B"],
            "transitions":[{"from":"A","symbol":"0","to":"A","prob":0.7},
                           {"from":"A","symbol":"1","to":"B","prob":0.4},
                           {"from":"B","symbol":"0","to":"A","prob":1.0}]}"#,
    )
    .unwrap();
    let (code, out) = run(&["verify", "--machine", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.contains("stochasticity violation"), "{out}");
}

#[test]
fn verify_exceeding_brute_cap_exits_4() {
    let (code, out) = run(&[
        "verify",
        "--Lmax",
        "13",
        "--n-random",
        "1",
        "--skip-measurement-test",
    ]);
    assert_eq!(code, 4, "{out}");
    assert!(out.contains("cap exceeded"));
}

#[test]
fn survey_reports_finding_and_exit_3_when_curve_increases() {
    // Seeds 0..=11 include a machine whose compression curve rises; the
    // survey must surface it as a finding and fail.
    let dir = tempdir().unwrap();
    let path = dir.path().join("survey.csv");
    let (code, out) = run(&[
        "survey",
        "--n",
        "12",
        "--seed",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{out}");
    assert!(out.contains("FINDING"), "{out}");
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("seed,n_states,n_minimized,R,k,cq_monotone,jozsa_all_psd,jozsa_min_eig"));
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().any(|l| l.contains(",false,")));
}

#[test]
fn survey_clean_seed_range_exits_0() {
    let (code, out) = run(&["survey", "--n", "8", "--seed", "0"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("monotonicity violations: 0"));
}

#[test]
fn survey_empty_is_trivially_clean() {
    let (code, out) = run(&["survey", "--n", "0"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("surveyed 0 machines"));
}

#[test]
fn sample_is_deterministic_and_respects_start() {
    let (code, out) = run(&[
        "sample",
        "--family",
        "rk-golden-mean",
        "--R",
        "4",
        "--k",
        "3",
        "--p",
        "0.505",
        "--length",
        "6",
        "--seed",
        "9",
        "--start",
        "B",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    let word = lines.next().unwrap();
    let states = lines.next().unwrap();
    assert_eq!(word.len(), 6);
    assert!(states.starts_with("B "));
    let (_, again) = run(&[
        "sample", "--family", "rk-golden-mean", "--R", "4", "--k", "3", "--p", "0.505",
        "--length", "6", "--seed", "9", "--start", "B",
    ]);
    assert_eq!(out, again);

    let (code, _) = run(&[
        "sample", "--family", "nemo", "--p", "0.5", "--start", "Z",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn export_round_trips_through_analyze() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("nemo.json");
    let (code, _) = run(&[
        "export", "--family", "nemo", "--p", "0.666", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["name"], "nemo");
    assert_eq!(doc["states"].as_array().unwrap().len(), 3);

    let (code, out) = run(&["analyze", "--machine", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let cq_inf: f64 = kv_value(&out, "Cq_inf").unwrap().parse().unwrap();
    assert!((cq_inf - 1.0332).abs() < 5e-4);
}

#[test]
fn pmm_export_names_merger_edge() {
    let (code, out) = run(&[
        "pmm", "--family", "rk-golden-mean", "--R", "4", "--k", "3", "--p", "0.505",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let edges = doc["edges"].as_array().unwrap();
    let mergers: Vec<_> = edges.iter().filter(|e| e["merger"] == true).collect();
    assert_eq!(mergers.len(), 1);
    assert_eq!(mergers[0]["to_state"], "A");
}

#[test]
fn unknown_family_is_a_usage_error() {
    let (code, out) = run(&["analyze", "--family", "unknown"]);
    assert_eq!(code, 2);
    assert!(out.contains("expected biased-coins"), "{out}");
}

#[test]
fn binary_entrypoint_matches_library_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_emq");
    let ok = Command::new(exe)
        .args(["analyze", "--family", "biased-coins", "--p", "0.3"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("C_mu=1"));

    let bad = Command::new(exe)
        .args(["analyze", "--family", "biased-coins", "--p", "1.5"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
