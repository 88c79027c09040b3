//! End-to-end checks of the binary: exit codes, output shape, and error
//! reporting.

use std::path::Path;
use std::process::{Command, Output};

fn root() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../..")
}

fn lprx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lprx"))
        .current_dir(root())
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn decode_configuration_exits_zero() {
    let out = lprx(&["decode", "--model", "models/repetition.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("outcome: configuration"));
    assert!(text.contains("configuration: 1 1"));
    assert!(text.contains("certified-optimal: true"));
}

#[test]
fn decode_failure_exits_two() {
    let out = lprx(&["decode", "--model", "models/halfint_witness.json"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout_of(&out);
    assert!(text.contains("outcome: failure"));
    assert!(text.contains("=1/2"));
}

#[test]
fn malformed_json_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ this is not json").unwrap();
    let out = lprx(&["decode", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unknown_flag_exits_one() {
    let out = lprx(&["decode", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decode_alist_modes_agree() {
    // A noiseless all-zero transmission: both the explicit path and the
    // generic analysis formulation must decode the zero codeword.
    let dir = tempfile::tempdir().unwrap();
    let rx = dir.path().join("rx.txt");
    std::fs::write(&rx, "1.5\n1.5\n1.5\n1.5\n1.5\n1.5\n1.5\n").unwrap();
    let common = [
        "decode",
        "--alist",
        "models/hamming74.alist",
        "--taps",
        "1.0,0.5",
        "--received",
        rx.to_str().unwrap(),
        "--snr-db",
        "12",
    ];
    let explicit = lprx(&common);
    assert_eq!(explicit.status.code(), Some(0));
    assert!(stdout_of(&explicit).contains("codeword: 0 0 0 0 0 0 0"));

    let mut with_q = common.to_vec();
    with_q.extend_from_slice(&["--formulation", "q"]);
    let generic = lprx(&with_q);
    assert_eq!(generic.status.code(), Some(0), "{}", String::from_utf8_lossy(&generic.stderr));
    assert!(stdout_of(&generic).contains("codeword: 0 0 0 0 0 0 0"));
}

#[test]
fn simulate_emits_expected_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rates.csv");
    let out = lprx(&[
        "simulate",
        "--alist",
        "models/triangle.alist",
        "--taps",
        "1.0,0.5",
        "--snr-db",
        "30,40",
        "--trials",
        "10",
        "--seed",
        "11",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "snr_db,trials,wer,ber,failure_rate,ml_cert_rate,sp_lp_agreement");
    // Huge SNR rows are error free, and every float field survives a
    // parse/print round trip losslessly (17 significant digits).
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[1], "10");
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(fields[4].parse::<f64>().unwrap(), 0.0);
        for field in [fields[0], fields[2], fields[3], fields[4], fields[5], fields[6]] {
            let value: f64 = field.parse().unwrap();
            assert_eq!(format!("{value:.16e}"), field);
        }
    }

    let zero_trials = lprx(&[
        "simulate",
        "--alist",
        "models/triangle.alist",
        "--taps",
        "1.0,0.5",
        "--snr-db",
        "30",
        "--trials",
        "0",
        "--seed",
        "11",
    ]);
    assert_eq!(zero_trials.status.code(), Some(1));
}

#[test]
fn compare_emits_per_trial_rows() {
    let out = lprx(&["compare", "--model", "models/tree5.json", "--trials", "8", "--seed", "21"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "trial,lp_outcome,lp_objective,lp_config,sp_config,sp_valid,agreement");
    for (i, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{i},")), "row {i} out of order: {line}");
        // The relaxation is tight on this tree: never a failure row.
        assert!(line.contains(",configuration,"), "row {i}: {line}");
        // Exact objective strings parse back to the same rational.
        let objective = line.split(',').nth(2).unwrap();
        let parsed = lprx_core::rat::parse_ratio(objective).unwrap();
        assert_eq!(lprx_core::rat::format_ratio(&parsed), objective);
    }

    let zero = lprx(&["compare", "--model", "models/tree5.json", "--trials", "0", "--seed", "1"]);
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn cover_roundtrip_reports_and_rejects() {
    let out = lprx(&[
        "cover-roundtrip",
        "--model",
        "models/triangle.json",
        "--point",
        "models/triangle_half_point.json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("degree: 2"));
    assert!(text.contains("valid: true"));
    assert!(text.contains("roundtrip-exact: true"));

    // Infeasible point: rejected with the violated constraints named.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_point.json");
    std::fs::write(
        &bad,
        r#"{"g": [["2", "1/2"], ["1/2", "1/2"], ["1/2", "1/2"]],
            "p": [["1/2", "1/2"], ["1/2", "1/2"], ["1/2", "1/2"]]}"#,
    )
    .unwrap();
    let out = lprx(&[
        "cover-roundtrip",
        "--model",
        "models/triangle.json",
        "--point",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fm(0,0)"));
}

#[test]
fn validate_model_reports_structure() {
    let out = lprx(&["validate-model", "--model", "models/triangle.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("variables: 3"));
    assert!(text.contains("valid-configurations: 2"));
    assert!(text.contains("evidence-projection-injective: true"));

    // Tiny cap: the enumeration is skipped but validation still passes.
    let capped =
        lprx(&["validate-model", "--model", "models/triangle.json", "--cap", "4"]);
    assert_eq!(capped.status.code(), Some(0));
    assert!(stdout_of(&capped).contains("not enumerated"));
}

#[test]
fn thread_pool_env_is_respected() {
    let out = Command::new(env!("CARGO_BIN_EXE_lprx"))
        .current_dir(root())
        .env("LPRX_THREADS", "1")
        .args(["compare", "--model", "models/repetition.json", "--trials", "4", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_of(&out).lines().count(), 5);
}

#[test]
fn witness_model_drives_the_full_pseudo_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cover = dir.path().join("cover.json");
    let out = lprx(&[
        "cover-roundtrip",
        "--model",
        "models/halfint_witness.json",
        "--solve",
        "--out",
        cover.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("receiver outcome: failure"));
    assert!(text.contains("degree: 2"));
    assert!(text.contains("roundtrip-exact: true"));
    assert!(Path::new(&cover).exists());
}
