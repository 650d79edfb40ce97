//! End-to-end tests of the `qnd` binary: exit codes, report files, CSV
//! contracts, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use qnd_core::report::AnalysisReport;
use qnd_core::schema;
use qnd_core::zoo;

fn qnd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnd"))
}

fn write_pauli_bundle(dir: &Path) -> (String, String, String) {
    let (x, z) = zoo::pauli_xz_pair();
    let inst = zoo::luders(&x);
    let inst_path = dir.join("luders_x.json");
    let x_path = dir.join("pauli_x.json");
    let z_path = dir.join("pauli_z.json");
    std::fs::write(&inst_path, schema::render_instrument(&inst)).unwrap();
    std::fs::write(&x_path, schema::render_observable(&x)).unwrap();
    std::fs::write(&z_path, schema::render_observable(&z)).unwrap();
    (
        inst_path.to_str().unwrap().into(),
        x_path.to_str().unwrap().into(),
        z_path.to_str().unwrap().into(),
    )
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn analyze_luders_mub_bundle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, x, z) = write_pauli_bundle(dir.path());
    let report_path = dir.path().join("report.json");
    let out = qnd()
        .args([
            "analyze",
            "--instrument",
            &inst,
            "--obs-x",
            &x,
            "--obs-z",
            &z,
            "--restarts",
            "4",
            "--out",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let report =
        AnalysisReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report.noise_x.abs() < 1e-9);
    assert!((report.c - 0.5).abs() < 1e-12);
    assert!((report.disturbance_lower - 1.0).abs() < 1e-9);
    assert!((report.disturbance_upper - 1.0).abs() < 1e-6);
    assert!(report.all_passed());
    assert_eq!(report.instrument_id, "luders_x");
}

#[test]
fn analyze_trivial_instrument_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let (_, x, z) = write_pauli_bundle(dir.path());
    let inst_path = dir.path().join("trivial.json");
    std::fs::write(
        &inst_path,
        schema::render_instrument(&zoo::trivial_instrument(2)),
    )
    .unwrap();
    let out = qnd()
        .args([
            "analyze",
            "--instrument",
            inst_path.to_str().unwrap(),
            "--obs-x",
            &x,
            "--obs-z",
            &z,
            "--restarts",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let report = AnalysisReport::from_json(&stdout(&out)).unwrap();
    assert!((report.noise_x - 1.0).abs() < 1e-9);
    assert!(report.disturbance_lower.abs() < 1e-9);
    assert!(report.disturbance_upper.abs() < 1e-9);
}

#[test]
fn analyze_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, x, z) = write_pauli_bundle(dir.path());
    let inst_path = dir.path().join("weak.json");
    let (px, _) = zoo::pauli_xz_pair();
    std::fs::write(
        &inst_path,
        schema::render_instrument(&zoo::weak_measurement(&px, 0.6).unwrap()),
    )
    .unwrap();
    let run = || {
        let out = qnd()
            .args([
                "analyze",
                "--instrument",
                inst_path.to_str().unwrap(),
                "--obs-x",
                &x,
                "--obs-z",
                &z,
                "--restarts",
                "6",
                "--seed",
                "42",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        stdout(&out)
    };
    assert_eq!(run(), run());
}

#[test]
fn analyze_rejects_malformed_observable_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, x, _) = write_pauli_bundle(dir.path());
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, "{ \"eigenvalues\": [1.0, }").unwrap();
    let report_path = dir.path().join("report.json");
    let out = qnd()
        .args([
            "analyze",
            "--instrument",
            &inst,
            "--obs-x",
            &x,
            "--obs-z",
            bad_path.to_str().unwrap(),
            "--out",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(!report_path.exists(), "no report on failure");
    assert!(stderr(&out).contains("error"));
}

#[test]
fn analyze_rejects_incomplete_instrument_citing_residual() {
    let dir = tempfile::tempdir().unwrap();
    let (_, x, z) = write_pauli_bundle(dir.path());
    let inst_path = dir.path().join("leaky.json");
    std::fs::write(
        &inst_path,
        r#"{
            "dim_in": 2,
            "dim_out": 2,
            "outcomes": [
                { "label": "0", "kraus": [ [ [[0.9,0],[0,0]], [[0,0],[0.9,0]] ] ] }
            ]
        }"#,
    )
    .unwrap();
    let out = qnd()
        .args([
            "analyze",
            "--instrument",
            inst_path.to_str().unwrap(),
            "--obs-x",
            &x,
            "--obs-z",
            &z,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("completeness"), "stderr: {err}");
    assert!(err.contains("1.900e-1"), "stderr: {err}");
}

#[test]
fn analyze_csv_format_is_flat_key_value() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, x, z) = write_pauli_bundle(dir.path());
    let out = qnd()
        .args([
            "analyze",
            "--instrument",
            &inst,
            "--obs-x",
            &x,
            "--obs-z",
            &z,
            "--restarts",
            "2",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("key,value"));
    let mut noise_x = None;
    for line in lines {
        let (key, value) = line.split_once(',').expect("two fields per row");
        if key == "noise_x" {
            noise_x = Some(value.parse::<f64>().unwrap());
        }
        if key.ends_with(".status") {
            assert!(["pass", "fail", "skipped"].contains(&value));
        }
    }
    assert!(noise_x.unwrap().abs() < 1e-9);
}

#[test]
fn verify_is_deterministic_and_schedule_independent() {
    let run = |threads: Option<&str>| {
        let mut cmd = qnd();
        cmd.args(["verify", "--dim", "2", "--trials", "24", "--seed", "7"]);
        match threads {
            Some(n) => cmd.env("QND_THREADS", n),
            None => cmd.env_remove("QND_THREADS"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        stdout(&out)
    };
    let single = run(Some("1"));
    let multi = run(Some("3"));
    let default = run(None);
    assert_eq!(single, multi);
    assert_eq!(single, default);
    assert!(single.contains("violations: 0"));
    assert!(single.contains("tradeoff_certified"));
}

#[test]
fn verify_writes_summary_and_validates_dim() {
    let dir = tempfile::tempdir().unwrap();
    let summary_path = dir.path().join("summary.json");
    let out = qnd()
        .args([
            "verify",
            "--dim",
            "3",
            "--trials",
            "8",
            "--seed",
            "3",
            "--kraus-per-outcome",
            "2",
            "--out",
            summary_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["dim"], 3);
    assert_eq!(summary["trials"], 8);

    let out = qnd()
        .args(["verify", "--dim", "5", "--trials", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_produces_monotone_frontier_with_matching_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = qnd()
        .args([
            "sweep",
            "--family",
            "weak-measurement",
            "--from",
            "0",
            "--to",
            "1",
            "--steps",
            "21",
            "--restarts",
            "4",
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let body = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next(),
        Some("param,noise_x,disturbance_lower,disturbance_upper,v_n,v_d,bound_margin")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);

    // Noise is monotone nonincreasing in the measurement strength.
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + 1e-12, "noise not monotone: {w:?}");
    }

    // Endpoints match the trivial-coin and Lüders analyses.
    let first = &rows[0];
    assert!((first[0] - 0.0).abs() < 1e-15);
    assert!((first[1] - 1.0).abs() < 1e-9, "strength 0 noise");
    assert!(
        first[2].abs() < 1e-9 && first[3].abs() < 1e-6,
        "strength 0 bracket"
    );
    assert!(first[5].abs() < 1e-9, "strength 0 v_d");
    let last = &rows[20];
    assert!((last[0] - 1.0).abs() < 1e-15);
    assert!(last[1].abs() < 1e-9, "strength 1 noise");
    assert!((last[2] - 1.0).abs() < 1e-9 && (last[3] - 1.0).abs() < 1e-6);
    assert!((last[5] - 2.0).abs() < 1e-9, "strength 1 v_d");

    // The certified bound margin stays nonnegative along the sweep.
    for row in &rows {
        assert!(row[6] >= -1e-9, "bound margin {row:?}");
    }

    // Full-precision fields: parsing back and reformatting is stable.
    let reparsed: f64 = format!("{:.16e}", rows[7][1]).parse().unwrap();
    assert_eq!(reparsed, rows[7][1]);
}
