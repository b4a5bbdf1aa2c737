//! Black-box tests of the `d2d-sim` binary: exit-status contract, strict
//! config handling, output determinism and manifest integrity.

use std::path::Path;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_d2d-sim"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn usage_errors_exit_with_status_two() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--no-such-flag", "econ"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("occupation"));
}

#[test]
fn config_violations_exit_with_status_two_and_enumerate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bad.ini",
        "[economics]\np_min = 0.3\np_max = 0.2\n[street]\ngamma = -4\n",
    );
    let out = run(&["econ", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("p_min must be <= p_max"), "{err}");
    assert!(err.contains("gamma must be positive"), "{err}");
}

#[test]
fn unknown_and_duplicate_keys_are_rejected_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.ini", "[street]\nwidht_km = 5\n");
    let out = run(&["econ", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(stderr(&out).contains("unknown key"), "{}", stderr(&out));

    let duplicate = write(dir.path(), "dup.ini", "[street]\ngamma = 20\ngamma = 21\n");
    let out = run(&["econ", "--config", duplicate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    assert!(stderr(&out).contains("duplicate key"), "{}", stderr(&out));
}

#[test]
fn finite_size_refusal_exits_with_status_three() {
    let dir = tempfile::tempdir().unwrap();
    // 1.5 x 1.5 km at gamma 20 carries only ~450 expected crossroads.
    let config = write(
        dir.path(),
        "small.ini",
        "[street]\nwidth_km = 1.5\nheight_km = 1.5\n",
    );
    let out = run(&[
        "pstar",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("finite-size"), "{}", stderr(&out));
}

#[test]
fn percolation_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "det.ini",
        "[street]\nwidth_km = 2\nheight_km = 2\n[percolation]\nreplicates = 12\n",
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = run(&[
            "pstar",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    }
    let a = std::fs::read(out_a.join("pstar_curve.csv")).unwrap();
    let b = std::fs::read(out_b.join("pstar_curve.csv")).unwrap();
    assert_eq!(a, b, "same config must reproduce byte-identical CSV");
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "seeded.ini",
        "[street]\nwidth_km = 2\nheight_km = 2\nseed = 11\n[percolation]\nreplicates = 12\n",
    );
    let base = dir.path().join("base");
    let same = dir.path().join("same");
    let other = dir.path().join("other");
    for (out, seed) in [(&base, None), (&same, Some("11")), (&other, Some("12"))] {
        let mut args = vec![
            "pstar",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        if let Some(seed) = seed {
            args.extend(["--seed", seed]);
        }
        let result = run(&args);
        assert_eq!(result.status.code(), Some(0), "{}", stderr(&result));
    }
    let from_config = std::fs::read(base.join("pstar_curve.csv")).unwrap();
    let explicit = std::fs::read(same.join("pstar_curve.csv")).unwrap();
    let reseeded = std::fs::read(other.join("pstar_curve.csv")).unwrap();
    assert_eq!(
        from_config, explicit,
        "--seed equal to the config seed must not change bytes"
    );
    assert_ne!(
        reseeded, explicit,
        "a different seed must change the estimate"
    );
}

#[test]
fn manifests_record_digests_that_match_the_outputs() {
    use sha2::{Digest, Sha256};

    let dir = tempfile::tempdir().unwrap();
    let out = run(&["econ", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("econ_manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "econ");
    assert_eq!(manifest["master_seed"], 12345);
    assert_eq!(manifest["parameters"]["economics"]["p_max"], 0.2);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    assert_eq!(outputs[0]["file"], "econ_monthly.csv");
    let content = std::fs::read(dir.path().join("econ_monthly.csv")).unwrap();
    let digest = format!("{:x}", Sha256::digest(&content));
    assert_eq!(outputs[0]["sha256"].as_str().unwrap(), digest);
}

#[test]
fn occupation_grid_hits_the_analytic_corners() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "occ.ini",
        "[network]\nlambda_grid = 0,45\n[crossroad]\np_grid = 0,0.3,1\n",
    );
    let out = run(&[
        "occupation",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("occupation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,p,F");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // lambda = 0: no users, F = p exactly.
    assert_eq!(rows[0], vec![0.0, 0.0, 0.0]);
    assert!((rows[1][2] - 0.3).abs() < 1e-12);
    assert_eq!(rows[2][2], 1.0);
    // p = 1: certainly occupied at any intensity.
    assert_eq!(rows[5][2], 1.0);
    // Larger lambda at fixed p increases F.
    assert!(rows[4][2] > rows[1][2]);
}

#[test]
fn econ_summary_reports_the_break_even_month_or_never() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["econ", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let month: u32 = text
        .trim()
        .strip_prefix("roi_month=")
        .unwrap()
        .parse()
        .unwrap();
    assert!((40..=46).contains(&month), "{text}");

    let config = write(dir.path(), "g0.ini", "[economics]\nrevenue_per_user = 0\n");
    let out = run(&[
        "econ",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "roi_month=never");
}

#[test]
fn zero_range_pstar_flags_never_percolates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "r0.ini",
        "[network]\nrange_km = 0\n[percolation]\nreplicates = 8\n",
    );
    let out = run(&[
        "pstar",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("p_star=1.00000000e0"), "{text}");
    assert!(text.contains("never_percolates=true"), "{text}");
}

#[test]
fn street_dumps_are_consistent_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "dump.ini",
        "[street]\nwidth_km = 3\nheight_km = 3\n",
    );
    let out = run(&[
        "dump-streets",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let vertices = std::fs::read_to_string(dir.path().join("street_vertices.csv")).unwrap();
    let edges = std::fs::read_to_string(dir.path().join("street_edges.csv")).unwrap();
    let vertex_rows: Vec<&str> = vertices.lines().skip(1).collect();
    let edge_rows: Vec<&str> = edges.lines().skip(1).collect();
    assert!(vertex_rows.len() > 500);
    assert!(edge_rows.len() > vertex_rows.len());
    // Every edge endpoint refers to a dumped vertex, and lengths are positive.
    let ids: std::collections::BTreeSet<u32> = vertex_rows
        .iter()
        .map(|row| row.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ids.len(), vertex_rows.len(), "vertex ids must be unique");
    for row in &edge_rows {
        let fields: Vec<&str> = row.split(',').collect();
        let a: u32 = fields[1].parse().unwrap();
        let b: u32 = fields[2].parse().unwrap();
        let length: f64 = fields[3].parse().unwrap();
        assert!(ids.contains(&a) && ids.contains(&b));
        assert!(length > 0.0);
    }
    // The summary line reports the table sizes.
    let summary = stdout(&out);
    assert_eq!(
        summary.trim(),
        format!("vertices={} edges={}", vertex_rows.len(), edge_rows.len())
    );
}
