use std::path::Path;
use std::process::{Command, Output};

fn dlambda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlambda")).args(args).output().unwrap()
}

fn stdout_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn field(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn simulate_header_and_boundary_rows() {
    let out = dlambda(&["simulate", "--protocol", "optimal", "--alpha", "100"]);
    assert!(out.status.success());
    let rows = stdout_rows(&out);
    assert_eq!(
        rows[0].join(","),
        "zeta,theta,omega_c,omega_d,omega_p,omega_s,intensity_p,intensity_s,norm"
    );
    let last = rows.last().unwrap();
    assert_eq!(field(last, 0), 100.0);
    assert!((field(last, 7) - 0.9094).abs() < 5e-4);

    let rows = stdout_rows(&dlambda(&["simulate", "--protocol", "constant", "--alpha", "100"]));
    assert_eq!(field(&rows[1], 2), 1.0);
    assert!(field(&rows[1], 3).abs() < 1e-15);
}

#[test]
fn adiabatic_midpoint_has_balanced_controls() {
    let out = dlambda(&["simulate", "--protocol", "adiabatic", "--alpha", "100", "--zeta0", "50", "--zbar", "5"]);
    let rows = stdout_rows(&out);
    let mid = rows.iter().skip(1).find(|r| field(r, 0) == 50.0).unwrap();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    assert!((field(mid, 2) - half).abs() < 1e-15 && (field(mid, 3) - half).abs() < 1e-15);
}

#[test]
fn efficiency_rows_sorted_and_ordered() {
    let out = dlambda(&["efficiency", "--protocol", "optimal,constant", "--alpha-steps", "200"]);
    assert!(out.status.success());
    let rows = stdout_rows(&out);
    assert_eq!(rows[0].join(","), "alpha,protocol,eta_closed,eta_numeric");
    let body = &rows[1..];
    assert_eq!(body.len(), 400);
    let (constant, optimal) = body.split_at(200);
    assert!(constant.iter().all(|r| r[1] == "constant") && optimal.iter().all(|r| r[1] == "optimal"));
    for (c, o) in constant.iter().zip(optimal) {
        assert_eq!(c[0], o[0]);
        assert!(field(o, 3) >= field(c, 3));
        assert!((field(o, 2) - field(o, 3)).abs() < 1e-6);
    }
    assert_eq!(field(&optimal[199], 0), 100.0);
    assert!((field(&optimal[199], 2) - 0.9094).abs() < 5e-5);
    assert!((field(&constant[199], 2) - 0.9077).abs() < 5e-5);
}

#[test]
fn efficiency_methods_leave_blank_columns() {
    let rows = stdout_rows(&dlambda(&["efficiency", "--alpha-min", "5", "--alpha-max", "5", "--alpha-steps", "1", "--method", "closed"]));
    assert!(rows[1][3].is_empty() && !rows[1][2].is_empty());
    let rows = stdout_rows(&dlambda(&[
        "efficiency", "--protocol", "adiabatic", "--alpha-min", "5", "--alpha-max", "5", "--alpha-steps", "1",
    ]));
    assert!(rows[1][2].is_empty() && !rows[1][3].is_empty());
}

#[test]
fn verify_passes_by_default_and_warns_when_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = dlambda(&["verify", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["failures"], 0);

    let out = dlambda(&["verify", "--steps-per-unit", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["warnings"].as_u64().unwrap() > 0);
    for check in report["checks"].as_array().unwrap() {
        assert!(check["measured"].is_number() && check["threshold"].is_string());
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let out = dlambda(&["verify", "--alpha", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("InvalidAlpha"));
    assert_eq!(dlambda(&["simulate", "--protocol", "custom"]).status.code(), Some(2));
    assert_eq!(dlambda(&["simulate", "--steps-per-unit", "0.5"]).status.code(), Some(2));
    assert_eq!(dlambda(&["simulate", "--protocol", "sideways"]).status.code(), Some(2));
    assert_eq!(dlambda(&["search", "--segments", "1"]).status.code(), Some(2));
    assert_eq!(dlambda(&["efficiency", "--protocol", "custom"]).status.code(), Some(2));
    assert_eq!(dlambda(&["efficiency", "--alpha-min", "-1"]).status.code(), Some(2));
    assert_eq!(dlambda(&["nonsense"]).status.code(), Some(2));
}

fn search_to(dir: &Path) -> (serde_json::Value, std::path::PathBuf) {
    let json = dir.join("best.json");
    let out = dlambda(&[
        "search", "--alpha", "20", "--segments", "16", "--budget", "8000", "--seed", "3",
        "--out", json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    (v, dir.join("best.profile.txt"))
}

#[test]
fn search_profile_round_trips_through_custom_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let (report, table) = search_to(dir.path());
    let eta = report["efficiency"].as_f64().unwrap();
    assert!(eta <= report["optimal_bound"].as_f64().unwrap() + 1e-9);
    let rows = stdout_rows(&dlambda(&["simulate", "--protocol", "custom", "--profile-file", table.to_str().unwrap()]));
    let last = rows.last().unwrap();
    assert_eq!(field(last, 0), 20.0);
    assert!((field(last, 7) - eta).abs() < 1e-4);
}

#[test]
fn custom_profile_shorter_than_alpha_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("p.txt");
    std::fs::write(&table, "# short\n0 1.2\n5 0.3\n").unwrap();
    let out = dlambda(&["simulate", "--protocol", "custom", "--alpha", "10", "--profile-file", table.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ProfileDomainMismatch"));
}
