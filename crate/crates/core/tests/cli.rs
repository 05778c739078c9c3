use std::path::Path;
use std::process::{Command, Output};

fn wgfem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgfem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) {
    std::fs::write(dir.join("study.cfg"), text).unwrap();
}

const SMALL: &str = "# two-level study\nk=2\nj=1\nl=1\nstabilizer=projected\nn_levels=4,8\ntau=1e-2\nT=1\nformat=csv\n";

#[test]
fn study_writes_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = wgfem(&["study", "study.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h_label,tau,triple_bar_error,triple_bar_order,l2_error,l2_order,status");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1/4,1.00000e-02,"));
    assert!(lines[2].ends_with(",converged"));
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = wgfem(
        &["study", "study.cfg", "--levels", "2,4", "--set", "gamma=0", "--format", "markdown", "--output", "t.md"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let md = std::fs::read_to_string(dir.path().join("t.md")).unwrap();
    assert!(md.contains("| 1/2 | 5.00000e-01 |"), "{md}");
    assert!(md.contains("| 1/4 | 2.50000e-01 |"), "{md}");
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    for args in [
        vec!["study", "study.cfg", "--set", "colour=blue"],
        vec!["study", "missing.cfg"],
        vec!["study", "study.cfg", "--levels", "8,4"],
        vec!["reproduce-table", "99"],
        vec!["reproduce-table", "2", "--reference-tau"],
        vec!["verify", "--check", "no such check"],
    ] {
        let out = wgfem(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn golden_mismatch_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgfem(&["reproduce-table", "16", "--levels", "4,8", "--reference-tau", "--order-tol", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1 failed") || text.contains("2 failed"), "{text}");
}

#[test]
fn reproduce_table_reports_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgfem(&["reproduce-table", "16", "--levels", "4,8", "--reference-tau"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1/8,1.00000e-04,1.80544e-02,"), "{text}");
    assert!(text.contains("cells checked, 0 failed"), "{text}");
}

#[test]
fn export_surface_samples_a_grid() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let out = wgfem(&["export-surface", "study.cfg", "--set", "samples=5", "--set", "surface=exact"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = wgfem::harness::parse_surface(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 25);
    assert!((rows[12][2] - (-1.0f64).exp()).abs() < 1e-5);
}

#[test]
fn verify_runs_selected_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = wgfem(&["verify", "--check", "quadrature moment exactness"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("PASS quadrature moment exactness"));
    let list = wgfem(&["verify", "--list"], dir.path());
    assert_eq!(String::from_utf8(list.stdout).unwrap().lines().count(), 12);
}
