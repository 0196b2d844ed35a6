use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermocat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn fig1_defaults() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(dir.path())["results"];
    assert!((f(&r["p"]["visibility"]) - 1.0).abs() < 1e-3);
    let step = f(&r["x_peak_grid_step"]);
    let peaks: Vec<f64> = r["x_peaks"].as_array().unwrap().iter().map(f).collect();
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0] + 100.0).abs() <= step && (peaks[1] - 100.0).abs() <= step);
    let csv = fs::read_to_string(dir.path().join("fig1_marginal_x.csv")).unwrap();
    assert!(csv.starts_with("x,density\n"));
}

#[test]
fn fig1_pure_cat_limit() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig1", "-V", "1", "-d", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(dir.path())["results"];
    assert!((f(&r["p"]["fringe_spacing"]) - std::f64::consts::PI / 4.0).abs() < 1e-3);
}

#[test]
fn fig2_reports_both_probabilities() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig2", "--grid-steps", "31"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(dir.path())["results"];
    assert!((f(&r["minus"]["w_origin"]) + 2.0 / std::f64::consts::PI).abs() < 0.01);
    assert_eq!(f(&r["plus"]["grid_max"]["x"]), 0.0);
    assert_eq!(f(&r["plus"]["grid_max"]["p"]), 0.0);
    let p = &r["probabilities"];
    assert!((f(&p["trace_based"]["minus"]) - 0.495099).abs() < 1e-6);
    assert!((f(&p["formula_1_pm_exp"]["minus"]) - 0.009901).abs() < 1e-6);
    let oc = &p["oracle_check"];
    assert!((f(&oc["oracle_minus"]) - f(&oc["trace_based_minus"])).abs() < 1e-6);
    let grid = fs::read_to_string(dir.path().join("fig2_wigner_minus.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 31 * 31);
}

#[test]
fn fig3_visibility() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(dir.path())["results"];
    assert!((f(&r["visibility_x_rotated"]) - 1.0).abs() < 1e-3);
}

#[test]
fn fig4b_final_row() {
    let dir = TempDir::new().unwrap();
    let o = run(&["fig4b"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = manifest(dir.path())["results"]["rows"].as_array().unwrap().clone();
    // V = 1 at d = 0 is the vacuum
    assert!(f(&rows[0]["bell"]["b_max"]) <= 2.0 + 1e-6);
    let last = rows.last().unwrap();
    assert_eq!(f(&last["variance"]), 1000.0);
    assert!((f(&last["bell"]["b_max"]) - 2.32449).abs() < 0.05);
}

#[test]
fn outputs_are_byte_stable_across_thread_counts() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["fig4a", "-V", "100", "--grid-min", "5", "--grid-max", "50", "--grid-steps", "4"];
    let oa = run(&[&args[..], &["--threads", "1"]].concat(), a.path());
    let ob = run(&[&args[..], &["--threads", "4"]].concat(), b.path());
    assert!(oa.status.success() && ob.status.success());
    for name in ["fig4a.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let timing: Value = serde_json::from_str(&fs::read_to_string(a.path().join("timing.json")).unwrap()).unwrap();
    assert_eq!(timing["threads"], 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# state\nvariance = 10\ndisplacement = 0\nsign = +\nstate = split\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["state-info", "--config", cfg.to_str().unwrap(), "-V", "3"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(f(&m["parameters"]["variance"]), 3.0);
    assert_eq!(m["parameters"]["state"], "split");
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, m["results"]);
}

#[test]
fn state_info_bookkeeping() {
    let dir = TempDir::new().unwrap();
    let o = run(&["state-info", "--state", "split", "-V", "3", "-d", "1", "--sign", "-"], dir.path());
    assert!(o.status.success());
    let r = &manifest(dir.path())["results"];
    let arms: Vec<f64> = r["mean_photon"].as_array().unwrap().iter().map(f).collect();
    assert!((arms[0] - 1.25).abs() < 0.1 && (arms[1] - 1.25).abs() < 0.1);
    assert!((f(&r["temperature"]) - 1.0 / std::f64::consts::LN_2).abs() < 1e-11);

    let dir = TempDir::new().unwrap();
    let o = run(&["state-info", "--state", "thermal", "-V", "10", "-d", "0"], dir.path());
    assert!(o.status.success());
    assert!((f(&manifest(dir.path())["results"]["linear_entropy"]) - 0.9).abs() < 1e-9);
}

#[test]
fn decoherence_reports_crossing() {
    let dir = TempDir::new().unwrap();
    let o = run(&["decoherence", "--case", "v3d1", "--grid-steps", "5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = &manifest(dir.path())["results"]["v3d1"]["crossing"];
    assert!(f(&c["b_max_at_zero"]) > 2.0);
    let g = f(&c["gamma_t"]);
    assert!(g > 0.0 && g < 0.1, "{g}");
    let csv = fs::read_to_string(dir.path().join("decoherence_v3d1.csv")).unwrap();
    assert!(csv.starts_with("gamma_t,b_max,a_re"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn bad_parameters_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["fig1", "-V", "0.5"][..],
        &["fig4b", "--transmittance", "2"],
        &["decoherence", "--gamma-t", "-1"],
        &["fig2", "--grid-min", "1", "--grid-max", "-1"],
        &["fig1", "--sign", "?"],
        &["fig1", "--bogus"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = red\n").unwrap();
    let o = run(&["fig1", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_check_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(&["oracle-check"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &manifest(dir.path())["results"];
    assert_eq!(r["failures"], 0);
    assert_eq!(r["cases"], 72);
}
