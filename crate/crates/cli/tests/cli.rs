use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn isospec(args: &[&str], log: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isospec"));
    cmd.args(args);
    match log {
        Some(level) => cmd.env("ISOSPEC_LOG", level),
        None => cmd.env_remove("ISOSPEC_LOG"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, out: &Path) -> Output {
    isospec(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()], Some("quiet"))
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn random_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r.toml", "experiment = \"framework_random\"\nn = 12\nseed = 42\ncount = 3\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    let ca = fs::read(a.join("spectral_report.csv")).unwrap();
    let cb = fs::read(b.join("spectral_report.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,lambda_ref_re,lambda_ref_im,lambda_pert_re,lambda_pert_im,abs_diff,vec_residual");
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn unperturbed_laplacian_reports_zero_difference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "l.toml", "experiment = \"laplace2d\"\nn = 8\nzeros = []\n");
    assert_eq!(run(&cfg, tmp.path()).status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("spectral_report.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(5).unwrap(), "0.0000000000000000e0", "{line}");
    }
}

#[test]
fn cauchy_run_passes_with_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "experiment = \"d1_cauchy\"\nn = 64\nsigma = \"affine(1,-1)\"\n");
    assert_eq!(run(&cfg, tmp.path()).status.code(), Some(0));
    let m = manifest(tmp.path());
    assert_eq!(m["passed"], Value::Bool(true));
    assert_eq!(m["exit_code"], 0);
    let checks = m["entries"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "nilpotence_certificate" && c["passed"] == true));
    assert!(m["entries"][0]["stages"].as_array().unwrap().iter().all(|s| s["seconds"].as_f64().unwrap() >= 0.0));
    assert_eq!(m["config"]["experiment"], "d1_cauchy");
}

#[test]
fn excluded_sigma_values_exit_with_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("c.toml", "experiment = \"d1_cauchy\"\nn = 32\nsigma = \"affine(-1,1)\"\n"),
        ("a.toml", "experiment = \"d1_antiperiodic\"\nn = 33\nsigma = \"cosine(1,-0.5)\"\n"),
    ] {
        let cfg = write_config(tmp.path(), name, body);
        let out = tmp.path().join(name.replace(".toml", ""));
        let o = run(&cfg, &out);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
        let m = manifest(&out);
        assert_eq!(m["exit_code"], 2);
        assert!(m["error"].as_str().unwrap().contains("inadmissible"));
    }
}

#[test]
fn config_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("experiment = \"laplace2d\"\nn = 8\nbogus = 1\n", "bogus"),
        ("experiment = \"laplace2d\"\nn = 8\nsigma = \"affine(1,-1)\"\n", "sigma"),
        ("experiment = \"laplace2d\"\nn = 8\nomega = { kind = \"re_power\" }\n", "omega.degree"),
        ("experiment = \"laplace2d\"\nn = 8\n[tolerances]\nmatch_tol = -1.0\n", "tolerances.match_tol"),
        ("experiment = \"laplace2d\"\nn = 20\nzeros = [[0.5, 0.5, 0]]\n", "zeros"),
        ("experiment = \"d1_antiperiodic\"\nn = 64\n", "n"),
        ("experiment = \"nope\"\nn = 8\n", "experiment"),
    ];
    for (i, (body, key)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{i}.toml"), body);
        let o = run(&cfg, &tmp.path().join(format!("bad{i}")));
        assert_eq!(o.status.code(), Some(2), "{body}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{key} not named in {err}");
    }
}

#[test]
fn sweep_rejects_a_single_size() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "experiment = \"framework_random\"\nn_list = [8]\n");
    let o = isospec(&["sweep", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], Some("quiet"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_list"));
}

#[test]
fn sweep_writes_a_convergence_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        "experiment = \"laplace2d\"\nn_list = [16, 20]\nzeros = [[0.5, 0.5, 1]]\n[output]\nformat = \"csv\"\n",
    );
    let o = isospec(&["sweep", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], Some("info"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n,max_abs_diff,riesz_condition,greens_discrepancy,verdict");
    assert!(lines[1].starts_with("16,") && lines[2].starts_with("20,"));
    assert!(lines.iter().any(|l| l.starts_with("trend:greens_discrepancy_decreasing")));
    assert!(tmp.path().join("spectral_report_n16.csv").exists());
    assert!(tmp.path().join("spectral_report_n20.csv").exists());
}

#[test]
fn json_format_is_supported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "j.toml",
        "experiment = \"framework_random\"\nn = 5\n[output]\nformat = \"json\"\n",
    );
    assert_eq!(run(&cfg, tmp.path()).status.code(), Some(0));
    let rows: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("spectral_report.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert!(rows[0]["abs_diff"].is_number());
}

#[test]
fn unknown_log_level_is_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r.toml", "experiment = \"framework_random\"\nn = 4\n");
    let o = isospec(&["run", cfg.to_str().unwrap()], Some("loud"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ISOSPEC_LOG"));
}

#[test]
fn missing_config_file_is_invalid_input() {
    let o = isospec(&["run", "/nonexistent/config.toml"], Some("quiet"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quiet_log_level_prints_nothing_on_success() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r.toml", "experiment = \"framework_random\"\nn = 4\n");
    let o = run(&cfg, tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stderr.is_empty());
}
