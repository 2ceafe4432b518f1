//! End-to-end tests of the `fracbv` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn fracbv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracbv"))
        .args(args)
        .env("FRACBV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        format!(
            "n = 64\nsamples = 6\nseed = 42\nk_max = 8\nrefine = false\n{body}output = \"{}\"\n",
            dir.join("out").display()
        ),
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn catalog_lists_four_maps() {
    let o = fracbv(&["catalog"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["doubling", "tent", "gauss", "cusp(0.75)"] {
        assert!(text.contains(name), "{text}");
    }
    let o = fracbv(&["catalog", "--json"]);
    let entries: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 4);
    let cusp = &entries[3];
    assert_eq!(cusp["r_limit"], 4.0);
    assert_eq!(cusp["beta"], 0.25);
    assert_eq!(entries[2]["infinite_partition"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(fracbv(&["frobnicate"]).status.code(), Some(1));
    let o = fracbv(&["analyze", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read config"));
    assert_eq!(fracbv(&["--help"]).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_fracbv"))
        .arg("catalog")
        .env("FRACBV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn boundary_beta_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "beta = 0.5\nr = 1.0\n");
    let o = fracbv(&["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("β > 1/(r+1)"), "{}", stderr(&o));
    let adm: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/admissibility.json")).unwrap())
            .unwrap();
    assert_eq!(adm["beta_ok"], false);
}

#[test]
fn non_expanding_map_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[map]\nexpansion_lambda = 1.5\n\n[[map.branches]]\nlo = 0.0\nhi = 1.0\nf = \"x\"\ndf = \"1\"\nfinv = \"x\"\n";
    let path = dir.path().join("run.toml");
    fs::write(&path, format!("n = 64\n{body}")).unwrap();
    let o = fracbv(&["density", "--config", path.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run_record.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn analyze_doubling_is_deterministic_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for out in [&first, &second] {
        let o = fracbv(&["analyze", "--config", &cfg, "-o", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = artifacts(&first);
    let b = artifacts(&second);
    assert_eq!(a.len(), 11);
    assert_eq!(a, b, "artifacts differ between identical runs");

    // Every density value is 1.
    let density = fs::read_to_string(first.join("density.csv")).unwrap();
    for line in density.lines() {
        let v: f64 = line.parse().unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    // The manifest lists every artifact with its checksum.
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("run_record.json")).unwrap()).unwrap();
    let manifest = record["artifacts"].as_array().unwrap();
    assert_eq!(manifest.len(), a.len());
    for entry in manifest {
        let file = entry["file"].as_str().unwrap();
        let bytes = fs::read(first.join(file)).unwrap();
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entry["sha256"].as_str().unwrap(), digest, "{file}");
    }
    assert_eq!(record["exit_code"], 0);
    assert!(record["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn norm_of_constant_density() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    fs::write(&input, "# constant density\n1\n1\n1\n1\n1\n1\n1\n1\n").unwrap();
    let out = dir.path().join("out");
    let o = fracbv(&["norm", input.to_str().unwrap(), "--alpha", "0.5", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let value: f64 = line
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 2.0 / 3.0).abs() < 1e-3, "{line}");
    assert!(out.join("norm.json").exists() && out.join("run_record.json").exists());
}

#[test]
fn decay_on_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracbv(&[
        "decay", "--map", "doubling", "--weight", "const:0.5", "--n", "256", "--steps", "6",
        "-o", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rate: f64 = text.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((rate - 0.5).abs() < 0.01, "{text}");
    assert!(dir.path().join("decay.csv").exists());
}

#[test]
fn ly_check_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run in ["x", "y"] {
        let out = dir.path().join(run);
        let o = fracbv(&[
            "ly-check", "--map", "tent", "--n", "64", "--samples", "5", "--seed", "9",
            "--no-refine", "-o", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        reports.push(fs::read(out.join("ly_report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn spectrum_and_density_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fracbv(&["spectrum", "--map", "tent", "--n", "64", "--k-max", "8", "-o", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let spec: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert!((spec["leading_eigenvalue"][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let o = fracbv(&["density", "--map", "cusp(0.75)", "--n", "64", "-o", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fixed-point residual"));
}

#[test]
fn custom_map_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[map]\nexpansion_lambda = 2.0\nr = inf\n\n\
        [[map.branches]]\nlo = 0.0\nhi = 0.5\nf = \"2*x\"\ndf = \"2\"\nfinv = \"x/2\"\n\n\
        [[map.branches]]\nlo = 0.5\nhi = 1.0\nf = \"2*x - 1\"\ndf = \"2\"\nfinv = \"(x + 1)/2\"\n\n\
        [weight]\nkind = \"pf\"\nbeta = 1.0\nholder_constant = 0.0\n";
    let cfg = small_config(dir.path(), "");
    let text = fs::read_to_string(&cfg).unwrap();
    fs::write(&cfg, format!("{text}{body}")).unwrap();
    let o = fracbv(&["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let density = fs::read_to_string(dir.path().join("out/density.csv")).unwrap();
    assert!(density.lines().all(|l| (l.parse::<f64>().unwrap() - 1.0).abs() < 1e-8));
}
