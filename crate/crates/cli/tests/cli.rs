use serde_json::Value;
use std::process::{Command, Output};

fn shearlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shearlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = shearlab(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = shearlab(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn couette_spectrum_is_stable() {
    let v = json(&["spectrum", "--flow", "couette", "--bc", "S", "--alpha", "1", "--beta", "1000"]);
    assert_eq!(v["flow"], "couette");
    assert_eq!(v["bc"], "S");
    let eig = v["eigenvalues_Lambda"].as_array().unwrap();
    assert!(!eig.is_empty());
    assert!(eig.iter().all(|z| z[0].as_f64().unwrap() > 0.0));
}

#[test]
fn critical_reynolds_of_plane_poiseuille() {
    let v = json(&["critical-reynolds", "--flow", "poiseuille", "--alpha", "1.02"]);
    let re = v["reynolds"].as_f64().unwrap();
    assert!((re / 5772.0 - 1.0).abs() < 0.01, "{re}");
}

#[test]
fn constants_report() {
    let v = json(&["constants"]);
    assert!((v["re_nu1"].as_f64().unwrap() - 1.169054).abs() < 1e-6);
    assert!(v["theta1r"].as_f64().unwrap() > 0.0);
    assert!(v["hat_mu_m"].as_f64().unwrap() > 0.0);
}

#[test]
fn floats_are_printed_with_seventeen_digits() {
    let s = stdout(&["mu0", "--theta", "0.5", "--format", "csv"]);
    let row = s.lines().nth(1).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{cell}");
    }
}

#[test]
fn csv_headers_follow_the_module_schemas() {
    let cases: [(&[&str], &str); 5] = [
        (
            &["resolvent-scan", "--n", "48", "--betas", "1000", "--format", "csv"],
            "beta,alpha,re_lambda,im_lambda,resnorm,dxresnorm",
        ),
        (&["mu0", "--theta", "1", "--format", "csv"], "theta,mu0,im_lambda,mu0_plus_half_theta_sq"),
        (
            &["semigroup", "--n", "32", "--upsilon", "0.5", "--modes", "1", "--format", "csv"],
            "t,norm",
        ),
        (
            &["probe-rayleigh", "--flow", "nearly:0.05", "--n", "32", "--mus", "1e-1,1e-2", "--format", "csv"],
            "nu,alpha,mu,log_ratio,sobolev_ratio,lp_ratio",
        ),
        (&["airy-zeros", "--half-width", "6", "--format", "csv"], "re,im"),
    ];
    for (args, header) in cases {
        let s = stdout(args);
        assert_eq!(s.lines().next().unwrap(), header, "{args:?}");
        assert!(s.lines().count() > 1, "{args:?}");
    }
}

#[test]
fn output_file_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = shearlab(&["hodge-demo", "--fields", "5", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert!(v["commutator"].as_f64().unwrap() < 1e-10);
    assert!(v["pressure_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn scan_is_independent_of_thread_count() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_shearlab"))
            .args(["resolvent-scan", "--n", "48", "--betas", "1000,2000,4000", "--format", "csv"])
            .env("SHEARLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn scan_json_carries_fit_report() {
    let v = json(&["resolvent-scan", "--n", "64", "--betas", "1000,3162.2776601683795,10000,31622.776601683792"]);
    let fit = &v["fit"];
    assert!(fit["slope"].as_f64().unwrap() < 0.0);
    assert_eq!(fit["band"].as_array().unwrap().len(), 2);
    assert!(fit["pass"].is_boolean());
    let short = json(&["resolvent-scan", "--n", "48", "--betas", "1000"]);
    assert!(short["fit"]["error"].is_string());
}

#[test]
fn exit_codes() {
    assert_eq!(shearlab(&["--help"]).status.code(), Some(0));
    assert_eq!(shearlab(&["--version"]).status.code(), Some(0));
    assert_eq!(shearlab(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(shearlab(&["spectrum", "--alpha", "1"]).status.code(), Some(64));
    assert_eq!(shearlab(&["spectrum", "--alpha", "1", "--beta", "10", "--wat"]).status.code(), Some(64));
    assert_eq!(
        shearlab(&["spectrum", "--flow", "swirl", "--alpha", "1", "--beta", "10"]).status.code(),
        Some(64)
    );
    // Parsed but outside the operation's preconditions.
    assert_eq!(
        shearlab(&["spectrum", "--flow", "nearly:-1", "--alpha", "1", "--beta", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(shearlab(&["spectrum", "--n", "3", "--alpha", "1", "--beta", "10"]).status.code(), Some(2));
    assert_eq!(shearlab(&["probe-rayleigh", "--flow", "poiseuille", "--n", "32"]).status.code(), Some(2));
    assert_eq!(shearlab(&["bstar", "--epsilon", "0.01", "--n", "32"]).status.code(), Some(2));
    assert_eq!(shearlab(&["constants", "--format", "csv"]).status.code(), Some(2));
    // Bracket that does not straddle neutral stability.
    let out = shearlab(&["critical-reynolds", "--n", "64", "--re-lo", "1000", "--re-hi", "2000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixed_alpha_scan_reports_finite_norms() {
    let v = json(&["resolvent-scan", "--n", "48", "--betas", "1000", "--alpha-rule", "fixed:0,1"]);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2 * 83);
    assert!(recs.iter().all(|r| r["resnorm"].as_f64().unwrap() > 0.0));
    assert!(recs.iter().all(|r| r["dxresnorm"].is_null()));
}
