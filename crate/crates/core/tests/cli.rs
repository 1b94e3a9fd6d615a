use std::process::Command;

use serde_json::Value;

use fbfield::cli::run;
use fbfield::kernels::{dfbf_cov, KernelId};
use fbfield::Hurst;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("fbfield").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fbfield")).args(args).output().unwrap()
}

#[test]
fn kernel_value_from_the_binary() {
    let o = binary(&["kernel", "--id", "fbm", "--H", "0.5", "--t", "2", "--s", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "2\n");
}

#[test]
fn missing_seed_is_a_usage_error() {
    let o = binary(&["sample", "--kernel", "fbf", "--grid", "0:1:8", "--H", "0.3", "--H2", "0.7", "--n", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    let (code, _, _) = call(&["mbm", "--profile", "constant:0.3", "--grid", "0:1:4", "--n", "10"]);
    assert_eq!(code, 2);
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let (code, stdout, _) = call(&[
            "sample", "--kernel", "fbf", "--grid", "-1:1:5", "--H", "0.3", "--H2", "0.7", "--n", "50", "--seed", "5",
            "--out", p,
        ]);
        assert_eq!(code, 0);
        assert!(stdout.is_empty());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().next(), Some("path_id,point_index,t,H,value"));
    assert_eq!(text.lines().count(), 1 + 50 * 10);
}

#[test]
fn covmat_csv_round_trips_exactly() {
    let (code, out, _) = call(&["covmat", "--kernel", "dfbf", "--grid", "-1,0.3,2", "--H", "0.3,0.8"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("i,j,t_i,H_i,t_j,H_j,value"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let want = dfbf_cov(Hurst::new(f[3]).unwrap(), Hurst::new(f[5]).unwrap(), f[2], f[4]);
        assert_eq!(f[6].to_bits(), want.to_bits(), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 36);
}

#[test]
fn json_artifacts_embed_the_configuration() {
    let (code, out, _) = call(&["covmat", "--kernel", "fbm", "--grid", "0.5:1:2", "--H", "0.4", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["command"]["subcommand"], "covmat");
    assert_eq!(v["config"]["command"]["kernel"], serde_json::to_value(KernelId::Fbm).unwrap());
    assert_eq!(v["covariance"]["matrix"][1][1], 1.0);
}

#[test]
fn cohen_check_reports_scale_equivalent_pairs() {
    let (code, out, _) = call(&["cohen-check", "--H", "0.3", "--pairs", "2,1;4,2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["report"];
    assert_eq!(r["r_y_spread"], 0.0);
    assert_eq!(r["scale_equivalent"], true);
    assert_eq!(r["discrepancy"], false);
    let (_, out, _) = call(&["cohen-check", "--H", "0.3", "--pairs", "2,1;3,1"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["discrepancy"], true);
}

#[test]
fn failed_verification_exits_one() {
    // zero sigmas leaves only the truncation budget as tolerance
    let args = [
        "mc-verify", "--grid", "0.5,1", "--H", "0.3", "--n", "200", "--seed", "2", "--mesh", "0.015625", "--cutoff",
        "10",
    ];
    let (code, _, _) = call(&args);
    assert_eq!(code, 0);
    let mut strict = args.to_vec();
    strict.extend(["--sigmas", "0"]);
    let (code, out, err) = call(&strict);
    assert_eq!(code, 1);
    assert!(out.contains("false"));
    assert!(err.contains("mc-verify"), "{err}");
}

#[test]
fn martingale_audit_passes_on_a_geometric_grid() {
    let grid: Vec<String> = fbfield::martingales::geometric_grid(43, 6).iter().map(|t| t.to_string()).collect();
    let grid = grid.join(",");
    let (code, out, err) = call(&["martingale", "--H", "0.3", "--parity", "even", "--grid", &grid]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["pass"], true);
    let (code, _, _) = call(&["martingale", "--H", "0.7", "--parity", "even", "--grid", &grid, "--method", "stieltjes"]);
    assert_eq!(code, 2);
}

#[test]
fn mbm_reads_a_profile_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.txt");
    std::fs::write(&path, "t H\n0 0.3 # start\n2 0.7\n").unwrap();
    let (code, out, _) = call(&["mbm", "--profile", path.to_str().unwrap(), "--which", "y", "--grid", "1"]);
    assert_eq!(code, 0);
    let row: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[3], 0.5);
    assert!((row[6] - 1.0).abs() < 1e-15);
    let (code, out, _) = call(&[
        "mbm", "--profile", "linear:0.3,0.7,1", "--grid", "0:1:3", "--n", "4", "--seed", "1", "--format", "json",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ensemble"]["n_paths"], 4);
}

#[test]
fn invalid_arguments_exit_two() {
    let (code, _, _) = call(&[
        "sample", "--kernel", "dfbf", "--grid", "0.5,1", "--H", "0.3", "--n", "2", "--seed", "1", "--method",
        "moving-average", "--mesh", "0.5", "--cutoff", "0.25",
    ]);
    assert_eq!(code, 2);
    let (code, _, err) = call(&["kernel", "--id", "fbm_odd", "--H", "0.3", "--t", "-1", "--s", "1"]);
    assert_eq!(code, 2, "{err}");
}
