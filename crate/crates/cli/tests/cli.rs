use std::path::Path;
use std::process::{Command, Output};

use birsym_core::linalg::sparse::SparseMatrix;
use serde_json::Value;

fn birsym(args: &[&str]) -> Output {
    birsym_env(args, None)
}

fn birsym_env(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_birsym"));
    cmd.args(args).env_remove("BIRSYM_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("BIRSYM_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Runs with `--json -` and returns the parsed report.
fn report(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--json", "-"]);
    let o = birsym(&all);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn dim_of(args: &[&str]) -> u64 {
    report(args)["result"]["rows"][0]["dim"].as_u64().unwrap()
}

#[test]
fn dimension_examples() {
    assert_eq!(dim_of(&["dim", "--group", "9", "--n", "3", "--flavor", "B", "--field", "Q"]), 1);
    assert_eq!(dim_of(&["dim", "--group", "27", "--n", "4", "--flavor", "M", "--field", "Q"]), 1);
    assert_eq!(dim_of(&["dim", "--group", "5", "--n", "2", "--flavor", "M", "--field", "F2"]), 5);
}

#[test]
fn partial_examples() {
    assert_eq!(dim_of(&["partial", "--group", "5", "--n", "3", "--flavor", "B", "--kset", "3"]), 4);
    assert_eq!(dim_of(&["partial", "--group", "5", "--n", "3", "--flavor", "M", "--kset", "3"]), 3);
    assert_eq!(dim_of(&["partial", "--group", "3", "--n", "4", "--flavor", "B", "--kset", "4"]), 3);
    assert_eq!(birsym(&["partial", "--group", "5", "--n", "3"]).status.code(), Some(1));
}

#[test]
fn order_example() {
    let r = report(&["order", "--group", "7", "--n", "3", "--element", "0,0,1"]);
    assert_eq!(r["result"]["order"], "2");
    assert_eq!(r["certified"], true);
}

#[test]
fn torsion_example() {
    let r = report(&["torsion", "--group", "37", "--n", "2", "--flavor", "B"]);
    let product: u64 = r["result"]["torsion"].as_array().unwrap().iter().map(|d| d.as_str().unwrap().parse::<u64>().unwrap()).product();
    assert_eq!(product % 3, 0);
    assert_eq!(product % 19, 0);
}

#[test]
fn export_sms_example() {
    let dir = tempfile::tempdir().unwrap();
    let sms = dir.path().join("m.sms");
    let symbols = dir.path().join("m.txt");
    let o = birsym(&[
        "export-sms",
        "--group",
        "5",
        "--n",
        "2",
        "--flavor",
        "M",
        "-o",
        sms.to_str().unwrap(),
        "--symbols",
        symbols.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&sms).unwrap();
    assert!(text.ends_with("0 0 0\n"));
    let m = SparseMatrix::read_sms(text.as_bytes()).unwrap();
    assert_eq!(m.ncols(), 14);
    assert_eq!(std::fs::read_to_string(&symbols).unwrap().lines().count(), 14);
}

#[test]
fn other_commands() {
    let h = report(&["hecke", "--group", "11", "--n", "2", "--flavor", "Mminus", "--ell", "2", "--prime", "1000003"]);
    assert_eq!(h["result"]["well_defined"], true);
    assert_eq!(h["result"]["charpoly"], serde_json::json!([2, 1]));
    let mu = report(&["mu", "--group", "7", "--n", "2", "--cokernel"]);
    assert_eq!(mu["result"]["cokernel"].as_array().unwrap().len(), 6);
    let p = report(&["primitive", "--levels", "11,13", "--n", "2"]);
    let dims: Vec<u64> = p["result"]["rows"].as_array().unwrap().iter().map(|r| r["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![1, 2]);
    let m = report(&["modsym", "--level", "11", "--compare"]);
    assert_eq!(m["result"]["rows"][0]["dim_minus"], 1);
    assert_eq!(m["result"]["rows"][0]["matches_symbol_group"], true);
}

#[test]
fn beta_with_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fixed.txt");
    let spec = dir.path().join("blowup.json");
    std::fs::write(&data, "E: 1,2\nE: 2,1\nP: 0,1\n").unwrap();
    std::fs::write(&spec, r#"{"case":"I","d1":0,"d2":0,"b":[],"a":[[1,1],[2,1]]}"#).unwrap();
    let r = report(&["beta", "--group", "3", "--n", "2", "--input", data.to_str().unwrap(), "--blowup", spec.to_str().unwrap()]);
    assert_eq!(r["result"]["components"], 3);
    assert_eq!(r["result"]["blowup_certified"], true);
    let rnd = report(&["beta", "--group", "5", "--n", "3", "--random", "10", "--case", "ii"]);
    assert_eq!(rnd["result"]["random"][0]["certified"], rnd["result"]["random"][0]["generated"]);
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp").expect("timestamp field");
    v
}

#[test]
fn reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let csv = dir.path().join(format!("{tag}.csv"));
        let o = birsym(&[
            "dim",
            "--levels",
            "5-9",
            "--n",
            "2",
            "--flavor",
            "M",
            "--json",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (std::fs::read_to_string(json).unwrap(), std::fs::read(csv).unwrap(), stdout(&o))
    };
    let (j1, c1, s1) = run("a");
    let (j2, c2, s2) = run("b");
    assert_eq!(c1, c2);
    assert_eq!(s1, s2);
    let mut v1 = strip_timestamp(serde_json::from_str(&j1).unwrap());
    let mut v2 = strip_timestamp(serde_json::from_str(&j2).unwrap());
    v1["config"]["outputs"] = Value::Null;
    v2["config"]["outputs"] = Value::Null;
    assert_eq!(serde_json::to_string(&v1).unwrap(), serde_json::to_string(&v2).unwrap());
    assert_eq!(String::from_utf8(c1).unwrap().lines().count(), 6);
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dim", "--group", "7", "--n", "3", "--json", "-"];
    let first: Value = serde_json::from_slice(&birsym_env(&args, Some(dir.path())).stdout).unwrap();
    assert_eq!(first["timestamp"]["cache_hit"], false);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let second: Value = serde_json::from_slice(&birsym_env(&args, Some(dir.path())).stdout).unwrap();
    assert_eq!(second["timestamp"]["cache_hit"], true);
    assert_eq!(strip_timestamp(first), strip_timestamp(second));
}

#[test]
fn exit_codes() {
    assert_eq!(birsym(&["dim", "--group", "5", "--n", "2", "--flavor", "M", "--primes", "2,1000003"]).status.code(), Some(3));
    assert_eq!(birsym(&["dim", "--group", "5", "--n", "2", "--primes", "15"]).status.code(), Some(1));
    assert_eq!(birsym(&["dim", "--group", "9", "--n", "3", "--budget", "10"]).status.code(), Some(1));
    assert_eq!(birsym(&["order", "--group", "7", "--n", "3", "--element", "0,0"]).status.code(), Some(1));
    assert_eq!(birsym(&["dim", "--n", "2"]).status.code(), Some(2));
    assert_eq!(birsym(&["dim", "--group", "5", "--n", "2", "--field", "F4"]).status.code(), Some(2));
}
