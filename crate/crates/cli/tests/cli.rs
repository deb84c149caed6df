use std::path::Path;
use std::process::{Command, Output};

fn rmtlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn sample_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "7", "sample", "--model", "beta-hermite", "--n", "100", "--beta", "2"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(rmtlab(&a, &args).status.success());
    assert!(rmtlab(&b, &args).status.success());
    let csv = read(a.join("sample.csv"));
    assert_eq!(csv, read(b.join("sample.csv")));
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("index,diag,offdiag\n"));
    assert_eq!(text.lines().count(), 101);
    let other = rmtlab(&b, &["--seed", "8", "sample", "--n", "100"]);
    assert!(other.status.success());
    assert_ne!(read(a.join("sample.csv")), read(b.join("sample.csv")));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let args = ["--seed", "3", "--threads", threads, "sine", "--lambda", "5,20", "--paths", "60"];
        assert!(rmtlab(&out, &args).status.success());
        read(out.join("sine.csv"))
    };
    assert_eq!(run("1", "one"), run("3", "three"));
}

#[test]
fn tw_table_is_monotone_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "1", "tw", "--beta", "2", "--method", "riccati", "--paths", "2000", "--grid", "-5:2:0.25"];
    let o = rmtlab(dir.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(read(dir.path().join("tw.csv"))).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,cdf,ci_halfwidth"));
    let cdf: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cdf.len(), 29);
    assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
    let m: serde_json::Value = serde_json::from_slice(&read(dir.path().join("tw.json"))).unwrap();
    assert_eq!(m["command"], "tw");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["schema"], "cdf");
    assert_eq!(m["headline"][0], "sup_dev_vs_painleve");
    assert!(m["headline"][1].as_f64().unwrap() < 0.05);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(dir.path(), &["--format", "json", "tw", "--method", "painleve", "--grid", "-2,0,2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&read(dir.path().join("tw.data.json"))).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["a", "cdf", "ci_halfwidth"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["tw", "--beta=-1"],
        vec!["sample", "--n", "0"],
        vec!["tw", "--grid", "1:0:0.5"],
        vec!["tw", "--method", "painleve", "--grid", "-12:0:1"],
        vec!["sample", "--model", "schrodinger", "--omega", "cauchy"],
        vec!["verify", "--criteria", "99"],
        vec!["no-such-command"],
    ] {
        let o = rmtlab(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(dir.path(), &["schrodinger", "--dt", "1", "--paths", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step size"));
}

#[test]
fn report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let empty = rmtlab(dir.path(), &["report"]);
    assert!(empty.status.success());
    assert_eq!(String::from_utf8(empty.stdout).unwrap(), "timestamp,command,seed,headline,value,passed\n");

    let runs = dir.path().join("runs");
    assert!(rmtlab(&runs, &["--seed", "5", "tw", "--paths", "500", "--grid", "-2,0"]).status.success());
    assert!(rmtlab(&runs, &["szego-check", "--n", "5"]).status.success());
    let o = rmtlab(dir.path(), &["report", runs.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",tw,5,sup_dev_vs_painleve,"));
    assert!(rows[1].contains(",szego-check,0,worst_defect,") && rows[1].ends_with(",pass"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert!(!rmtlab(dir.path(), &["report", bad.to_str().unwrap()]).status.success());
}

#[test]
fn verify_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = rmtlab(dir.path(), &["verify", "--suite", "quick", "--criteria", "2,6,10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let text = String::from_utf8(read(dir.path().join("verify.csv"))).unwrap();
    assert!(text.starts_with("id,name,passed,wall_time_s,detail\n"));
}

#[test]
fn every_command_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 9] = [
        &["spectrum", "--n", "30"],
        &["spectrum", "--model", "circular", "--n", "8"],
        &["sample", "--model", "goe", "--n", "10", "--spike", "1.5"],
        &["spiked-tw", "--w", "-1", "--paths", "300", "--grid", "-2,0"],
        &["gap", "--lambda", "4", "--paths", "200"],
        &["clt", "--lambda", "50", "--reps", "20"],
        &["schrodinger", "--lambda", "3", "--paths", "200"],
        &["schrodinger", "--mode", "eigenvector", "--n", "300", "--paths", "3"],
        &["szego-check", "--n", "6"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let name = format!("run{i}");
        let mut full = vec!["--name", name.as_str()];
        full.extend_from_slice(args);
        let o = rmtlab(dir.path(), &full);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = String::from_utf8(read(dir.path().join(format!("{name}.csv")))).unwrap();
        assert!(csv.lines().count() >= 2, "{args:?}");
        assert!(dir.path().join(format!("{name}.json")).exists());
    }
}
