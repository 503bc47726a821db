use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn plastiq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plastiq")).args(args).current_dir(dir).output().expect("binary runs")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn run1d_below_threshold() {
    let tmp = TempDir::new().unwrap();
    let o = plastiq(&["run1d", "--lambda", "0.5", "--T", "2", "--knots", "40"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("t,ell,f,p,dissipation,runaway_flag\n"));
    assert_eq!(csv.lines().count(), 42);
    assert!(csv_column(&csv, "p").iter().all(|&p| p == 1.0));
}

#[test]
fn run1d_runaway_to_file() {
    let tmp = TempDir::new().unwrap();
    let o = plastiq(&["run1d", "--lambda", "2", "--T", "1", "--knots", "40", "--out", "toy.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("toy.csv")).unwrap();
    let t = csv_column(&csv, "t");
    let flag = csv_column(&csv, "runaway_flag");
    for (t, f) in t.iter().zip(&flag) {
        assert_eq!(*f == 1.0, *t > 0.5, "t = {t}");
    }
}

#[test]
fn run1d_missing_lambda() {
    let tmp = TempDir::new().unwrap();
    let o = plastiq(&["run1d", "--T", "1", "--knots", "4"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn run2d_unloaded_is_constant() {
    let tmp = TempDir::new().unwrap();
    let scenario = bundled("unloaded.json");
    let o = plastiq(&["run2d", scenario.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("unloaded.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    let total = csv_column(&csv, "total");
    assert!(total.iter().all(|&e| e == total[0]));
    assert!(csv_column(&csv, "delta").iter().all(|&d| d == 0.0));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["all_pass"], true);
}

#[test]
fn run2d_then_verify_and_corrupt() {
    let tmp = TempDir::new().unwrap();
    let scenario = bundled("ramp.json");
    let s = scenario.to_str().unwrap();
    let o = plastiq(&["run2d", s, "--out-dir", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/ramp.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    let delta = csv_column(&csv, "delta");
    assert!(delta.windows(2).all(|w| w[1] >= w[0]));

    let o = plastiq(&["verify", "out/ramp_trajectory.json", s], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let certs: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(certs.len(), 210 + 1 + 21 + 21 + 1);

    let mut traj: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/ramp_trajectory.json")).unwrap()).unwrap();
    for d in traj["delta_accumulated"].as_array_mut().unwrap().iter_mut().skip(5) {
        *d = serde_json::json!(d.as_f64().unwrap() + 1.0);
    }
    fs::write(tmp.path().join("inflated.json"), traj.to_string()).unwrap();
    let o = plastiq(&["verify", "inflated.json", s], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("EnergyLimit"));

    for v in ["times", "states", "energies", "dissipation_increments", "delta_accumulated"] {
        traj[v] = serde_json::json!([]);
    }
    fs::write(tmp.path().join("empty.json"), traj.to_string()).unwrap();
    assert_eq!(plastiq(&["verify", "empty.json", s], tmp.path()).status.code(), Some(2));
}

#[test]
fn run2d_malformed_scenario() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), "{\n  \"schema\": 1,\n  \"mesh\": {\"unit_square\": 2,}\n}").unwrap();
    let o = plastiq(&["run2d", "bad.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    fs::write(tmp.path().join("typo.json"), r#"{"schema": 1, "mesh": {"unit_square": 2}, "time_grid": {"T": 1, "intervals": 2}, "solvr": {}}"#)
        .unwrap();
    let o = plastiq(&["run2d", "typo.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solvr"));
}

#[test]
fn geom_subcommands() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    fs::write(p.join("square.json"), "[[0,0],[1,0],[1,1],[0,1]]").unwrap();
    fs::write(p.join("big.json"), r#"{"vertices": [[-1,-1],[2,-1],[2,2],[-1,2]]}"#).unwrap();
    fs::write(p.join("bowtie.json"), "[[0,0],[1,1],[1,0],[0,1]]").unwrap();

    let o = plastiq(&["geom", "jones", "--poly", "square.json", "--eps", "0.5", "--delta", "0.5"], p);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["cond1_failures"].as_array().unwrap().len(), 0);

    let o = plastiq(&["geom", "hausdorff", "--a", "square.json", "--b", "big.json", "--h", "0.02"], p);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() <= 0.04);

    let (mesh, fold) = plastiq::mesh::two_element_fold();
    let file = serde_json::json!({ "mesh": mesh, "field": fold });
    fs::write(p.join("fold.json"), file.to_string()).unwrap();
    let o = plastiq(&["geom", "cn", "--field", "fold.json"], p);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["pass"], false);
    assert!(r["margin"].as_f64().unwrap() < 0.0);

    assert_eq!(plastiq(&["geom", "jones", "--poly", "bowtie.json"], p).status.code(), Some(2));
    assert_eq!(plastiq(&["geom", "jones", "--poly", "square.json", "--eps", "1.5"], p).status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let scenarios = [bundled("unloaded.json"), bundled("yield.json")];
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = format!("sweep{threads}");
        let o = Command::new(env!("CARGO_BIN_EXE_plastiq"))
            .args(["sweep", scenarios[0].to_str().unwrap(), scenarios[1].to_str().unwrap(), "--out-dir", &out])
            .env("PLASTIQ_THREADS", threads)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            fs::read(tmp.path().join(&out).join("unloaded/unloaded.csv")).unwrap(),
            fs::read(tmp.path().join(&out).join("yield/yield.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(*csv_column(&csv, "delta").last().unwrap() > 0.0);
}
