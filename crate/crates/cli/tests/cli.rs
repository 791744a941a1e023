use nodal_cli::manifest::RunManifest;
use std::path::Path;
use std::process::{Command, Output};

fn nodal(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NODAL_SEED")
        .output()
        .expect("spawn nodal")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn header(csv: &str) -> String {
    csv.split("\r\n").next().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nodal(&["--help"], dir.path())), 0);
    assert_eq!(code(&nodal(&["--version"], dir.path())), 0);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[dnr]\nsamplez = 5\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["frobnicate"],
        vec!["dnr", "--n", "2"],
        vec!["dnr", "--n", "1", "--r", "2"],
        vec!["dnr", "--n", "2", "--r", "1", "--t-grid", "log:0:1:5"],
        vec!["moments", "--n", "2", "--r", "1", "--samples", "10"],
        vec!["constants", "--n-max", "0"],
        vec!["constants", "--samples-per-node", "many"],
        vec!["--threads", "0", "limit-check"],
        vec!["--config", "bad.toml", "dnr", "--n", "2", "--r", "1"],
        vec!["--config", "missing.toml", "limit-check"],
        vec!["kostlan", "chaos", "--n", "4", "--r", "1", "--d", "3"],
        vec!["kostlan", "kacrice", "--n", "2", "--r", "1", "--with-simulation", "1000"],
        vec!["kostlan", "simulate", "--method", "eig"],
        vec!["replay", "nope.json"],
    ];
    for c in cases {
        let o = nodal(&c, dir.path());
        assert_eq!(code(&o), 64, "{c:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn limit_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodal(&["limit-check"], dir.path());
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.matches("PASS").count(), 7, "{s}");
    assert!(!s.contains("FAIL"));
}

#[test]
fn dnr_grid_rows_tail_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dnr", "--n", "2", "--r", "1", "--t-grid", "log:1e-3:40:50", "--samples", "20000", "--seed", "5"];
    assert_eq!(code(&nodal(&[&args[..], &["--out", "a"]].concat(), dir.path())), 0);
    assert_eq!(code(&nodal(&[&args[..], &["--out", "b", "--threads", "1"]].concat(), dir.path())), 0);
    let a = read(dir.path().join("a/dnr.csv"));
    assert_eq!(a, read(dir.path().join("b/dnr.csv")));
    assert_eq!(header(&a), "t,E_odet_pair,stderr,Dnr,Dnr_stderr");
    let r = rows(&a);
    assert_eq!(r.len(), 50);
    let last: Vec<f64> = r[49].iter().map(|x| x.parse().unwrap()).collect();
    assert!(last[3].abs() < 3.0 * last[4] + 1e-3, "{last:?}");
}

#[test]
fn moments_limits_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodal(&["moments", "--n", "2", "--r", "1", "--t-grid", "1e-3,30", "--samples", "20000", "--mode", "crn"], dir.path());
    assert_eq!(code(&o), 0);
    let r = rows(&read(dir.path().join("moments.csv")));
    let f = |i: usize, j: usize| r[i][j].parse::<f64>().unwrap();
    // small t: (n−1)!/(n−r−1)! = 1; large t: 2π (vol S¹/vol S²)² = π/2
    assert!((f(0, 1) - f(0, 4)).abs() < 4.0 * f(0, 2) + 1e-3);
    assert!((f(1, 3) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((f(1, 1) - f(1, 3)).abs() < 4.0 * f(1, 2) + 1e-3);
}

#[test]
fn constants_rows_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodal(&["constants", "--n-max", "3", "--seed", "7", "--samples-per-node", "2000"], dir.path());
    assert!(matches!(code(&o), 0 | 2));
    let csv = read(dir.path().join("constants.csv"));
    assert!(header(&csv).starts_with("n,r,I_nr,I_err,leading_constant,lower_bound,positive,samples,seed"));
    let r = rows(&csv);
    assert_eq!(r.len(), 6);
    let pairs: Vec<(String, String)> = r.iter().map(|x| (x[0].clone(), x[1].clone())).collect();
    assert_eq!(pairs[0], ("1".into(), "1".into()));
    assert_eq!(pairs[5], ("3".into(), "3".into()));
    // exit code mirrors the converged column
    let all = r.iter().all(|x| x[14] == "true");
    assert_eq!(code(&o), if all { 0 } else { 2 });
}

#[test]
fn config_file_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "[kostlan_simulate]\nd = [4, 9]\nsamples = 2000\nseed = 11\n").unwrap();
    let o = nodal(&["--config", "c.toml", "kostlan", "simulate", "--seed", "12"], dir.path());
    assert_eq!(code(&o), 0);
    let m = RunManifest::read(&dir.path().join("kostlan_simulate.manifest.json")).unwrap();
    assert_eq!(m.seed, 12);
    assert_eq!(m.params["d"], serde_json::json!([4, 9]));
    assert_eq!(m.sample_budgets["samples"], 2000);

    let o = Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(["kostlan", "simulate", "--d", "4", "--samples", "1000", "--out", "env"])
        .current_dir(dir.path())
        .env("NODAL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let m = RunManifest::read(&dir.path().join("env/kostlan_simulate.manifest.json")).unwrap();
    assert_eq!(m.seed, 99);

    let o = Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(["kostlan", "simulate", "--d", "4", "--samples", "1000"])
        .current_dir(dir.path())
        .env("NODAL_SEED", "-3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 64);
}

#[test]
fn replay_reproduces_deleted_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodal(&["kostlan", "simulate", "--d", "9,16", "--samples", "3000", "--histogram", "--out", "run"], dir.path());
    assert_eq!(code(&o), 0);
    let run = dir.path().join("run");
    let csv = read(run.join("kostlan_simulate.csv"));
    let hist = read(run.join("kostlan_simulate_histogram.json"));
    std::fs::remove_file(run.join("kostlan_simulate.csv")).unwrap();
    std::fs::remove_file(run.join("kostlan_simulate_histogram.json")).unwrap();
    let o = nodal(&["replay", "run/kostlan_simulate.manifest.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(read(run.join("kostlan_simulate.csv")), csv);
    assert_eq!(read(run.join("kostlan_simulate_histogram.json")), hist);

    // a recorded hash that no longer matches is reported
    let mpath = run.join("kostlan_simulate.manifest.json");
    let mut m = RunManifest::read(&mpath).unwrap();
    m.outputs[0].sha256 = "0".repeat(64);
    m.write(&mpath).unwrap();
    let o = nodal(&["replay", "run/kostlan_simulate.manifest.json", "--out", "again"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("DIFFERENT  kostlan_simulate.csv"));

    // edited params without a matching hash are rejected
    let mut m = RunManifest::read(&mpath).unwrap();
    m.params["samples"] = serde_json::json!(4000);
    m.write(&mpath).unwrap();
    assert_eq!(code(&nodal(&["replay", "run/kostlan_simulate.manifest.json"], dir.path())), 64);
}

#[test]
fn kacrice_with_simulation_emits_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = nodal(
        &["kostlan", "kacrice", "--d", "9", "--samples-per-node", "5000", "--with-simulation", "5000", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let cmp = read(dir.path().join("kostlan_compare.csv"));
    assert_eq!(header(&cmp), "d,kacrice_var,kacrice_stderr,simulate_var,simulate_var_ci,simulate_samples,rel_diff");
    let r = rows(&cmp);
    let rel: f64 = r[0][6].parse().unwrap();
    assert!(rel.abs() < 0.1, "{rel}");

    // the simulation half is the same draw as `kostlan simulate` with the same seed
    assert_eq!(code(&nodal(&["kostlan", "simulate", "--d", "9", "--samples", "5000", "--seed", "3"], dir.path())), 0);
    let sim = rows(&read(dir.path().join("kostlan_simulate.csv")));
    assert_eq!(sim[0][4], r[0][3]);
}

#[test]
fn chaos_and_crofton_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nodal(&["kostlan", "chaos", "--n", "2", "--r", "1", "--d", "100000"], dir.path())), 0);
    let r = rows(&read(dir.path().join("kostlan_chaos.csv")));
    let rel: f64 = r[0][7].parse().unwrap();
    assert!(rel.abs() < 0.01);

    assert_eq!(code(&nodal(&["kostlan", "crofton", "--d", "1", "--samples", "50", "--slices", "3"], dir.path())), 0);
    let csv = read(dir.path().join("kostlan_crofton.csv"));
    let r = rows(&csv);
    let mean: f64 = r[0][2].parse().unwrap();
    assert!((mean - std::f64::consts::PI).abs() < 1e-12);
}
