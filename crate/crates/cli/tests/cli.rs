use std::path::Path;
use std::process::{Command, Output};

use pesinlab::dynsys::{StatePoint, SystemSpec};
use pesinlab::linalg::Vec3;
use pesinlab::shadow::PseudoOrbit;
use serde_json::Value;

const LOG_LU: f64 = 0.962_423_650_119_206_9;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pesinlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn pt(c: &[f64]) -> StatePoint {
    StatePoint::new(c).unwrap()
}

fn write_pseudo(dir: &Path, name: &str, pseudo: &PseudoOrbit) -> String {
    let p = dir.join(name);
    std::fs::write(&p, pseudo.to_text()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn cat_exponents() {
    let o = run(&["exponents", "--system", "cat", "--horizon", "100000", "--samples", "3"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r[3] + LOG_LU).abs() < 1e-8 && (r[4] - LOG_LU).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn product_exponents_on_fiber_zero() {
    let o = run(&["exponents", "--system", "product24", "--fiber", "0", "--horizon", "100000"]);
    let r = &csv_rows(&stdout(&o))[0];
    assert_eq!(r[1], 0.0);
    let want = [-LOG_LU, -std::f64::consts::LN_2, LOG_LU];
    for (got, w) in r[4..].iter().zip(want) {
        assert!((got - w).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["exponents", "--horizon", "0"]).status.code(), Some(2));
    assert_eq!(run(&["exponents", "--system", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["exponents", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_pesinlab"))
        .args(["partition", "-n", "31"])
        .env("PESINLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn partition_matches_worked_example() {
    for kk in 1..=4usize {
        let n = (10 * kk + 1).to_string();
        let o = run(&["partition", "-n", &n, "-k", "3", "--block", &kk.to_string()]);
        let v = &json_lines(&o)[0];
        let times: Vec<usize> = v["times"].as_array().unwrap().iter().map(|t| t.as_u64().unwrap() as usize).collect();
        assert_eq!(times, vec![0, 3 * kk + 1, 4 * kk + 1, 5 * kk + 1, 6 * kk + 1, 7 * kk + 1, 10 * kk + 1]);
        assert_eq!(v["m"], 6);
    }
}

#[test]
fn cat_sweep_passes_everywhere() {
    let o = run(&["classify", "--system", "cat", "--zeta", "0.9", "-k", "1", "--samples", "20", "--horizon", "50"]);
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l["certificate"]["pass"] == true));
    assert!(o.stderr.is_empty());
    let warned = run(&["classify", "--system", "cat", "--zeta", "1.0", "--horizon", "50"]);
    assert!(warned.status.success());
    assert!(String::from_utf8_lossy(&warned.stderr).contains("warning"));
}

#[test]
fn product_grid_has_two_interval_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("geo.csv");
    let o = run(&[
        "classify",
        "--system",
        "product24",
        "--grid",
        "1000",
        "--zeta",
        "0.4",
        "--horizon",
        "200",
        "--set",
        &format!("geometry_output={}", geo.display()),
        "--set",
        "ks=[1,5,20]",
    ]);
    let lines = json_lines(&o);
    assert_eq!(lines.len(), 1001);
    let geometry = lines[1000]["geometry"].as_array().unwrap();
    let mut prev_a = 0.0;
    for g in geometry {
        let (a, b) = (g["a_k"].as_f64().unwrap(), g["b_k"].as_f64().unwrap());
        assert!(a < 0.5 && b > 0.5 && a >= prev_a, "{g}");
        prev_a = a;
    }
    let csv = std::fs::read_to_string(geo).unwrap();
    assert!(csv.starts_with("x,min_k\n"));
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn domination_at_fiber_zero() {
    let o = run(&["domination", "--system", "product24", "--fiber", "0"]);
    let v = &json_lines(&o)[0];
    let limdom = v["report"]["limdom_hat"].as_f64().unwrap();
    assert!((limdom + std::f64::consts::LN_2 + LOG_LU).abs() < 1e-8, "{limdom}");
}

#[test]
fn shadow_files() {
    let dir = tempfile::tempdir().unwrap();
    let sys = SystemSpec::CatMap;
    let exact = PseudoOrbit::from_starts(&sys, &[(pt(&[0.2, 0.7]), 10)], false, 1e-8).unwrap();
    let f = write_pseudo(dir.path(), "exact.txt", &exact);
    let v = &json_lines(&run(&["shadow", "-i", &f]))[0];
    assert_eq!(v["eps_achieved"].as_f64().unwrap(), 0.0);
    assert_eq!(v["iterations"], 0);

    // A true orbit cut in three places and pushed by just under 1e-8.
    let mut segs = Vec::new();
    let mut x = pt(&[0.31, 0.64]);
    for i in 0..4 {
        if i > 0 {
            x = x.displaced(&(Vec3::new(0.6, -0.8, 0.0) * 0.9e-8));
        }
        let s = sys.iterate(&x, 25).unwrap().into_points();
        x = s[25];
        segs.push(s);
    }
    let pseudo = PseudoOrbit::new(segs, false, 1e-8).unwrap();
    let f = write_pseudo(dir.path(), "pert.txt", &pseudo);
    let v = &json_lines(&run(&["shadow", "-i", &f]))[0];
    assert!(v["eps_achieved"].as_f64().unwrap() <= 1e-6);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "PSEUDO dim=2\n").unwrap();
    assert_eq!(run(&["shadow", "-i", bad.to_str().unwrap()]).status.code(), Some(2));
    // No iterations allowed: numerical failure.
    assert_eq!(run(&["shadow", "-i", &f, "--set", "max_iter=0"]).status.code(), Some(1));
}

#[test]
fn close_recurrent_segment() {
    // (1/5, 2/5) has period 10; start slightly off it.
    let o = run(&["close", "--set", "points=[[0.2000001, 0.4]]", "-n", "10"]);
    let v = &json_lines(&o)[0];
    let r = &v["result"];
    assert_eq!(r["period"], 10);
    assert!(r["residual"].as_f64().unwrap() < 1e-12);
    let z: Vec<f64> = r["orbit"][0].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
    assert!((z[0] - 0.2).abs() < 1e-12 && (z[1] - 0.4).abs() < 1e-12, "{z:?}");
}

#[test]
fn glue_period_is_in_interval() {
    let o = run(&["glue", "--set", "lengths=[20,35,50]", "--seed", "3"]);
    let v = &json_lines(&o)[0];
    assert_eq!(v["period_in_bounds"], true);
    let plan = &v["plan"];
    let p = plan["period"].as_u64().unwrap();
    let conn: u64 = plan["connectors"].as_array().unwrap().iter().map(|c| c["n"].as_u64().unwrap()).sum();
    assert_eq!(p, 105 + conn);
    let (x1, x2) = (plan["x1"].as_u64().unwrap(), plan["x2"].as_u64().unwrap());
    assert!(105 + 3 * x1 <= p && p <= 105 + 3 * x2);
}

#[test]
fn measure_curve() {
    let o = run(&["measure", "--set", "budgets=[2000,8000]", "--set", "orbit_len=10000"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[2] >= r[0]);
        assert!(r[3] < 0.1, "{r:?}");
        assert!(r[7] < 1e-12);
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"system": "cat", "seed": 17, "lengths": [20, 30], "mesh": 0.1}"#).unwrap();
    let outs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("o{i}.json"));
            let pseudo = dir.path().join(format!("p{i}.txt"));
            let o = Command::new(env!("CARGO_BIN_EXE_pesinlab"))
                .args(["glue", "--config", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()])
                .args(["--set", &format!("pseudo_output={}", pseudo.display())])
                .env("PESINLAB_THREADS", (i + 1).to_string())
                .output()
                .unwrap();
            assert!(o.status.success());
            [std::fs::read(out).unwrap(), std::fs::read(pseudo).unwrap()].concat()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    // The flag overrides the file.
    let a = run(&["probe-per", "--config", cfg.to_str().unwrap(), "--samples", "5"]);
    let v = &json_lines(&a)[0];
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
    assert_eq!(v["fraction"].as_f64().unwrap(), 1.0);
}

#[test]
fn shadowing_constant_probe() {
    let v = &json_lines(&run(&["probe-L", "--set", "trials=5"]))[0];
    let l = v["l_hat"].as_f64().unwrap();
    assert!(l > 0.0 && l <= 1.0, "{l}");
}

#[test]
fn qh_check_segment() {
    let o = run(&["qh-check", "--system", "cat", "-n", "37", "-k", "2", "--block", "3", "--zeta", "0.5"]);
    let v = &json_lines(&o)[0];
    assert_eq!(v["certificate"]["pass"], true);
    assert_eq!(v["certificate"]["e"], 7);
}
