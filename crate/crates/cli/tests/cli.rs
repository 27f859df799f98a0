use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn grou(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grou"))
        .args(args)
        .current_dir(dir)
        .env_remove("GROU_SEED")
        .output()
        .expect("run grou")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rate(dir: &Path, prefix: &str) -> f64 {
    json(&dir.join(format!("{prefix}.stats.json")))["rate"]["rate"].as_f64().unwrap()
}

#[test]
fn ugrou_arctan_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(
        &["sample", "--target", "sqrt-neg-log", "--method", "ugrou", "--transform", "arctan", "--n", "100000", "--seed", "7", "-o", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rate(dir.path(), "run");
    assert!((0.62..=0.68).contains(&r), "{r}");
    let gof = json(&dir.path().join("run.gof.json"));
    assert_eq!(gof["schema"], "1");
    assert!(gof["gof_pass"].as_bool().unwrap());
    let samples = std::fs::read_to_string(dir.path().join("run.samples.csv")).unwrap();
    assert!(samples.starts_with("index,x\n"));
    assert_eq!(samples.lines().count(), 100_001);
    assert!(dir.path().join("run.hist.csv").exists());
}

#[test]
fn standard_rou_gaussian_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(
        &["sample", "--target", "gaussian", "--method", "grou", "--transform", "half-square", "--c", "0.5", "--n", "100000", "--seed", "1", "-o", "g"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!((rate(dir.path(), "g") - 0.7306).abs() < 0.01);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| grou(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["sample", "--target", "exponential", "--method", "trs", "--transform", "mobius", "--n", "0"]), 2);
    assert_eq!(code(&["sample", "--target", "nope", "--method", "grou"]), 2);
    assert_eq!(code(&["sample", "--target", "exponential", "--method", "ugrou", "--n", "10"]), 2);
    assert_eq!(code(&["sample", "--target", "heavy-tail", "--method", "grou", "--n", "10"]), 3);
    assert_eq!(code(&["region", "--target", "heavy-tail", "--method", "grou"]), 3);
    assert_eq!(code(&["check", "--target", "exponential", "--transform", "half-square"]), 0);
    assert_eq!(code(&["check", "--target", "heavy-tail", "--transform", "half-square"]), 3);
    assert_eq!(code(&["check", "--target", "heavy-tail-half", "--method", "trs", "--transform", "mobius"]), 3);
    assert_eq!(code(&["check", "--target", "exponential", "--method", "trs", "--transform", "mobius"]), 0);
    assert_eq!(code(&["check", "--target", "sqrt-neg-log", "--method", "ugrou", "--transform", "arctan"]), 0);
}

#[test]
fn cdf_check_is_rectangular() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(&["check", "--target", "gaussian", "--transform", "cdf"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["note"], "rectangular");
    assert_eq!(v["report"]["bounded"], true);
}

#[test]
fn same_spec_gives_identical_files_for_any_stream_count() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sample", "--target", "exponential", "--method", "trs", "--transform", "mobius", "--n", "20000", "--seed", "5"];
    for (prefix, streams) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let mut args = base.to_vec();
        args.extend(["--streams", streams, "-o", prefix]);
        assert!(grou(&args, dir.path()).status.success());
    }
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    for suffix in ["samples.csv", "stats.json", "gof.json", "hist.csv"] {
        assert_eq!(read(&format!("a.{suffix}")), read(&format!("b.{suffix}")), "{suffix}");
    }
    assert_eq!(read("a.samples.csv"), read("c.samples.csv"));
    assert_eq!(read("a.gof.json"), read("c.gof.json"));
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |prefix: &str, seed: &str, env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_grou"));
        cmd.args(["sample", "--target", "exponential", "--method", "iod", "--n", "100", "--seed", seed, "-o", prefix])
            .current_dir(dir.path())
            .env_remove("GROU_SEED");
        if let Some(e) = env {
            cmd.env("GROU_SEED", e);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(dir.path().join(format!("{prefix}.samples.csv"))).unwrap()
    };
    let from_flag = run("a", "9", None);
    let from_env = run("b", "0", Some("9"));
    let plain = run("c", "0", None);
    assert_eq!(from_flag, from_env);
    assert_ne!(from_flag, plain);
}

#[test]
fn region_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(
        &["region", "--target", "gaussian", "--method", "grou", "--transform", "half-square", "--c", "1", "--grid", "100", "--agreement", "-o", "g"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("g.boundary.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["x", "v", "u"]);
    let max_u = r
        .records()
        .map(|rec| rec.unwrap()[2].parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((max_u - 2f64.sqrt()).abs() < 1e-6, "{max_u}");
    let agreement = json(&dir.path().join("g.agreement.json"));
    assert_eq!(agreement["agree_fraction"], 1.0);
    let lattice = std::fs::read_to_string(dir.path().join("g.lattice.csv")).unwrap();
    assert!(lattice.starts_with("v,u,inside\n"));
    assert_eq!(lattice.lines().count(), 100 * 100 + 1);

    let out = grou(&["region", "--target", "gaussian", "--method", "grou", "--transform", "power(2)", "--c", "0.5", "-o", "rou"], dir.path());
    assert!(out.status.success());
    let rect = json(&dir.path().join("rou.rect.json"));
    assert_eq!(rect["schema"], "1");
    assert!((rect["rect"]["v_max"].as_f64().unwrap() - 0.85776).abs() < 1e-4);
}

#[test]
fn slice_region_exports_slice_ends() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(&["region", "--target", "exponential", "--method", "trs", "--grid", "50", "-o", "t"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&dir.path().join("t.rect.json"))["kind"], "Ah");
    assert!(std::fs::read_to_string(dir.path().join("t.boundary.csv")).unwrap().lines().count() > 100);
}

#[test]
fn compare_writes_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = grou(&["compare", "--n", "5000", "-o", "cmp"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("cmp.rates.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("target,method,transform,rate,ci_low,ci_high,gof_p"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 20);
    assert!(rows.iter().any(|r| r.starts_with("sqrt-neg-log,ugrou,arctan,")));
    for r in rows {
        let f: Vec<f64> = r.split(',').skip(3).map(|s| s.parse().unwrap()).collect();
        assert!(f[1] <= f[0] && f[0] <= f[2], "{r}");
    }
}
