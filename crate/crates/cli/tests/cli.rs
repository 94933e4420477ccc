use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lorentz-lab"));
    c.env_remove("LORENTZ_THREADS");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().arg("run").args(args).arg("--out").arg(out).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn first_line(p: &Path) -> String {
    fs::read_to_string(p).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn minkowski_distance_example() {
    let d = scratch("distance");
    let o = run(&["distance", "--metric", "flat2", "--from", "0,0", "--to", "2,1", "--dx", "0.02"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d);
    let v = r["results"]["distance"].as_f64().unwrap();
    assert!((1.715..=1.7325).contains(&v), "{v}");
    assert_eq!(r["pass"], true);
    assert_eq!(r["tolerances"]["relative_error"], 0.01);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn malformed_lambdas_name_the_key() {
    let d = scratch("lambdas");
    let o = run(&["hedlund", "--lambdas", "0.5,0.3"], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambdas"));
    assert!(!d.join("report.json").exists());
    let o = run(&["hedlund", "--lambdas", "0.5,-0.3,0.2"], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambdas"));
}

#[test]
fn usage_errors_exit_one() {
    let d = scratch("usage");
    for args in [
        vec!["nonsense"],
        vec!["distance", "--to", "1,x"],
        vec!["distance", "--metric", "flat2", "--to", "1,0,0"],
        vec!["distance", "--to", "2,1", "--dx", "-0.1"],
        vec!["graph-theorem", "--metric", "boundary2"],
        vec!["distance", "--to", "2,1", "--bogus-flag"],
    ] {
        let o = run(&args, &d);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let o = run(&["distance", "--to", "1,x"], &d);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`to`"));
}

#[test]
fn failed_check_exits_two() {
    let d = scratch("fail");
    let o = run(&["distance", "--to", "2,1.3", "--dx", "0.1", "--stencil", "1", "--tol", "1e-15"], &d);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(&d)["pass"], false);
}

#[test]
fn hedlund_shadowing_writes_both_paths() {
    let d = scratch("shadowing");
    let o = run(&["hedlund", "--lambdas", "0.5,0.3,0.2", "--eps", "0.01", "--task", "shadowing"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["path.csv", "standard.csv"] {
        assert_eq!(first_line(&d.join(f)), "t,x0,x1,x2,is_in_tube,sqrt_abs_g");
    }
    let r = report(&d);
    let seg = &r["results"]["segment"];
    assert!(seg["shadowing"].as_f64().unwrap() <= seg["shadow_bound"].as_f64().unwrap());
    assert!(seg["tube_changes"].as_u64().unwrap() <= 6);
}

#[test]
fn config_file_with_overrides() {
    let d = scratch("config");
    let cfg = d.join("exp.toml");
    fs::write(
        &cfg,
        "task = \"distance\"\nseed = 3\n[metric]\nfamily = \"conformal2\"\nmodes = [{ amp = 0.1, k = [1, 0], phase = 0.0 }]\n[numerics]\ndx = 0.05\n[params]\nto = [1.5, 0.5]\n",
    )
    .unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).args(["--dx", "0.025", "--out"]).arg(&d).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d);
    assert_eq!(r["config"]["numerics"]["dx"], 0.025);
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["metric"], "conformal2");

    fs::write(&cfg, "task = \"distance\"\n[numerics]\ndxx = 0.1\n").unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dxx"));
}

#[test]
fn reports_are_reproducible_across_threads() {
    for args in [
        vec!["graph-theorem", "--metric", "conformal2", "--count", "16", "--samples", "3000", "--seed", "5"],
        vec!["hedlund", "--task", "shadowing", "--to", "3,2,2.5", "--dx", "0.005"],
    ] {
        let mut reports = Vec::new();
        for (i, threads) in ["1", "8", "8"].iter().enumerate() {
            let d = scratch(&format!("det-{}-{i}", args[0]));
            let o = bin().env("LORENTZ_THREADS", threads).arg("run").args(&args).arg("--out").arg(&d).output().unwrap();
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
            reports.push(fs::read(d.join("report.json")).unwrap());
        }
        assert_eq!(reports[0], reports[1]);
        assert_eq!(reports[1], reports[2]);
    }
    let d = scratch("threads-bad");
    let o = bin().env("LORENTZ_THREADS", "zero").args(["run", "metric-check", "--out"]).arg(&d).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_documents_every_emitted_header() {
    let help = String::from_utf8(bin().args(["run", "--help"]).output().unwrap().stdout).unwrap();
    let top = String::from_utf8(bin().arg("--help").output().unwrap().stdout).unwrap();
    let documented: Vec<&str> = help.split_whitespace().filter(|w| w.contains(',')).collect();
    let runs: Vec<Vec<&str>> = vec![
        vec!["distance", "--to", "1,0.3", "--dx", "0.05"],
        vec!["geodesic", "--metric", "hedlund", "--t-span", "1"],
        vec!["stable-sep", "--n", "2", "--count", "3"],
        vec!["stable-sep", "--metric", "hedlund", "--n", "2", "--dx", "0.01"],
        vec!["measures", "--n", "1", "--dx", "0.05"],
        vec!["measures", "--metric", "hedlund", "--n", "1", "--dx", "0.01"],
        vec!["graph-theorem", "--count", "4", "--samples", "1000"],
    ];
    let mut seen = 0;
    for (i, args) in runs.iter().enumerate() {
        let d = scratch(&format!("help-{i}"));
        let o = run(args, &d);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
        for f in report(&d)["files"].as_array().unwrap() {
            let header = first_line(&d.join(f.as_str().unwrap()));
            assert!(documented.contains(&header.as_str()), "{f}: `{header}` missing from --help");
            assert!(top.contains(&header));
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn emit_plots_from_reports() {
    let d = scratch("plots");
    assert_eq!(run(&["distance", "--to", "2,1"], &d).status.code(), Some(0));
    let o = bin().arg("emit-plots").arg(&d).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let dat = fs::read_to_string(d.join("path.dat")).unwrap();
    let rows: Vec<&str> = dat.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|l| l.split_whitespace().count() == 3));

    let s = scratch("plots-fan");
    assert_eq!(run(&["stable-sep", "--n", "2", "--count", "5"], &s).status.code(), Some(0));
    let out = scratch("plots-fan-out");
    assert_eq!(bin().arg("emit-plots").arg(&s).arg("--out").arg(&out).output().unwrap().status.code(), Some(0));
    let fan = fs::read_to_string(out.join("lhat_fan.dat")).unwrap();
    assert_eq!(fan.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(fan.lines().skip(1).all(|l| l.split_whitespace().count() == 3));

    let g = scratch("plots-scatter");
    assert_eq!(run(&["graph-theorem", "--count", "6", "--samples", "1000"], &g).status.code(), Some(0));
    assert_eq!(bin().arg("emit-plots").arg(&g).output().unwrap().status.code(), Some(0));
    let sc = fs::read_to_string(g.join("holder_scatter.dat")).unwrap();
    assert!(sc.lines().skip(1).all(|l| l.split_whitespace().all(|x| x.parse::<f64>().unwrap().is_finite())));

    let empty = scratch("plots-missing");
    let o = bin().arg("emit-plots").arg(&empty).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("report.json"));
}
