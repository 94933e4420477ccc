//! Gnuplot-ready columnar data derived from `report.json`.

use crate::error::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn bad(path: &Path, msg: &str) -> CliError {
    CliError::BadReport {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    }
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn path_dat(p: &Value, src: &Path) -> Result<String, CliError> {
    let t = p["t"].as_array().ok_or_else(|| bad(src, "path without `t`"))?;
    let x = p["x"].as_array().ok_or_else(|| bad(src, "path without `x`"))?;
    let dim = x.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
    let mut s = String::from("# t");
    for i in 0..dim {
        let _ = write!(s, " x{i}");
    }
    s.push('\n');
    for (ti, xi) in t.iter().zip(x) {
        let _ = write!(s, "{}", num(ti));
        for c in xi.as_array().into_iter().flatten() {
            let _ = write!(s, " {}", num(c));
        }
        s.push('\n');
    }
    Ok(s)
}

fn fan_dat(table: &Value, src: &Path) -> Result<String, CliError> {
    let dirs = table["directions"].as_array().ok_or_else(|| bad(src, "table without directions"))?;
    let vals = table["values"].as_array().ok_or_else(|| bad(src, "table without values"))?;
    let errs = table["errs"].as_array().ok_or_else(|| bad(src, "table without errs"))?;
    let dim = dirs.first().and_then(|d| d.as_array()).map_or(2, |d| d.len());
    let mut s = String::from(if dim == 2 { "# angle lhat err\n" } else { "# azimuth polar lhat err\n" });
    for ((d, v), e) in dirs.iter().zip(vals).zip(errs) {
        let h: Vec<f64> = d.as_array().into_iter().flatten().map(num).collect();
        if h.len() == 2 {
            let _ = write!(s, "{}", h[1].atan2(h[0]));
        } else {
            let _ = write!(s, "{} {}", h[1].atan2(h[0]), h[2].clamp(-1.0, 1.0).acos());
        }
        let _ = writeln!(s, " {} {}", num(v), num(e));
    }
    Ok(s)
}

fn scatter_dat(rows: &[Value]) -> String {
    let mut s = String::from("# log_dist_base log_dist_tangent\n");
    for r in rows {
        let (b, t) = (num(&r[0]), num(&r[1]));
        if b > 0.0 && t > 0.0 {
            let _ = writeln!(s, "{} {}", b.ln(), t.ln());
        }
    }
    s
}

fn timeline_dat(intervals: &[Value]) -> String {
    let mut s = String::from("# t0 t1 family (0 = outside all tubes)\n");
    for iv in intervals {
        let fam = iv["line"]["family"].as_u64().map_or(0, |f| f + 1);
        let _ = writeln!(s, "{} {} {fam}", num(&iv["t0"]), num(&iv["t1"]));
    }
    s
}

/// Writes every plot file the report supports into `out`; returns their paths.
pub fn emit_plots(dir: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let src = dir.join("report.json");
    if !src.is_file() {
        return Err(CliError::MissingReport(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&src).map_err(|e| CliError::io(&src, e))?;
    let report: Value = serde_json::from_str(&text).map_err(|e| bad(&src, &e.to_string()))?;
    let res = &report["results"];
    let mut files: Vec<(&str, String)> = Vec::new();
    if !res["path"].is_null() {
        files.push(("path.dat", path_dat(&res["path"], &src)?));
    }
    if !res["standard_path"].is_null() {
        files.push(("standard.dat", path_dat(&res["standard_path"], &src)?));
    }
    if !res["table"].is_null() {
        files.push(("lhat_fan.dat", fan_dat(&res["table"], &src)?));
    }
    if let Some(rows) = res["scatter"].as_array() {
        files.push(("holder_scatter.dat", scatter_dat(rows)));
    }
    if let Some(iv) = res["tube_intervals"].as_array() {
        files.push(("tube_timeline.dat", timeline_dat(iv)));
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for (name, body) in files {
        let p = out.join(name);
        fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}
