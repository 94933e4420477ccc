//! Task runners. Each fills a `Report` and writes its CSVs into the output directory.

use crate::config::{ExperimentConfig, Family, Task};
use crate::error::CliError;
use crate::report::{csv_file, path_value, vec_value, write_path, Report};
use lorentz_core::calibrate::*;
use lorentz_core::exec::Exec;
use lorentz_core::flow::{integrate_affine_geodesic, integrate_pregeodesic, trace_distance, FlowOptions};
use lorentz_core::graphcheck::*;
use lorentz_core::hedlund::*;
use lorentz_core::measures::{find_maximal_measure, OccupationMeasure};
use lorentz_core::reach::{GridOracle, SeparationOracle};
use lorentz_core::spacetime::*;
use lorentz_core::stable::{build_table, dual_stable, ConeFlag, StableSepTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::io::BufWriter;
use std::f64::consts::PI;
use std::path::Path;

const EXEC: Exec = Exec::Parallel;

pub enum Built {
    Conformal(ConformallyFlat<2>),
    Boundary(BoundaryTorus),
    Hedlund(Hedlund),
}

impl Built {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Built, CliError> {
        let m = &cfg.metric;
        Ok(match cfg.family() {
            Family::Flat2 => Built::Conformal(make_flat::<2>()),
            Family::Conformal2 => {
                let modes = match &m.modes {
                    Some(ms) => ms.iter().map(|s| FourierMode { amp: s.amp, k: s.k, phase: s.phase }).collect(),
                    None => vec![
                        FourierMode { amp: 0.2, k: [1, 1], phase: 0.3 },
                        FourierMode { amp: 0.1, k: [0, 2], phase: 1.1 },
                    ],
                };
                Built::Conformal(make_conformally_flat::<2>(m.c0.unwrap_or(1.0), modes)?)
            }
            Family::Boundary2 => Built::Boundary(make_boundary_2torus()),
            Family::Hedlund => {
                let l = m.lambdas.clone().unwrap_or_else(|| vec![0.5, 0.3, 0.2]);
                Built::Hedlund(make_hedlund(HedlundParams::new([l[0], l[1], l[2]], m.eps.unwrap_or(0.01))?)?)
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Built::Conformal(c) => c.name(),
            Built::Boundary(b) => b.name(),
            Built::Hedlund(h) => format!("hedlund(lambdas={:?}, eps={})", h.lambdas(), h.eps()),
        }
    }

    fn two(&self) -> Option<&dyn MetricField<2>> {
        match self {
            Built::Conformal(c) => Some(c),
            Built::Boundary(b) => Some(b),
            Built::Hedlund(_) => None,
        }
    }
}

fn vecd<const D: usize>(v: &Option<Vec<f64>>, default: [f64; D]) -> Vector<D> {
    match v {
        Some(v) => Vector::<D>::from_column_slice(v),
        None => Vector::<D>::from(default),
    }
}

fn unit3(i: usize) -> Vector<3> {
    let mut e = Vector::<3>::zeros();
    e[i] = 1.0;
    e
}

pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<Report, CliError> {
    let built = Built::from_config(cfg)?;
    let mut rep = Report::new(cfg, built.name());
    let csv = cfg.output.csv();
    let out = if csv { Some(dir) } else { None };
    match cfg.task.expect("validated") {
        Task::MetricCheck => metric_check(cfg, &mut rep, &built),
        Task::Geodesic => geodesic(cfg, &mut rep, &built, out)?,
        Task::Distance => distance(cfg, &mut rep, &built, out)?,
        Task::StableSep => stable_sep(cfg, &mut rep, &built, out)?,
        Task::Measures => measures(cfg, &mut rep, &built, out)?,
        Task::Calibrate => calibrate(cfg, &mut rep, &built)?,
        Task::Hedlund => {
            let Built::Hedlund(h) = &built else { unreachable!("validated") };
            hedlund(cfg, &mut rep, h, out)?
        }
        Task::GraphTheorem => graph_theorem(cfg, &mut rep, &built, out)?,
    }
    Ok(rep)
}

fn metric_checks<const D: usize, M: MetricField<D> + ?Sized>(rep: &mut Report, m: &M, samples: usize, seed: u64) {
    let c = check_metric(m, samples, seed);
    let tol = rep.tol("periodicity", 1e-12);
    rep.check("signature (1, n-1)", c.signature_ok as f64, samples as f64, c.signature_ok == samples);
    rep.check("orientation timelike", c.orientation_ok as f64, samples as f64, c.orientation_ok == samples);
    rep.check("periodicity deviation", c.periodic_max_dev, tol, c.periodic_max_dev <= tol);
    rep.put("metric_check", &c);
}

fn metric_check(cfg: &ExperimentConfig, rep: &mut Report, b: &Built) {
    let samples = cfg.numerics.samples.unwrap_or(200);
    match b {
        Built::Hedlund(h) => {
            metric_checks(rep, h, samples, cfg.seed);
            let r = verify_hedlund(h, samples, cfg.seed);
            rep.check("hedlund conditions (i)-(iii)", r.cond_i.worst_margin.min(r.cond_ii.worst_margin).min(r.cond_iii.worst_margin), 0.0, r.pass);
            rep.put("hedlund_conditions", &r);
        }
        Built::Conformal(c) => {
            metric_checks(rep, c, samples, cfg.seed);
            rep.check("conformal factor lower bound", c.lower_bound(), 0.0, c.lower_bound() > 0.0);
        }
        Built::Boundary(m) => metric_checks(rep, m, samples, cfg.seed),
    }
}

fn geodesic_run<const D: usize, M: MetricField<D> + ?Sized>(
    cfg: &ExperimentConfig,
    rep: &mut Report,
    m: &M,
    x0: Vector<D>,
    v0: Vector<D>,
    affine_ratio: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let n = &cfg.numerics;
    let step = n.step.unwrap_or(1e-3);
    let t_span = n.t_span.unwrap_or(10.0);
    let opts = FlowOptions {
        step,
        renormalize_every: 0,
        record_every: ((0.01 / step).round() as usize).max(1),
        ..FlowOptions::default()
    };
    let tr = integrate_pregeodesic(m, &x0, &v0, t_span, &opts)?;
    let drift_tol = rep.tol("speed_drift", n.tol.unwrap_or(1e-8));
    rep.check("speed drift", tr.max_speed_drift, drift_tol, tr.max_speed_drift < drift_tol);
    rep.put("steps", tr.steps);
    rep.put("end", json!({ "x": vec_value(&tr.end().0), "u": vec_value(&tr.end().1) }));
    rep.put("character_flips", tr.character_flips(m, 1e-6));
    if let Some(ratio) = affine_ratio {
        let aff = integrate_affine_geodesic(m, &x0, &v0, 2.0 * t_span * ratio, step)?;
        let d = trace_distance(m, &tr, &aff);
        let tol = rep.tol("trace_distance", 1e-6);
        rep.check("trace distance to affine geodesic", d, tol, d < tol);
    }
    let path = tr.to_causal_path(m)?;
    rep.put("path", path_value(&path));
    if let Some(dir) = out {
        write_path(rep, dir, "path.csv", m, &path)?;
    }
    Ok(())
}

fn geodesic(cfg: &ExperimentConfig, rep: &mut Report, b: &Built, out: Option<&Path>) -> Result<(), CliError> {
    let p = &cfg.params;
    match b {
        Built::Hedlund(h) => geodesic_run(cfg, rep, h, vecd(&p.from, [0.1, 0.3, 0.2]), vecd(&p.direction, [1.0, 1.0, 1.0]), None, out),
        Built::Conformal(c) => {
            let ratio = c.upper_bound() / c.lower_bound();
            geodesic_run(cfg, rep, c, vecd(&p.from, [0.1, 0.2]), vecd(&p.direction, [1.0, 0.3]), Some(ratio), out)
        }
        Built::Boundary(m) => geodesic_run(cfg, rep, m, vecd(&p.from, [0.1, 0.2]), vecd(&p.direction, [1.0, 1.0]), None, out),
    }
}

fn flat_separation<const D: usize>(v: &Vector<D>) -> f64 {
    let s = v[0] * v[0] - (1..D).map(|i| v[i] * v[i]).sum::<f64>();
    if v[0] > 0.0 && s > 0.0 {
        s.sqrt()
    } else {
        0.0
    }
}

fn distance(cfg: &ExperimentConfig, rep: &mut Report, b: &Built, out: Option<&Path>) -> Result<(), CliError> {
    let to = cfg.params.to.as_ref().ok_or_else(|| CliError::config("to", "the distance task needs a target point"))?;
    let n = &cfg.numerics;
    let sep;
    match b {
        Built::Hedlund(h) => {
            let (p, q) = (vecd(&cfg.params.from, [0.0; 3]), Vector::<3>::from_column_slice(to));
            let o = TubeOracle::new(h, n.dx.unwrap_or(0.0025)).with_exec(EXEC);
            rep.put("oracle", o.name());
            let s = o.separation(&p, &q)?;
            let bound: f64 = (0..3).map(|i| h.lambdas()[i] * (q - p)[i].max(0.0)).sum::<f64>();
            let tol = rep.tol("upper_bound_slack", 4.0 * h.eps());
            rep.check("d̂ ≤ Σλᵢhⁱ + 4ε", s.value, bound + tol, s.value <= bound + tol);
            if let Some(dir) = out {
                write_path(rep, dir, "path.csv", h, &s.path)?;
            }
            sep = (s.value, s.reachable, s.nodes, path_value(&s.path));
        }
        _ => {
            let m = b.two().expect("2D metric");
            let (p, q) = (vecd(&cfg.params.from, [0.0; 2]), Vector::<2>::from_column_slice(to));
            let dx = n.dx.unwrap_or(0.02);
            let k = n.stencil.unwrap_or(5);
            let o = GridOracle::new(m, dx, k).with_exec(EXEC);
            rep.put("oracle", o.name());
            let s = o.separation(&p, &q)?;
            if let Built::Conformal(c) = b {
                let exact = flat_separation(&(q - p));
                if c.is_flat() {
                    let tol = rep.tol("relative_error", n.tol.unwrap_or(0.01));
                    let rel = if exact > 0.0 { (s.value - exact).abs() / exact } else { s.value };
                    rep.put("exact", exact);
                    rep.check("relative error to closed form", rel, tol, rel <= tol);
                } else {
                    let flat = make_flat::<2>();
                    let grid = GridOracle::new(&flat, dx, k).with_exec(EXEC).separation(&p, &q)?.value;
                    let (lo, hi) = (c.lower_bound() * grid, c.upper_bound() * exact);
                    let tol = rep.tol("bracket_slack", 1e-9);
                    rep.put("bracket", [lo, hi]);
                    rep.check("min f · d̂_flat ≤ d̂", lo - s.value, tol, s.value >= lo - tol);
                    rep.check("d̂ ≤ max f · d_flat", s.value - hi, tol, s.value <= hi + tol);
                }
            }
            if let Some(dir) = out {
                write_path(rep, dir, "path.csv", m, &s.path)?;
            }
            sep = (s.value, s.reachable, s.nodes, path_value(&s.path));
        }
    }
    rep.put("distance", sep.0);
    rep.put("reachable", sep.1);
    rep.put("nodes", sep.2);
    rep.put("path", sep.3);
    Ok(())
}

fn schedule(n: f64) -> Vec<f64> {
    vec![n / 4.0, n / 2.0, n]
}

fn write_table<const D: usize>(rep: &mut Report, out: Option<&Path>, t: &StableSepTable<D>) -> Result<(), CliError> {
    rep.put("table", t);
    if let Some(dir) = out {
        let f = csv_file(rep, dir, "stable.csv")?;
        t.write_csv(BufWriter::new(f))?;
    }
    Ok(())
}

fn stable_sep(cfg: &ExperimentConfig, rep: &mut Report, b: &Built, out: Option<&Path>) -> Result<(), CliError> {
    let nm = &cfg.numerics;
    match b {
        Built::Hedlund(h) => {
            let eps = h.eps();
            let lam = h.lambdas();
            let n = nm.n.unwrap_or(20.0);
            let o = TubeOracle::new(h, nm.dx.unwrap_or(0.005)).with_exec(EXEC);
            let base = vecd(&cfg.params.from, [0.0; 3]);
            let dirs = match &cfg.params.h {
                Some(v) => vec![Vector::<3>::from_column_slice(v)],
                None => vec![unit3(0), unit3(1), unit3(2), Vector::<3>::repeat(1.0)],
            };
            let cbar = rep.tol("cbar", (1.0 / eps + 1.5) * lam.iter().sum::<f64>() + 2.0);
            let upper_slack = rep.tol("upper_slack", 4.0 * eps);
            let mut t = StableSepTable::<3>::new();
            for hv in &dirs {
                // start on the line of the leading family when probing a coordinate direction
                let start = if cfg.params.from.is_none() && hv.iter().filter(|&&x| x != 0.0).count() == 1 {
                    family_shift(hv.iamax())
                } else {
                    base
                };
                let e = lorentz_core::stable::stable_time_separation(&o, &start, hv, &schedule(n), cbar, 1e-9)?;
                let exact: f64 = (0..3).map(|i| lam[i] * hv[i]).sum();
                let name = format!("bracket h={:?}", vec_value(hv));
                let ok = e.value <= exact + upper_slack / n && exact - e.value <= e.err;
                rep.check(&name, exact - e.value, e.err, ok);
                t.push(hv, &e);
            }
            write_table(rep, out, &t)
        }
        _ => {
            let m = b.two().expect("2D metric");
            let n = nm.n.unwrap_or(4.0);
            let o = GridOracle::new(m, nm.dx.unwrap_or(0.02), nm.stencil.unwrap_or(5)).with_exec(EXEC);
            let count = nm.count.unwrap_or(9);
            let dirs: Vec<Vector<2>> = match (&cfg.params.h, b) {
                (Some(v), _) => vec![Vector::<2>::from_column_slice(v)],
                (None, Built::Boundary(_)) => (0..count)
                    .map(|i| {
                        // stencil slopes below ~0.3 cannot follow the null corridors near ∂𝔗
                        let th = PI / 8.0 + PI / 4.0 * i as f64 / (count.max(2) - 1) as f64;
                        Vector::<2>::new(th.cos(), th.sin())
                    })
                    .collect(),
                (None, _) => (0..count)
                    .map(|i| Vector::<2>::new(1.0, -0.8 + 1.6 * i as f64 / (count.max(2) - 1) as f64))
                    .collect(),
            };
            let cbar = rep.tol("cbar", 1.0);
            let base = vecd(&cfg.params.from, [0.0; 2]);
            let t = build_table(&o, &base, &dirs, &schedule(n), cbar)?;
            for i in 0..t.len() {
                let h = t.direction(i);
                let name = format!("h={:?}", vec_value(&h));
                match b {
                    Built::Conformal(c) if c.is_flat() => {
                        let gap = flat_separation(&h) - t.values[i];
                        rep.check(&format!("closed form {name}"), gap, t.errs[i], gap >= -1e-9 && gap <= t.errs[i]);
                    }
                    Built::Conformal(c) => {
                        let hi = c.upper_bound() * flat_separation(&h);
                        rep.check(&format!("upper bound {name}"), t.values[i], hi, t.values[i] <= hi + 1e-9);
                    }
                    _ => rep.check(&format!("reachable {name}"), t.values[i], 0.0, t.flags[i] != ConeFlag::Out),
                }
            }
            write_table(rep, out, &t)
        }
    }
}

fn write_measure<const D: usize>(rep: &mut Report, out: Option<&Path>, name: &str, mu: &OccupationMeasure<D>) -> Result<(), CliError> {
    if let Some(dir) = out {
        let f = csv_file(rep, dir, name)?;
        mu.write_csv(BufWriter::new(f))?;
    }
    Ok(())
}

fn measures(cfg: &ExperimentConfig, rep: &mut Report, b: &Built, out: Option<&Path>) -> Result<(), CliError> {
    let nm = &cfg.numerics;
    match b {
        Built::Hedlund(h) => {
            let dx = nm.dx.unwrap_or(0.005);
            let o = TubeOracle::new(h, dx).with_exec(EXEC);
            let n = nm.n.unwrap_or(3.0);
            let tol = rep.tol("average_length", 2.0 * dx);
            let lam = h.lambdas();
            let mut mus = Vec::new();
            let mut reps = Vec::new();
            for i in 0..3 {
                let (mu, r) = find_maximal_measure(h, &o, &family_shift(i), &unit3(i), n)?;
                let err = (r.average_length - lam[i]).abs();
                rep.check(&format!("𝔏 = λ{} for h = e{}", i + 1, i + 1), err, tol, err <= tol);
                write_measure(rep, out, &format!("measure_{}.csv", i + 1), &mu)?;
                mus.push(mu);
                reps.push(r);
            }
            let disjoint = (0..3).all(|i| ((i + 1)..3).all(|j| mus[i].disjoint(&mus[j])));
            rep.check("disjoint supports", disjoint as u8 as f64, 1.0, disjoint);
            rep.put("measures", &reps);
        }
        _ => {
            let m = b.two().expect("2D metric");
            let dx = nm.dx.unwrap_or(0.02);
            let o = GridOracle::new(m, dx, nm.stencil.unwrap_or(5)).with_exec(EXEC);
            let h = vecd(&cfg.params.h, if matches!(b, Built::Boundary(_)) { [1.0, 1.0] } else { [2.0, 1.0] });
            let (mu, r) = find_maximal_measure(m, &o, &vecd(&cfg.params.from, [0.0; 2]), &h, nm.n.unwrap_or(2.0))?;
            let rho_err = (Vector::<2>::from_column_slice(&r.rho) - h).norm();
            let tol = rep.tol("rotation_class", 1e-9);
            rep.check("rotation class = h", rho_err, tol, rho_err <= tol);
            let tol = rep.tol("length_gap", 2.0 * dx);
            rep.check("|ℓ̂ − 𝔏|", r.gap.abs(), tol, r.gap.abs() <= tol);
            if let Built::Conformal(c) = b {
                if c.is_flat() {
                    let exact = flat_separation(&h);
                    let tol = rep.tol("relative_error", nm.tol.unwrap_or(0.01));
                    let rel = (r.average_length - exact).abs() / exact;
                    rep.check("𝔏 vs closed form", rel, tol, rel <= tol);
                }
            }
            write_measure(rep, out, "measure.csv", &mu)?;
            rep.put("measures", [&r]);
        }
    }
    Ok(())
}

fn flat_pairs(n: usize, seed: u64, dx: f64) -> Vec<(Vector<2>, Vector<2>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = (1.0 / dx).round();
    (0..n)
        .map(|_| {
            let p = Vector::<2>::new((rng.gen::<f64>() * cells).round() * dx, (rng.gen::<f64>() * cells).round() * dx);
            let t = rng.gen_range(5..60) as f64 * dx;
            let x = (rng.gen_range(-0.75..0.75) * t / dx).round() * dx;
            (p, p + Vector::<2>::new(t, x))
        })
        .collect()
}

fn hedlund_pairs(h: &Hedlund, count: usize, seed: u64) -> Vec<(Vector<3>, Vector<3>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = Vector::<3>::from_fn(|_, _| rng.gen::<f64>());
            let frame = cone::Frame::new(&h.metric(&p), &h.orientation(&p));
            let v = cone::sample_future_causal(&frame, &mut rng, false);
            (p, p + v * rng.gen_range(0.1..0.4))
        })
        .collect()
}

fn calibrate(cfg: &ExperimentConfig, rep: &mut Report, b: &Built) -> Result<(), CliError> {
    let nm = &cfg.numerics;
    let seed = cfg.seed;
    let count = nm.count.unwrap_or(100);
    let samples = nm.samples.unwrap_or(2000);
    match b {
        Built::Hedlund(h) => {
            let lam = h.lambdas();
            let alpha = Vector::<3>::new(lam[0], lam[1], lam[2]);
            let dx = nm.dx.unwrap_or(0.02);
            let o = GridOracle::new(h, dx, nm.stencil.unwrap_or(3)).with_exact_endpoint().with_exec(EXEC);
            let tol = rep.tol("pseudo_time_margin", 2.0 * dx);
            let pt = is_pseudo_time(&o, &Calibration::linear(alpha, 1.0), 1.0, &hedlund_pairs(h, count, seed), tol)?;
            rep.check("Σλᵢxⁱ is a pseudo-time with l = 1", pt.worst_margin, -tol, pt.pass);
            rep.put("pseudo_time", &pt);

            let dtol = rep.tol("line_defect", 1e-6);
            let mut defects = Vec::new();
            for a in [alpha, Vector::<3>::new(lam[0], 2.0 * lam[1], lam[2]), Vector::<3>::new(1.0, 0.5, 0.9)] {
                let ls = hedlund_lstar(&lam, &a);
                for j in 0..3 {
                    let p = family_shift(j);
                    let run = CausalPath::new(h, vec![p + unit3(j) * 0.1, p + unit3(j) * 3.1])?;
                    let got = check_calibrated(h, &Calibration::linear(a, ls), &run).defect;
                    let expect = (a[j] / lam[j] - ls) * lam[j];
                    rep.check(&format!("line defect α={:?} l{}", vec_value(&a), j + 1), (got - expect).abs(), dtol, (got - expect).abs() <= dtol);
                    defects.push(json!({ "alpha": vec_value(&a), "line": j + 1, "defect": got, "expected": expect }));
                }
            }
            rep.put("line_defects", defects);
            let pts = sample_points(h, samples, seed);
            let linf = l_infty(h, |_| alpha, &pts);
            rep.check("l∞(Σλᵢdxⁱ) = −∞", linf, f64::NEG_INFINITY, linf == f64::NEG_INFINITY);
            let d = duality_check(h, &alpha, hedlund_lstar(&lam, &alpha), 4, 200, &pts, seed, 1e-9);
            rep.check("l∞ ≤ ℓ̂* over the Fourier search", d.best_l_infty - d.lstar, d.tol, d.pass);
            rep.put("duality", &d);
        }
        Built::Conformal(c) => {
            let dx = nm.dx.unwrap_or(0.02);
            let o = GridOracle::new(c, dx, nm.stencil.unwrap_or(5)).with_exec(EXEC);
            let e0 = Vector::<2>::new(1.0, 0.0);
            let pts = sample_points(c, samples, seed);
            let linf = l_infty(c, |_| e0, &pts);
            let expect = 1.0 / c.upper_bound();
            rep.put("l_infty", linf);
            let tol = rep.tol("pseudo_time_margin", 2.0 * dx);
            let l = linf.min(1.0);
            let pt = is_pseudo_time(&o, &Calibration::linear(e0, l), l, &flat_pairs(count, seed, dx), tol)?;
            rep.check("x⁰ is a pseudo-time with l = l∞(dx⁰)", pt.worst_margin, -tol, pt.pass);
            rep.check("l∞(dx⁰) ≥ 1/max f", linf - expect, 0.0, linf >= expect - 1e-12);
            rep.put("pseudo_time", &pt);
            let fan: Vec<Vector<2>> = (0..9).map(|i| Vector::<2>::new(1.0, -0.8 + 0.2 * i as f64)).collect();
            let table = build_table(&o, &Vector::<2>::zeros(), &fan, &schedule(nm.n.unwrap_or(4.0)), 1.0)?;
            let lstar = dual_stable(&table, &e0)?;
            rep.put("lstar_hat", lstar);
            let d = duality_check(c, &e0, lstar, 4, 200, &pts, seed, 1e-9);
            rep.check("l∞ ≤ ℓ̂* over the Fourier search", d.best_l_infty - d.lstar, d.tol, d.pass);
            rep.put("duality", &d);
        }
        Built::Boundary(_) => {
            let n = nm.n.unwrap_or(4.0);
            let w = boundary_witness(n, 0.1, nm.step.unwrap_or(1e-3));
            rep.check("witness loop is causal", w.causal as u8 as f64, 1.0, w.causal);
            rep.check("witness homology class", w.homology[0] as f64, -1.0, w.homology[0] == -1);
            rep.put("witness", &w);
        }
    }
    Ok(())
}

fn hedlund(cfg: &ExperimentConfig, rep: &mut Report, h: &Hedlund, out: Option<&Path>) -> Result<(), CliError> {
    let nm = &cfg.numerics;
    let sub = cfg.params.subtask.as_deref().unwrap_or("shadowing");
    rep.put("subtask", sub);
    match sub {
        "shadowing" => {
            let dx = nm.dx.unwrap_or(0.0025);
            let o = TubeOracle::new(h, dx).with_exec(EXEC);
            let p = vecd(&cfg.params.from, [0.0; 3]);
            let q = vecd(&cfg.params.to, [5.0, 3.0, 3.5]);
            let (r, path) = analyze_segment(&o, &p, &q)?;
            let sp = standard_path(h, &p, &q)?;
            segment_checks(rep, &r, "");
            rep.put("segment", &r);
            rep.put("tube_intervals", count_tube_changes(&path, h.eps()).intervals);
            rep.put("path", path_value(&path));
            rep.put("standard_path", path_value(&sp));
            if let Some(dir) = out {
                write_path(rep, dir, "path.csv", h, &path)?;
                write_path(rep, dir, "standard.csv", h, &sp)?;
            }
        }
        "segments" => {
            let o = TubeOracle::new(h, nm.dx.unwrap_or(0.0025)).with_exec(EXEC);
            let battery = segment_battery(nm.count.unwrap_or(24));
            let mut rows = Vec::new();
            for (p, q) in &battery {
                let (r, _) = analyze_segment(&o, p, q)?;
                segment_checks(rep, &r, &format!(" {:?}->{:?}", r.p, r.q));
                rows.push(r);
            }
            rep.put("segments", &rows);
        }
        "heteroclinic" => {
            let o = TubeOracle::new(h, nm.dx.unwrap_or(0.005)).with_exec(EXEC);
            let l = Line::nearest_of(0, &Vector::<3>::zeros());
            let lp = Line::new(1, [1.0, 1.5]);
            let r = heteroclinic_experiment(&o, &l, &lp, &[4, 8, 16], 0.5 * h.eps())?;
            rep.check("confined head and tail grow", r.pass as u8 as f64, 1.0, r.pass);
            for g in &r.rungs {
                rep.check(&format!("length ≥ lower bound n={}", g.n), g.length - g.lower_bound, 0.0, g.length >= g.lower_bound);
            }
            rep.put("heteroclinic", &r);
        }
        other => return Err(CliError::config("task", format!("unknown hedlund subtask `{other}` (shadowing, segments, heteroclinic)"))),
    }
    Ok(())
}

fn segment_checks(rep: &mut Report, r: &SegmentReport, tag: &str) {
    rep.tol("max_tube_changes", 6.0);
    rep.tol("shadowing", r.shadow_bound);
    rep.check(&format!("F30 margin{tag}"), r.f30_margin, 0.0, r.f30_margin >= 0.0);
    rep.check(&format!("L31 slack{tag}"), r.l31.slack, 0.0, r.l31.slack >= 0.0);
    rep.check(&format!("tube changes{tag}"), r.tube_changes as f64, 6.0, r.tube_changes <= 6);
    rep.check(&format!("shadowing{tag}"), r.shadowing, r.shadow_bound, r.shadowing <= r.shadow_bound);
}

fn graph_theorem(cfg: &ExperimentConfig, rep: &mut Report, b: &Built, out: Option<&Path>) -> Result<(), CliError> {
    let nm = &cfg.numerics;
    let ladder = minkowski_ladder(&[1e-1, 1e-2, 1e-3, 1e-4], 41);
    let etol = rep.tol("holder_exponent", 0.05);
    let growth = rep.tol("lipschitz_growth_min", 10.0);
    rep.check("Hölder exponent 0.5", ladder.exponent, etol, (ladder.exponent - 0.5).abs() <= etol);
    rep.check("Lipschitz growth across the ladder", ladder.lipschitz_growth, growth, ladder.lipschitz_growth >= growth);
    rep.put("ladder", &ladder);
    let samples = nm.samples.unwrap_or(10_000);
    let l20a = match b {
        Built::Hedlund(h) => {
            let bins = lorentz_core::measures::DirectionBins::<3>::standard();
            let mut mus = Vec::new();
            for i in 0..3 {
                let p = family_shift(i);
                let path = CausalPath::new(h, vec![p, p + unit3(i) * 2.0])?;
                mus.push(lorentz_core::measures::occupation_measure(&path, &bins)?);
            }
            let third = 1.0 / 3.0;
            let mix = OccupationMeasure::mix(&[(&mus[0], third), (&mus[1], third), (&mus[2], third)]);
            let s = SupportSample::from_measure(&mix);
            let fit = holder_check(&s);
            rep.check("support is a graph", fit.injective as u8 as f64, 1.0, fit.injective);
            rep.check("finite Hölder constant", fit.k, f64::INFINITY, fit.k.is_finite());
            let scatter: Vec<[f64; 2]> = s.pairs().iter().map(|p| [p.base, p.tangent]).collect();
            rep.put("scatter", scatter);
            rep.put("support_fit", &fit);
            lemma20a_check(h, samples, cfg.seed, EXEC)
        }
        Built::Boundary(_) => {
            return Err(CliError::config(
                "metric",
                "graph-theorem needs a class A metric; the boundary torus has lightlike stable directions",
            ))
        }
        _ => {
            let m = b.two().expect("2D metric");
            let eps = rep.tol("segment_eps", 0.1);
            let mut opts = CrossingOptions::default();
            if let Some(dx) = nm.dx {
                opts.spacing_ratio = dx / eps;
            }
            rep.tol("exchange_dx", opts.spacing_ratio * eps);
            let gains = crossing_battery(m, nm.count.unwrap_or(200), eps, Regime::Holder(1.0), cfg.seed, &opts, EXEC);
            rep.check("crossing gains positive", gains.min_gain, 0.0, gains.pass && gains.computed > 0);
            rep.check("η̂ > 0", gains.eta_hat, 0.0, gains.eta_hat > 0.0);
            let scatter: Vec<[f64; 2]> = gains.rows.iter().map(|r| [r.dist_base, r.dist_tangent]).collect();
            rep.put("scatter", scatter);
            if let Some(dir) = out {
                let f = csv_file(rep, dir, "gains.csv")?;
                gains.write_csv(BufWriter::new(f))?;
            }
            rep.put("gains", &gains);
            lemma20a_check(m, samples, cfg.seed, EXEC)
        }
    };
    rep.check("lemma inequalities ε̃ > 0", l20a.eps_tilde, 0.0, l20a.eps_tilde > 0.0 && l20a.pass);
    rep.check("lemma inequalities C̃ < ∞", l20a.c_tilde, f64::INFINITY, l20a.c_tilde.is_finite());
    rep.put("lemma20a", &l20a);
    Ok(())
}
