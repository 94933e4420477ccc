//! Local ascent on polyline vertices: golden-section search transverse to the neighbor chord.

use crate::error::{Error, Result};
use crate::spacetime::{segment_length, Quadrature, is_future_causal_form, quad, CausalPath, MetricField, Vector, PATH_MARGIN};

#[derive(Clone, Debug)]
pub struct RefineOptions<const D: usize> {
    pub max_sweeps: usize,
    /// Maximal displacement of a vertex per sweep.
    pub step: f64,
    /// A sweep gaining less than this is a stall.
    pub tol: f64,
    pub tube: Option<(Vec<Vector<D>>, f64)>,
    pub resample: Option<usize>,
    pub rule: Quadrature,
}

impl<const D: usize> RefineOptions<D> {
    pub fn new(step: f64) -> Self {
        RefineOptions {
            max_sweeps: 200,
            step,
            tol: 1e-12,
            tube: None,
            resample: None,
            rule: Quadrature::Simpson,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefineStatus {
    Converged,
    Stalled,
    MaxSweeps,
}

#[derive(Clone, Debug)]
pub struct RefineReport<const D: usize> {
    pub path: CausalPath<D>,
    /// Objective after each sweep, starting with the input.
    pub history: Vec<f64>,
    pub status: RefineStatus,
    pub sweeps: usize,
}

fn seg_ok<const D: usize, M: MetricField<D> + ?Sized>(m: &M, a: &Vector<D>, b: &Vector<D>) -> bool {
    let d = b - a;
    let mid = (a + b) * 0.5;
    is_future_causal_form(&m.metric(&mid), &m.orientation(&mid), &d, quad(&m.background(&mid), &d), PATH_MARGIN)
}

fn dist_to_polyline<const D: usize>(x: &Vector<D>, poly: &[Vector<D>]) -> f64 {
    if poly.len() == 1 {
        return (x - poly[0]).norm();
    }
    poly.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let l2 = d.norm_squared();
            let t = if l2 > 0.0 { ((x - w[0]).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
            (x - (w[0] + d * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the complement of `c`.
fn transverse<const D: usize>(c: &Vector<D>) -> Vec<Vector<D>> {
    let n = c.norm();
    if n == 0.0 {
        return Vec::new();
    }
    let u = c / n;
    let mut basis: Vec<Vector<D>> = Vec::new();
    let mut cands: Vec<(f64, usize)> = (0..D).map(|i| (u[i].abs(), i)).collect();
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, i) in &cands {
        if basis.len() + 1 == D {
            break;
        }
        let mut e = Vector::<D>::zeros();
        e[i] = 1.0;
        e -= u * u.dot(&e);
        for b in &basis {
            e -= b * b.dot(&e);
        }
        let en = e.norm();
        if en > 1e-8 {
            basis.push(e / en);
        }
    }
    basis
}

fn resample<const D: usize, M: MetricField<D> + ?Sized>(m: &M, path: &CausalPath<D>, n: usize) -> Option<Vec<Vector<D>>> {
    if n < 1 || path.len() < 2 {
        return None;
    }
    let mut v: Vec<Vector<D>> = (0..=n).map(|i| path.at(path.l_r * i as f64 / n as f64)).collect();
    v[0] = path.vertices[0];
    v[n] = *path.vertices.last().unwrap();
    v.windows(2).all(|w| seg_ok(m, &w[0], &w[1])).then_some(v)
}

fn objective<const D: usize, M: MetricField<D> + ?Sized>(m: &M, v: &[Vector<D>], rule: Quadrature) -> f64 {
    v.windows(2).map(|w| segment_length(m, &w[0], &w[1], rule)).sum()
}

/// Improves a causal polyline with fixed endpoints. Only strict, admissible improvements are accepted,
/// so the objective is non-decreasing along `history`.
pub fn refine_maximizer<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    path: &CausalPath<D>,
    opts: &RefineOptions<D>,
) -> Result<RefineReport<D>> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let mut v = match opts.resample {
        Some(n) => resample(m, path, n).unwrap_or_else(|| path.vertices.clone()),
        None => path.vertices.clone(),
    };
    let rule = opts.rule;
    let mut cur = objective(m, &v, rule);
    let mut history = vec![cur];
    let mut status = RefineStatus::MaxSweeps;
    let mut sweeps = 0;
    let h = if D > 1 { opts.step / ((D - 1) as f64).sqrt() } else { opts.step };
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..opts.max_sweeps {
        sweeps += 1;
        for i in 1..v.len().saturating_sub(1) {
            let (a, b) = (v[i - 1], v[i + 1]);
            for e in transverse(&(b - a)) {
                let x = v[i];
                let f = |t: f64| -> f64 {
                    let y = x + e * t;
                    if let Some((g, r)) = &opts.tube {
                        if dist_to_polyline(&y, g) > *r {
                            return f64::NEG_INFINITY;
                        }
                    }
                    if !seg_ok(m, &a, &y) || !seg_ok(m, &y, &b) {
                        return f64::NEG_INFINITY;
                    }
                    segment_length(m, &a, &y, rule) + segment_length(m, &y, &b, rule)
                };
                let f0 = f(0.0);
                let (mut lo, mut hi) = (-h, h);
                let mut c = hi - gr * (hi - lo);
                let mut d = lo + gr * (hi - lo);
                let (mut fc, mut fd) = (f(c), f(d));
                for _ in 0..60 {
                    if fc >= fd {
                        hi = d;
                        d = c;
                        fd = fc;
                        c = hi - gr * (hi - lo);
                        fc = f(c);
                    } else {
                        lo = c;
                        c = d;
                        fc = fd;
                        d = lo + gr * (hi - lo);
                        fd = f(d);
                    }
                }
                let (t, ft) = if fc >= fd { (c, fc) } else { (d, fd) };
                // ignore gains at rounding level; a flat objective would otherwise drift the vertex
                if ft > f0 + 4.0 * f64::EPSILON * f0.abs() {
                    v[i] = x + e * t;
                }
            }
        }
        let next = objective(m, &v, rule);
        let gain = next - cur;
        cur = next.max(cur);
        history.push(cur);
        if gain.abs() < opts.tol {
            status = if gain.abs() == 0.0 { RefineStatus::Converged } else { RefineStatus::Stalled };
            break;
        }
    }
    let path = CausalPath::new(m, v)?;
    Ok(RefineReport {
        path,
        history,
        status,
        sweeps,
    })
}
