//! Reachable-set estimate of the stable time cone.

use crate::error::Result;
use crate::exec::Exec;
use crate::reach::{CausalGraph, GraphOptions};
use crate::spacetime::{MetricField, Vector, PATH_MARGIN};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct ConeOptions {
    pub spacing: f64,
    pub stencil_k: i64,
    pub radius: f64,
    /// Inner radius of the kept shell, as a fraction of `radius`.
    pub shell: f64,
    pub exec: Exec,
}

impl ConeOptions {
    pub fn new(spacing: f64, stencil_k: i64, radius: f64) -> Self {
        ConeOptions {
            spacing,
            stencil_k,
            radius,
            shell: 0.75,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeEstimate<const D: usize> {
    /// Reachable displacements with norm in the outer shell.
    #[serde(skip)]
    pub points: Vec<Vector<D>>,
    pub reached: usize,
    /// `min τ(h)/|h|` over kept points; positive means `0 ∉ hull` of unit directions.
    pub min_temporal_ratio: f64,
    pub zero_excluded: bool,
}

/// Runs the ball-mode DP from each base and keeps reachable shell displacements.
pub fn estimate_cone<const D: usize, M: MetricField<D> + ?Sized>(m: &M, bases: &[Vector<D>], opts: &ConeOptions) -> Result<ConeEstimate<D>> {
    let mut points = Vec::new();
    let mut reached = 0;
    let tau = m.temporal_covector();
    let r_in = opts.shell * opts.radius;
    for base in bases {
        let go = GraphOptions::ball(opts.spacing, opts.stencil_k, opts.radius)
            .with_margin(PATH_MARGIN)
            .with_exec(opts.exec);
        let g = CausalGraph::build(m, base, base, &go)?;
        let sol = g.solve(m, |lv| {
            for (i, v) in lv.values.iter().enumerate() {
                if *v > f64::NEG_INFINITY {
                    let idx = lv.coords(i);
                    let h = Vector::<D>::from_fn(|k, _| idx[k] as f64 * opts.spacing);
                    let n = h.norm();
                    if n >= r_in && n <= opts.radius {
                        points.push(h);
                    }
                }
            }
        });
        reached += sol.reached;
    }
    let min_ratio = points
        .iter()
        .map(|h| (0..D).map(|k| tau[k] as f64 * h[k]).sum::<f64>() / h.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ConeEstimate {
        points,
        reached,
        min_temporal_ratio: min_ratio,
        zero_excluded: min_ratio > 0.0,
    })
}

/// Orthonormal basis of `{x : ω·x = 0}`.
fn plane_basis<const D: usize>(omega: &Vector<D>) -> Vec<Vector<D>> {
    let u = omega / omega.norm();
    let mut out: Vec<Vector<D>> = Vec::new();
    for i in 0..D {
        let mut e = Vector::<D>::zeros();
        e[i] = 1.0;
        e -= u * u.dot(&e);
        for b in &out {
            e -= b * b.dot(&e);
        }
        if e.norm() > 1e-8 && out.len() + 1 < D {
            out.push(e / e.norm());
        }
    }
    out
}

impl<const D: usize> ConeEstimate<D> {
    /// Slice coordinates of `h/(ω·h)` in the plane `ω·x = 1` (second coordinate 0 when `D = 2`).
    pub fn slice_coords(omega: &Vector<D>, h: &Vector<D>) -> Option<[f64; 2]> {
        let s = omega.dot(h);
        if s <= 0.0 {
            return None;
        }
        let y = h / s;
        let b = plane_basis(omega);
        Some([b[0].dot(&y), if b.len() > 1 { b[1].dot(&y) } else { 0.0 }])
    }

    /// Hausdorff distance in the slice `ω·x = 1` between the hull of the estimate and the cone
    /// spanned by `generators`.
    pub fn hausdorff_to(&self, omega: &Vector<D>, generators: &[Vector<D>]) -> f64 {
        let est: Vec<[f64; 2]> = self.points.iter().filter_map(|h| Self::slice_coords(omega, h)).collect();
        let tgt: Vec<[f64; 2]> = generators.iter().filter_map(|h| Self::slice_coords(omega, h)).collect();
        if est.is_empty() {
            return f64::INFINITY;
        }
        hausdorff_polygons(&convex_hull_2d(&est), &convex_hull_2d(&tgt))
    }
}

fn cross(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull (monotone chain); collinear input yields its two extreme points.
pub fn convex_hull_2d(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for x in &p {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], x) <= 0.0 {
            lower.pop();
        }
        lower.push(*x);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for x in p.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], x) <= 0.0 {
            upper.pop();
        }
        upper.push(*x);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn seg_dist(x: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 > 0.0 { (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let e = [x[0] - a[0] - t * d[0], x[1] - a[1] - t * d[1]];
    (e[0] * e[0] + e[1] * e[1]).sqrt()
}

/// Distance from `x` to a convex polygon (0 inside).
fn dist_to_polygon(x: &[f64; 2], poly: &[[f64; 2]]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => seg_dist(x, &poly[0], &poly[0]),
        2 => seg_dist(x, &poly[0], &poly[1]),
        n => {
            let inside = (0..n).all(|i| cross(&poly[i], &poly[(i + 1) % n], x) >= -1e-15);
            if inside {
                return 0.0;
            }
            (0..n).map(|i| seg_dist(x, &poly[i], &poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Hausdorff distance between convex polygons; the maximum is attained at a vertex.
pub fn hausdorff_polygons(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let ab = a.iter().map(|x| dist_to_polygon(x, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|x| dist_to_polygon(x, a)).fold(0.0, f64::max);
    ab.max(ba)
}
