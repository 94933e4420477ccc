//! Tube-change analysis and the inequalities checked along Hedlund paths.

use super::lines::{Line, LineSystem};
use crate::spacetime::{is_future_causal, CausalPath, Hedlund, MetricField, Vector, PATH_MARGIN};
use serde::Serialize;

/// Maximal parameter interval on which the path stays in one tube component (or outside all tubes).
#[derive(Clone, Debug, Serialize)]
pub struct TubeInterval {
    pub t0: f64,
    pub t1: f64,
    pub line: Option<Line>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TubeAnalysis {
    /// Maximal `n` with `t₀ < … < tₙ` in pairwise consecutive distinct tube components.
    pub changes: usize,
    /// Compressed sequence of visited components.
    pub sequence: Vec<Line>,
    pub intervals: Vec<TubeInterval>,
    /// Connected components of `A` as parameter intervals.
    pub a_set: Vec<(f64, f64)>,
    /// `∫_A γ̇ⁱ` per axis.
    pub a_integrals: [f64; 3],
}

fn label(ls: &LineSystem, p: &Vector<3>) -> Option<Line> {
    ls.component(p)
}

fn same(a: &Option<Line>, b: &Option<Line>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => x.same(y),
        _ => false,
    }
}

/// Samples the path at steps `≤ ε/4` and locates every label switch by bisection.
pub fn tube_intervals(path: &CausalPath<3>, eps: f64) -> Vec<TubeInterval> {
    let ls = LineSystem::new(eps);
    if path.is_empty() {
        return Vec::new();
    }
    let total = path.l_r;
    let mut ts: Vec<f64> = Vec::new();
    for w in path.param.windows(2) {
        let n = ((w[1] - w[0]) / (eps / 4.0)).ceil().max(1.0) as usize;
        for s in 0..n {
            ts.push(w[0] + (w[1] - w[0]) * s as f64 / n as f64);
        }
    }
    ts.push(total);
    let mut out: Vec<TubeInterval> = Vec::new();
    let mut cur = label(&ls, &path.at(ts[0]));
    let mut start = ts[0];
    for w in ts.windows(2) {
        let next = label(&ls, &path.at(w[1]));
        if !same(&cur, &next) {
            let (mut lo, mut hi) = (w[0], w[1]);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if same(&label(&ls, &path.at(mid)), &cur) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(TubeInterval { t0: start, t1: hi, line: cur });
            start = hi;
            cur = next;
        }
    }
    out.push(TubeInterval { t0: start, t1: total, line: cur });
    out
}

pub fn count_tube_changes(path: &CausalPath<3>, eps: f64) -> TubeAnalysis {
    let intervals = tube_intervals(path, eps);
    let mut sequence: Vec<Line> = Vec::new();
    for iv in &intervals {
        if let Some(l) = iv.line {
            if sequence.last().map_or(true, |s| !s.same(&l)) {
                sequence.push(l);
            }
        }
    }
    let changes = sequence.len().saturating_sub(1);
    // gaps between two visits of the same tube belong to that tube's A_i
    let mut a_set = Vec::new();
    let n = intervals.len();
    for (k, iv) in intervals.iter().enumerate() {
        if iv.line.is_some() {
            continue;
        }
        let prev = if k > 0 { intervals[k - 1].line } else { None };
        let next = if k + 1 < n { intervals[k + 1].line } else { None };
        let closed = matches!((prev, next), (Some(a), Some(b)) if a.same(&b));
        if !closed && iv.t1 > iv.t0 {
            a_set.push((iv.t0, iv.t1));
        }
    }
    let mut a_integrals = [0.0; 3];
    for (t0, t1) in &a_set {
        let d = path.at(*t1) - path.at(*t0);
        for i in 0..3 {
            a_integrals[i] += d[i];
        }
    }
    TubeAnalysis {
        changes,
        sequence,
        intervals,
        a_set,
        a_integrals,
    }
}

/// `2(Σ(q−p)ⁱ + 4ε) − L^{g_R}(γ)`.
pub fn check_f30(path: &CausalPath<3>, eps: f64) -> f64 {
    let h = path.displacement();
    2.0 * (h.sum() + 4.0 * eps) - path.l_r
}

#[derive(Clone, Debug, Serialize)]
pub struct L31Report {
    /// `Σλᵢ∫_A γ̇ⁱ`.
    pub lhs: f64,
    /// `Σλᵢ(q−p)ⁱ − L^g(γ) + 4ε`.
    pub gap: f64,
    /// Slack of the inequality as literally stated, with factor `1 − 8ε`.
    pub slack_literal: f64,
    /// Slack with the constant `c = 1 − 8ε/(1−4ε) − ε` that the estimate chain supports: `gap/c − lhs`.
    pub slack: f64,
}

pub fn check_l31(m: &Hedlund, path: &CausalPath<3>, analysis: &TubeAnalysis) -> L31Report {
    let eps = m.eps();
    let lam = m.lambdas();
    let lhs: f64 = (0..3).map(|i| lam[i] * analysis.a_integrals[i]).sum();
    let h = path.displacement();
    let gap = (0..3).map(|i| lam[i] * h[i]).sum::<f64>() - path.l_g + 4.0 * eps;
    let c = 1.0 - 8.0 * eps / (1.0 - 4.0 * eps) - eps;
    L31Report {
        lhs,
        gap,
        slack_literal: (1.0 - 8.0 * eps) * gap - lhs,
        slack: gap / c - lhs,
    }
}

fn point_segment(x: &Vector<3>, a: &Vector<3>, b: &Vector<3>) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((x - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x - (a + d * t)).norm()
}

fn dist_to_poly(x: &Vector<3>, v: &[Vector<3>]) -> f64 {
    if v.len() == 1 {
        return (x - v[0]).norm();
    }
    v.windows(2).map(|w| point_segment(x, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
}

fn one_sided(a: &CausalPath<3>, b: &CausalPath<3>, step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for w in a.vertices.windows(2) {
        let n = ((w[1] - w[0]).norm() / step).ceil().max(1.0) as usize;
        for s in 0..=n {
            let x = w[0] + (w[1] - w[0]) * (s as f64 / n as f64);
            worst = worst.max(dist_to_poly(&x, &b.vertices));
        }
    }
    if a.len() == 1 {
        worst = dist_to_poly(&a.vertices[0], &b.vertices);
    }
    worst
}

/// Hausdorff distance between two polylines, sampled at `step`.
pub fn hausdorff(a: &CausalPath<3>, b: &CausalPath<3>, step: f64) -> f64 {
    one_sided(a, b, step).max(one_sided(b, a, step))
}

/// Hausdorff distance from a computed maximizer to the standard path between its endpoints.
pub fn shadowing_check(m: &Hedlund, path: &CausalPath<3>, step: f64) -> crate::error::Result<f64> {
    let (p, q) = (path.vertices[0], *path.vertices.last().unwrap());
    let sp = super::standard::standard_path(m, &p, &q)?;
    Ok(hausdorff(path, &sp, step))
}

/// Smallest `r` such that the path lies in `B_δ(l)` outside end windows of background length `r`.
pub fn tube_confinement_check(path: &CausalPath<3>, line: &Line, delta: f64, step: f64) -> f64 {
    let total = path.l_r;
    let n = (total / step).ceil().max(1.0) as usize;
    let mut r: f64 = 0.0;
    for s in 0..=n {
        let t = total * s as f64 / n as f64;
        if line.dist(&path.at(t)) >= delta {
            r = r.max(t.min(total - t));
        }
    }
    r
}

/// `ε′`: largest sampled radius such that every future null vector of the comparison form
/// `(λ_j²/3)(−(dxʲ)² + Σ_{a≠j}(dxᵃ)²)` is future causal for `g` throughout `B_{ε′}(l)`.
pub fn epsilon_prime(m: &Hedlund, family: usize, radii: usize, angles: usize) -> (f64, bool) {
    let eps = m.eps();
    let line = Line::nearest_of(family, &Vector::<3>::zeros());
    let (a, b) = super::lines::transverse_axes(family);
    let mut best = 0.0;
    for ri in 1..=radii {
        let r = eps * ri as f64 / radii as f64;
        let mut ok = true;
        'outer: for pa in 0..angles {
            let th = std::f64::consts::TAU * pa as f64 / angles as f64;
            let mut p = line.point(0.3);
            p[a] += r * th.cos();
            p[b] += r * th.sin();
            if r >= eps {
                ok = false;
                break;
            }
            for va in 0..angles {
                let ph = std::f64::consts::TAU * va as f64 / angles as f64;
                let mut v = Vector::<3>::zeros();
                v[family] = 1.0;
                v[a] = ph.cos();
                v[b] = ph.sin();
                if !is_future_causal(m, &p, &v, PATH_MARGIN) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            best = r;
        } else {
            break;
        }
    }
    if best > 0.0 {
        (best, true)
    } else {
        (eps / 2.0, false)
    }
}

/// `η(δ) = λ_j − sup √(−1/(g⁻¹)_jj)` over `δ ≤ dist(p, l) < ε`, the best constant with
/// `√|g(v,v)| ≤ (λ_j − η)vʲ` for future `v` in that annulus.
pub fn eta(m: &Hedlund, family: usize, delta: f64, samples: usize) -> f64 {
    let eps = m.eps();
    let line = Line::nearest_of(family, &Vector::<3>::zeros());
    let (a, b) = super::lines::transverse_axes(family);
    let lam = m.lambdas()[family];
    let mut sup: f64 = 0.0;
    for s in 0..samples {
        let r = delta + (eps - delta) * s as f64 / samples as f64;
        for th in [0.0, 1.1, 2.3, 4.0] {
            let mut p = line.point(0.1);
            p[a] += r * f64::cos(th);
            p[b] += r * f64::sin(th);
            let g = m.metric(&p);
            if let Some(gi) = g.try_inverse() {
                let jj = gi[(family, family)];
                if jj < 0.0 {
                    sup = sup.max((-1.0 / jj).sqrt());
                }
            }
        }
    }
    lam - sup
}
