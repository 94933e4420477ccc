//! Tube-mode maximizers and the experiments built on them.

use super::lines::{transverse_axes, Line, LineSystem};
use super::standard::{guide_path, standard_path};
use super::tubes::{check_f30, check_l31, count_tube_changes, hausdorff, L31Report};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::reach::{time_separation, GraphOptions, Separation, SeparationOracle};
use crate::spacetime::{CausalPath, Hedlund, Vector};
use serde::Serialize;

/// Tube DP around the guide path between `p` and `q`.
#[derive(Clone, Debug)]
pub struct TubeOracle<'a> {
    pub metric: &'a Hedlund,
    pub spacing: f64,
    pub stencil_k: i64,
    /// Tube radius in units of `ε`.
    pub radius_eps: f64,
    pub exec: Exec,
}

impl<'a> TubeOracle<'a> {
    pub fn new(metric: &'a Hedlund, spacing: f64) -> Self {
        TubeOracle {
            metric,
            spacing,
            stencil_k: 1,
            radius_eps: 8.0,
            exec: Exec::Parallel,
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Maximizer together with the guide it was searched around.
    pub fn solve(&self, p: &Vector<3>, q: &Vector<3>) -> Result<(Separation<3>, CausalPath<3>)> {
        let m = self.metric;
        let guide = match guide_path(m, p, q) {
            Ok(g) => g,
            Err(_) => match connectability_check(m, p, q) {
                Connectability::Reachable(g) => g,
                Connectability::Unreachable => return Ok((Separation::unreachable(0), CausalPath::empty())),
                Connectability::Undecided => return Err(Error::NotConstructible("no guide path between the endpoints".into())),
            },
        };
        let opts = GraphOptions::tube(self.spacing, self.stencil_k, guide.vertices.clone(), self.radius_eps * m.eps()).with_exec(self.exec);
        let (sep, _) = time_separation(m, p, q, &opts)?;
        Ok((sep, guide))
    }
}

impl<'a> SeparationOracle<3> for TubeOracle<'a> {
    fn separation(&self, p: &Vector<3>, q: &Vector<3>) -> Result<Separation<3>> {
        Ok(self.solve(p, q)?.0)
    }

    fn name(&self) -> String {
        format!("hedlund-tube[dx={}, r={}ε]", self.spacing, self.radius_eps)
    }
}

#[derive(Clone, Debug)]
pub enum Connectability {
    /// Explicit causal certificate from `p` to `q`.
    Reachable(CausalPath<3>),
    /// Excluded by the temporal function `x¹+x²+x³` or the bound `hⁱ ≥ −2ε`.
    Unreachable,
    Undecided,
}

impl Connectability {
    pub fn is_reachable(&self) -> bool {
        matches!(self, Connectability::Reachable(_))
    }
}

/// Line point `x` with `±(x − p)` inside the `g_ε` cone (sign `+` looks to the future of `p`).
fn cone_candidates(m: &Hedlund, p: &Vector<3>, future: bool, reach: f64) -> Vec<(f64, Vector<3>, Line)> {
    let eps = m.eps();
    let ratio_max = 0.45 * eps;
    let v1 = m.v1;
    let sign = if future { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    for f in 0..3 {
        let (a, b) = transverse_axes(f);
        let base = Line::nearest_of(f, p);
        let n = reach.ceil() as i64 + 1;
        let slack = (reach * eps).ceil() as i64 + 2;
        for da in -1..=n {
            let oa = base.offset[0] + sign * da as f64;
            let shift = (oa - p[a]) - (base.offset[1] - p[b]);
            let centre = shift.round() as i64;
            for db in (centre - slack)..=(centre + slack) {
                let l = Line::new(f, [oa, base.offset[1] + db as f64]);
                // foot of the cone axis: choose the line parameter closest to the axis through p
                let w0 = l.point(0.0) - p;
                let e = {
                    let mut e = Vector::<3>::zeros();
                    e[f] = 1.0;
                    e
                };
                let pw = w0 - v1 * v1.dot(&w0);
                let pe = e - v1 * v1.dot(&e);
                let s = -pw.dot(&pe) / pe.norm_squared();
                let w = (w0 + e * s) * sign;
                let along = w.dot(&v1);
                if l.dist(p) < 1e-12 {
                    out.push((0.0, *p, l));
                    continue;
                }
                if along <= 0.0 {
                    continue;
                }
                let perp = (w - v1 * along).norm();
                if perp < ratio_max * along && along <= reach * 3f64.sqrt() {
                    out.push((along, p + w * sign, l));
                }
            }
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

/// Straight segment split into pieces of at most `step`.
fn subdivided(a: &Vector<3>, b: &Vector<3>, step: f64) -> Vec<Vector<3>> {
    let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
    (0..=n).map(|s| a + (b - a) * (s as f64 / n as f64)).collect()
}

/// Decides `q ∈ J⁺(p)` constructively: a straight `g_ε`-timelike segment onto a line,
/// a standard path, and a straight segment into `q`; or a temporal-function obstruction.
pub fn connectability_check(m: &Hedlund, p: &Vector<3>, q: &Vector<3>) -> Connectability {
    let eps = m.eps();
    let h = q - p;
    if h.sum() <= 0.0 || h.iter().any(|&x| x < -2.0 * eps) {
        return Connectability::Unreachable;
    }
    let ls = LineSystem::new(eps);
    if let (Some(a), Some(b)) = (ls.line_through(p, 1e-9), ls.line_through(q, 1e-9)) {
        if a.same(&b) && h[a.family] > 0.0 {
            if let Ok(c) = CausalPath::new(m, vec![*p, *q]) {
                return Connectability::Reachable(c);
            }
        }
    }
    let reach = 2.0 / eps;
    let from = cone_candidates(m, p, true, reach);
    let to = cone_candidates(m, q, false, reach);
    let step = eps / 4.0;
    for (_, pp, lp) in from.iter().take(64) {
        for (_, qq, lq) in to.iter().take(64) {
            let d = qq - pp;
            if d.iter().any(|&x| x < 0.5 - 1e-9) {
                continue;
            }
            let mid = if lp.family == lq.family {
                if lp.same(lq) && d[lp.family] > 0.0 {
                    vec![*pp, *qq]
                } else {
                    match guide_path(m, pp, qq) {
                        Ok(g) => g.vertices,
                        Err(_) => continue,
                    }
                }
            } else {
                match standard_path(m, pp, qq) {
                    Ok(g) => g.vertices,
                    Err(_) => continue,
                }
            };
            let mut v = subdivided(p, pp, step);
            v.extend(mid.into_iter().skip(1));
            v.extend(subdivided(qq, q, step).into_iter().skip(1));
            if let Ok(c) = CausalPath::new(m, v) {
                return Connectability::Reachable(c);
            }
        }
    }
    Connectability::Undecided
}

/// Everything checked on one computed maximal segment.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentReport {
    pub p: [f64; 3],
    pub q: [f64; 3],
    pub length: f64,
    pub guide_length: f64,
    pub f30_margin: f64,
    pub l31: L31Report,
    pub tube_changes: usize,
    pub shadowing: f64,
    pub shadow_bound: f64,
    pub nodes: usize,
}

impl SegmentReport {
    pub fn pass(&self) -> bool {
        self.f30_margin >= 0.0 && self.l31.slack >= 0.0 && self.tube_changes <= 6 && self.shadowing <= self.shadow_bound
    }
}

fn arr(v: &Vector<3>) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

/// Maximizer between points on distinct line families and the checks attached to it.
pub fn analyze_segment(oracle: &TubeOracle<'_>, p: &Vector<3>, q: &Vector<3>) -> Result<(SegmentReport, CausalPath<3>)> {
    let m = oracle.metric;
    let eps = m.eps();
    let sp = standard_path(m, p, q)?;
    let (sep, _) = oracle.solve(p, q)?;
    if !sep.reachable {
        return Err(Error::NotConstructible("tube search found no causal path".into()));
    }
    let path = sep.path;
    let an = count_tube_changes(&path, eps);
    let rep = SegmentReport {
        p: arr(p),
        q: arr(q),
        length: path.l_g,
        guide_length: sp.l_g,
        f30_margin: check_f30(&path, eps),
        l31: check_l31(m, &path, &an),
        tube_changes: an.changes,
        shadowing: hausdorff(&path, &sp, oracle.spacing / 2.0),
        shadow_bound: 4.0 * eps + 2.0 * oracle.spacing,
        nodes: sep.nodes,
    };
    Ok((rep, path))
}

/// Endpoint pairs `p ∈ lᵢ`, `q ∈ lⱼ` (`i ≠ j`) admitting standard paths, deterministic in `count`.
pub fn segment_battery(count: usize) -> Vec<(Vector<3>, Vector<3>)> {
    let mut out = Vec::new();
    let starts = [0.0, 0.25, 0.5];
    let mut n = 0usize;
    'outer: for extra in 0..4 {
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let k = 3 - i - j;
                for &t in &starts {
                    let p = Line::nearest_of(i, &Vector::<3>::zeros()).point(t);
                    // target line of family j ahead of p by roughly (2 + extra) in every axis
                    let guess = p + Vector::<3>::repeat(2.0 + extra as f64 * 0.5);
                    let lj = Line::nearest_of(j, &guess);
                    let mut q = lj.point(guess[j] + (n % 3) as f64 * 0.25);
                    q[j] = (q[j] / 0.0025).round() * 0.0025;
                    let h = q - p;
                    let ok = if (h[k] - 0.5).abs() < 1e-9 {
                        h[i] >= 0.5 && h[j] >= 0.5
                    } else {
                        h[k] >= 1.5 - 1e-9 && h[i] >= 1.0 && h[j] >= 1.0
                    };
                    if ok {
                        out.push((p, q));
                        n += 1;
                        if out.len() == count {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderRung {
    pub n: usize,
    pub length: f64,
    pub lower_bound: f64,
    /// Background length of the initial arc inside `B_δ(l)`.
    pub head_confined: f64,
    /// Background length of the final arc inside `B_δ(l′)`.
    pub tail_confined: f64,
    pub tube_changes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeteroclinicReport {
    pub l: Line,
    pub l_prime: Line,
    pub delta: f64,
    pub rungs: Vec<LadderRung>,
    /// Confined head and tail lengths grow along the ladder.
    pub pass: bool,
}

fn confined_prefix(path: &CausalPath<3>, l: &Line, delta: f64, step: f64, from_end: bool) -> f64 {
    let total = path.l_r;
    let n = (total / step).ceil() as usize;
    let mut len = 0.0;
    for s in 0..=n {
        let t = total * s as f64 / n as f64;
        let x = if from_end { path.at(total - t) } else { path.at(t) };
        if l.dist(&x) >= delta {
            break;
        }
        len = t;
    }
    len
}

/// Maximizers from `x − n·e_i` to `x′ + n·e_j` along a doubling ladder; `x ∈ l`, `x′ ∈ l′`.
pub fn heteroclinic_experiment(oracle: &TubeOracle<'_>, l: &Line, lp: &Line, ladder: &[usize], delta: f64) -> Result<HeteroclinicReport> {
    let m = oracle.metric;
    let (i, j) = (l.family, lp.family);
    let (x, xp, ei, ej);
    if i != j {
        let k = 3 - i - j;
        if lp.coord(k).unwrap() < l.coord(k).unwrap() {
            return Err(Error::NotConstructible("line ordering: the second line is not in the future of the first".into()));
        }
        x = l.point(lp.coord(i).unwrap());
        xp = lp.point(l.coord(j).unwrap());
        ei = i;
        ej = j;
    } else {
        let (a, b) = transverse_axes(i);
        if !(lp.offset[0] > l.offset[0] && lp.offset[1] > l.offset[1]) {
            let _ = (a, b);
            return Err(Error::NotConstructible("same-family lines must be strictly ordered in both transverse axes".into()));
        }
        x = l.point(0.0);
        xp = lp.point(0.0);
        ei = i;
        ej = i;
    }
    let lam = m.lambdas();
    let step = oracle.spacing;
    let rungs: Vec<Result<LadderRung>> = ladder
        .iter()
        .map(|&n| {
            let mut p = x;
            p[ei] -= n as f64;
            let mut q = xp;
            q[ej] += n as f64;
            let (sep, _) = oracle.solve(&p, &q)?;
            if !sep.reachable {
                return Err(Error::NotConstructible(format!("no maximizer found at n = {n}")));
            }
            let h = q - p;
            let lb: f64 = (0..3).map(|t| lam[t] * (h[t] - 1.0)).sum();
            let an = count_tube_changes(&sep.path, m.eps());
            Ok(LadderRung {
                n,
                length: sep.value,
                lower_bound: lb,
                head_confined: confined_prefix(&sep.path, l, delta, step, false),
                tail_confined: confined_prefix(&sep.path, lp, delta, step, true),
                tube_changes: an.changes,
            })
        })
        .collect();
    let rungs = rungs.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = rungs
        .windows(2)
        .all(|w| w[1].head_confined >= w[0].head_confined && w[1].tail_confined >= w[0].tail_confined)
        && rungs.iter().all(|r| r.head_confined > 0.0 && r.tail_confined > 0.0);
    Ok(HeteroclinicReport {
        l: *l,
        l_prime: *lp,
        delta,
        rungs,
        pass,
    })
}
