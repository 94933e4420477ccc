//! Graph property checks: Hölder and Lipschitz fits of inverse projections,
//! crossing-exchange gains and the pointwise cone inequalities.
//!
//! Distances between unit tangent vectors are taken in `TM ≅ ℝⁿ × ℝⁿ` as
//! `√(|x−y|² + |v−w|²)`, with `x−y` reduced on the torus.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::flow::{integrate_pregeodesic, FlowOptions};
use crate::measures::OccupationMeasure;
use crate::reach::{GridOracle, RefineOptions, SeparationOracle};
use crate::spacetime::cone::{light_distance, sample_future_causal, Frame};
use crate::spacetime::{
    bilinear, is_future_causal, quad, torus_dist, CausalPath, Matrix, MetricField, Vector, PATH_MARGIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

/// Unit tangent vectors with base points.
#[derive(Clone, Debug, Default)]
pub struct SupportSample<const D: usize> {
    pub bases: Vec<Vector<D>>,
    pub dirs: Vec<Vector<D>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairDist {
    pub i: usize,
    pub j: usize,
    pub base: f64,
    pub tangent: f64,
}

impl<const D: usize> SupportSample<D> {
    pub fn new() -> Self {
        SupportSample {
            bases: Vec::new(),
            dirs: Vec::new(),
        }
    }

    /// Adds `(x, v/|v|)`; zero vectors are ignored.
    pub fn push(&mut self, x: Vector<D>, v: Vector<D>) {
        let n = v.norm();
        if n > 0.0 {
            self.bases.push(x);
            self.dirs.push(v / n);
        }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Cell centroids and mean directions of a measure.
    pub fn from_measure(mu: &OccupationMeasure<D>) -> Self {
        let mut s = Self::new();
        for c in mu.cells.values() {
            if c.weight > 0.0 {
                s.push(c.position(), c.direction());
            }
        }
        s
    }

    /// Vertices and segment directions of a path.
    pub fn from_path(path: &CausalPath<D>) -> Self {
        let mut s = Self::new();
        for (w, d) in path.vertices.windows(2).zip(path.segment_directions()) {
            s.push((w[0] + w[1]) * 0.5, d);
        }
        s
    }

    /// Restricts to directions with `−g(v,v) ≥ κ·|v|²`.
    pub fn restrict_timelike<M: MetricField<D> + ?Sized>(&self, m: &M, kappa: f64) -> Self {
        let mut s = Self::new();
        for (x, v) in self.bases.iter().zip(&self.dirs) {
            if -quad(&m.metric(x), v) >= kappa * v.norm_squared() && is_future_causal(m, x, v, PATH_MARGIN) {
                s.push(*x, *v);
            }
        }
        s
    }

    pub fn pair(&self, i: usize, j: usize) -> PairDist {
        let base = torus_dist(&self.bases[i], &self.bases[j]);
        let dv = (self.dirs[i] - self.dirs[j]).norm();
        PairDist {
            i,
            j,
            base,
            tangent: (base * base + dv * dv).sqrt(),
        }
    }

    /// All unordered pairs, row by row.
    pub fn pairs(&self) -> Vec<PairDist> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.pair(i, j));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderFit {
    /// Smallest `K` with `dist(v,w)² ≤ K·dist(πv,πw)` over pairs with distinct bases.
    pub k: f64,
    pub pairs: usize,
    /// Pairs whose bases agree within the tolerance while the directions do not.
    pub violations: Vec<PairDist>,
    pub injective: bool,
}

pub const INJECTIVITY_TOL: f64 = 1e-6;

pub fn holder_check<const D: usize>(sample: &SupportSample<D>) -> HolderFit {
    holder_check_with(sample, INJECTIVITY_TOL)
}

/// As [`holder_check`] with an explicit base-collision tolerance.
pub fn holder_check_with<const D: usize>(sample: &SupportSample<D>, tol: f64) -> HolderFit {
    let mut k: f64 = 0.0;
    let mut violations = Vec::new();
    let pairs = sample.pairs();
    for p in &pairs {
        if p.base <= tol {
            if p.tangent > tol.max(1e-15) + p.base {
                violations.push(*p);
            }
            continue;
        }
        k = k.max(p.tangent * p.tangent / p.base);
    }
    HolderFit {
        k,
        pairs: pairs.len(),
        injective: violations.is_empty(),
        violations,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzFit {
    pub kappa: f64,
    /// Smallest `K′` with `dist(v,w) ≤ K′·dist(πv,πw)`.
    pub k: f64,
    pub used: usize,
}

/// Lipschitz fit over the samples lying in `Time^κ`.
pub fn lipschitz_check<const D: usize, M: MetricField<D> + ?Sized>(m: &M, sample: &SupportSample<D>, kappa: f64) -> LipschitzFit {
    lipschitz_check_with(m, sample, kappa, INJECTIVITY_TOL)
}

pub fn lipschitz_check_with<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    sample: &SupportSample<D>,
    kappa: f64,
    tol: f64,
) -> LipschitzFit {
    let s = sample.restrict_timelike(m, kappa);
    let k = s
        .pairs()
        .iter()
        .filter(|p| p.base > tol)
        .map(|p| p.tangent / p.base)
        .fold(0.0, f64::max);
    LipschitzFit { kappa, k, used: s.len() }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Two Minkowski lines `t·u` and `p₀ + t·w` with `|p₀| = δ²`, `|u − w| = δ`.
pub fn minkowski_pair_family(delta: f64, samples: usize) -> SupportSample<3> {
    let th = 2.0 * (0.5 * delta).asin();
    let u = Vector::<3>::new(1.0, 0.0, 0.0);
    let w = Vector::<3>::new(th.cos(), th.sin(), 0.0);
    let p0 = Vector::<3>::new(0.0, 0.0, delta * delta);
    let mut s = SupportSample::new();
    let n = samples.max(1);
    for i in 0..n {
        let t = if n == 1 { 0.0 } else { -0.5 + i as f64 / (n - 1) as f64 };
        s.push(u * t, u);
        s.push(p0 + w * t, w);
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub delta: f64,
    pub holder_k: f64,
    pub lipschitz_k: f64,
    /// The pair of smallest base distance.
    pub closest: PairDist,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub rows: Vec<LadderRow>,
    pub exponent: f64,
    pub lipschitz_growth: f64,
    pub holder_spread: f64,
    pub injective: bool,
}

impl LadderReport {
    pub fn pass(&self, exponent_tol: f64, min_growth: f64) -> bool {
        (self.exponent - 0.5).abs() <= exponent_tol && self.lipschitz_growth >= min_growth && self.injective
    }
}

/// Hölder and Lipschitz fits along the `δ` ladder and the log-log exponent of the closest pairs.
pub fn minkowski_ladder(deltas: &[f64], samples: usize) -> LadderReport {
    let flat = crate::spacetime::make_flat::<3>();
    let mut rows = Vec::new();
    let mut injective = true;
    for &d in deltas {
        let s = minkowski_pair_family(d, samples);
        // bases here sit δ² apart, far below the default collision tolerance
        let tol = 1e-3 * d * d;
        let h = holder_check_with(&s, tol);
        injective &= h.injective;
        let l = lipschitz_check_with(&flat, &s, 0.0, tol);
        let closest = s
            .pairs()
            .into_iter()
            .filter(|p| p.base > tol)
            .min_by(|a, b| a.base.total_cmp(&b.base))
            .expect("family has pairs");
        rows.push(LadderRow {
            delta: d,
            holder_k: h.k,
            lipschitz_k: l.k,
            closest,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.closest.base, r.closest.tangent)).collect();
    let lmin = rows.iter().map(|r| r.lipschitz_k).fold(f64::INFINITY, f64::min);
    let lmax = rows.iter().map(|r| r.lipschitz_k).fold(0.0, f64::max);
    let hmin = rows.iter().map(|r| r.holder_k).fold(f64::INFINITY, f64::min);
    let hmax = rows.iter().map(|r| r.holder_k).fold(0.0, f64::max);
    LadderReport {
        exponent: fit_exponent(&pts),
        lipschitz_growth: lmax / lmin,
        holder_spread: hmax / hmin,
        injective,
        rows,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma20aReport {
    pub samples: usize,
    /// Largest `ε̃` with `−g(v,w) − |v|_g|w|_g ≥ ε̃|v||w|sin²∠(v,w)`.
    pub eps_tilde: f64,
    /// Smallest `C̃` with `|g(v,v)| ≤ C̃|v|·dist(v, light cone)`.
    pub c_tilde: f64,
    /// Pairs where the left side of the first inequality is negative beyond rounding.
    pub reverse_cs_failures: usize,
    pub pass: bool,
}

/// Samples future causal pairs at shared base points and fits both constants.
pub fn lemma20a_check<const D: usize, M: MetricField<D> + ?Sized>(m: &M, samples: usize, seed: u64, exec: Exec) -> Lemma20aReport {
    let chunk = 1000usize;
    let chunks = samples.div_ceil(chunk);
    let parts = exec.map(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let landmarks = m.landmark_points();
        let mut eps = f64::INFINITY;
        let mut cmax: f64 = 0.0;
        let mut bad = 0usize;
        let n = chunk.min(samples - c * chunk);
        for k in 0..n {
            let p: Vector<D> = if !landmarks.is_empty() && k % 4 == 0 {
                landmarks[rng.gen_range(0..landmarks.len())]
            } else {
                Vector::<D>::from_fn(|_, _| rng.gen::<f64>())
            };
            let g = m.metric(&p);
            let o = m.orientation(&p);
            let frame = Frame::new(&g, &o);
            let v = sample_future_causal(&frame, &mut rng, false);
            let edge = rng.gen_bool(0.2);
            let w = sample_future_causal(&frame, &mut rng, edge);
            let (e, ok) = lemma20a_ratio(&g, &v, &w);
            if !ok {
                bad += 1;
            }
            eps = eps.min(e);
            let ld = light_distance(&g, &o, &v);
            if ld > 1e-12 {
                cmax = cmax.max(quad(&g, &v).abs() / (v.norm() * ld));
            }
        }
        (eps, cmax, bad)
    });
    let eps_tilde = parts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let c_tilde = parts.iter().map(|p| p.1).fold(0.0, f64::max);
    let bad: usize = parts.iter().map(|p| p.2).sum();
    Lemma20aReport {
        samples,
        eps_tilde,
        c_tilde,
        reverse_cs_failures: bad,
        pass: bad == 0 && eps_tilde > 0.0 && c_tilde.is_finite(),
    }
}

/// `(ratio, ok)` for the first inequality; `ratio = ∞` when `v ∥ w`.
pub fn lemma20a_ratio<const D: usize>(g: &Matrix<D>, v: &Vector<D>, w: &Vector<D>) -> (f64, bool) {
    let nv = (-quad(g, v)).max(0.0).sqrt();
    let nw = (-quad(g, w)).max(0.0).sqrt();
    let lhs = -bilinear(g, v, w) - nv * nw;
    let (a, b) = (v.norm(), w.norm());
    let cos = (v.dot(w) / (a * b)).clamp(-1.0, 1.0);
    let sin2 = 1.0 - cos * cos;
    let ok = lhs >= -1e-12 * a * b;
    if sin2 < 1e-12 {
        return (f64::INFINITY, ok);
    }
    (lhs / (a * b * sin2), ok)
}

/// Pregeodesic segment through `x0` with unit tangent `v0`, parameterized on `[−ε, ε]`.
pub fn pregeodesic_segment<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x0: &Vector<D>,
    v0: &Vector<D>,
    eps: f64,
    step: f64,
) -> Result<CausalPath<D>> {
    let opts = FlowOptions {
        step,
        ..FlowOptions::default()
    };
    let fwd = integrate_pregeodesic(m, x0, v0, eps, &opts)?;
    let bwd = integrate_pregeodesic(m, x0, &-v0, eps, &opts)?;
    let mut pts: Vec<Vector<D>> = bwd.points.iter().rev().cloned().collect();
    pts.extend(fwd.points.iter().skip(1));
    CausalPath::new(m, pts)
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingGain {
    pub gain: f64,
    /// `d̂` of the two exchanged pairs.
    pub exchanged: [f64; 2],
    pub lengths: [f64; 2],
    pub dist_base: f64,
    pub dist_tangent: f64,
    pub nodes: usize,
}

/// Settings for the local exchange distances.
#[derive(Clone, Debug)]
pub struct CrossingOptions {
    /// Grid spacing as a fraction of `ε`.
    pub spacing_ratio: f64,
    pub stencil_k: i64,
    pub refine_vertices: usize,
    pub refine_sweeps: usize,
    pub exec: Exec,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        CrossingOptions {
            spacing_ratio: 1.0 / 50.0,
            stencil_k: 3,
            refine_vertices: 12,
            refine_sweeps: 80,
            exec: Exec::Sequential,
        }
    }
}

fn exchange_distance<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    p: &Vector<D>,
    q: &Vector<D>,
    eps: f64,
    opts: &CrossingOptions,
) -> Result<(f64, usize)> {
    if !is_future_causal(m, &((p + q) * 0.5), &(q - p), PATH_MARGIN) && !is_future_causal(m, p, &(q - p), PATH_MARGIN) {
        return Err(Error::NotCrossingConfiguration(format!("{:?} does not precede {:?}", p.as_slice(), q.as_slice())));
    }
    let dx = eps * opts.spacing_ratio;
    let mut refine = RefineOptions::new(0.5 * dx);
    refine.resample = Some(opts.refine_vertices);
    refine.max_sweeps = opts.refine_sweeps;
    let oracle = GridOracle::new(m, dx, opts.stencil_k)
        .with_exact_endpoint()
        .with_refine(refine.clone())
        .with_exec(opts.exec);
    let sep = oracle.separation(p, q)?;
    let mut best = if sep.reachable { sep.value } else { 0.0 };
    // the chord is a competitor whenever it is causal
    if let Ok(chord) = CausalPath::new(m, vec![*p, *q]) {
        let rep = crate::reach::refine_maximizer(m, &chord, &refine)?;
        best = best.max(rep.path.l_g).max(chord.l_g);
    }
    if !sep.reachable && best == 0.0 {
        return Err(Error::NotCrossingConfiguration("exchange endpoints are not causally related".into()));
    }
    Ok((best, sep.nodes))
}

/// `d̂(x₁(−ε),x₂(ε)) + d̂(x₂(−ε),x₁(ε)) − L(x₁) − L(x₂)` for segments parameterized on `[−ε, ε]`.
pub fn crossing_gain<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x1: &CausalPath<D>,
    x2: &CausalPath<D>,
    eps: f64,
    opts: &CrossingOptions,
) -> Result<CrossingGain> {
    let (a1, b1) = (*x1.start().ok_or(Error::EmptyPath)?, *x1.end().ok_or(Error::EmptyPath)?);
    let (a2, b2) = (*x2.start().ok_or(Error::EmptyPath)?, *x2.end().ok_or(Error::EmptyPath)?);
    let (d12, n1) = exchange_distance(m, &a1, &b2, eps, opts)?;
    let (d21, n2) = exchange_distance(m, &a2, &b1, eps, opts)?;
    let c1 = x1.at(0.5 * x1.param.last().copied().unwrap_or(0.0));
    let c2 = x2.at(0.5 * x2.param.last().copied().unwrap_or(0.0));
    let t1 = tangent_mid(x1);
    let t2 = tangent_mid(x2);
    let db = torus_dist(&c1, &c2);
    let dv = (t1 - t2).norm();
    Ok(CrossingGain {
        gain: d12 + d21 - x1.l_g - x2.l_g,
        exchanged: [d12, d21],
        lengths: [x1.l_g, x2.l_g],
        dist_base: db,
        dist_tangent: (db * db + dv * dv).sqrt(),
        nodes: n1 + n2,
    })
}

fn tangent_mid<const D: usize>(p: &CausalPath<D>) -> Vector<D> {
    if let Some(ts) = &p.tangents {
        if !ts.is_empty() {
            let t = ts[ts.len() / 2];
            return t / t.norm();
        }
    }
    let dirs = p.segment_directions();
    let d = dirs[dirs.len().saturating_sub(1) / 2];
    d / d.norm()
}

/// Closed-form gain for two straight Minkowski segments `a_i ± ε·v_i`.
pub fn minkowski_gain<const D: usize>(a1: &Vector<D>, v1: &Vector<D>, a2: &Vector<D>, v2: &Vector<D>, eps: f64) -> f64 {
    let mk = crate::reach::ExactConstant::<D>::minkowski();
    let l = |p: Vector<D>, q: Vector<D>| mk.value(&(q - p));
    l(a1 - v1 * eps, a2 + v2 * eps) + l(a2 - v2 * eps, a1 + v1 * eps) - l(a1 - v1 * eps, a1 + v1 * eps) - l(a2 - v2 * eps, a2 + v2 * eps)
}

/// Which hypothesis the battery samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `dist(v,w)² ≥ K·dist(x,y)`.
    Holder(f64),
    /// `dist(v,w) ≥ K′·dist(x,y)` with tangents in `Time^κ`.
    Lipschitz(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct GainBattery {
    pub regime: Regime,
    pub configurations: usize,
    pub computed: usize,
    pub skipped: usize,
    /// `min gain/dist(v,w)²`.
    pub eta_hat: f64,
    pub min_gain: f64,
    pub rows: Vec<CrossingGain>,
    pub pass: bool,
}

impl GainBattery {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dist_base", "dist_tangent", "gain"])?;
        for r in &self.rows {
            w.write_record([r.dist_base.to_string(), r.dist_tangent.to_string(), r.gain.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Random crossing configurations on a 2D metric; base offsets in `[10⁻⁵, 10⁻³]`, `ε` fixed.
pub fn crossing_battery<M: MetricField<2> + ?Sized>(
    m: &M,
    count: usize,
    eps: f64,
    regime: Regime,
    seed: u64,
    opts: &CrossingOptions,
    exec: Exec,
) -> GainBattery {
    let results: Vec<Option<CrossingGain>> = exec.map(count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
        let x0 = Vector::<2>::new(rng.gen::<f64>(), rng.gen::<f64>());
        let g = m.metric(&x0);
        let frame = Frame::new(&g, &m.orientation(&x0));
        // first tangent well inside the cone
        let c: f64 = rng.gen_range(-0.5..0.5);
        let v1 = frame.vector(&[c]).normalize();
        let r = 10f64.powf(rng.gen_range(-5.0..-3.0));
        let a_min = match regime {
            Regime::Holder(k) => (k * r).sqrt().max(0.03),
            Regime::Lipschitz(k) => (k * r).max(0.03),
        };
        let a = 10f64.powf(rng.gen_range(a_min.log10()..0.3f64.log10()));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let th = v1[1].atan2(v1[0]) + sign * a;
        let v2 = Vector::<2>::new(th.cos(), th.sin());
        let nrm = Vector::<2>::new(-v1[1], v1[0]) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let x2 = x0 + nrm * r;
        if !is_future_causal(m, &x2, &v2, -1e-3) {
            return None;
        }
        if let Regime::Lipschitz(_) = regime {
            if -quad(&m.metric(&x2), &v2) < 0.1 || -quad(&g, &v1) < 0.1 {
                return None;
            }
        }
        let s1 = pregeodesic_segment(m, &x0, &v1, eps, eps / 100.0).ok()?;
        let s2 = pregeodesic_segment(m, &x2, &v2, eps, eps / 100.0).ok()?;
        crossing_gain(m, &s1, &s2, eps, opts).ok()
    });
    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r {
            Some(g) => rows.push(g),
            None => skipped += 1,
        }
    }
    let eta_hat = rows
        .iter()
        .map(|r| r.gain / (r.dist_tangent * r.dist_tangent))
        .fold(f64::INFINITY, f64::min);
    let min_gain = rows.iter().map(|r| r.gain).fold(f64::INFINITY, f64::min);
    GainBattery {
        regime,
        configurations: count,
        computed: rows.len(),
        skipped,
        pass: !rows.is_empty() && eta_hat > 0.0,
        eta_hat,
        min_gain,
        rows,
    }
}
