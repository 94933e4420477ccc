//! Layered grid DAG. Nodes are `p + Δ·idx`; layer `S = τ·idx` for the integer temporal covector `τ`.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spacetime::{is_future_causal_form, quad, MetricField, Vector, EDGE_MARGIN};

pub type IVec = [i64; 3];

#[derive(Clone, Debug)]
pub enum RegionMode<const D: usize> {
    /// Tube of radius `c_bound·|q−p|` around the chord.
    Diamond { c_bound: f64 },
    /// Tube of given radius around a guide polyline in cover coordinates.
    Tube { guide: Vec<Vector<D>>, radius: f64 },
    /// Forward half-ball of given radius around `p`; `q` is ignored.
    Ball { radius: f64 },
}

#[derive(Clone, Debug)]
pub struct GraphOptions<const D: usize> {
    pub spacing: f64,
    pub stencil_k: i64,
    pub region: RegionMode<D>,
    pub margin: f64,
    pub exec: Exec,
}

impl<const D: usize> GraphOptions<D> {
    pub fn diamond(spacing: f64, stencil_k: i64) -> Self {
        GraphOptions {
            spacing,
            stencil_k,
            region: RegionMode::Diamond { c_bound: 0.5 },
            margin: EDGE_MARGIN,
            exec: Exec::Parallel,
        }
    }

    pub fn tube(spacing: f64, stencil_k: i64, guide: Vec<Vector<D>>, radius: f64) -> Self {
        GraphOptions {
            spacing,
            stencil_k,
            region: RegionMode::Tube { guide, radius },
            margin: EDGE_MARGIN,
            exec: Exec::Parallel,
        }
    }

    pub fn ball(spacing: f64, stencil_k: i64, radius: f64) -> Self {
        GraphOptions {
            spacing,
            stencil_k,
            region: RegionMode::Ball { radius },
            margin: EDGE_MARGIN,
            exec: Exec::Parallel,
        }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

/// Columns `lo..=hi` of one row; `offset` is relative to the layer start.
#[derive(Clone, Copy, Debug)]
pub struct Row {
    pub key: i64,
    pub lo: i64,
    pub hi: i64,
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub s: i64,
    pub start: usize,
    pub count: usize,
    pub key_min: i64,
    pub rows: Vec<Row>,
    /// `row_of[key − key_min]` indexes `rows`, `u32::MAX` when empty.
    pub row_of: Vec<u32>,
}

impl Layer {
    #[inline]
    fn row(&self, key: i64) -> Option<&Row> {
        let k = key - self.key_min;
        if k < 0 || k as usize >= self.row_of.len() {
            return None;
        }
        let r = self.row_of[k as usize];
        (r != u32::MAX).then(|| &self.rows[r as usize])
    }

    /// Row containing local node `i`.
    #[inline]
    pub fn row_at(&self, i: usize) -> &Row {
        let r = self.rows.partition_point(|row| row.offset <= i) - 1;
        &self.rows[r]
    }
}

#[derive(Clone, Debug)]
pub struct CausalGraph<const D: usize> {
    pub origin: Vector<D>,
    pub spacing: f64,
    pub tau: IVec,
    pub drop: usize,
    pub row_axis: Option<usize>,
    pub col_axis: usize,
    pub stencil: Vec<IVec>,
    pub sigma: Vec<i64>,
    pub sigma_max: i64,
    pub layers: Vec<Layer>,
    pub target: Option<IVec>,
    pub margin: f64,
    pub nodes: usize,
    pub exec: Exec,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive integer vectors with max-norm `≤ k` and positive `τ`-increment, sorted.
pub fn stencil(dim: usize, k: i64, tau: &IVec) -> Vec<IVec> {
    let mut out = Vec::new();
    let r = |d: usize| if d < dim { -k..=k } else { 0..=0 };
    for a in r(0) {
        for b in r(1) {
            for c in r(2) {
                let g = gcd(gcd(a, b), c);
                if g != 1 {
                    continue;
                }
                let s = [a, b, c];
                if tau[0] * a + tau[1] * b + tau[2] * c > 0 {
                    out.push(s);
                }
            }
        }
    }
    out.sort();
    out
}

#[inline]
fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `{c : a c² + b c + k ≤ 0}` as a closed interval.
fn quad_interval(a: f64, b: f64, k: f64) -> Option<(f64, f64)> {
    if a.abs() < 1e-14 {
        if b.abs() < 1e-14 {
            return (k <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
        }
        let r = -k / b;
        return Some(if b > 0.0 { (f64::NEG_INFINITY, r) } else { (r, f64::INFINITY) });
    }
    let disc = b * b - 4.0 * a * k;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    Some(((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)))
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> Option<(f64, f64)> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo <= hi).then_some((lo, hi))
}

/// Parameters of the line `X(c) = x0 + c·w` inside the capsule of radius `r` around `[a, b]`.
fn capsule_interval(x0: &[f64; 3], w: &[f64; 3], a: &[f64; 3], b: &[f64; 3], r: f64) -> Option<(f64, f64)> {
    let r2 = r * r;
    let ball = |c: &[f64; 3]| {
        let y = [x0[0] - c[0], x0[1] - c[1], x0[2] - c[2]];
        quad_interval(dot3(w, w), 2.0 * dot3(&y, w), dot3(&y, &y) - r2)
    };
    let mut acc: Option<(f64, f64)> = None;
    let mut join = |iv: Option<(f64, f64)>| {
        if let Some(iv) = iv {
            acc = Some(match acc {
                None => iv,
                Some(a) => (a.0.min(iv.0), a.1.max(iv.1)),
            });
        }
    };
    join(ball(a));
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let l2 = dot3(&d, &d);
    if l2 > 0.0 {
        join(ball(b));
        let y = [x0[0] - a[0], x0[1] - a[1], x0[2] - a[2]];
        // perpendicular distance² = |y + c w|² − ((y + c w)·d)²/l2
        let (yd, wd) = (dot3(&y, &d), dot3(w, &d));
        let qa = dot3(w, w) - wd * wd / l2;
        let qb = 2.0 * (dot3(&y, w) - yd * wd / l2);
        let qk = dot3(&y, &y) - yd * yd / l2 - r2;
        let cyl = quad_interval(qa, qb, qk);
        // 0 ≤ (y + c w)·d ≤ l2
        let slab = if wd.abs() < 1e-14 {
            (0.0..=l2).contains(&yd).then_some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            let c0 = -yd / wd;
            let c1 = (l2 - yd) / wd;
            Some((c0.min(c1), c0.max(c1)))
        };
        if let (Some(c), Some(s)) = (cyl, slab) {
            join(intersect(c, s));
        }
    }
    acc
}

impl<const D: usize> CausalGraph<D> {
    pub fn build<M: MetricField<D> + ?Sized>(m: &M, p: &Vector<D>, q: &Vector<D>, opts: &GraphOptions<D>) -> Result<Self> {
        if !(2..=3).contains(&D) {
            return Err(Error::UnsupportedDimension(D));
        }
        if !(opts.spacing > 0.0) {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        if opts.stencil_k < 1 {
            return Err(Error::invalid("stencil_k", "must be at least 1"));
        }
        let tc = m.temporal_covector();
        let mut tau = [0i64; 3];
        tau[..D].copy_from_slice(&tc);
        let drop = (0..D)
            .find(|&a| tau[a].abs() == 1)
            .ok_or_else(|| Error::invalid("temporal_covector", "needs a unit component"))?;
        let free: Vec<usize> = (0..D).filter(|&a| a != drop).collect();
        let (row_axis, col_axis) = if D == 3 { (Some(free[0]), free[1]) } else { (None, free[0]) };
        let st = stencil(D, opts.stencil_k, &tau);
        if st.len() >= u16::MAX as usize {
            return Err(Error::invalid("stencil_k", "stencil too large"));
        }
        let sigma: Vec<i64> = st.iter().map(|s| tau[0] * s[0] + tau[1] * s[1] + tau[2] * s[2]).collect();
        let sigma_max = *sigma.iter().max().unwrap();
        let h = opts.spacing;
        let to_idx = |x: &Vector<D>| -> [f64; 3] {
            let mut o = [0.0; 3];
            for i in 0..D {
                o[i] = (x[i] - p[i]) / h;
            }
            o
        };
        let qi = to_idx(q);
        let q_snap: IVec = [qi[0].round() as i64, qi[1].round() as i64, qi[2].round() as i64];
        let s_q = tau[0] * q_snap[0] + tau[1] * q_snap[1] + tau[2] * q_snap[2];
        let tau_norm = ((tau[0] * tau[0] + tau[1] * tau[1] + tau[2] * tau[2]) as f64).sqrt();
        let (guide, radius, s_end, target) = match &opts.region {
            RegionMode::Diamond { c_bound } => {
                let r = (c_bound * (q - p).norm() / h).max(1.0);
                let qf = [q_snap[0] as f64, q_snap[1] as f64, q_snap[2] as f64];
                (vec![[0.0; 3], qf], r, s_q, Some(q_snap))
            }
            RegionMode::Tube { guide, radius } => {
                let g: Vec<[f64; 3]> = guide.iter().map(to_idx).collect();
                (g, radius / h, s_q, Some(q_snap))
            }
            RegionMode::Ball { radius } => {
                let r = radius / h;
                (vec![[0.0; 3]], r, (r * tau_norm).floor() as i64, None)
            }
        };
        let mut g = CausalGraph {
            origin: *p,
            spacing: h,
            tau,
            drop,
            row_axis,
            col_axis,
            stencil: st,
            sigma,
            sigma_max,
            layers: Vec::new(),
            target,
            margin: opts.margin,
            nodes: 0,
            exec: opts.exec,
        };
        g.check_stencil(m, &guide)?;
        let s_end = s_end.max(0);
        let segs: Vec<([f64; 3], [f64; 3])> = if guide.len() == 1 {
            vec![(guide[0], guide[0])]
        } else {
            guide.windows(2).map(|w| (w[0], w[1])).collect()
        };
        let mut start = 0usize;
        for s in 0..=s_end {
            let layer = g.build_layer(s, start, &segs, radius);
            start += layer.count;
            g.layers.push(layer);
        }
        g.nodes = start;
        Ok(g)
    }

    fn check_stencil<M: MetricField<D> + ?Sized>(&self, m: &M, guide: &[[f64; 3]]) -> Result<()> {
        let mut samples = Vec::new();
        for w in guide.windows(2) {
            for t in [0.0, 0.25, 0.5, 0.75] {
                samples.push([
                    w[0][0] + t * (w[1][0] - w[0][0]),
                    w[0][1] + t * (w[1][1] - w[0][1]),
                    w[0][2] + t * (w[1][2] - w[0][2]),
                ]);
            }
        }
        samples.extend(guide.iter().copied());
        for x in samples {
            let pt = self.point_f(&x);
            let gm = m.metric(&pt);
            let o = m.orientation(&pt);
            let gr = m.background(&pt);
            for s in &self.stencil {
                let d = self.delta(s);
                if is_future_causal_form(&gm, &o, &d, quad(&gr, &d), self.margin) {
                    return Ok(());
                }
            }
        }
        Err(Error::EmptyStencil)
    }

    fn build_layer(&self, s: i64, start: usize, segs: &[([f64; 3], [f64; 3])], r: f64) -> Layer {
        let tau = self.tau;
        let tf = [tau[0] as f64, tau[1] as f64, tau[2] as f64];
        let tn = dot3(&tf, &tf).sqrt();
        let sf = s as f64;
        let a = self.drop;
        let c_ax = self.col_axis;
        // active segments and their row bounding ranges
        let mut active: Vec<(usize, f64, f64)> = Vec::new();
        for (i, (pa, pb)) in segs.iter().enumerate() {
            let ta = dot3(&tf, pa);
            let tb = dot3(&tf, pb);
            let (lo, hi) = (sf - r * tn, sf + r * tn);
            let (u0, u1) = if (tb - ta).abs() < 1e-12 {
                if ta < lo || ta > hi {
                    continue;
                }
                (0.0, 1.0)
            } else {
                let x0 = (lo - ta) / (tb - ta);
                let x1 = (hi - ta) / (tb - ta);
                let (x0, x1) = (x0.min(x1).max(0.0), x0.max(x1).min(1.0));
                if x0 > x1 {
                    continue;
                }
                (x0, x1)
            };
            match self.row_axis {
                Some(ra) => {
                    let y0 = pa[ra] + u0 * (pb[ra] - pa[ra]);
                    let y1 = pa[ra] + u1 * (pb[ra] - pa[ra]);
                    active.push((i, y0.min(y1) - r, y0.max(y1) + r));
                }
                None => active.push((i, 0.0, 0.0)),
            }
        }
        let mut rows = Vec::new();
        if !active.is_empty() {
            let (kmin, kmax) = match self.row_axis {
                Some(_) => (
                    active.iter().map(|x| x.1).fold(f64::INFINITY, f64::min).floor() as i64,
                    active.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max).ceil() as i64,
                ),
                None => (0, 0),
            };
            // direction along the row: +1 on the column axis, compensated on the dropped axis
            let mut w = [0.0; 3];
            w[c_ax] = 1.0;
            w[a] = -tf[c_ax] * tf[a];
            let mut offset = 0usize;
            for key in kmin..=kmax {
                let mut x0 = [0.0; 3];
                if let Some(ra) = self.row_axis {
                    x0[ra] = key as f64;
                    x0[a] = tf[a] * (sf - tf[ra] * key as f64);
                } else {
                    x0[a] = tf[a] * sf;
                }
                let mut acc: Option<(f64, f64)> = None;
                for &(i, ylo, yhi) in &active {
                    if self.row_axis.is_some() && ((key as f64) < ylo || (key as f64) > yhi) {
                        continue;
                    }
                    let (pa, pb) = &segs[i];
                    if let Some(iv) = capsule_interval(&x0, &w, pa, pb, r) {
                        acc = Some(match acc {
                            None => iv,
                            Some(q) => (q.0.min(iv.0), q.1.max(iv.1)),
                        });
                    }
                }
                if let Some((l, h)) = acc {
                    let lo = (l - 1e-9).ceil() as i64;
                    let hi = (h + 1e-9).floor() as i64;
                    if lo <= hi {
                        rows.push(Row { key, lo, hi, offset });
                        offset += (hi - lo + 1) as usize;
                    }
                }
            }
        }
        let count = rows.last().map_or(0, |r| r.offset + (r.hi - r.lo + 1) as usize);
        let key_min = rows.first().map_or(0, |r| r.key);
        let key_max = rows.last().map_or(-1, |r| r.key);
        let mut row_of = vec![u32::MAX; (key_max - key_min + 1).max(0) as usize];
        for (i, r) in rows.iter().enumerate() {
            row_of[(r.key - key_min) as usize] = i as u32;
        }
        Layer {
            s,
            start,
            count,
            key_min,
            rows,
            row_of,
        }
    }

    #[inline]
    pub fn delta(&self, s: &IVec) -> Vector<D> {
        Vector::<D>::from_fn(|i, _| s[i] as f64 * self.spacing)
    }

    #[inline]
    fn point_f(&self, x: &[f64; 3]) -> Vector<D> {
        Vector::<D>::from_fn(|i, _| self.origin[i] + self.spacing * x[i])
    }

    #[inline]
    pub fn point(&self, idx: &IVec) -> Vector<D> {
        Vector::<D>::from_fn(|i, _| self.origin[i] + self.spacing * idx[i] as f64)
    }

    /// Index vector of local node `i` in layer `li`.
    #[inline]
    pub fn coords(&self, li: usize, i: usize) -> IVec {
        let layer = &self.layers[li];
        let row = layer.row_at(i);
        let col = row.lo + (i - row.offset) as i64;
        self.compose(layer.s, row.key, col)
    }

    #[inline]
    fn compose(&self, s: i64, key: i64, col: i64) -> IVec {
        let mut idx = [0i64; 3];
        idx[self.col_axis] = col;
        let mut rest = s - self.tau[self.col_axis] * col;
        if let Some(ra) = self.row_axis {
            idx[ra] = key;
            rest -= self.tau[ra] * key;
        }
        idx[self.drop] = self.tau[self.drop] * rest;
        idx
    }

    #[inline]
    pub fn layer_of(&self, idx: &IVec) -> i64 {
        self.tau[0] * idx[0] + self.tau[1] * idx[1] + self.tau[2] * idx[2]
    }

    /// Local index of `idx` within its layer.
    #[inline]
    pub fn local(&self, idx: &IVec) -> Option<(usize, usize)> {
        let s = self.layer_of(idx);
        if s < 0 || s as usize >= self.layers.len() {
            return None;
        }
        let layer = &self.layers[s as usize];
        let key = self.row_axis.map_or(0, |ra| idx[ra]);
        let row = layer.row(key)?;
        let col = idx[self.col_axis];
        if col < row.lo || col > row.hi {
            return None;
        }
        Some((s as usize, row.offset + (col - row.lo) as usize))
    }

    pub fn contains(&self, idx: &IVec) -> bool {
        self.local(idx).is_some()
    }

    pub fn max_layer_width(&self) -> usize {
        self.layers.iter().map(|l| l.count).max().unwrap_or(0)
    }
}
