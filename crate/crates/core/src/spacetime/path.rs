use super::{is_future_causal_form, quad, MetricField, Vector, PATH_MARGIN};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Quadrature {
    Midpoint,
    Simpson,
    /// Midpoint with Richardson-checked bisection.
    #[default]
    Adaptive,
}

#[inline]
fn speed<const D: usize, M: MetricField<D> + ?Sized>(m: &M, a: &Vector<D>, d: &Vector<D>, t: f64) -> f64 {
    let x = a + d * t;
    (-quad(&m.metric(&x), d)).max(0.0).sqrt()
}

fn adaptive<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    a: &Vector<D>,
    d: &Vector<D>,
    t0: f64,
    t1: f64,
    coarse: f64,
    depth: u32,
) -> f64 {
    let h = t1 - t0;
    let tm = 0.5 * (t0 + t1);
    let left = 0.5 * h * speed(m, a, d, 0.5 * (t0 + tm));
    let right = 0.5 * h * speed(m, a, d, 0.5 * (tm + t1));
    let fine = left + right;
    let scale = h * d.norm();
    let err = (fine - coarse).abs();
    if err <= 1e-15 * scale {
        return fine;
    }
    if err <= 1e-11 * scale || depth == 0 {
        return fine + (fine - coarse) / 3.0;
    }
    adaptive(m, a, d, t0, tm, left, depth - 1) + adaptive(m, a, d, tm, t1, right, depth - 1)
}

/// Lorentzian length `∫√|g(δ,δ)|` of the straight segment `a → b`.
pub fn segment_length<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    a: &Vector<D>,
    b: &Vector<D>,
    rule: Quadrature,
) -> f64 {
    let d = b - a;
    match rule {
        Quadrature::Midpoint => speed(m, a, &d, 0.5),
        Quadrature::Simpson => (speed(m, a, &d, 0.0) + 4.0 * speed(m, a, &d, 0.5) + speed(m, a, &d, 1.0)) / 6.0,
        Quadrature::Adaptive => {
            let coarse = speed(m, a, &d, 0.5);
            adaptive(m, a, &d, 0.0, 1.0, coarse, 14)
        }
    }
}

/// Polyline in the cover with cached Lorentzian and background lengths.
#[derive(Clone, Debug, Default)]
pub struct CausalPath<const D: usize> {
    pub vertices: Vec<Vector<D>>,
    /// Cumulative background arclength at each vertex.
    pub param: Vec<f64>,
    pub tangents: Option<Vec<Vector<D>>>,
    pub l_g: f64,
    pub l_r: f64,
}

impl<const D: usize> CausalPath<D> {
    pub fn empty() -> Self {
        CausalPath {
            vertices: Vec::new(),
            param: Vec::new(),
            tangents: None,
            l_g: 0.0,
            l_r: 0.0,
        }
    }

    /// Validates every segment with the permissive margin and caches lengths.
    pub fn new<M: MetricField<D> + ?Sized>(m: &M, vertices: Vec<Vector<D>>) -> Result<Self> {
        Self::with_rule(m, vertices, Quadrature::Adaptive)
    }

    pub fn with_rule<M: MetricField<D> + ?Sized>(m: &M, vertices: Vec<Vector<D>>, rule: Quadrature) -> Result<Self> {
        let mut vs: Vec<Vector<D>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if vs.last().map_or(true, |l: &Vector<D>| *l != v) {
                vs.push(v);
            }
        }
        let mut param = Vec::with_capacity(vs.len());
        let mut l_g = 0.0;
        let mut l_r = 0.0;
        if !vs.is_empty() {
            param.push(0.0);
        }
        for i in 1..vs.len() {
            let a = vs[i - 1];
            let b = vs[i];
            let d = b - a;
            let mid = (a + b) * 0.5;
            let n2 = quad(&m.background(&mid), &d);
            let g = m.metric(&mid);
            if !is_future_causal_form(&g, &m.orientation(&mid), &d, n2, PATH_MARGIN) {
                return Err(Error::NonCausalSegment {
                    index: i - 1,
                    ratio: quad(&g, &d) / n2,
                });
            }
            l_r += n2.sqrt();
            param.push(l_r);
            l_g += segment_length(m, &a, &b, rule);
        }
        Ok(CausalPath {
            vertices: vs,
            param,
            tangents: None,
            l_g,
            l_r,
        })
    }

    pub fn with_tangents(mut self, tangents: Vec<Vector<D>>) -> Self {
        assert_eq!(tangents.len(), self.vertices.len());
        self.tangents = Some(tangents);
        self
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn start(&self) -> Option<&Vector<D>> {
        self.vertices.first()
    }

    pub fn end(&self) -> Option<&Vector<D>> {
        self.vertices.last()
    }

    pub fn displacement(&self) -> Vector<D> {
        match (self.vertices.first(), self.vertices.last()) {
            (Some(a), Some(b)) => b - a,
            _ => Vector::<D>::zeros(),
        }
    }

    /// Point at background arclength `s` (clamped).
    pub fn at(&self, s: f64) -> Vector<D> {
        let n = self.vertices.len();
        if n == 1 || s <= 0.0 {
            return self.vertices[0];
        }
        if s >= self.l_r {
            return self.vertices[n - 1];
        }
        let i = self.param.partition_point(|&x| x <= s).clamp(1, n - 1);
        let (s0, s1) = (self.param[i - 1], self.param[i]);
        let t = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.vertices[i - 1] + (self.vertices[i] - self.vertices[i - 1]) * t
    }

    /// Unit direction of each segment.
    pub fn segment_directions(&self) -> Vec<Vector<D>> {
        self.vertices
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d / d.norm()
            })
            .collect()
    }

    pub fn concat<M: MetricField<D> + ?Sized>(&self, other: &Self, m: &M) -> Result<Self> {
        let mut v = self.vertices.clone();
        v.extend(other.vertices.iter().copied());
        Self::new(m, v)
    }

    pub fn translate(&self, k: &Vector<D>) -> Self {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v += k;
        }
        out
    }
}

/// Recomputes `L^g` with validation.
pub fn lorentz_length<const D: usize, M: MetricField<D> + ?Sized>(m: &M, path: &CausalPath<D>) -> Result<f64> {
    Ok(CausalPath::new(m, path.vertices.clone())?.l_g)
}
