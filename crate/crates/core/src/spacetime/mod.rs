//! Torus spacetimes: metric fields, causal classification and length functionals.

mod boundary;
pub mod cone;
mod conformal;
mod hedlund_metric;
mod path;

pub use boundary::{make_boundary_2torus, BoundaryTorus};
pub use conformal::{make_conformally_flat, make_flat, ConformallyFlat, FourierMode};
pub use hedlund_metric::{
    bump, dist_to_family, family_shift, make_hedlund, verify_hedlund, Bump, ConditionCheck,
    Hedlund, HedlundParams, HedlundReport,
};
pub use path::{lorentz_length, segment_length, CausalPath, Quadrature};

use nalgebra::{SMatrix, SVector};

pub type Vector<const D: usize> = SVector<f64, D>;
pub type Matrix<const D: usize> = SMatrix<f64, D, D>;

/// Permissive margin for validating finished paths.
pub const PATH_MARGIN: f64 = 1e-12;
/// Conservative margin for admitting graph edges.
pub const EDGE_MARGIN: f64 = -1e-8;
/// Relative band around zero classified as lightlike.
pub const LIGHTLIKE_TOL: f64 = 1e-10;
/// Central-difference step for metric derivatives.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivMode {
    Analytic,
    FiniteDifference(f64),
}

/// A `ℤⁿ`-periodic time-oriented Lorentzian metric on the cover `ℝⁿ`.
pub trait MetricField<const D: usize>: Send + Sync {
    fn metric(&self, p: &Vector<D>) -> Matrix<D>;

    /// Background Riemannian metric, Euclidean unless overridden.
    fn background(&self, _p: &Vector<D>) -> Matrix<D> {
        Matrix::<D>::identity()
    }

    /// Future pointing timelike reference field.
    fn orientation(&self, p: &Vector<D>) -> Vector<D>;

    fn deriv_mode(&self) -> DerivMode {
        DerivMode::FiniteDifference(FD_STEP)
    }

    /// `out[k] = ∂_k g`.
    fn metric_gradient(&self, p: &Vector<D>) -> [Matrix<D>; D] {
        let h = match self.deriv_mode() {
            DerivMode::FiniteDifference(h) => h,
            DerivMode::Analytic => FD_STEP,
        };
        central_difference(p, h, |x| self.metric(x))
    }

    fn background_gradient(&self, _p: &Vector<D>) -> [Matrix<D>; D] {
        [Matrix::<D>::zeros(); D]
    }

    /// Integer covector whose linear function strictly increases along future causal vectors.
    fn temporal_covector(&self) -> [i64; D];

    /// Piecewise label used to detect metric kinks along a segment.
    fn region_label(&self, _p: &Vector<D>) -> u32 {
        0
    }

    /// Extra points that sampled minima must always include.
    fn landmark_points(&self) -> Vec<Vector<D>> {
        Vec::new()
    }

    fn name(&self) -> String;
}

pub fn central_difference<const D: usize, F>(p: &Vector<D>, h: f64, f: F) -> [Matrix<D>; D]
where
    F: Fn(&Vector<D>) -> Matrix<D>,
{
    std::array::from_fn(|k| {
        let mut a = *p;
        let mut b = *p;
        a[k] += h;
        b[k] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    })
}

#[inline]
pub fn quad<const D: usize>(g: &Matrix<D>, v: &Vector<D>) -> f64 {
    (g * v).dot(v)
}

#[inline]
pub fn bilinear<const D: usize>(g: &Matrix<D>, v: &Vector<D>, w: &Vector<D>) -> f64 {
    (g * w).dot(v)
}

pub fn norm_r<const D: usize, M: MetricField<D> + ?Sized>(m: &M, p: &Vector<D>, v: &Vector<D>) -> f64 {
    quad(&m.background(p), v).sqrt()
}

/// `true` when `v` is future causal for `g` up to `margin·|v|²`.
#[inline]
pub fn is_future_causal_form<const D: usize>(
    g: &Matrix<D>,
    orient: &Vector<D>,
    v: &Vector<D>,
    norm2: f64,
    margin: f64,
) -> bool {
    if norm2 <= 0.0 {
        return false;
    }
    let gv = g * v;
    gv.dot(v) <= margin * norm2 && gv.dot(orient) < 0.0
}

pub fn is_future_causal<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    p: &Vector<D>,
    v: &Vector<D>,
    margin: f64,
) -> bool {
    let n2 = quad(&m.background(p), v);
    is_future_causal_form(&m.metric(p), &m.orientation(p), v, n2, margin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    TimelikeFuture,
    TimelikePast,
    LightlikeFuture,
    LightlikePast,
    Spacelike,
    Zero,
}

impl CausalClass {
    pub fn is_future_causal(self) -> bool {
        matches!(self, CausalClass::TimelikeFuture | CausalClass::LightlikeFuture)
    }
}

pub fn classify<const D: usize, M: MetricField<D> + ?Sized>(m: &M, p: &Vector<D>, v: &Vector<D>) -> CausalClass {
    let n2 = quad(&m.background(p), v);
    if n2 == 0.0 {
        return CausalClass::Zero;
    }
    let g = m.metric(p);
    let gv = g * v;
    let q = gv.dot(v);
    let future = gv.dot(&m.orientation(p)) < 0.0;
    if q.abs() < LIGHTLIKE_TOL * n2 {
        if future {
            CausalClass::LightlikeFuture
        } else {
            CausalClass::LightlikePast
        }
    } else if q < 0.0 {
        if future {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        }
    } else {
        CausalClass::Spacelike
    }
}

/// Number of negative and positive eigenvalues of a symmetric form.
pub fn signature<const D: usize>(g: &Matrix<D>) -> (usize, usize) {
    let (vals, _) = sym_eigen(g);
    let neg = vals.iter().filter(|&&x| x < 0.0).count();
    let pos = vals.iter().filter(|&&x| x > 0.0).count();
    (neg, pos)
}

/// Eigenvalues and unit eigenvectors of a symmetric form, ascending.
pub fn sym_eigen<const D: usize>(g: &Matrix<D>) -> ([f64; D], [Vector<D>; D]) {
    let dm = nalgebra::DMatrix::from_fn(D, D, |i, j| g[(i, j)]);
    let eig = nalgebra::SymmetricEigen::new(dm);
    let mut idx: Vec<usize> = (0..D).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = std::array::from_fn(|k| eig.eigenvalues[idx[k]]);
    let vecs = std::array::from_fn(|k| Vector::<D>::from_fn(|i, _| eig.eigenvectors[(i, idx[k])]));
    (vals, vecs)
}

/// Reduces a cover point to the fundamental domain `[0,1)ⁿ`.
pub fn wrap<const D: usize>(p: &Vector<D>) -> Vector<D> {
    p.map(|x| {
        let r = x - x.floor();
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    })
}

/// Euclidean distance on the torus.
pub fn torus_dist<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    (a - b).map(|x| x - x.round()).norm()
}

/// Random point checks of the metric invariants.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MetricCheck {
    pub samples: usize,
    pub signature_ok: usize,
    pub periodic_max_dev: f64,
    pub orientation_ok: usize,
}

impl MetricCheck {
    pub fn pass(&self) -> bool {
        self.signature_ok == self.samples && self.orientation_ok == self.samples && self.periodic_max_dev <= 1e-12
    }
}

pub fn check_metric<const D: usize, M: MetricField<D> + ?Sized>(m: &M, samples: usize, seed: u64) -> MetricCheck {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = MetricCheck {
        samples,
        signature_ok: 0,
        periodic_max_dev: 0.0,
        orientation_ok: 0,
    };
    for _ in 0..samples {
        let p = Vector::<D>::from_fn(|_, _| rng.gen_range(-3.0..3.0));
        let k = Vector::<D>::from_fn(|_, _| rng.gen_range(-4i32..=4) as f64);
        let g = m.metric(&p);
        if signature(&g) == (1, D - 1) {
            out.signature_ok += 1;
        }
        let dev = (m.metric(&(p + k)) - g).amax() / g.amax().max(1e-300);
        out.periodic_max_dev = out.periodic_max_dev.max(dev);
        let o = m.orientation(&p);
        if quad(&g, &o) < 0.0 {
            out.orientation_ok += 1;
        }
    }
    out
}
