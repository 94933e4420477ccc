//! Pregeodesic flow at unit background speed and an affine-geodesic oracle.

use crate::error::{Error, Result};
use crate::spacetime::{quad, CausalPath, Matrix, MetricField, Vector};

/// `Γ^k_ij` stored as `gamma[k][i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel<const D: usize> {
    pub gamma: [[[f64; D]; D]; D],
}

impl<const D: usize> Christoffel<D> {
    pub fn zero() -> Self {
        Christoffel {
            gamma: [[[0.0; D]; D]; D],
        }
    }

    /// `Γ(u,w)^k = Γ^k_ij uⁱ wʲ`.
    #[inline]
    pub fn contract(&self, u: &Vector<D>, w: &Vector<D>) -> Vector<D> {
        Vector::<D>::from_fn(|k, _| {
            let mut s = 0.0;
            for i in 0..D {
                for j in 0..D {
                    s += self.gamma[k][i][j] * u[i] * w[j];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for k in 0..D {
            for i in 0..D {
                for j in 0..D {
                    out.gamma[k][i][j] -= other.gamma[k][i][j];
                }
            }
        }
        out
    }
}

/// Frobenius condition estimate `‖g‖·‖g⁻¹‖`, an upper bound of the spectral one.
pub const SINGULAR_CONDITION: f64 = 1e12;

pub fn inverse_checked<const D: usize>(g: &Matrix<D>) -> Result<Matrix<D>> {
    let inv = g.try_inverse().ok_or(Error::SingularMetric(f64::INFINITY))?;
    let cond = g.norm() * inv.norm();
    if !cond.is_finite() || cond > SINGULAR_CONDITION {
        return Err(Error::SingularMetric(cond));
    }
    Ok(inv)
}

/// Levi-Civita coefficients `½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`.
pub fn levi_civita<const D: usize>(g: &Matrix<D>, dg: &[Matrix<D>; D]) -> Result<Christoffel<D>> {
    let inv = inverse_checked(g)?;
    let mut low = [[[0.0; D]; D]; D]; // [l][i][j]
    for l in 0..D {
        for i in 0..D {
            for j in 0..D {
                low[l][i][j] = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
        }
    }
    let mut out = Christoffel::zero();
    for k in 0..D {
        for i in 0..D {
            for j in 0..D {
                let mut s = 0.0;
                for l in 0..D {
                    s += inv[(k, l)] * low[l][i][j];
                }
                out.gamma[k][i][j] = s;
            }
        }
    }
    Ok(out)
}

/// Christoffel symbols of `g` and of the background `g_R` at `p`.
pub fn christoffels<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    p: &Vector<D>,
) -> Result<(Christoffel<D>, Christoffel<D>)> {
    let cg = levi_civita(&m.metric(p), &m.metric_gradient(p))?;
    let dgr = m.background_gradient(p);
    let cr = if dgr.iter().all(|x| x.amax() == 0.0) {
        Christoffel::zero()
    } else {
        levi_civita(&m.background(p), &dgr)?
    };
    Ok((cg, cr))
}

/// Right-hand side of the unit-speed pregeodesic equation.
pub fn pregeodesic_accel<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x: &Vector<D>,
    u: &Vector<D>,
) -> Result<Vector<D>> {
    let (cg, cr) = christoffels(m, x)?;
    let gr = m.background(x);
    let t = cg.contract(u, u) - cr.contract(u, u);
    let mu = (gr * t).dot(u) / quad(&gr, u);
    Ok(u * mu - t - cr.contract(u, u))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4,
    /// Fehlberg 4(5) with absolute tolerance.
    Rkf45 { tol: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub step: f64,
    pub method: Method,
    /// Renormalize `|u|_R = 1` after this many steps (0 disables).
    pub renormalize_every: usize,
    /// Keep every `record_every`-th sample.
    pub record_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            step: 1e-3,
            method: Method::Rk4,
            renormalize_every: 1000,
            record_every: 1,
        }
    }
}

pub const STEP_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Trajectory<const D: usize> {
    pub points: Vec<Vector<D>>,
    pub tangents: Vec<Vector<D>>,
    /// Background arclength of each sample.
    pub params: Vec<f64>,
    pub steps: usize,
    pub renormalizations: usize,
    /// Largest `||u|_R − 1|` seen before any renormalization.
    pub max_speed_drift: f64,
}

impl<const D: usize> Trajectory<D> {
    pub fn end(&self) -> (Vector<D>, Vector<D>) {
        (*self.points.last().unwrap(), *self.tangents.last().unwrap())
    }

    /// Validated causal polyline through the samples, carrying tangents.
    pub fn to_causal_path<M: MetricField<D> + ?Sized>(&self, m: &M) -> Result<CausalPath<D>> {
        let path = CausalPath::new(m, self.points.clone())?;
        if path.len() == self.tangents.len() {
            Ok(path.with_tangents(self.tangents.clone()))
        } else {
            Ok(path)
        }
    }

    /// Number of sign changes of `g(γ′,γ′)` outside the band `±band`.
    pub fn character_flips<M: MetricField<D> + ?Sized>(&self, m: &M, band: f64) -> usize {
        let mut last = 0i8;
        let mut flips = 0;
        for (x, u) in self.points.iter().zip(&self.tangents) {
            let q = quad(&m.metric(x), u);
            let s = if q > band {
                1
            } else if q < -band {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    flips += 1;
                }
                last = s;
            }
        }
        flips
    }
}

type State<const D: usize> = (Vector<D>, Vector<D>);

fn rk4_step<const D: usize, F>(f: &F, y: State<D>, h: f64) -> Result<State<D>>
where
    F: Fn(&Vector<D>, &Vector<D>) -> Result<Vector<D>>,
{
    let (x, u) = y;
    let k1x = u;
    let k1u = f(&x, &u)?;
    let x2 = x + k1x * (0.5 * h);
    let u2 = u + k1u * (0.5 * h);
    let k2u = f(&x2, &u2)?;
    let x3 = x + u2 * (0.5 * h);
    let u3 = u + k2u * (0.5 * h);
    let k3u = f(&x3, &u3)?;
    let x4 = x + u3 * h;
    let u4 = u + k3u * h;
    let k4u = f(&x4, &u4)?;
    Ok((
        x + (k1x + u2 * 2.0 + u3 * 2.0 + u4) * (h / 6.0),
        u + (k1u + k2u * 2.0 + k3u * 2.0 + k4u) * (h / 6.0),
    ))
}

/// One Fehlberg step; returns the 5th-order state and an error estimate.
fn rkf45_step<const D: usize, F>(f: &F, y: State<D>, h: f64) -> Result<(State<D>, f64)>
where
    F: Fn(&Vector<D>, &Vector<D>) -> Result<Vector<D>>,
{
    const A: [[f64; 5]; 6] = [
        [0.0; 5],
        [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
        [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
        [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
        [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ];
    const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];
    const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];
    let (x, u) = y;
    let mut kx = [Vector::<D>::zeros(); 6];
    let mut ku = [Vector::<D>::zeros(); 6];
    for s in 0..6 {
        let mut xs = x;
        let mut us = u;
        for r in 0..s {
            xs += kx[r] * (h * A[s][r]);
            us += ku[r] * (h * A[s][r]);
        }
        kx[s] = us;
        ku[s] = f(&xs, &us)?;
    }
    let mut x5 = x;
    let mut u5 = u;
    let mut ex = Vector::<D>::zeros();
    let mut eu = Vector::<D>::zeros();
    for s in 0..6 {
        x5 += kx[s] * (h * B5[s]);
        u5 += ku[s] * (h * B5[s]);
        ex += kx[s] * (h * (B5[s] - B4[s]));
        eu += ku[s] * (h * (B5[s] - B4[s]));
    }
    Ok(((x5, u5), ex.norm().max(eu.norm())))
}

fn speed_r<const D: usize, M: MetricField<D> + ?Sized>(m: &M, x: &Vector<D>, u: &Vector<D>) -> f64 {
    quad(&m.background(x), u).sqrt()
}

/// Integrates the unit-speed pregeodesic flow from `(x0, v0)` over `[0, t_span]`.
pub fn integrate_pregeodesic<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x0: &Vector<D>,
    v0: &Vector<D>,
    t_span: f64,
    opts: &FlowOptions,
) -> Result<Trajectory<D>> {
    let n0 = speed_r(m, x0, v0);
    if !(n0 > 0.0) {
        return Err(Error::invalid("v0", "initial vector must be nonzero"));
    }
    let f = |x: &Vector<D>, u: &Vector<D>| pregeodesic_accel(m, x, u);
    let mut y = (*x0, v0 / n0);
    let mut t = 0.0;
    let mut out = Trajectory {
        points: vec![y.0],
        tangents: vec![y.1],
        params: vec![0.0],
        steps: 0,
        renormalizations: 0,
        max_speed_drift: 0.0,
    };
    let record = opts.record_every.max(1);
    match opts.method {
        Method::Rk4 => {
            let n = (t_span / opts.step).round().max(1.0) as usize;
            let h = t_span / n as f64;
            for i in 1..=n {
                y = rk4_step(&f, y, h)?;
                t = h * i as f64;
                out.steps += 1;
                let s = speed_r(m, &y.0, &y.1);
                out.max_speed_drift = out.max_speed_drift.max((s - 1.0).abs());
                if opts.renormalize_every > 0 && i % opts.renormalize_every == 0 {
                    y.1 /= s;
                    out.renormalizations += 1;
                }
                if i % record == 0 || i == n {
                    out.points.push(y.0);
                    out.tangents.push(y.1);
                    out.params.push(t);
                }
            }
        }
        Method::Rkf45 { tol } => {
            let mut h = opts.step;
            let mut since = 0usize;
            while t < t_span {
                h = h.min(t_span - t);
                let (y5, err) = rkf45_step(&f, y, h)?;
                if err <= tol || h <= STEP_FLOOR {
                    if err > tol {
                        return Err(Error::StepUnderflow(t));
                    }
                    y = y5;
                    t += h;
                    out.steps += 1;
                    since += 1;
                    let s = speed_r(m, &y.0, &y.1);
                    out.max_speed_drift = out.max_speed_drift.max((s - 1.0).abs());
                    if opts.renormalize_every > 0 && since >= opts.renormalize_every {
                        y.1 /= s;
                        since = 0;
                        out.renormalizations += 1;
                    }
                    if out.steps % record == 0 || t >= t_span {
                        out.points.push(y.0);
                        out.tangents.push(y.1);
                        out.params.push(t);
                    }
                }
                let fac = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 4.0 };
                h *= fac.clamp(0.2, 4.0);
                if h < STEP_FLOOR {
                    return Err(Error::StepUnderflow(t));
                }
            }
        }
    }
    Ok(out)
}

/// Affine geodesic samples with accumulated background arclength.
#[derive(Clone, Debug)]
pub struct AffineTrajectory<const D: usize> {
    pub points: Vec<Vector<D>>,
    pub velocities: Vec<Vector<D>>,
    pub arclength: Vec<f64>,
    pub affine: Vec<f64>,
}

/// Integrates `ẍ = −Γ(ẋ,ẋ)` with RK4, carrying `s' = |ẋ|_R`.
pub fn integrate_affine_geodesic<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x0: &Vector<D>,
    v0: &Vector<D>,
    tau_span: f64,
    step: f64,
) -> Result<AffineTrajectory<D>> {
    if !(step > STEP_FLOOR) {
        return Err(Error::StepUnderflow(0.0));
    }
    let accel = |x: &Vector<D>, v: &Vector<D>| -> Result<Vector<D>> {
        let (cg, _) = christoffels(m, x)?;
        Ok(-cg.contract(v, v))
    };
    let n = (tau_span / step).round().max(1.0) as usize;
    let h = tau_span / n as f64;
    let (mut x, mut v, mut s) = (*x0, *v0, 0.0f64);
    let mut out = AffineTrajectory {
        points: vec![x],
        velocities: vec![v],
        arclength: vec![0.0],
        affine: vec![0.0],
    };
    for i in 1..=n {
        let k1x = v;
        let k1v = accel(&x, &v)?;
        let k1s = speed_r(m, &x, &v);
        let (x2, v2) = (x + k1x * (0.5 * h), v + k1v * (0.5 * h));
        let k2v = accel(&x2, &v2)?;
        let k2s = speed_r(m, &x2, &v2);
        let (x3, v3) = (x + v2 * (0.5 * h), v + k2v * (0.5 * h));
        let k3v = accel(&x3, &v3)?;
        let k3s = speed_r(m, &x3, &v3);
        let (x4, v4) = (x + v3 * h, v + k3v * h);
        let k4v = accel(&x4, &v4)?;
        let k4s = speed_r(m, &x4, &v4);
        x += (k1x + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        s += (k1s + 2.0 * k2s + 2.0 * k3s + k4s) * (h / 6.0);
        out.points.push(x);
        out.velocities.push(v);
        out.arclength.push(s);
        out.affine.push(h * i as f64);
    }
    Ok(out)
}

impl<const D: usize> AffineTrajectory<D> {
    /// Cubic Hermite interpolation of the trace at background arclength `s`.
    pub fn at_arclength<M: MetricField<D> + ?Sized>(&self, m: &M, s: f64) -> Option<Vector<D>> {
        let n = self.arclength.len();
        if s < self.arclength[0] || s > self.arclength[n - 1] {
            return None;
        }
        let i = self.arclength.partition_point(|&x| x <= s).clamp(1, n - 1);
        let (s0, s1) = (self.arclength[i - 1], self.arclength[i]);
        let h = s1 - s0;
        if h <= 0.0 {
            return Some(self.points[i]);
        }
        let d0 = self.velocities[i - 1] / speed_r(m, &self.points[i - 1], &self.velocities[i - 1]);
        let d1 = self.velocities[i] / speed_r(m, &self.points[i], &self.velocities[i]);
        let t = (s - s0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(self.points[i - 1] * h00 + d0 * (h10 * h) + self.points[i] * h01 + d1 * (h11 * h))
    }
}

/// Sup distance between the pregeodesic samples and the reparameterized affine trace.
pub fn trace_distance<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    pre: &Trajectory<D>,
    affine: &AffineTrajectory<D>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, &t) in pre.points.iter().zip(&pre.params) {
        if let Some(y) = affine.at_arclength(m, t) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}
