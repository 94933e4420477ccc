use super::cone::{sample_future_causal, Frame};
use super::{quad, Matrix, MetricField, Vector, PATH_MARGIN};
use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// Cutoff profile used inside the tubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Bump {
    /// `ψ(t) = exp(1 − 1/(1 − t²))` on `[0,1)`, zero beyond.
    Standard,
    /// `c·ψ`; with `c ≠ 1` the line equality is broken on purpose.
    Scaled(f64),
}

pub fn bump(kind: Bump, t: f64) -> f64 {
    let t = t.abs();
    let base = if t >= 1.0 { 0.0 } else { (1.0 - 1.0 / (1.0 - t * t)).exp() };
    match kind {
        Bump::Standard => base,
        Bump::Scaled(c) => c * base,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HedlundParams {
    pub lambdas: [f64; 3],
    pub eps: f64,
    pub bump: Bump,
}

impl HedlundParams {
    /// Normalizes `Σλᵢ = 1`.
    pub fn new(lambdas: [f64; 3], eps: f64) -> Result<Self> {
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("lambdas", "every λᵢ must be positive"));
        }
        if !(eps > 0.0) || eps >= 0.25 {
            return Err(Error::invalid("eps", "ε must lie in (0, 1/4)"));
        }
        let s: f64 = lambdas.iter().sum();
        Ok(HedlundParams {
            lambdas: lambdas.map(|l| l / s),
            eps,
            bump: Bump::Standard,
        })
    }

    pub fn with_bump(mut self, bump: Bump) -> Self {
        self.bump = bump;
        self
    }

    pub fn conforming(&self) -> bool {
        self.eps <= 1e-2
    }

    /// `−min λᵢ²/9 + ε²/4`; negative when `v₁` is shorter for `g_ε` than for every `gᵢ`.
    pub fn v1_margin(&self) -> f64 {
        let lmin = self.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        -lmin * lmin / 9.0 + self.eps * self.eps / 4.0
    }
}

/// Shift `sᵢ` with `Lᵢ = {x : x_j − s_ij ∈ ℤ for j ≠ i}`.
pub fn family_shift(i: usize) -> Vector3<f64> {
    match i {
        0 => Vector3::new(0.0, 0.0, 0.0),
        1 => Vector3::new(0.0, 0.0, 0.5),
        _ => Vector3::new(0.5, 0.5, 0.0),
    }
}

#[inline]
fn centered(x: f64) -> f64 {
    x - x.round()
}

/// Euclidean distance from `p` to the family `Lᵢ`.
#[inline]
pub fn dist_to_family(p: &Vector3<f64>, i: usize) -> f64 {
    let s = family_shift(i);
    let (a, b) = match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let u = centered(p[a] - s[a]);
    let w = centered(p[b] - s[b]);
    (u * u + w * w).sqrt()
}

#[derive(Clone, Debug)]
pub struct Hedlund {
    pub params: HedlundParams,
    pub v1: Vector3<f64>,
    pub g_eps: Matrix3<f64>,
    pub g_2eps: Matrix3<f64>,
    pub g_line: [Matrix3<f64>; 3],
}

fn g_of(eps: f64) -> Matrix3<f64> {
    let v1 = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
    Matrix3::identity() - v1 * v1.transpose() * (1.0 + eps * eps / 4.0)
}

impl Hedlund {
    pub fn new_unchecked(params: HedlundParams) -> Self {
        let g_line = std::array::from_fn(|i| {
            let l2 = params.lambdas[i] * params.lambdas[i];
            let mut d = Vector3::repeat(l2 / 3.0);
            d[i] = -l2;
            Matrix3::from_diagonal(&d)
        });
        Hedlund {
            params,
            v1: Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt(),
            g_eps: g_of(params.eps),
            g_2eps: g_of(2.0 * params.eps),
            g_line,
        }
    }

    pub fn eps(&self) -> f64 {
        self.params.eps
    }

    pub fn lambdas(&self) -> [f64; 3] {
        self.params.lambdas
    }

    /// Family index and distance when `p` lies in `B_ε(L)`.
    #[inline]
    pub fn tube(&self, p: &Vector3<f64>) -> Option<(usize, f64)> {
        let eps = self.params.eps;
        (0..3).find_map(|i| {
            let d = dist_to_family(p, i);
            (d < eps).then_some((i, d))
        })
    }

    /// `ψ(dist/ε)` and the family, zero outside the tubes.
    pub fn weight(&self, p: &Vector3<f64>) -> (Option<usize>, f64) {
        match self.tube(p) {
            Some((i, d)) => (Some(i), bump(self.params.bump, d / self.params.eps)),
            None => (None, 0.0),
        }
    }
}

impl MetricField<3> for Hedlund {
    #[inline]
    fn metric(&self, p: &Vector<3>) -> Matrix<3> {
        match self.weight(p) {
            (Some(i), w) if w > 0.0 => self.g_eps * (1.0 - w) + self.g_line[i] * w,
            _ => self.g_eps,
        }
    }

    fn orientation(&self, _p: &Vector<3>) -> Vector<3> {
        self.v1
    }

    fn temporal_covector(&self) -> [i64; 3] {
        [1, 1, 1]
    }

    fn region_label(&self, p: &Vector<3>) -> u32 {
        self.tube(p).map_or(0, |(i, _)| i as u32 + 1)
    }

    fn landmark_points(&self) -> Vec<Vector<3>> {
        let mut out = Vec::new();
        for i in 0..3 {
            let s = family_shift(i);
            for t in [0.0, 0.25, 0.5, 0.75] {
                let mut p = s;
                p[i] = t;
                out.push(p);
                let mut q = p;
                q[(i + 1) % 3] += 0.5 * self.params.eps;
                out.push(q);
            }
        }
        out
    }

    fn name(&self) -> String {
        "hedlund".into()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConditionCheck {
    pub samples: usize,
    /// Smallest normalized margin seen; negative means a violation.
    pub worst_margin: f64,
    pub failures: usize,
}

impl ConditionCheck {
    fn new() -> Self {
        ConditionCheck {
            samples: 0,
            worst_margin: f64::INFINITY,
            failures: 0,
        }
    }

    fn record(&mut self, margin: f64, ok: bool) {
        self.samples += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if !ok {
            self.failures += 1;
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HedlundReport {
    pub lambdas: [f64; 3],
    pub eps: f64,
    pub conforming: bool,
    pub cond_i: ConditionCheck,
    pub cond_ii: ConditionCheck,
    pub cond_iii: ConditionCheck,
    /// Largest `‖ḡ − gᵢ‖` over points on `Lᵢ`.
    pub line_equality_dev: f64,
    /// Smallest `‖ḡ − gᵢ‖` over sampled tube points off the lines.
    pub off_line_min_dev: f64,
    pub v1_margin: f64,
    pub pass: bool,
}

const COND_TOL: f64 = 1e-12;

/// Samples points and directions and checks conditions (i)–(iii) in the
/// cone-inclusion-plus-length reading.
pub fn verify_hedlund(m: &Hedlund, samples: usize, seed: u64) -> HedlundReport {
    let eps = m.params.eps;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut c1 = ConditionCheck::new();
    let mut c2 = ConditionCheck::new();
    let mut c3 = ConditionCheck::new();
    let mut line_dev: f64 = 0.0;
    let mut off_dev = f64::INFINITY;
    let eps_frame = Frame::new(&m.g_eps, &m.v1);
    for n in 0..samples {
        let kind = n % 10;
        let p: Vector3<f64> = match kind {
            0..=3 => Vector3::from_fn(|_, _| rng.gen::<f64>()),
            _ => {
                let fam = rng.gen_range(0..3);
                let mut p = family_shift(fam) + Vector3::from_fn(|_, _| rng.gen_range(-2i32..=2) as f64);
                p[fam] = rng.gen_range(-2.0..2.0);
                let r = match kind {
                    4 => 0.0,
                    5 => eps * (1.0 + 0.02 * (rng.gen::<f64>() - 0.5)),
                    _ => eps * rng.gen::<f64>().sqrt(),
                };
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                let (a, b) = ((fam + 1) % 3, (fam + 2) % 3);
                p[a] += r * th.cos();
                p[b] += r * th.sin();
                p
            }
        };
        let g = m.metric(&p);
        let boundary = rng.gen_bool(0.3);

        // (i): g_ε-future-causal ⇒ ḡ-future-causal and not shorter.
        let v = sample_future_causal(&eps_frame, &mut rng, boundary);
        let n2 = v.norm_squared();
        let margin = (quad(&m.g_eps, &v) - quad(&g, &v)) / n2;
        let ok = margin >= -COND_TOL && quad(&g, &v) <= PATH_MARGIN * n2 && (g * v).dot(&m.v1) < 0.0;
        c1.record(margin, ok);

        let frame = Frame::new(&g, &m.v1);
        let w = sample_future_causal(&frame, &mut rng, boundary);
        let n2 = w.norm_squared();
        match m.tube(&p) {
            None => {
                let margin = (quad(&g, &w) - quad(&m.g_2eps, &w)) / n2;
                let ok = margin >= -COND_TOL && (m.g_2eps * w).dot(&m.v1) < 0.0;
                c2.record(margin, ok);
            }
            Some((i, d)) => {
                let gi = &m.g_line[i];
                let margin = (quad(&g, &w) - quad(gi, &w)) / n2;
                let ok = margin >= -COND_TOL && (gi * w).dot(&m.v1) < 0.0;
                c3.record(margin, ok);
                let dev = (g - gi).amax();
                if d == 0.0 {
                    line_dev = line_dev.max(dev);
                } else {
                    off_dev = off_dev.min(dev);
                }
            }
        }
    }
    let strict = off_dev > 0.0;
    let pass = c1.pass() && c2.pass() && c3.pass() && line_dev <= 1e-15 && strict;
    HedlundReport {
        lambdas: m.params.lambdas,
        eps,
        conforming: m.params.conforming(),
        cond_i: c1,
        cond_ii: c2,
        cond_iii: c3,
        line_equality_dev: line_dev,
        off_line_min_dev: off_dev,
        v1_margin: m.params.v1_margin(),
        pass,
    }
}

/// Constructs the blended metric and rejects it when sampled verification fails.
pub fn make_hedlund(params: HedlundParams) -> Result<Hedlund> {
    let m = Hedlund::new_unchecked(params);
    let rep = verify_hedlund(&m, 4000, 0x4ed1);
    if !rep.pass {
        return Err(Error::ConditionViolated(format!(
            "(i) {} (ii) {} (iii) {} line-dev {:.2e} v1-margin {:.2e}",
            rep.cond_i.failures, rep.cond_ii.failures, rep.cond_iii.failures, rep.line_equality_dev, rep.v1_margin
        )));
    }
    Ok(m)
}
