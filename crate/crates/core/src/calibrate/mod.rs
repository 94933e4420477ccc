//! Calibrations `τ = α(x) + φ(x)` with periodic `φ`, pseudo-time checks and `l∞` duality.

use crate::error::Result;
use crate::reach::SeparationOracle;
use crate::spacetime::cone::light_distance;
use crate::spacetime::{
    make_boundary_2torus, quad, BoundaryTorus, CausalPath, FourierMode, Matrix, MetricField, Vector, PATH_MARGIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub struct Calibration<const D: usize> {
    pub alpha: Vector<D>,
    pub correction: Vec<FourierMode<D>>,
    pub lstar: f64,
}

impl<const D: usize> Calibration<D> {
    pub fn linear(alpha: Vector<D>, lstar: f64) -> Self {
        Calibration {
            alpha,
            correction: Vec::new(),
            lstar,
        }
    }

    fn phase(mode: &FourierMode<D>, x: &Vector<D>) -> f64 {
        TAU * (0..D).map(|i| mode.k[i] as f64 * x[i]).sum::<f64>() + mode.phase
    }

    pub fn tau(&self, x: &Vector<D>) -> f64 {
        self.alpha.dot(x) + self.correction.iter().map(|m| m.amp * Self::phase(m, x).sin()).sum::<f64>()
    }

    /// `dτ = α + dφ` at `x`.
    pub fn omega(&self, x: &Vector<D>) -> Vector<D> {
        let mut w = self.alpha;
        for m in &self.correction {
            let c = m.amp * TAU * Self::phase(m, x).cos();
            for i in 0..D {
                w[i] += c * m.k[i] as f64;
            }
        }
        w
    }

    /// Upper bound on the Euclidean Lipschitz constant of `τ`.
    pub fn lipschitz(&self) -> f64 {
        self.alpha.norm()
            + self
                .correction
                .iter()
                .map(|m| m.amp.abs() * TAU * (0..D).map(|i| (m.k[i] as f64).powi(2)).sum::<f64>().sqrt())
                .sum::<f64>()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PseudoTimeReport {
    pub checked: usize,
    pub violations: usize,
    /// `min τ(q)−τ(p) − l·d̂(p,q)` over causal pairs.
    pub worst_margin: f64,
    /// `min (τ(q)−τ(p))/|q−p|` over causal pairs.
    pub eps_hat: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `τ(q) − τ(p) ≥ l·d̂(p,q) − tol` on the pairs the oracle finds causally related.
pub fn is_pseudo_time<const D: usize, O: SeparationOracle<D> + ?Sized>(
    oracle: &O,
    cal: &Calibration<D>,
    l: f64,
    pairs: &[(Vector<D>, Vector<D>)],
    tol: f64,
) -> Result<PseudoTimeReport> {
    let mut r = PseudoTimeReport {
        worst_margin: f64::INFINITY,
        eps_hat: f64::INFINITY,
        tol,
        ..Default::default()
    };
    for (p, q) in pairs {
        let s = oracle.separation(p, q)?;
        if !s.reachable {
            continue;
        }
        r.checked += 1;
        let dt = cal.tau(q) - cal.tau(p);
        let margin = dt - l * s.value;
        r.worst_margin = r.worst_margin.min(margin);
        if margin < -tol {
            r.violations += 1;
        }
        r.eps_hat = r.eps_hat.min(dt / (q - p).norm());
    }
    r.pass = r.checked > 0 && r.violations == 0;
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibratedReport {
    /// `max_k |Δτ_k − ℓ*·L^g_k| / L^{g_R}_k` over segments.
    pub defect: f64,
    /// `min` distance of segment directions to the light cone.
    pub light_gap: f64,
}

pub fn check_calibrated<const D: usize, M: MetricField<D> + ?Sized>(m: &M, cal: &Calibration<D>, path: &CausalPath<D>) -> CalibratedReport {
    let mut defect: f64 = 0.0;
    let mut gap = f64::INFINITY;
    for w in path.vertices.windows(2) {
        let d = w[1] - w[0];
        let b = d.norm();
        if b == 0.0 {
            continue;
        }
        let lg = crate::spacetime::segment_length(m, &w[0], &w[1], crate::spacetime::Quadrature::Adaptive);
        let a = cal.tau(&w[1]) - cal.tau(&w[0]) - cal.lstar * lg;
        defect = defect.max(a.abs() / b);
        let mid = (w[0] + w[1]) * 0.5;
        gap = gap.min(light_distance(&m.metric(&mid), &m.orientation(&mid), &(d / b)));
    }
    CalibratedReport { defect, light_gap: gap }
}

/// `min_p √|g⁻¹(ω,ω)|` when `−ω♯` is future causal at every sample, else `−∞`.
pub fn l_infty<const D: usize, M, W>(m: &M, omega: W, samples: &[Vector<D>]) -> f64
where
    M: MetricField<D> + ?Sized,
    W: Fn(&Vector<D>) -> Vector<D>,
{
    let mut best = f64::INFINITY;
    for p in samples {
        let g: Matrix<D> = m.metric(p);
        let Some(gi) = g.try_inverse() else { return f64::NEG_INFINITY };
        let w = omega(p);
        let sharp = -(gi * w);
        let n2 = sharp.norm_squared();
        let q = quad(&g, &sharp);
        if n2 == 0.0 || q > PATH_MARGIN * n2 || (g * sharp).dot(&m.orientation(p)) >= 0.0 {
            return f64::NEG_INFINITY;
        }
        best = best.min((-q).max(0.0).sqrt());
    }
    best
}

/// Uniform samples plus the metric's landmark points, all in the unit cell.
pub fn sample_points<const D: usize, M: MetricField<D> + ?Sized>(m: &M, n: usize, seed: u64) -> Vec<Vector<D>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vector<D>> = (0..n).map(|_| Vector::<D>::from_fn(|_, _| rng.gen::<f64>())).collect();
    out.extend(m.landmark_points());
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub alpha: Vec<f64>,
    pub lstar: f64,
    pub tried: usize,
    pub best_l_infty: f64,
    /// Representatives with `l∞(ω) > ℓ̂*(α) + tol`.
    pub violations: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Random search over `ω = α + dφ`, `φ` a Fourier sum with `|k|∞ ≤ degree`, maximizing `l∞`.
pub fn duality_check<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    alpha: &Vector<D>,
    lstar: f64,
    degree: i32,
    trials: usize,
    samples: &[Vector<D>],
    seed: u64,
    tol: f64,
) -> DualityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut tried = 0;
    for t in 0..trials {
        let correction: Vec<FourierMode<D>> = if t == 0 {
            Vec::new()
        } else {
            let count = rng.gen_range(1..=3);
            (0..count)
                .map(|_| {
                    let mut k = [0i32; D];
                    while k.iter().all(|&x| x == 0) {
                        for x in k.iter_mut() {
                            *x = rng.gen_range(-degree..=degree);
                        }
                    }
                    FourierMode {
                        amp: rng.gen_range(-0.05..0.05) / (TAU * degree as f64),
                        k,
                        phase: rng.gen_range(0.0..TAU),
                    }
                })
                .collect()
        };
        let cal = Calibration {
            alpha: *alpha,
            correction,
            lstar,
        };
        let v = l_infty(m, |p| cal.omega(p), samples);
        tried += 1;
        if v > lstar + tol {
            violations += 1;
        }
        best = best.max(v);
    }
    DualityReport {
        alpha: alpha.iter().copied().collect(),
        lstar,
        tried,
        best_l_infty: best,
        violations,
        tol,
        pass: violations == 0,
    }
}

/// `ℓ*(α) = min αⱼ/λⱼ` for the Hedlund stable separation `ℓ(h) = Σλᵢhⁱ`.
pub fn hedlund_lstar(lambdas: &[f64; 3], alpha: &Vector<3>) -> f64 {
    (0..3).map(|j| alpha[j] / lambdas[j]).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryWitness {
    pub n: f64,
    pub eta: f64,
    pub displacement: [f64; 2],
    /// Homology class of the loop closed by the shortest segment.
    pub homology: [i64; 2],
    /// `e₁*` evaluated on the closed loop.
    pub loop_integral: f64,
    /// Length of the closing segment on the torus.
    pub closing_gap: f64,
    pub causal: bool,
}

/// Flowline of `X₁ + ηX₂` through `(½, 0)` over `t ∈ [−n, n]`. Its closed-up loop has class
/// `(−1, 2n)`, so every `ω ∈ e₁*` integrates to `−1` over a causal loop and `l′(e₁*) = −∞`.
pub fn boundary_witness(n: f64, eta: f64, step: f64) -> BoundaryWitness {
    let m: BoundaryTorus = make_boundary_2torus();
    let field = |p: &Vector<2>| {
        let (x1, x2) = BoundaryTorus::frame(p);
        Vector::<2>::new(x1[0] + eta * x2[0], x1[1] + eta * x2[1])
    };
    let rk4 = |p: Vector<2>, h: f64| {
        let k1 = field(&p);
        let k2 = field(&(p + k1 * (h / 2.0)));
        let k3 = field(&(p + k2 * (h / 2.0)));
        let k4 = field(&(p + k3 * h));
        p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    let steps = (n / step).ceil() as usize;
    let h = n / steps as f64;
    let start = Vector::<2>::new(0.5, 0.0);
    let mut back = vec![start];
    let mut p = start;
    for _ in 0..steps {
        p = rk4(p, -h);
        back.push(p);
    }
    back.reverse();
    let mut verts = back;
    p = start;
    for _ in 0..steps {
        p = rk4(p, h);
        verts.push(p);
    }
    let a = verts[0];
    let b = *verts.last().unwrap();
    let d = b - a;
    let homology = [d[0].round() as i64, d[1].round() as i64];
    let closing = Vector::<2>::new(d[0] - homology[0] as f64, d[1] - homology[1] as f64);
    let causal = CausalPath::new(&m, verts).is_ok();
    BoundaryWitness {
        n,
        eta,
        displacement: [d[0], d[1]],
        homology,
        loop_integral: homology[0] as f64,
        closing_gap: closing.norm(),
        causal,
    }
}
