//! Light-cone frames, causal sampling and distances to the light cone.

use super::{quad, Matrix, Vector};
use rand::Rng;

/// Eigenframe of a Lorentzian form: `g(e₀,e₀) = −1`, `g(e_k,e_k) = 1`, `e₀` future.
#[derive(Clone, Debug)]
pub struct Frame<const D: usize> {
    pub time: Vector<D>,
    pub space: Vec<Vector<D>>,
}

impl<const D: usize> Frame<D> {
    pub fn new(g: &Matrix<D>, orient: &Vector<D>) -> Self {
        let (vals, vecs) = super::sym_eigen(g);
        let mut time = vecs[0] / (-vals[0]).sqrt();
        if (g * time).dot(orient) > 0.0 {
            time = -time;
        }
        let space = (1..D).map(|i| vecs[i] / vals[i].sqrt()).collect();
        Frame { time, space }
    }

    /// `e₀ + Σ cₖ eₖ`.
    pub fn vector(&self, c: &[f64]) -> Vector<D> {
        let mut v = self.time;
        for (e, x) in self.space.iter().zip(c) {
            v += e * *x;
        }
        v
    }
}

/// Uniform point in the unit ball of dimension `n` (or on the sphere when `boundary`).
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R, n: usize, boundary: bool) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    loop {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = c.iter().map(|x| x * x).sum();
        if r2 > 1.0 || r2 < 1e-24 {
            continue;
        }
        let r = r2.sqrt();
        let scale = if boundary {
            1.0 / r
        } else {
            // radial density r^(n-1) within the ball
            rng.gen::<f64>().powf(1.0 / n as f64) / r
        };
        return c.iter().map(|x| x * scale).collect();
    }
}

/// Random future causal vector, normalized to Euclidean length one.
pub fn sample_future_causal<const D: usize, R: Rng + ?Sized>(frame: &Frame<D>, rng: &mut R, boundary: bool) -> Vector<D> {
    let c = ball_point(rng, D - 1, boundary);
    let v = frame.vector(&c);
    v / v.norm()
}

/// Future null directions parameterizing the light cone, `count` of them for `D ≥ 3`.
pub fn null_directions<const D: usize>(frame: &Frame<D>, count: usize) -> Vec<Vector<D>> {
    match D {
        2 => vec![frame.vector(&[1.0]), frame.vector(&[-1.0])],
        3 => (0..count)
            .map(|i| {
                let th = std::f64::consts::TAU * i as f64 / count as f64;
                frame.vector(&[th.cos(), th.sin()])
            })
            .collect(),
        _ => {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
            (0..count)
                .map(|_| frame.vector(&ball_point(&mut rng, D - 1, true)))
                .collect()
        }
    }
}

fn ray_dist<const D: usize>(v: &Vector<D>, n: &Vector<D>) -> f64 {
    let nn = n.norm_squared();
    let t = v.dot(n) / nn;
    if t <= 0.0 {
        v.norm()
    } else {
        (v - n * t).norm()
    }
}

/// Euclidean distance from `v` to the future light cone of `g`.
pub fn light_distance<const D: usize>(g: &Matrix<D>, orient: &Vector<D>, v: &Vector<D>) -> f64 {
    let frame = Frame::new(g, orient);
    if D == 2 {
        return null_directions(&frame, 2)
            .iter()
            .map(|n| ray_dist(v, n))
            .fold(f64::INFINITY, f64::min);
    }
    if D == 3 {
        let f = |th: f64| ray_dist(v, &frame.vector(&[th.cos(), th.sin()]));
        let count = 256;
        let step = std::f64::consts::TAU / count as f64;
        let (mut best_th, mut best) = (0.0, f64::INFINITY);
        for i in 0..count {
            let th = step * i as f64;
            let d = f(th);
            if d < best {
                best = d;
                best_th = th;
            }
        }
        let (mut a, mut b) = (best_th - step, best_th + step);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..60 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = f(x2);
            }
        }
        return best.min(f1).min(f2);
    }
    null_directions(&frame, 4096)
        .iter()
        .map(|n| ray_dist(v, n))
        .fold(f64::INFINITY, f64::min)
}

/// `|g(v,v)|` for convenience in fits.
pub fn abs_quad<const D: usize>(g: &Matrix<D>, v: &Vector<D>) -> f64 {
    quad(g, v).abs()
}
