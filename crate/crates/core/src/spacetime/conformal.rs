use super::{DerivMode, Matrix, MetricField, Vector};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// One term `amp·sin(2π k·x + phase)` of a periodic conformal factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode<const D: usize> {
    pub amp: f64,
    pub k: [i32; D],
    pub phase: f64,
}

/// `f²·⟨·,·⟩₁` with `⟨·,·⟩₁ = −(dx⁰)² + Σ(dxⁱ)²`, oriented by `∂₀`.
#[derive(Clone, Debug)]
pub struct ConformallyFlat<const D: usize> {
    pub c0: f64,
    pub modes: Vec<FourierMode<D>>,
}

fn minkowski<const D: usize>() -> Matrix<D> {
    let mut eta = Matrix::<D>::identity();
    eta[(0, 0)] = -1.0;
    eta
}

impl<const D: usize> ConformallyFlat<D> {
    #[inline]
    fn phase(m: &FourierMode<D>, p: &Vector<D>) -> f64 {
        let mut s = m.phase;
        for i in 0..D {
            s += 2.0 * PI * m.k[i] as f64 * p[i];
        }
        s
    }

    pub fn factor(&self, p: &Vector<D>) -> f64 {
        self.c0 + self.modes.iter().map(|m| m.amp * Self::phase(m, p).sin()).sum::<f64>()
    }

    pub fn factor_grad(&self, p: &Vector<D>) -> Vector<D> {
        let mut g = Vector::<D>::zeros();
        for m in &self.modes {
            let c = m.amp * Self::phase(m, p).cos() * 2.0 * PI;
            for i in 0..D {
                g[i] += c * m.k[i] as f64;
            }
        }
        g
    }

    /// Lower bound `c0 − Σ|amp|` of the factor.
    pub fn lower_bound(&self) -> f64 {
        self.c0 - self.modes.iter().map(|m| m.amp.abs()).sum::<f64>()
    }

    pub fn upper_bound(&self) -> f64 {
        self.c0 + self.modes.iter().map(|m| m.amp.abs()).sum::<f64>()
    }

    pub fn is_flat(&self) -> bool {
        self.modes.is_empty() && self.c0 == 1.0
    }
}

impl<const D: usize> MetricField<D> for ConformallyFlat<D> {
    fn metric(&self, p: &Vector<D>) -> Matrix<D> {
        let f = self.factor(p);
        minkowski::<D>() * (f * f)
    }

    fn orientation(&self, _p: &Vector<D>) -> Vector<D> {
        let mut o = Vector::<D>::zeros();
        o[0] = 1.0;
        o
    }

    fn deriv_mode(&self) -> DerivMode {
        DerivMode::Analytic
    }

    fn metric_gradient(&self, p: &Vector<D>) -> [Matrix<D>; D] {
        let f = self.factor(p);
        let df = self.factor_grad(p);
        let eta = minkowski::<D>();
        std::array::from_fn(|k| eta * (2.0 * f * df[k]))
    }

    fn temporal_covector(&self) -> [i64; D] {
        let mut t = [0; D];
        t[0] = 1;
        t
    }

    fn name(&self) -> String {
        if self.is_flat() {
            format!("flat{D}")
        } else {
            format!("conformal{D}")
        }
    }
}

pub fn make_flat<const D: usize>() -> ConformallyFlat<D> {
    ConformallyFlat {
        c0: 1.0,
        modes: Vec::new(),
    }
}

/// Builds `f²·⟨·,·⟩₁`; the factor is checked on a deterministic sample when its bound is not positive.
pub fn make_conformally_flat<const D: usize>(c0: f64, modes: Vec<FourierMode<D>>) -> Result<ConformallyFlat<D>> {
    use rand::{Rng, SeedableRng};
    let m = ConformallyFlat { c0, modes };
    if m.lower_bound() > 0.0 {
        return Ok(m);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::INFINITY;
    for _ in 0..20_000 {
        let p = Vector::<D>::from_fn(|_, _| rng.gen::<f64>());
        worst = worst.min(m.factor(&p));
    }
    if worst <= 0.0 {
        return Err(Error::NonPositiveConformalFactor { value: worst });
    }
    Ok(m)
}
