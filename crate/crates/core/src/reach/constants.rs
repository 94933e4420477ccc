//! Empirical estimates of the constants controlling the discrete separation.

use super::oracle::SeparationOracle;
use crate::error::Result;
use crate::spacetime::Vector;
use serde::Serialize;

/// Extreme value of a sample with a 90% quantile as the inner edge of its window.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Fit {
    pub value: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

impl Fit {
    pub fn from_max(mut xs: Vec<f64>) -> Fit {
        xs.retain(|x| x.is_finite());
        if xs.is_empty() {
            return Fit::default();
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len();
        let q = xs[((n as f64 * 0.9).floor() as usize).min(n - 1)];
        Fit {
            value: xs[n - 1],
            window: (q, xs[n - 1]),
            samples: n,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiagnosticsConstants {
    /// max `L_R(γ)/|q−p|` over returned paths.
    pub c_causal: Fit,
    /// max `|d̂(p,q) − ℓ̂(q−p)|`.
    pub std_burago: Fit,
    /// max distance of reachable displacements to the stable cone.
    pub err_cone: Fit,
    /// max `ℓ̂(q−p) − d̂(p,q)`.
    pub cbar: Fit,
    /// largest displacement at which a probe ball around the target was not fully reachable.
    pub k_cone: Fit,
    /// max `|d̂(x,y) − d̂(z,w)| / (|x−z| + |y−w| + 1)`.
    pub lc: Fit,
    pub triangle_violations: usize,
    pub triangle_worst: f64,
}

pub struct FitInputs<'a, const D: usize> {
    pub pairs: Vec<(Vector<D>, Vector<D>)>,
    pub triples: Vec<(Vector<D>, Vector<D>, Vector<D>)>,
    pub lhat: Option<&'a (dyn Fn(&Vector<D>) -> f64 + Sync)>,
    pub cone_dist: Option<&'a (dyn Fn(&Vector<D>) -> f64 + Sync)>,
    pub probe_radius: Option<f64>,
    pub tol: f64,
}

pub fn fit_constants<const D: usize, O: SeparationOracle<D> + ?Sized>(oracle: &O, inp: &FitInputs<'_, D>) -> Result<DiagnosticsConstants> {
    let mut causal = Vec::new();
    let mut burago = Vec::new();
    let mut err = Vec::new();
    let mut cbar = Vec::new();
    let mut kcone = Vec::new();
    let mut vals = Vec::new();
    for (p, q) in &inp.pairs {
        let s = oracle.separation(p, q)?;
        vals.push(s.value);
        if !s.reachable {
            continue;
        }
        let d = q - p;
        let n = d.norm();
        if n > 0.0 {
            causal.push(s.path.l_r / n);
        }
        if let Some(l) = inp.lhat {
            let lv = l(&d);
            burago.push((s.value - lv).abs());
            cbar.push((lv - s.value).max(0.0));
        }
        if let Some(c) = inp.cone_dist {
            err.push(c(&d));
        }
        if let Some(r) = inp.probe_radius {
            let mut all = true;
            for k in 0..D {
                for sg in [-1.0, 1.0] {
                    let mut e = Vector::<D>::zeros();
                    e[k] = sg * r;
                    if !oracle.separation(p, &(q + e))?.reachable {
                        all = false;
                    }
                }
            }
            kcone.push(if all { 0.0 } else { n });
        }
    }
    let mut lc = Vec::new();
    for i in 1..inp.pairs.len() {
        let (x, y) = inp.pairs[i - 1];
        let (z, w) = inp.pairs[i];
        lc.push((vals[i - 1] - vals[i]).abs() / ((x - z).norm() + (y - w).norm() + 1.0));
    }
    let mut tv = 0;
    let mut worst: f64 = 0.0;
    for (p, q, r) in &inp.triples {
        let a = oracle.separation(p, q)?;
        let b = oracle.separation(q, r)?;
        let c = oracle.separation(p, r)?;
        if a.reachable && b.reachable {
            let gap = a.value + b.value - c.value;
            worst = worst.max(gap);
            if gap > inp.tol {
                tv += 1;
            }
        }
    }
    Ok(DiagnosticsConstants {
        c_causal: Fit::from_max(causal),
        std_burago: Fit::from_max(burago),
        err_cone: Fit::from_max(err),
        cbar: Fit::from_max(cbar),
        k_cone: Fit::from_max(kcone),
        lc: Fit::from_max(lc),
        triangle_violations: tv,
        triangle_worst: worst,
    })
}
