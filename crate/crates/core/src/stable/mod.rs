//! Stable time cone, stable time separation and its dual.

pub mod cone;

pub use cone::{convex_hull_2d, estimate_cone, hausdorff_polygons, ConeEstimate, ConeOptions};

use crate::error::{Error, Result};
use crate::reach::SeparationOracle;
use crate::spacetime::{CausalPath, Vector};
use serde::Serialize;
use std::io::Write;

/// `(end − start)/L_R`, the displacement per unit background arclength.
pub fn rotation_vector<const D: usize>(path: &CausalPath<D>) -> Result<Vector<D>> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if !(path.l_r > 0.0) {
        return Err(Error::ZeroLengthPath);
    }
    Ok(path.displacement() / path.l_r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeFlag {
    In,
    Boundary,
    Out,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableEstimate {
    pub value: f64,
    pub err: f64,
    pub n_used: f64,
    pub flag: ConeFlag,
    /// `(N, d̂(x, x+Nh))` for every probed multiple.
    pub samples: Vec<(f64, f64)>,
    /// `d̂(2N) ≥ 2·d̂(N) − tol` along doubling steps of the schedule.
    pub superadditive: bool,
}

/// `ℓ̂(h) = d̂(x, x+N·h)/N` at the largest `N` of the schedule, with error bar `cbar/N`.
pub fn stable_time_separation<const D: usize, O: SeparationOracle<D> + ?Sized>(
    oracle: &O,
    base: &Vector<D>,
    h: &Vector<D>,
    schedule: &[f64],
    cbar: f64,
    tol: f64,
) -> Result<StableEstimate> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "needs at least one multiple"));
    }
    let mut samples = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let s = oracle.separation(base, &(base + h * n))?;
        samples.push((n, if s.reachable { s.value } else { 0.0 }));
    }
    let mut superadditive = true;
    for a in &samples {
        for b in &samples {
            if (b.0 - 2.0 * a.0).abs() < 1e-12 && b.1 < 2.0 * a.1 - tol {
                superadditive = false;
            }
        }
    }
    let (n, d) = *samples.last().unwrap();
    let reachable = samples.iter().any(|s| s.1 > 0.0);
    let value = d / n;
    Ok(StableEstimate {
        value,
        err: cbar / n,
        n_used: n,
        flag: if !reachable {
            ConeFlag::Out
        } else if value == 0.0 {
            ConeFlag::Boundary
        } else {
            ConeFlag::In
        },
        samples,
        superadditive,
    })
}

/// `ℓ̂` on unit directions; homogeneity holds by storing unit vectors only.
#[derive(Clone, Debug, Serialize)]
pub struct StableSepTable<const D: usize> {
    pub directions: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub errs: Vec<f64>,
    pub n_used: Vec<f64>,
    pub flags: Vec<ConeFlag>,
}

impl<const D: usize> StableSepTable<D> {
    pub fn new() -> Self {
        StableSepTable {
            directions: Vec::new(),
            values: Vec::new(),
            errs: Vec::new(),
            n_used: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn direction(&self, i: usize) -> Vector<D> {
        Vector::<D>::from_column_slice(&self.directions[i])
    }

    /// Inserts an estimate for direction `h` (any length), normalized to the unit sphere.
    pub fn push(&mut self, h: &Vector<D>, est: &StableEstimate) {
        let n = h.norm();
        self.directions.push((h / n).iter().copied().collect());
        self.values.push(est.value / n);
        self.errs.push(est.err / n);
        self.n_used.push(est.n_used * n);
        self.flags.push(est.flag);
    }

    /// `ℓ̂(h)` by homogeneity from the stored direction nearest to `h`.
    pub fn lookup(&self, h: &Vector<D>) -> Option<f64> {
        let n = h.norm();
        let u = h / n;
        (0..self.len())
            .min_by(|&a, &b| {
                (self.direction(a) - u)
                    .norm()
                    .partial_cmp(&(self.direction(b) - u).norm())
                    .unwrap()
            })
            .map(|i| self.values[i] * n)
    }

    /// CSV with columns `h0..h{D-1},lhat,err,n_used,flag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..D).map(|i| format!("h{i}")).collect();
        header.extend(["lhat", "err", "n_used", "flag"].map(String::from));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.directions[i].iter().map(|x| format!("{x:.12}")).collect();
            rec.push(format!("{:.12}", self.values[i]));
            rec.push(format!("{:.12}", self.errs[i]));
            rec.push(format!("{:.6}", self.n_used[i]));
            rec.push(
                match self.flags[i] {
                    ConeFlag::In => "in",
                    ConeFlag::Boundary => "boundary",
                    ConeFlag::Out => "out",
                }
                .into(),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<const D: usize> Default for StableSepTable<D> {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds a table over `dirs`, probing `base + N·h` for `N` in `schedule`.
pub fn build_table<const D: usize, O: SeparationOracle<D> + ?Sized>(
    oracle: &O,
    base: &Vector<D>,
    dirs: &[Vector<D>],
    schedule: &[f64],
    cbar: f64,
) -> Result<StableSepTable<D>> {
    let mut t = StableSepTable::new();
    for h in dirs {
        let e = stable_time_separation(oracle, base, h, schedule, cbar, 1e-9)?;
        t.push(h, &e);
    }
    Ok(t)
}

/// `ℓ̂*(α) = min α(h)/ℓ̂(h)` over in-cone table directions.
pub fn dual_stable<const D: usize>(table: &StableSepTable<D>, alpha: &Vector<D>) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..table.len() {
        if table.flags[i] == ConeFlag::Out {
            continue;
        }
        let a = alpha.dot(&table.direction(i));
        if a < 0.0 {
            return Err(Error::NotInDualCone);
        }
        if table.values[i] > 0.0 {
            best = best.min(a / table.values[i]);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct T17Report {
    pub superadditivity_checked: usize,
    pub superadditivity_violations: usize,
    pub superadditivity_worst: f64,
    pub concavity_checked: usize,
    pub concavity_violations: usize,
    pub concavity_worst: f64,
    pub pass: bool,
}

/// Superadditivity `ℓ̂(h+h′) ≥ ℓ̂(h)+ℓ̂(h′) − 2·err` on table pairs and concavity at midpoints,
/// with `lhat` evaluating the estimate at arbitrary `h`.
pub fn check_t17_properties<const D: usize, F>(table: &StableSepTable<D>, lhat: F, max_pairs: usize) -> T17Report
where
    F: Fn(&Vector<D>) -> f64,
{
    let mut r = T17Report::default();
    let idx: Vec<usize> = (0..table.len()).filter(|&i| table.flags[i] == ConeFlag::In).collect();
    let mut pairs = 0;
    'outer: for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            if pairs == max_pairs {
                break 'outer;
            }
            pairs += 1;
            let (hi, hj) = (table.direction(i), table.direction(j));
            let tol = 2.0 * (table.errs[i] + table.errs[j]) + 1e-9;
            let sum = lhat(&(hi + hj));
            let gap = table.values[i] + table.values[j] - sum;
            r.superadditivity_checked += 1;
            r.superadditivity_worst = r.superadditivity_worst.max(gap);
            if gap > tol {
                r.superadditivity_violations += 1;
            }
            let mid = lhat(&((hi + hj) * 0.5));
            let cgap = 0.5 * (table.values[i] + table.values[j]) - mid;
            r.concavity_checked += 1;
            r.concavity_worst = r.concavity_worst.max(cgap);
            if cgap > tol {
                r.concavity_violations += 1;
            }
        }
    }
    r.pass = r.superadditivity_violations == 0 && r.concavity_violations == 0;
    r
}
