//! Occupation measures on the unit tangent bundle of the torus.

use crate::error::{Error, Result};
use crate::reach::SeparationOracle;
use crate::spacetime::{quad, wrap, CausalPath, MetricField, Vector};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

pub const POSITION_CELLS: usize = 64;

/// Direction bins: 256 angles in 2D, the 320 faces of a twice-subdivided icosahedron in 3D.
#[derive(Clone, Debug)]
pub struct DirectionBins<const D: usize> {
    pub centers: Vec<Vector<D>>,
}

fn icosphere_faces() -> Vec<[[f64; 3]; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let norm = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let v: Vec<[f64; 3]> = raw.iter().map(|&x| norm(x)).collect();
    let idx = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut faces: Vec<[[f64; 3]; 3]> = idx.iter().map(|f| [v[f[0]], v[f[1]], v[f[2]]]).collect();
    for _ in 0..2 {
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let mid = |p: [f64; 3], q: [f64; 3]| norm([p[0] + q[0], p[1] + q[1], p[2] + q[2]]);
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    faces
}

impl<const D: usize> DirectionBins<D> {
    pub fn standard() -> Self {
        let centers = match D {
            2 => (0..256)
                .map(|i| {
                    let th = std::f64::consts::TAU * (i as f64 + 0.5) / 256.0;
                    Vector::<D>::from_fn(|k, _| if k == 0 { th.cos() } else { th.sin() })
                })
                .collect(),
            3 => icosphere_faces()
                .iter()
                .map(|f| {
                    let c = Vector::<D>::from_fn(|k, _| f[0][k] + f[1][k] + f[2][k]);
                    c / c.norm()
                })
                .collect(),
            _ => Vec::new(),
        };
        DirectionBins { centers }
    }

    pub fn bin(&self, v: &Vector<D>) -> u32 {
        let mut best = (f64::NEG_INFINITY, 0u32);
        for (i, c) in self.centers.iter().enumerate() {
            let d = c.dot(v);
            if d > best.0 {
                best = (d, i as u32);
            }
        }
        best.1
    }
}

/// Key: (component tag, position cell, direction bin). Tags keep mixtures exactly linear.
type CellKey = (u32, u32, u32);

#[derive(Clone, Debug, Default)]
pub struct Cell<const D: usize> {
    pub weight: f64,
    pos_sum: Vec<f64>,
    dir_sum: Vec<f64>,
}

impl<const D: usize> Cell<D> {
    pub fn position(&self) -> Vector<D> {
        Vector::<D>::from_fn(|k, _| self.pos_sum[k] / self.weight)
    }

    /// Weighted tangent sum divided by the weight (length ≤ 1).
    pub fn mean_direction(&self) -> Vector<D> {
        Vector::<D>::from_fn(|k, _| self.dir_sum[k] / self.weight)
    }

    pub fn direction(&self) -> Vector<D> {
        let v = self.mean_direction();
        v / v.norm()
    }
}

#[derive(Clone, Debug)]
pub struct OccupationMeasure<const D: usize> {
    pub cells: BTreeMap<CellKey, Cell<D>>,
    /// Background length of the source window(s).
    pub window: f64,
}

fn pos_cell<const D: usize>(x: &Vector<D>) -> u32 {
    let w = wrap(x);
    let mut id = 0u32;
    for k in 0..D {
        let c = ((w[k] * POSITION_CELLS as f64).floor() as i64).clamp(0, POSITION_CELLS as i64 - 1) as u32;
        id = id * POSITION_CELLS as u32 + c;
    }
    id
}

/// Sampling step along segments.
const SAMPLE_STEP: f64 = 0.5 / POSITION_CELLS as f64;

pub fn occupation_measure<const D: usize>(path: &CausalPath<D>, bins: &DirectionBins<D>) -> Result<OccupationMeasure<D>> {
    if path.len() < 2 || !(path.l_r > 0.0) {
        return Err(Error::EmptyPath);
    }
    let mut cells: BTreeMap<CellKey, Cell<D>> = BTreeMap::new();
    for w in path.vertices.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let u = d / len;
        let b = bins.bin(&u);
        let n = (len / SAMPLE_STEP).ceil().max(1.0) as usize;
        let wt = len / n as f64;
        for s in 0..n {
            let x = w[0] + d * ((s as f64 + 0.5) / n as f64);
            let xw = wrap(&x);
            let c = cells.entry((0, pos_cell(&x), b)).or_insert_with(|| Cell {
                weight: 0.0,
                pos_sum: vec![0.0; D],
                dir_sum: vec![0.0; D],
            });
            c.weight += wt;
            for k in 0..D {
                c.pos_sum[k] += wt * xw[k];
                c.dir_sum[k] += wt * u[k];
            }
        }
    }
    let mut mu = OccupationMeasure { cells, window: path.l_r };
    let total = mu.mass();
    mu.scale(1.0 / total);
    Ok(mu)
}

impl<const D: usize> OccupationMeasure<D> {
    pub fn mass(&self) -> f64 {
        self.cells.values().map(|c| c.weight).sum()
    }

    pub fn scale(&mut self, c: f64) {
        for cell in self.cells.values_mut() {
            cell.weight *= c;
            for v in cell.pos_sum.iter_mut().chain(cell.dir_sum.iter_mut()) {
                *v *= c;
            }
        }
    }

    /// `Σ wᵢ μᵢ`; components stay separate so `ρ` and `𝔏` are exactly linear.
    pub fn mix(parts: &[(&OccupationMeasure<D>, f64)]) -> OccupationMeasure<D> {
        let mut cells = BTreeMap::new();
        let mut window = 0.0;
        let mut tag = 0u32;
        for (mu, w) in parts {
            let mut m = (*mu).clone();
            m.scale(*w);
            let mut seen = 0u32;
            for ((t, p, d), c) in m.cells {
                seen = seen.max(t + 1);
                cells.insert((tag + t, p, d), c);
            }
            tag += seen;
            window += mu.window;
        }
        OccupationMeasure { cells, window }
    }

    /// Occupied (position, direction) cells.
    pub fn support(&self) -> BTreeSet<(u32, u32)> {
        self.cells.iter().filter(|(_, c)| c.weight > 0.0).map(|(k, _)| (k.1, k.2)).collect()
    }

    pub fn disjoint(&self, other: &Self) -> bool {
        self.support().is_disjoint(&other.support())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["cell_id".to_string()];
        header.extend((0..D).map(|k| format!("x{k}")));
        header.extend((0..D).map(|k| format!("v{k}")));
        header.push("weight".into());
        w.write_record(&header)?;
        for (k, c) in &self.cells {
            let mut rec = vec![format!("{}:{}:{}", k.0, k.1, k.2)];
            let (x, v) = (c.position(), c.direction());
            rec.extend((0..D).map(|i| format!("{:.9}", x[i])));
            rec.extend((0..D).map(|i| format!("{:.9}", v[i])));
            rec.push(format!("{:.12}", c.weight));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ρ(μ) = ∫ v dμ`.
pub fn rotation_class<const D: usize>(mu: &OccupationMeasure<D>) -> Vector<D> {
    let mut r = Vector::<D>::zeros();
    for c in mu.cells.values() {
        for k in 0..D {
            r[k] += c.dir_sum[k];
        }
    }
    r
}

/// `𝔏(μ) = ∫ √(−g(v,v)) dμ`, evaluated at the sample centroid of each cell.
pub fn average_length<const D: usize, M: MetricField<D> + ?Sized>(m: &M, mu: &OccupationMeasure<D>) -> Result<f64> {
    let mut total = 0.0;
    for (i, c) in mu.cells.values().enumerate() {
        if c.weight == 0.0 {
            continue;
        }
        let x = c.position();
        let v = c.direction();
        let g = m.metric(&x);
        let q = quad(&g, &v);
        let o = (g * v).dot(&m.orientation(&x));
        if q > 1e-9 || o >= 0.0 {
            return Err(Error::NonCausalCell(i));
        }
        total += c.weight * (-q).max(0.0).sqrt();
    }
    Ok(total)
}

/// `∫ ∂f dμ` by central differences along the cell directions.
pub fn invariance_defect<const D: usize, F: Fn(&Vector<D>) -> f64>(mu: &OccupationMeasure<D>, f: F) -> f64 {
    let h = 1e-6;
    mu.cells
        .values()
        .map(|c| {
            let x = c.position();
            let v = c.mean_direction();
            c.weight * (f(&(x + v * h)) - f(&(x - v * h))) / (2.0 * h)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalMeasure {
    pub n: f64,
    pub lhat: f64,
    pub average_length: f64,
    pub gap: f64,
    pub rho: Vec<f64>,
    pub mass: f64,
}

/// Occupation measure of the computed maximizer `x → x + N·h`, rescaled so that `ρ(μ) = h`.
pub fn find_maximal_measure<const D: usize, M: MetricField<D> + ?Sized, O: SeparationOracle<D> + ?Sized>(
    m: &M,
    oracle: &O,
    base: &Vector<D>,
    h: &Vector<D>,
    n: f64,
) -> Result<(OccupationMeasure<D>, MaximalMeasure)> {
    let sep = oracle.separation(base, &(base + h * n))?;
    if !sep.reachable {
        return Err(Error::EmptyPath);
    }
    let mut mu = occupation_measure(&sep.path, &DirectionBins::standard())?;
    mu.scale(sep.path.l_r / n);
    let al = average_length(m, &mu)?;
    let lhat = sep.value / n;
    let rho = rotation_class(&mu);
    Ok((
        mu.clone(),
        MaximalMeasure {
            n,
            lhat,
            average_length: al,
            gap: lhat - al,
            rho: rho.iter().copied().collect(),
            mass: mu.mass(),
        },
    ))
}
