//! Standard paths: runs along lines joined by jumps of `½(1,1,1)`.

use super::lines::{Line, LineSystem};
use crate::error::{Error, Result};
use crate::spacetime::{CausalPath, Hedlund, Vector};

const ON_LINE: f64 = 1e-9;

fn third(i: usize, j: usize) -> usize {
    3 - i - j
}

/// Vertex list of the standard path from `p ∈ lᵢ` to `q ∈ lⱼ`.
pub fn standard_vertices(p: &Vector<3>, li: &Line, q: &Vector<3>, lj: &Line) -> Result<Vec<Vector<3>>> {
    let (i, j) = (li.family, lj.family);
    if i == j {
        return Err(Error::NotConstructible("endpoints on the same line family".into()));
    }
    let k = third(i, j);
    let h = q - p;
    let jump = Vector::<3>::repeat(0.5);
    let hk = h[k];
    if (hk - 0.5).abs() < 1e-9 {
        if h[i] < 0.5 - 1e-9 || h[j] < 0.5 - 1e-9 {
            return Err(Error::NotConstructible(format!("h = {:?} too short for the three-segment path", h.as_slice())));
        }
        let mut pi = *p;
        pi[i] = lj.coord(i).unwrap() - 0.5;
        let pj = pi + jump;
        return Ok(vec![*p, pi, pj, *q]);
    }
    if hk < 1.0 || h[i] < 1.0 - 1e-9 || h[j] < 1.0 - 1e-9 {
        return Err(Error::NotConstructible(format!("h = {:?} violates the standard-path bounds", h.as_slice())));
    }
    // intermediate line: x^i(l_k) = x^i(l_j) − ½, x^j(l_k) = x^j(l_i) + ½
    let xi = lj.coord(i).unwrap() - 0.5;
    let xj = li.coord(j).unwrap() + 0.5;
    let mut pi = *p;
    pi[i] = xi - 0.5;
    let a = pi + jump;
    let mut pk = a;
    pk[k] = lj.coord(k).unwrap() - 0.5;
    let b = pk + jump;
    debug_assert!((a[j] - xj).abs() < 1e-9);
    Ok(vec![*p, pi, a, pk, b, *q])
}

/// Standard path between points lying on lines of distinct families.
pub fn standard_path(m: &Hedlund, p: &Vector<3>, q: &Vector<3>) -> Result<CausalPath<3>> {
    let ls = LineSystem::new(m.eps());
    let li = ls
        .line_through(p, ON_LINE)
        .ok_or_else(|| Error::NotConstructible("start point is not on a line".into()))?;
    let lj = ls
        .line_through(q, ON_LINE)
        .ok_or_else(|| Error::NotConstructible("end point is not on a line".into()))?;
    let v = standard_vertices(p, &li, q, &lj)?;
    CausalPath::new(m, v)
}

/// Straight run when `p, q` share a line and `q` is ahead.
fn same_line_run(ls: &LineSystem, p: &Vector<3>, q: &Vector<3>) -> Option<Vec<Vector<3>>> {
    let li = ls.line_through(p, ON_LINE)?;
    let lj = ls.line_through(q, ON_LINE)?;
    (li.same(&lj) && q[li.family] > p[li.family]).then(|| vec![*p, *q])
}

/// Longest explicit causal path from `p` to `q` built from line runs: the standard path
/// when defined, otherwise the best two-leg chain through an intermediate line.
pub fn guide_path(m: &Hedlund, p: &Vector<3>, q: &Vector<3>) -> Result<CausalPath<3>> {
    let ls = LineSystem::new(m.eps());
    if let Some(v) = same_line_run(&ls, p, q) {
        return CausalPath::new(m, v);
    }
    if let Ok(sp) = standard_path(m, p, q) {
        return Ok(sp);
    }
    let li = ls
        .line_through(p, ON_LINE)
        .ok_or_else(|| Error::NotConstructible("start point is not on a line".into()))?;
    let lj = ls
        .line_through(q, ON_LINE)
        .ok_or_else(|| Error::NotConstructible("end point is not on a line".into()))?;
    let mut best: Option<CausalPath<3>> = None;
    for f in 0..3 {
        if f == li.family || f == lj.family {
            continue;
        }
        let (a, b) = super::lines::transverse_axes(f);
        let base = Line::nearest_of(f, p);
        let na = (q[a] - p[a]).ceil() as i64 + 1;
        let nb = (q[b] - p[b]).ceil() as i64 + 1;
        for da in -1..=na {
            for db in -1..=nb {
                let l = Line::new(f, [base.offset[0] + da as f64, base.offset[1] + db as f64]);
                // any position admissible for both legs gives the same total; take the earliest
                let lo = p[f] + 0.5;
                let hi = q[f] - 0.5;
                if lo > hi {
                    continue;
                }
                for t in [lo, lo + 0.5, 0.5 * (lo + hi)] {
                    let mid = l.point(t);
                    let (Ok(v1), Ok(v2)) = (standard_vertices(p, &li, &mid, &l), standard_vertices(&mid, &l, q, &lj)) else {
                        continue;
                    };
                    let mut v = v1;
                    v.extend(v2.into_iter().skip(1));
                    if let Ok(path) = CausalPath::new(m, v) {
                        if best.as_ref().map_or(true, |b| path.l_g > b.l_g + 1e-12) {
                            best = Some(path);
                        }
                        break;
                    }
                }
            }
        }
    }
    best.ok_or_else(|| Error::NotConstructible("no standard path or two-leg chain connects the endpoints".into()))
}
