//! Layered longest-path dynamic program over a [`CausalGraph`].

use super::graph::{CausalGraph, IVec};
use crate::spacetime::{is_future_causal_form, quad, Matrix, MetricField, Vector};

pub const NO_PRED: u16 = u16::MAX;

/// Values of the nodes in one layer, handed to the visitor after the layer is filled.
pub struct LayerView<'a, const D: usize> {
    pub graph: &'a CausalGraph<D>,
    pub layer: usize,
    pub values: &'a [f64],
}

impl<'a, const D: usize> LayerView<'a, D> {
    pub fn coords(&self, i: usize) -> IVec {
        self.graph.coords(self.layer, i)
    }
}

#[derive(Clone, Debug)]
pub struct DpSolution<const D: usize> {
    pub graph: CausalGraph<D>,
    preds: Vec<u16>,
    /// Value at the snapped target, `-inf` when unreachable or absent.
    pub target_value: f64,
    pub reached: usize,
}

#[inline]
fn speed<const D: usize>(g: &Matrix<D>, d: &Vector<D>) -> f64 {
    (-quad(g, d)).max(0.0).sqrt()
}

/// Weight of the edge ending at `x` with increment `d`, or `None` if not admissible.
#[inline]
fn edge<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    x: &Vector<D>,
    lx: u32,
    d: &Vector<D>,
    margin: f64,
) -> Option<f64> {
    let mid = x - d * 0.5;
    let gm = m.metric(&mid);
    let n2 = quad(&m.background(&mid), d);
    if !is_future_causal_form(&gm, &m.orientation(&mid), d, n2, margin) {
        return None;
    }
    let xp = x - d;
    let lp = m.region_label(&xp);
    let lm = m.region_label(&mid);
    if lp == lx && lm == lx {
        Some(speed(&gm, d))
    } else {
        Some((speed(&m.metric(&xp), d) + 4.0 * speed(&gm, d) + speed(&m.metric(x), d)) / 6.0)
    }
}

impl<const D: usize> CausalGraph<D> {
    /// Runs the DP from the origin node. `visit` sees every layer once, in order.
    pub fn solve<M, V>(self, m: &M, mut visit: V) -> DpSolution<D>
    where
        M: MetricField<D> + ?Sized,
        V: FnMut(&LayerView<'_, D>),
    {
        let g = self;
        let ring = (g.sigma_max + 1) as usize;
        let mut vals: Vec<Vec<f64>> = vec![Vec::new(); ring];
        let mut preds = vec![NO_PRED; g.nodes];
        let target_local = g.target.and_then(|t| g.local(&t));
        let mut target_value = f64::NEG_INFINITY;
        let mut reached = 0usize;
        let mut buf: Vec<(f64, u16)> = Vec::new();
        for li in 0..g.layers.len() {
            let layer = &g.layers[li];
            buf.clear();
            buf.resize(layer.count, (f64::NEG_INFINITY, NO_PRED));
            if li == 0 {
                if let Some((_, i)) = g.local(&[0, 0, 0]) {
                    buf[i] = (0.0, NO_PRED);
                }
            } else {
                let gr = &g;
                let vr = &vals;
                g.exec.fill(&mut buf, 64, |i| {
                    let idx = gr.coords(li, i);
                    let x = gr.point(&idx);
                    let lx = m.region_label(&x);
                    let mut best = (f64::NEG_INFINITY, NO_PRED);
                    let mut best_global = usize::MAX;
                    for (k, s) in gr.stencil.iter().enumerate() {
                        let sp = li as i64 - gr.sigma[k];
                        if sp < 0 {
                            continue;
                        }
                        let prev = [idx[0] - s[0], idx[1] - s[1], idx[2] - s[2]];
                        let Some((pl, pi)) = gr.local(&prev) else { continue };
                        let pv = vr[pl % ring][pi];
                        if pv == f64::NEG_INFINITY {
                            continue;
                        }
                        let Some(w) = edge(m, &x, lx, &gr.delta(s), gr.margin) else { continue };
                        let cand = pv + w;
                        let glob = gr.layers[pl].start + pi;
                        if cand > best.0 || (cand == best.0 && glob < best_global) {
                            best = (cand, k as u16);
                            best_global = glob;
                        }
                    }
                    best
                });
            }
            let slot = &mut vals[li % ring];
            slot.clear();
            slot.extend(buf.iter().map(|b| b.0));
            for (i, b) in buf.iter().enumerate() {
                preds[layer.start + i] = b.1;
                if b.0 > f64::NEG_INFINITY {
                    reached += 1;
                }
            }
            if let Some((tl, ti)) = target_local {
                if tl == li {
                    target_value = slot[ti];
                }
            }
            visit(&LayerView {
                graph: &g,
                layer: li,
                values: &vals[li % ring],
            });
        }
        DpSolution {
            graph: g,
            preds,
            target_value,
            reached,
        }
    }
}

impl<const D: usize> DpSolution<D> {
    /// Node chain from the origin to `idx`, or `None` when `idx` was not reached.
    pub fn backtrack(&self, idx: &IVec) -> Option<Vec<IVec>> {
        let g = &self.graph;
        let mut cur = *idx;
        let mut out = vec![cur];
        loop {
            let (l, i) = g.local(&cur)?;
            let p = self.preds[g.layers[l].start + i];
            if p == NO_PRED {
                if cur == [0, 0, 0] {
                    break;
                }
                return None;
            }
            let s = g.stencil[p as usize];
            cur = [cur[0] - s[0], cur[1] - s[1], cur[2] - s[2]];
            out.push(cur);
        }
        out.reverse();
        Some(out)
    }

    pub fn points(&self, chain: &[IVec]) -> Vec<Vector<D>> {
        chain.iter().map(|c| self.graph.point(c)).collect()
    }
}
