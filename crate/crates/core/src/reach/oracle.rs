use super::dp::DpSolution;
use super::graph::{CausalGraph, GraphOptions, RegionMode};
use super::refine::{refine_maximizer, RefineOptions};
use crate::error::Result;
use crate::exec::Exec;
use crate::spacetime::{is_future_causal, quad, CausalPath, Matrix, MetricField, Vector, PATH_MARGIN};

#[derive(Clone, Debug)]
pub struct Separation<const D: usize> {
    /// Length of the returned path, 0 when unreachable.
    pub value: f64,
    pub reachable: bool,
    pub path: CausalPath<D>,
    /// Value of the discrete program before any post-processing.
    pub dp_value: f64,
    pub nodes: usize,
}

impl<const D: usize> Separation<D> {
    pub fn unreachable(nodes: usize) -> Self {
        Separation {
            value: 0.0,
            reachable: false,
            path: CausalPath::empty(),
            dp_value: f64::NEG_INFINITY,
            nodes,
        }
    }
}

pub trait SeparationOracle<const D: usize>: Sync {
    fn separation(&self, p: &Vector<D>, q: &Vector<D>) -> Result<Separation<D>>;
    fn name(&self) -> String;
}

/// Grid DP followed by optional endpoint repair and refinement.
pub fn time_separation<const D: usize, M: MetricField<D> + ?Sized>(
    m: &M,
    p: &Vector<D>,
    q: &Vector<D>,
    opts: &GraphOptions<D>,
) -> Result<(Separation<D>, DpSolution<D>)> {
    let g = CausalGraph::build(m, p, q, opts)?;
    let sol = g.solve(m, |_| {});
    let nodes = sol.graph.nodes;
    let target = match sol.graph.target {
        Some(t) if sol.target_value > f64::NEG_INFINITY => t,
        _ => return Ok((Separation::unreachable(nodes), sol)),
    };
    let chain = sol.backtrack(&target).expect("reached target has a chain");
    let path = CausalPath::new(m, sol.points(&chain))?;
    let sep = Separation {
        value: path.l_g,
        reachable: true,
        path,
        dp_value: sol.target_value,
        nodes,
    };
    Ok((sep, sol))
}

/// Replaces the snapped endpoint with the exact one, dropping trailing vertices while needed.
pub fn exact_endpoint<const D: usize, M: MetricField<D> + ?Sized>(m: &M, path: &CausalPath<D>, q: &Vector<D>) -> Option<CausalPath<D>> {
    let mut v = path.vertices.clone();
    if v.last() == Some(q) {
        return Some(path.clone());
    }
    while v.len() >= 2 {
        v.pop();
        let a = v.last().unwrap();
        if is_future_causal(m, &((a + q) * 0.5), &(q - a), PATH_MARGIN) {
            v.push(*q);
            return CausalPath::new(m, v).ok();
        }
    }
    None
}

pub struct GridOracle<'a, const D: usize, M: MetricField<D> + ?Sized> {
    pub metric: &'a M,
    pub spacing: f64,
    pub stencil_k: i64,
    pub c_bound: f64,
    pub refine: Option<RefineOptions<D>>,
    pub exact_endpoint: bool,
    pub exec: Exec,
}

impl<'a, const D: usize, M: MetricField<D> + ?Sized> GridOracle<'a, D, M> {
    pub fn new(metric: &'a M, spacing: f64, stencil_k: i64) -> Self {
        GridOracle {
            metric,
            spacing,
            stencil_k,
            c_bound: 0.5,
            refine: None,
            exact_endpoint: false,
            exec: Exec::Parallel,
        }
    }

    pub fn with_refine(mut self, r: RefineOptions<D>) -> Self {
        self.refine = Some(r);
        self
    }

    pub fn with_exact_endpoint(mut self) -> Self {
        self.exact_endpoint = true;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn options(&self) -> GraphOptions<D> {
        let mut o = GraphOptions::diamond(self.spacing, self.stencil_k).with_exec(self.exec);
        o.region = RegionMode::Diamond { c_bound: self.c_bound };
        o
    }
}

impl<'a, const D: usize, M: MetricField<D> + ?Sized> SeparationOracle<D> for GridOracle<'a, D, M> {
    fn separation(&self, p: &Vector<D>, q: &Vector<D>) -> Result<Separation<D>> {
        let m = self.metric;
        let (mut sep, _) = time_separation(m, p, q, &self.options())?;
        if !sep.reachable {
            return Ok(sep);
        }
        if self.exact_endpoint {
            if let Some(pa) = exact_endpoint(m, &sep.path, q) {
                sep.path = pa;
            }
        }
        if let Some(r) = &self.refine {
            let rep = refine_maximizer(m, &sep.path, r)?;
            if rep.path.l_g >= sep.path.l_g {
                sep.path = rep.path;
            }
        }
        sep.value = sep.path.l_g;
        Ok(sep)
    }

    fn name(&self) -> String {
        format!("grid[{}, dx={}, k={}]", m_name(self.metric), self.spacing, self.stencil_k)
    }
}

fn m_name<const D: usize, M: MetricField<D> + ?Sized>(m: &M) -> String {
    m.name()
}

/// Closed-form separation for a constant metric: `√(−g(q−p, q−p))` on the future cone, else 0.
#[derive(Clone, Debug)]
pub struct ExactConstant<const D: usize> {
    pub g: Matrix<D>,
    pub orient: Vector<D>,
}

impl<const D: usize> ExactConstant<D> {
    pub fn minkowski() -> Self {
        let mut g = Matrix::<D>::identity();
        g[(0, 0)] = -1.0;
        let mut o = Vector::<D>::zeros();
        o[0] = 1.0;
        ExactConstant { g, orient: o }
    }

    pub fn value(&self, v: &Vector<D>) -> f64 {
        let gv = self.g * v;
        if v.norm_squared() > 0.0 && gv.dot(v) <= PATH_MARGIN * v.norm_squared() && gv.dot(&self.orient) < 0.0 {
            (-quad(&self.g, v)).max(0.0).sqrt()
        } else {
            0.0
        }
    }
}

struct ConstMetric<const D: usize>(Matrix<D>, Vector<D>);

impl<const D: usize> MetricField<D> for ConstMetric<D> {
    fn metric(&self, _p: &Vector<D>) -> Matrix<D> {
        self.0
    }
    fn orientation(&self, _p: &Vector<D>) -> Vector<D> {
        self.1
    }
    fn temporal_covector(&self) -> [i64; D] {
        let mut t = [0; D];
        t[0] = 1;
        t
    }
    fn name(&self) -> String {
        "constant".into()
    }
}

impl<const D: usize> SeparationOracle<D> for ExactConstant<D> {
    fn separation(&self, p: &Vector<D>, q: &Vector<D>) -> Result<Separation<D>> {
        let d = q - p;
        let val = self.value(&d);
        let gv = self.g * d;
        if d.norm_squared() == 0.0 || gv.dot(&d) > PATH_MARGIN * d.norm_squared() || gv.dot(&self.orient) >= 0.0 {
            return Ok(Separation::unreachable(0));
        }
        let path = CausalPath::new(&ConstMetric(self.g, self.orient), vec![*p, *q])?;
        Ok(Separation {
            value: val,
            reachable: true,
            path,
            dp_value: val,
            nodes: 0,
        })
    }

    fn name(&self) -> String {
        "exact".into()
    }
}
