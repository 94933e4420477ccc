//! Discrete time separation on layered causal grids.

pub mod constants;
pub mod dp;
pub mod graph;
pub mod oracle;
pub mod refine;

pub use constants::{fit_constants, DiagnosticsConstants, Fit, FitInputs};
pub use dp::{DpSolution, LayerView};
pub use graph::{stencil, CausalGraph, GraphOptions, IVec, RegionMode};
pub use oracle::{exact_endpoint, time_separation, ExactConstant, GridOracle, Separation, SeparationOracle};
pub use refine::{refine_maximizer, RefineOptions, RefineReport, RefineStatus};

use crate::error::Result;
use crate::spacetime::{quad, CausalPath, MetricField};
use std::io::Write;

/// Writes `t,x0..x{D-1},is_in_tube,sqrt_abs_g` with `t` the background arclength.
pub fn write_path_csv<const D: usize, M: MetricField<D> + ?Sized, W: Write>(m: &M, path: &CausalPath<D>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((0..D).map(|i| format!("x{i}")));
    header.push("is_in_tube".into());
    header.push("sqrt_abs_g".into());
    w.write_record(&header)?;
    let dirs = path.segment_directions();
    for (i, v) in path.vertices.iter().enumerate() {
        let d = if dirs.is_empty() { None } else { Some(dirs[i.min(dirs.len() - 1)]) };
        let sg = d.map_or(0.0, |d| quad(&m.metric(v), &d).abs().sqrt());
        let mut rec = vec![format!("{:.12}", path.param[i])];
        rec.extend((0..D).map(|k| format!("{:.12}", v[k])));
        rec.push(((m.region_label(v) > 0) as u8).to_string());
        rec.push(format!("{sg:.12}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
