use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::OracleCache;
use super::grid::{AxisName, GridSpec, NodeOutcome};
use crate::error::{Error, Result};
use crate::numerics::bisect_sign;

/// Default bracket width for boundary bisection.
pub const DEFAULT_TRACE_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Value on the free axis, if the grid has one.
    pub free: Option<f64>,
    /// Midpoint of the final bracket on the scan axis.
    pub value: f64,
    /// Width of the final bracket.
    pub est_error: f64,
    /// Classifier value re-evaluated at `value`.
    pub lambda: f64,
}

/// Points where the classifier changes sign, one bisection per crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub free_axis: Option<AxisName>,
    pub scan_axis: AxisName,
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryCurve {
    /// Crossings on the line at free value `f`.
    pub fn on_line(&self, f: Option<f64>) -> impl Iterator<Item = &BoundaryPoint> {
        self.points.iter().filter(move |p| p.free == f)
    }
}

/// Bisects every sign change of the classifier along `scan`.
///
/// The grid has the scan axis and at most one other, the free axis; each
/// of its values defines one line. Lines are first sampled at the scan
/// axis's resolution, then every bracketed sign change is narrowed to
/// `width`. Nodes outside the physical domain split a line into segments.
pub fn trace_boundary(g: &GridSpec, scan: AxisName, width: f64, cache: Option<&OracleCache>) -> Result<BoundaryCurve> {
    g.validate()?;
    let scan_idx = g
        .axes
        .iter()
        .position(|a| a.name == scan)
        .ok_or_else(|| Error::InvalidGrid(format!("scan axis {scan} is not part of the grid")))?;
    let others: Vec<_> = g.axes.iter().enumerate().filter(|(i, _)| *i != scan_idx).collect();
    if others.len() > 1 {
        return Err(Error::InvalidGrid(
            "tracing needs at most one axis besides the scan axis".into(),
        ));
    }
    let free = others.first().map(|(_, a)| **a);
    let scan_axis = g.axes[scan_idx];
    let lines: Vec<Option<f64>> = match free {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };

    let per_line: Vec<Result<Vec<BoundaryPoint>>> = lines
        .par_iter()
        .map(|&fv| {
            let base = match (free, fv) {
                (Some(a), Some(v)) => g.fixed.with(a.name, v),
                _ => g.fixed,
            };
            let eval = |x: f64| -> Result<Option<f64>> {
                match g.evaluate(&base.with(scan, x), cache) {
                    NodeOutcome::Value(v) => Ok(Some(v)),
                    NodeOutcome::Outside => Ok(None),
                    NodeOutcome::Failed(m) => Err(Error::NoConvergence(m)),
                }
            };
            let xs = scan_axis.values();
            let ys = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
            let mut out = Vec::new();
            for i in 0..xs.len() - 1 {
                let (Some(a), Some(b)) = (ys[i], ys[i + 1]) else {
                    continue;
                };
                if (a < 0.0) == (b < 0.0) {
                    continue;
                }
                let f = |x: f64| eval(x)?.ok_or(Error::NoSignChange);
                let (lo, hi) = bisect_sign(f, xs[i], xs[i + 1], width)?;
                let mid = 0.5 * (lo + hi);
                out.push(BoundaryPoint {
                    free: fv,
                    value: mid,
                    est_error: hi - lo,
                    lambda: eval(mid)?.unwrap_or(f64::NAN),
                });
            }
            Ok(out)
        })
        .collect();

    let mut points = Vec::new();
    for r in per_line {
        points.extend(r?);
    }
    if points.is_empty() {
        return Err(Error::NoSignChange);
    }
    Ok(BoundaryCurve {
        free_axis: free.map(|a| a.name),
        scan_axis: scan,
        points,
    })
}
