//! Data behind each figure, written as CSV tables plus a JSON sidecar.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cache::OracleCache;
use super::grid::{scan, Axis, AxisName, Classifier, GridSpec, ParamPoint, RegionGrid, DEFAULT_RESOLUTION};
use super::output::{write_json, Cell, Table};
use super::trace::{trace_boundary, BoundaryCurve, DEFAULT_TRACE_WIDTH};
use crate::error::{Error, Result};
use crate::ness::{
    boundary_lambda_from, boundary_tongue_cmin, boundary_tongue_edge, bulk_coupling_window, bulk_lambda_from,
    bulk_pocket_cmin, bulk_pocket_edge, dephasing_coupling_window, dephasing_gamma_c, gamma_min_boundary,
    ness_expectations, pocket_boundary, tongue_boundary, RegionBoundary,
};
use crate::oracle::DEFAULT_N_MAX;
use crate::params::{DrivingParams, SquareCoords};
use crate::thermal::{critical_beta, thermal_expectations, zero_temperature_expectations};
use crate::twoqubit::DEFAULT_ENTANGLEMENT_EPS;

/// Closed-form region edge `d(c, Γ)`.
type EdgeFn = fn(f64, f64) -> Result<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl FigureId {
    pub const ALL: [FigureId; 10] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
        FigureId::Fig10,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "bulk <z>-<zz> region at Gamma=1.088 with bulk and boundary entangled subregions",
            FigureId::Fig2 => "thermal lambda_min versus temperature at phi=0",
            FigureId::Fig3 => "thermal iso-temperature and iso-phi curves in the <z>-<E> plane",
            FigureId::Fig4 => "boundary-pair entanglement at Gamma=2 in the c-d and u-mu_bar planes",
            FigureId::Fig5 => "boundary-pair entangled regions stacked over Gamma",
            FigureId::Fig6 => "bulk-pair entanglement at Gamma=1 in the c-d and u-mu_bar planes",
            FigureId::Fig7 => "bulk-pair pockets stacked over the coupling window",
            FigureId::Fig8 => "bulk <z>-<zz> regions at Gamma=1 and Gamma=1.5",
            FigureId::Fig9 => "central-pair coupling window versus gamma(n-2)",
            FigureId::Fig10 => "central-pair c_min versus dephasing from the oracle",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.as_str() == key)
            .ok_or_else(|| Error::InvalidGrid(format!("unknown figure {s:?}; expected fig1..fig10")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOptions {
    /// Points per axis of closed-form grids.
    pub resolution: usize,
    /// Points per axis of each slice in the stacked figures.
    pub slice_resolution: usize,
    /// Number of coupling slices in the stacked figures.
    pub ladder: usize,
    /// Lines bisected when comparing with analytic edges.
    pub trace_lines: usize,
    /// Coarse samples per line before bisection, closed-form classifiers.
    pub trace_samples: usize,
    /// Coarse samples per line for the oracle classifier.
    pub oracle_samples: usize,
    /// Dephasing rates sampled for the oracle `c_min` curve.
    pub oracle_rates: usize,
    pub trace_width: f64,
    pub oracle_width: f64,
    pub eps: f64,
    pub n_max: usize,
    pub oracle_sizes: Vec<usize>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            resolution: DEFAULT_RESOLUTION,
            slice_resolution: 101,
            ladder: 21,
            trace_lines: 41,
            trace_samples: 101,
            oracle_samples: 21,
            oracle_rates: 13,
            trace_width: DEFAULT_TRACE_WIDTH,
            oracle_width: 1e-4,
            eps: DEFAULT_ENTANGLEMENT_EPS,
            n_max: DEFAULT_N_MAX,
            oracle_sizes: vec![6, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOutput {
    pub figure: FigureId,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Named scalar diagnostics such as the largest deviation of bisected
    /// boundary points from the closed-form curve.
    pub checks: BTreeMap<String, f64>,
}

struct Builder<'a> {
    dir: &'a Path,
    out: FigureOutput,
    parameters: serde_json::Map<String, serde_json::Value>,
}

impl<'a> Builder<'a> {
    fn new(id: FigureId, dir: &'a Path) -> Self {
        Builder {
            dir,
            out: FigureOutput {
                figure: id,
                files: Vec::new(),
                warnings: Vec::new(),
                checks: BTreeMap::new(),
            },
            parameters: serde_json::Map::new(),
        }
    }

    fn name(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}_{suffix}.csv", self.out.figure))
    }

    fn table(&mut self, suffix: &str, t: &Table) -> Result<()> {
        let p = self.name(suffix);
        t.write_csv(&p)?;
        self.out.files.push(p);
        Ok(())
    }

    fn grid(&mut self, suffix: &str, g: &RegionGrid) -> Result<()> {
        let files = g.write(&self.name(suffix))?;
        self.out.files.extend(files);
        Ok(())
    }

    fn check(&mut self, name: &str, v: f64) {
        self.out.checks.insert(name.into(), v);
    }

    fn param(&mut self, name: &str, v: impl Serialize) {
        self.parameters.insert(name.into(), json!(v));
    }

    fn finish(mut self, opts: &FigureOptions) -> Result<FigureOutput> {
        let side = self.dir.join(format!("{}.json", self.out.figure));
        let files: Vec<String> = self
            .out
            .files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect();
        write_json(
            &side,
            &json!({
                "figure": self.out.figure,
                "description": self.out.figure.description(),
                "code_version": env!("CARGO_PKG_VERSION"),
                "parameters": self.parameters,
                "options": opts,
                "files": files,
                "warnings": self.out.warnings,
                "checks": self.out.checks,
            }),
        )?;
        self.out.files.push(side);
        Ok(self.out)
    }
}

/// `k` log-spaced values from `lo` to `hi`, endpoints included.
pub fn log_ladder(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == k => hi,
            _ => (a + (b - a) * i as f64 / (k - 1) as f64).exp(),
        })
        .collect()
}

/// Largest `|u| = Γt` reachable at coupling `gamma`.
pub fn u_max(gamma: f64) -> f64 {
    gamma * gamma / (1.0 + gamma * gamma)
}

/// Lowest bulk `⟨zz⟩` reachable at `⟨z⟩ = z` for equal couplings.
pub fn bulk_zz_floor(gamma: f64, z: f64) -> f64 {
    let tmax = gamma / (1.0 + gamma * gamma) * (1.0 - z.abs());
    z * z - tmax * tmax
}

fn square_grid(gamma: f64, classifier: Classifier, res: usize, opts: &FigureOptions) -> Result<GridSpec> {
    let mut g = GridSpec::new(
        vec![
            Axis::new(AxisName::C, -1.0, 1.0, res)?,
            Axis::new(AxisName::D, -1.0, 1.0, res)?,
        ],
        ParamPoint::default().with(AxisName::Gamma, gamma),
        classifier,
    );
    g.eps = opts.eps;
    Ok(g)
}

fn u_grid(gamma: f64, classifier: Classifier, res: usize, opts: &FigureOptions) -> Result<GridSpec> {
    let um = u_max(gamma);
    let mut g = GridSpec::new(
        vec![
            Axis::new(AxisName::U, -um, um, res)?,
            Axis::new(AxisName::MuBar, -1.0, 1.0, res)?,
        ],
        ParamPoint::default().with(AxisName::Gamma, gamma),
        classifier,
    );
    g.eps = opts.eps;
    Ok(g)
}

fn edge_table(regions: &[RegionBoundary]) -> Table {
    let mut t = Table::new(["gamma", "branch", "c", "d"]);
    for r in regions {
        for p in &r.curve {
            t.push(vec![r.gamma.into(), "upper-right".into(), p.c.into(), p.d.into()]);
        }
        for p in &r.curve {
            t.push(vec![r.gamma.into(), "lower-left".into(), (-p.c).into(), (-p.d).into()]);
        }
    }
    t
}

/// Bisects lines of constant `c` inside `(c_min, 1)` and compares every
/// crossing with the analytic edge. Returns the table and the largest
/// deviation.
fn traced_edges(
    gamma: f64,
    classifier: Classifier,
    cmin: f64,
    edge: fn(f64, f64) -> Result<f64>,
    opts: &FigureOptions,
) -> Result<(Table, f64)> {
    let lines = opts.trace_lines.max(2);
    let delta = (1.0 - cmin) / (2 * lines) as f64;
    let mut g = GridSpec::new(
        vec![
            Axis::new(AxisName::C, cmin + delta, 1.0 - delta, lines)?,
            Axis::new(AxisName::D, -1.0, 1.0, opts.trace_samples.max(2))?,
        ],
        ParamPoint::default().with(AxisName::Gamma, gamma),
        classifier,
    );
    g.eps = opts.eps;
    let curve = trace_boundary(&g, AxisName::D, opts.trace_width, None)?;
    let mut t = Table::new(["c", "d", "est_error", "lambda", "d_closed_form", "deviation"]);
    let mut worst: f64 = 0.0;
    for p in &curve.points {
        let c = p.free.expect("free axis");
        let exact = edge(c, gamma)?;
        let dev = (p.value - exact).abs();
        worst = worst.max(dev);
        t.push(vec![
            c.into(),
            p.value.into(),
            p.est_error.into(),
            p.lambda.into(),
            exact.into(),
            dev.into(),
        ]);
    }
    Ok((t, worst))
}

/// Writes the data of figure `id` into `dir`.
pub fn figure_data(
    id: FigureId,
    dir: &Path,
    opts: &FigureOptions,
    cache: Option<&OracleCache>,
) -> Result<FigureOutput> {
    std::fs::create_dir_all(dir)?;
    let mut b = Builder::new(id, dir);
    match id {
        FigureId::Fig1 => zz_plane(&mut b, &[1.088], true, opts)?,
        FigureId::Fig2 => fig2(&mut b, opts)?,
        FigureId::Fig3 => fig3(&mut b, opts)?,
        FigureId::Fig4 => plane_figure(&mut b, 2.0, Classifier::BoundaryPair, opts)?,
        FigureId::Fig5 => {
            let ladder = log_ladder(gamma_min_boundary(), 10.0, opts.ladder);
            stacked(&mut b, &ladder, Classifier::BoundaryPair, opts)?
        }
        FigureId::Fig6 => plane_figure(&mut b, 1.0, Classifier::BulkPair, opts)?,
        FigureId::Fig7 => {
            let (lo, hi) = bulk_coupling_window();
            stacked(&mut b, &log_ladder(lo, hi, opts.ladder), Classifier::BulkPair, opts)?
        }
        FigureId::Fig8 => zz_plane(&mut b, &[1.0, 1.5], false, opts)?,
        FigureId::Fig9 => fig9(&mut b, opts)?,
        FigureId::Fig10 => fig10(&mut b, opts, cache)?,
    }
    b.finish(opts)
}

fn zz_plane(b: &mut Builder, gammas: &[f64], with_boundary: bool, opts: &FigureOptions) -> Result<()> {
    let res = opts.resolution.max(2);
    let axis = Axis::new(AxisName::C, -1.0, 1.0, res)?;
    b.param("gamma", gammas);
    for &gamma in gammas {
        let mut cols = vec!["c", "d", "z", "zz", "lambda_bulk", "entangled_bulk"];
        if with_boundary {
            cols.extend(["lambda_boundary", "entangled_boundary"]);
        }
        let mut t = Table::new(cols);
        let mut entangled = 0usize;
        for c in axis.values() {
            for d in axis.values() {
                let p = DrivingParams::from_square_symmetric(gamma, SquareCoords { c, d })?;
                let e = ness_expectations(&p)?;
                let lb = bulk_lambda_from(&e);
                let mut row: Vec<Cell> = vec![
                    c.into(),
                    d.into(),
                    e.a.into(),
                    (e.a * e.a - e.t * e.t).into(),
                    lb.into(),
                    (lb < -opts.eps).into(),
                ];
                entangled += (lb < -opts.eps) as usize;
                if with_boundary {
                    let l1 = boundary_lambda_from(&e);
                    row.extend([l1.into(), (l1 < -opts.eps).into()]);
                }
                t.push(row);
            }
        }
        let tag = format!("gamma{gamma}");
        b.table(&format!("{tag}_points"), &t)?;
        b.check(&format!("{tag}_bulk_entangled_nodes"), entangled as f64);

        let mut env = Table::new(["z", "zz_equilibrium", "zz_floor"]);
        for z in axis.values() {
            env.push(vec![z.into(), (z * z).into(), bulk_zz_floor(gamma, z).into()]);
        }
        b.table(&format!("{tag}_envelope"), &env)?;
    }
    Ok(())
}

fn fig2(b: &mut Builder, opts: &FigureOptions) -> Result<()> {
    let mut g = GridSpec::new(
        vec![Axis::new(AxisName::Temperature, 0.02, 4.0, opts.resolution.max(2))?],
        ParamPoint::default().with(AxisName::Phi, 0.0),
        Classifier::Thermal,
    );
    g.eps = opts.eps;
    b.param("phi", 0.0);
    b.grid("lambda", &scan(&g, None)?)?;
    let curve = trace_boundary(&g, AxisName::Temperature, opts.trace_width, None)?;
    let tc = curve.points[0].value;
    let exact = 1.0 / critical_beta(0.0)?;
    let mut t = Table::new(["temperature", "est_error", "lambda", "temperature_closed_form"]);
    for p in &curve.points {
        t.push(vec![p.value.into(), p.est_error.into(), p.lambda.into(), exact.into()]);
    }
    b.table("crossing", &t)?;
    b.check("critical_temperature", tc);
    b.check("critical_temperature_closed_form", exact);
    b.check("crossings", curve.points.len() as f64);
    b.check("max_boundary_deviation", (tc - exact).abs());
    Ok(())
}

fn fig3(b: &mut Builder, opts: &FigureOptions) -> Result<()> {
    let res = opts.resolution.max(2);
    let temps = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, f64::INFINITY];
    let phis = [-2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0];
    b.param(
        "temperatures",
        temps.map(|t| if t.is_finite() { json!(t) } else { json!("inf") }),
    );
    b.param("phis", phis);
    let frac = |i: usize| 2.0 * i as f64 / (res - 1) as f64 - 1.0;

    let mut iso_t = Table::new(["temperature", "beta", "phi", "z", "energy"]);
    for &temp in &temps {
        for i in 0..res {
            let (beta, phi, z, xx) = if temp == 0.0 {
                let h = 2.5 * frac(i);
                let e = zero_temperature_expectations(h);
                (f64::INFINITY, None, e.z, e.xx)
            } else if temp.is_infinite() {
                let phi = 10.0 * frac(i);
                (0.0, Some(phi), phi.tanh(), 0.0)
            } else {
                let beta = 1.0 / temp;
                let phi = (2.0 + 8.0 * temp) * frac(i) * beta;
                let e = thermal_expectations(&crate::params::GrandCanonicalParams::new(beta, phi)?)?;
                (beta, Some(phi), e.z, e.xx)
            };
            iso_t.push(vec![temp.into(), beta.into(), phi.into(), z.into(), (2.0 * xx).into()]);
        }
    }
    b.table("iso_temperature", &iso_t)?;

    let mut iso_phi = Table::new(["phi", "beta", "temperature", "z", "energy"]);
    for &phi in &phis {
        for i in 0..res {
            let beta = 20.0 * i as f64 / (res - 1) as f64;
            let e = thermal_expectations(&crate::params::GrandCanonicalParams::new(beta, phi)?)?;
            let temp = if beta > 0.0 { 1.0 / beta } else { f64::INFINITY };
            iso_phi.push(vec![
                phi.into(),
                beta.into(),
                temp.into(),
                e.z.into(),
                e.energy().into(),
            ]);
        }
    }
    b.table("iso_phi", &iso_phi)?;

    // Every NESS has zero energy density.
    let mut ness = Table::new(["z", "energy"]);
    for i in 0..res {
        ness.push(vec![frac(i).into(), 0.0.into()]);
    }
    b.table("ness_line", &ness)
}

fn plane_figure(b: &mut Builder, gamma: f64, classifier: Classifier, opts: &FigureOptions) -> Result<()> {
    let res = opts.resolution.max(2);
    b.param("gamma", gamma);
    b.param("classifier", classifier);
    let cd = scan(&square_grid(gamma, classifier, res, opts)?, None)?;
    b.check("mask_point_symmetric", cd.is_point_symmetric() as u8 as f64);
    b.check("entangled_nodes", cd.entangled_count() as f64);
    b.grid("cd", &cd)?;
    let um = scan(&u_grid(gamma, classifier, res, opts)?, None)?;
    b.check("u_mask_point_symmetric", um.is_point_symmetric() as u8 as f64);
    b.grid("u_mubar", &um)?;

    let u = u_max(gamma);
    let mut allowed = Table::new(["u", "mu_bar"]);
    for (x, y) in [(0.0, -1.0), (u, 0.0), (0.0, 1.0), (-u, 0.0), (0.0, -1.0)] {
        allowed.push(vec![x.into(), y.into()]);
    }
    b.table("u_allowed", &allowed)?;

    let (region, cmin, edge): (RegionBoundary, f64, EdgeFn) = match classifier {
        Classifier::BoundaryPair => (
            tongue_boundary(gamma, res)?,
            boundary_tongue_cmin(gamma),
            boundary_tongue_edge,
        ),
        _ => (pocket_boundary(gamma, res)?, bulk_pocket_cmin(gamma), bulk_pocket_edge),
    };
    b.check("c_min", cmin);
    b.table("edges", &edge_table(std::slice::from_ref(&region)))?;
    if cmin < 1.0 {
        let (t, worst) = traced_edges(gamma, classifier, cmin, edge, opts)?;
        b.table("traced", &t)?;
        b.check("max_boundary_deviation", worst);
    } else {
        b.out.warnings.push(format!("no entangled region at gamma={gamma}"));
    }
    Ok(())
}

fn stacked(b: &mut Builder, ladder: &[f64], classifier: Classifier, opts: &FigureOptions) -> Result<()> {
    let res = opts.slice_resolution.max(2);
    b.param("gamma_ladder", ladder);
    b.param("classifier", classifier);
    let mut t = Table::new(["gamma", "c", "d", "lambda_min", "entangled", "status"]);
    let mut regions = Vec::new();
    let mut symmetric = true;
    for &gamma in ladder {
        let g = scan(&square_grid(gamma, classifier, res, opts)?, None)?;
        symmetric &= g.is_point_symmetric();
        for n in &g.nodes {
            t.push(vec![
                gamma.into(),
                n.coords[0].into(),
                n.coords[1].into(),
                n.lambda.into(),
                n.entangled.into(),
                n.status.as_str().into(),
            ]);
        }
        regions.push(match classifier {
            Classifier::BoundaryPair => tongue_boundary(gamma, res)?,
            _ => pocket_boundary(gamma, res)?,
        });
    }
    b.check("mask_point_symmetric", symmetric as u8 as f64);
    b.table("slices", &t)?;
    b.table("edges", &edge_table(&regions))
}

fn fig9(b: &mut Builder, opts: &FigureOptions) -> Result<()> {
    let res = opts.resolution.max(2);
    let xmax = std::f64::consts::SQRT_2 - 1.0;
    // With n = 3 the scaled rate γ(n−2) equals γ.
    let mut window = Table::new(["gamma_dephasing_scaled", "gamma_minus", "gamma_plus"]);
    for i in 0..res {
        let x = xmax * i as f64 / (res - 1) as f64;
        if let Ok((lo, hi)) = dephasing_coupling_window(x, 3) {
            window.push(vec![x.into(), lo.into(), hi.into()]);
        }
    }
    b.table("window", &window)?;

    let mut g = GridSpec::new(
        vec![
            Axis::new(AxisName::Gamma, 0.25, 3.0, res)?,
            Axis::new(AxisName::GammaDephasingScaled, 0.0, 0.5, res)?,
        ],
        ParamPoint::default(),
        Classifier::DephasingWindow,
    )
    .with_n(3);
    g.eps = opts.eps;
    b.grid("mask", &scan(&g, None)?)?;

    let lines = opts.trace_lines.max(2);
    let delta = xmax / (2 * lines) as f64;
    let mut tg = GridSpec::new(
        vec![
            Axis::new(AxisName::GammaDephasingScaled, delta, xmax - delta, lines)?,
            Axis::new(AxisName::Gamma, 0.25, 3.0, opts.trace_samples.max(2))?,
        ],
        ParamPoint::default(),
        Classifier::DephasingWindow,
    )
    .with_n(3);
    tg.eps = opts.eps;
    let curve = trace_boundary(&tg, AxisName::Gamma, opts.trace_width, None)?;
    let mut t = Table::new([
        "gamma_dephasing_scaled",
        "gamma",
        "est_error",
        "gamma_closed_form",
        "deviation",
    ]);
    let mut worst: f64 = 0.0;
    for p in &curve.points {
        let x = p.free.expect("free axis");
        let (lo, hi) = dephasing_coupling_window(x, 3)?;
        let exact = if (p.value - lo).abs() < (p.value - hi).abs() {
            lo
        } else {
            hi
        };
        let dev = (p.value - exact).abs();
        worst = worst.max(dev);
        t.push(vec![
            x.into(),
            p.value.into(),
            p.est_error.into(),
            exact.into(),
            dev.into(),
        ]);
    }
    b.table("traced", &t)?;
    b.check("max_boundary_deviation", worst);
    Ok(())
}

fn oracle_grid(n: usize, axes: Vec<Axis>, fixed: ParamPoint, opts: &FigureOptions) -> GridSpec {
    let mut g = GridSpec::new(axes, fixed.with(AxisName::Gamma, 1.0), Classifier::CentralPairOracle).with_n(n);
    g.eps = opts.eps;
    g.n_max = opts.n_max;
    g
}

/// Smallest `c` on the edge `d = 1` at which the central pair is entangled,
/// or `None` when it is not entangled anywhere on that edge.
fn oracle_cmin(curve: &BoundaryCurve, gamma: f64) -> Option<f64> {
    curve.on_line(Some(gamma)).map(|p| p.value).min_by(f64::total_cmp)
}

fn fig10(b: &mut Builder, opts: &FigureOptions, cache: Option<&OracleCache>) -> Result<()> {
    let sizes: Vec<usize> = opts.oracle_sizes.iter().copied().filter(|&n| n <= opts.n_max).collect();
    for &n in opts.oracle_sizes.iter().filter(|&&n| n > opts.n_max) {
        b.out.warnings.push(format!(
            "n={n} exceeds the oracle limit n_max={}; produced n in {sizes:?} only",
            opts.n_max
        ));
    }
    b.param("gamma", 1.0);
    b.param("sizes", &sizes);
    let width = opts.oracle_width;
    let samples = opts.oracle_samples.max(2);

    for &n in &sizes {
        let gc = dephasing_gamma_c(1.0, n)?;
        let rates = Axis::new(AxisName::GammaDephasing, 0.0, 1.2 * gc, opts.oracle_rates.max(2))?;
        let g = oracle_grid(
            n,
            vec![rates, Axis::new(AxisName::C, 0.0, 1.0, samples)?],
            ParamPoint::default().with(AxisName::D, 1.0),
            opts,
        );
        let curve = match trace_boundary(&g, AxisName::C, width, cache) {
            Ok(c) => c,
            Err(Error::NoSignChange) => BoundaryCurve {
                free_axis: Some(AxisName::GammaDephasing),
                scan_axis: AxisName::C,
                points: Vec::new(),
            },
            Err(e) => return Err(e),
        };
        let mut t = Table::new(["gamma_dephasing", "c_min", "one_minus_c_min", "status"]);
        for gamma in rates.values() {
            match oracle_cmin(&curve, gamma) {
                Some(c) => t.push(vec![gamma.into(), c.into(), (1.0 - c).into(), "entangled".into()]),
                None => t.push(vec![gamma.into(), Cell::Empty, Cell::Empty, "no-region".into()]),
            }
        }
        b.table(&format!("cmin_n{n}"), &t)?;

        // Rate at which the corner c = d = 1 stops being entangled.
        let corner = oracle_grid(
            n,
            vec![Axis::new(AxisName::GammaDephasing, 0.0, 0.3, 7)?],
            ParamPoint::default().with(AxisName::C, 1.0).with(AxisName::D, 1.0),
            opts,
        );
        let gcurve = trace_boundary(&corner, AxisName::GammaDephasing, width / 10.0, cache)?;
        let found = gcurve.points[0].value;
        b.check(&format!("gamma_c_n{n}"), found);
        b.check(&format!("gamma_c_n{n}_closed_form"), gc);

        // Extent of the entangled quadrant region at γ = 0.04.
        let probe = oracle_grid(
            n,
            vec![Axis::new(AxisName::C, 0.0, 1.0, samples)?],
            ParamPoint::default()
                .with(AxisName::D, 1.0)
                .with(AxisName::GammaDephasing, 0.04),
            opts,
        );
        match trace_boundary(&probe, AxisName::C, width, cache) {
            Ok(pc) => {
                let cmin = pc.points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
                b.check(&format!("c_min_n{n}_gamma0.04"), cmin);
                let lines = opts.trace_lines.clamp(2, 11);
                let delta = (1.0 - cmin) / (2 * lines) as f64;
                let rg = oracle_grid(
                    n,
                    vec![
                        Axis::new(AxisName::C, cmin + delta, 1.0 - delta, lines)?,
                        Axis::new(AxisName::D, 0.0, 1.0, samples)?,
                    ],
                    ParamPoint::default().with(AxisName::GammaDephasing, 0.04),
                    opts,
                );
                let region = trace_boundary(&rg, AxisName::D, width, cache)?;
                let mut t = Table::new(["c", "d", "est_error"]);
                t.push(vec![cmin.into(), 1.0.into(), Cell::Empty]);
                for p in &region.points {
                    t.push(vec![p.free.into(), p.value.into(), p.est_error.into()]);
                }
                b.table(&format!("region_n{n}_gamma0.04"), &t)?;
            }
            Err(Error::NoSignChange) => b.out.warnings.push(format!("n={n}: no entangled region at gamma=0.04")),
            Err(e) => return Err(e),
        }
    }
    let mut t = Table::new(["c", "d"]);
    for p in pocket_boundary(1.0, opts.resolution.max(2))?.curve {
        t.push(vec![p.c.into(), p.d.into()]);
    }
    b.table("region_gamma0", &t)
}
