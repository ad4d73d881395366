use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::OracleCache;
use crate::error::{Error, Result};
use crate::ness::{boundary_lambda_min, bulk_lambda_min};
use crate::oracle::{central_pair, partial_trace_pair, steady_state, Liouvillian, Model, DEFAULT_N_MAX};
use crate::params::{ChainSpec, DephasingSpec, DrivingParams, GrandCanonicalParams, SquareCoords};
use crate::thermal::gc_lambda_min;
use crate::twoqubit::DEFAULT_ENTANGLEMENT_EPS;

const SQUARE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    C,
    D,
    Gamma,
    GammaDephasing,
    /// `γ(n − 2)`, the combination the central-pair window depends on.
    GammaDephasingScaled,
    MuBar,
    /// `u = Γt`, the half magnetization difference across the chain.
    U,
    Beta,
    Phi,
    Temperature,
}

impl AxisName {
    pub const ALL: [AxisName; 10] = [
        AxisName::C,
        AxisName::D,
        AxisName::Gamma,
        AxisName::GammaDephasing,
        AxisName::GammaDephasingScaled,
        AxisName::MuBar,
        AxisName::U,
        AxisName::Beta,
        AxisName::Phi,
        AxisName::Temperature,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::C => "c",
            AxisName::D => "d",
            AxisName::Gamma => "gamma",
            AxisName::GammaDephasing => "gamma_dephasing",
            AxisName::GammaDephasingScaled => "gamma_dephasing_scaled",
            AxisName::MuBar => "mu_bar",
            AxisName::U => "u",
            AxisName::Beta => "beta",
            AxisName::Phi => "phi",
            AxisName::Temperature => "temperature",
        }
    }

    /// Closed interval of admissible values.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            AxisName::C | AxisName::D | AxisName::MuBar => (-1.0, 1.0),
            AxisName::U | AxisName::Phi => (f64::NEG_INFINITY, f64::INFINITY),
            AxisName::Gamma
            | AxisName::GammaDephasing
            | AxisName::GammaDephasingScaled
            | AxisName::Beta
            | AxisName::Temperature => (0.0, f64::INFINITY),
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "g" | "coupling" => "gamma",
            "dephasing" => "gamma_dephasing",
            "t" => "temperature",
            other => other,
        };
        AxisName::ALL
            .into_iter()
            .find(|a| a.as_str() == alias)
            .ok_or_else(|| Error::InvalidGrid(format!("unknown axis {s:?}")))
    }
}

/// A sampled parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: AxisName, lo: f64, hi: f64, points: usize) -> Result<Self> {
        let a = Axis { name, lo, hi, points };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<()> {
        let (dlo, dhi) = self.name.domain();
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "axis {} needs at least 2 points",
                self.name
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidGrid(format!(
                "axis {} range [{}, {}] is empty or not finite",
                self.name, self.lo, self.hi
            )));
        }
        if self.lo < dlo - SQUARE_TOL || self.hi > dhi + SQUARE_TOL {
            return Err(Error::InvalidGrid(format!(
                "axis {} range [{}, {}] leaves its domain [{dlo}, {dhi}]",
                self.name, self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// The `i`-th sample. Computed from the midpoint so that ranges
    /// symmetric about zero give exactly negated values.
    pub fn value(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo);
        let m = (self.points - 1) as f64;
        mid + half * ((2 * i) as f64 - m) / m
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// Parses `name=lo:hi:points`, e.g. `c=-1:1:201`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("axis spec {s:?} is not name=lo:hi:points"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let points = parts[2].trim().parse().map_err(|_| bad())?;
        Axis::new(name.parse()?, lo, hi, points)
    }
}

/// Parameter values, fixed or taken from grid axes. Unset values fall back
/// to the defaults documented per field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Equal bath coupling; required by every NESS classifier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Defaults to 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_dephasing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_dephasing_scaled: Option<f64>,
    /// Defaults to 0 when `u` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Defaults to 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl ParamPoint {
    pub fn get(&self, name: AxisName) -> Option<f64> {
        match name {
            AxisName::C => self.c,
            AxisName::D => self.d,
            AxisName::Gamma => self.gamma,
            AxisName::GammaDephasing => self.gamma_dephasing,
            AxisName::GammaDephasingScaled => self.gamma_dephasing_scaled,
            AxisName::MuBar => self.mu_bar,
            AxisName::U => self.u,
            AxisName::Beta => self.beta,
            AxisName::Phi => self.phi,
            AxisName::Temperature => self.temperature,
        }
    }

    pub fn set(&mut self, name: AxisName, v: f64) {
        let slot = match name {
            AxisName::C => &mut self.c,
            AxisName::D => &mut self.d,
            AxisName::Gamma => &mut self.gamma,
            AxisName::GammaDephasing => &mut self.gamma_dephasing,
            AxisName::GammaDephasingScaled => &mut self.gamma_dephasing_scaled,
            AxisName::MuBar => &mut self.mu_bar,
            AxisName::U => &mut self.u,
            AxisName::Beta => &mut self.beta,
            AxisName::Phi => &mut self.phi,
            AxisName::Temperature => &mut self.temperature,
        };
        *slot = Some(v);
    }

    pub fn with(mut self, name: AxisName, v: f64) -> Self {
        self.set(name, v);
        self
    }

    /// Driving parameters with equal couplings, or `None` when the point lies
    /// outside the physical domain.
    pub fn driving_params(&self) -> Result<Option<DrivingParams>> {
        let gamma = self
            .gamma
            .ok_or_else(|| Error::InvalidGrid("the coupling gamma is not set".into()))?;
        if let (Some(c), Some(d)) = (self.c, self.d) {
            if c.abs() > 1.0 + SQUARE_TOL || d.abs() > 1.0 + SQUARE_TOL {
                return Ok(None);
            }
            return DrivingParams::from_square_symmetric(gamma, SquareCoords { c, d }).map(Some);
        }
        if let Some(u) = self.u {
            if !(gamma > 0.0) {
                return Err(Error::InvalidGrid("the u coordinate needs gamma > 0".into()));
            }
            let mu_bar = self.mu_bar.unwrap_or(0.0);
            let mu = 2.0 * u * (1.0 + gamma * gamma) / (gamma * gamma);
            return match DrivingParams::symmetric(gamma, mu, mu_bar) {
                Ok(p) => Ok(Some(p)),
                Err(Error::InvalidParams(v))
                    if v.iter()
                        .all(|x| matches!(x, crate::params::Violation::OutsideRhombus { .. })) =>
                {
                    Ok(None)
                }
                Err(e) => Err(e),
            };
        }
        Err(Error::InvalidGrid(
            "driving needs either both c and d, or u (with optional mu_bar)".into(),
        ))
    }

    pub fn dephasing(&self, n: usize) -> Result<DephasingSpec> {
        match (self.gamma_dephasing, self.gamma_dephasing_scaled) {
            (Some(g), _) => DephasingSpec::new(g),
            (None, Some(x)) if n > 2 => DephasingSpec::new(x / (n as f64 - 2.0)),
            (None, Some(_)) => Err(Error::InvalidGrid("scaled dephasing needs n > 2".into())),
            (None, None) => Ok(DephasingSpec::NONE),
        }
    }

    pub fn grand_canonical(&self) -> Result<GrandCanonicalParams> {
        let beta = match (self.beta, self.temperature) {
            (Some(b), _) => b,
            (None, Some(t)) if t > 0.0 => 1.0 / t,
            (None, Some(t)) => return Err(Error::InvalidGrid(format!("temperature {t} must be positive"))),
            (None, None) => return Err(Error::InvalidGrid("set beta or temperature".into())),
        };
        GrandCanonicalParams::new(beta, self.phi.unwrap_or(0.0))
    }
}

/// How a grid node is classified; each yields a value that is negative
/// exactly when the node counts as entangled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classifier {
    /// `λ_min` of the partially transposed pair (1, 2), closed form.
    BoundaryPair,
    /// `λ_min` of a bulk pair, closed form.
    BulkPair,
    /// `λ_min` of the central pair from the exact steady state.
    CentralPairOracle,
    /// `λ_min` of the grand-canonical nearest-neighbour pair.
    Thermal,
    /// `γ(n−2) − (√2 + 1 − Γ − 1/Γ)`: negative inside the central-pair
    /// coupling window.
    DephasingWindow,
}

impl Classifier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classifier::BoundaryPair => "boundary-pair",
            Classifier::BulkPair => "bulk-pair",
            Classifier::CentralPairOracle => "central-pair-oracle",
            Classifier::Thermal => "thermal",
            Classifier::DephasingWindow => "dephasing-window",
        }
    }

    pub fn uses_oracle(&self) -> bool {
        matches!(self, Classifier::CentralPairOracle)
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "boundary-pair" | "boundary" => Ok(Classifier::BoundaryPair),
            "bulk-pair" | "bulk" => Ok(Classifier::BulkPair),
            "central-pair-oracle" | "oracle" => Ok(Classifier::CentralPairOracle),
            "thermal" => Ok(Classifier::Thermal),
            "dephasing-window" | "window" => Ok(Classifier::DephasingWindow),
            _ => Err(Error::InvalidGrid(format!("unknown classifier {s:?}"))),
        }
    }
}

/// Default resolution per axis for closed-form classifiers.
pub const DEFAULT_RESOLUTION: usize = 201;
/// Default resolution per axis for the oracle classifier.
pub const DEFAULT_ORACLE_RESOLUTION: usize = 41;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    pub fixed: ParamPoint,
    pub classifier: Classifier,
    /// Chain length for the oracle and dephasing classifiers.
    pub n: usize,
    /// Entangled means a classifier value below `-eps`.
    pub eps: f64,
    pub n_max: usize,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>, fixed: ParamPoint, classifier: Classifier) -> Self {
        GridSpec {
            axes,
            fixed,
            classifier,
            n: 6,
            eps: DEFAULT_ENTANGLEMENT_EPS,
            n_max: DEFAULT_N_MAX,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "expected 1 to 3 axes, got {}",
                self.axes.len()
            )));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.check()?;
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidGrid(format!("axis {} appears twice", a.name)));
            }
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidGrid(format!("eps {} must be non-negative", self.eps)));
        }
        if self.classifier.uses_oracle() && self.n > self.n_max {
            return Err(Error::SizeLimit {
                n: self.n,
                n_max: self.n_max,
            });
        }
        // Evaluate a corner to surface missing parameters before a long run.
        // Bad values at single nodes are reported per node instead.
        let corner = self.point(&self.axes.iter().map(|a| a.lo).collect::<Vec<_>>());
        let structural = |r: Result<()>| match r {
            Err(e @ Error::InvalidGrid(_)) => Err(e),
            _ => Ok(()),
        };
        match self.classifier {
            Classifier::Thermal => structural(corner.grand_canonical().map(drop))?,
            Classifier::DephasingWindow => {
                if corner.gamma.is_none() {
                    return Err(Error::InvalidGrid("the coupling gamma is not set".into()));
                }
                structural(corner.dephasing(self.n.max(3)).map(drop))?;
            }
            _ => {
                structural(corner.driving_params().map(drop))?;
                structural(corner.dephasing(self.n).map(drop))?;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of node `idx`, first axis varying slowest.
    pub fn coords(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = a.value(idx % a.points);
            idx /= a.points;
        }
        out
    }

    pub fn point(&self, coords: &[f64]) -> ParamPoint {
        let mut p = self.fixed;
        for (a, &v) in self.axes.iter().zip(coords) {
            p.set(a.name, v);
        }
        p
    }

    /// Classifier value at a parameter point.
    pub fn evaluate(&self, p: &ParamPoint, cache: Option<&OracleCache>) -> NodeOutcome {
        match self.try_evaluate(p, cache) {
            Ok(Some(v)) => NodeOutcome::Value(v),
            Ok(None) => NodeOutcome::Outside,
            Err(e) => NodeOutcome::Failed(e.to_string()),
        }
    }

    fn try_evaluate(&self, p: &ParamPoint, cache: Option<&OracleCache>) -> Result<Option<f64>> {
        match self.classifier {
            Classifier::Thermal => gc_lambda_min(&p.grand_canonical()?).map(Some),
            Classifier::DephasingWindow => {
                let g = p
                    .gamma
                    .ok_or_else(|| Error::InvalidGrid("the coupling gamma is not set".into()))?;
                if !(g > 0.0) {
                    return Ok(None);
                }
                let n = self.n.max(3);
                let x = p.dephasing(n)?.gamma * (n as f64 - 2.0);
                Ok(Some(x - (std::f64::consts::SQRT_2 + 1.0 - g - 1.0 / g)))
            }
            Classifier::BoundaryPair => match p.driving_params()? {
                Some(d) => boundary_lambda_min(&d).map(Some),
                None => Ok(None),
            },
            Classifier::BulkPair => match p.driving_params()? {
                Some(d) => bulk_lambda_min(&d).map(Some),
                None => Ok(None),
            },
            Classifier::CentralPairOracle => {
                let Some(d) = p.driving_params()? else {
                    return Ok(None);
                };
                let deph = p.dephasing(self.n)?;
                let n = self.n;
                let n_max = self.n_max;
                let solve = || -> Result<f64> {
                    let chain = ChainSpec::new(n)?;
                    let l = Liouvillian::new(
                        Model {
                            chain,
                            params: d,
                            dephasing: deph,
                        },
                        n_max,
                        0,
                    )?;
                    let s = steady_state(&l)?;
                    let (j, k) = central_pair(n);
                    Ok(partial_trace_pair(&s, j, k)?.lambda_min_pt())
                };
                match cache {
                    Some(c) => c.get_or_compute(n, &d, &deph, solve).map(Some),
                    None => solve().map(Some),
                }
            }
        }
    }
}

/// Result of classifying one node.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeOutcome {
    Value(f64),
    /// Outside the physical parameter domain; not an error.
    Outside,
    Failed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Ok,
    Outside,
    Error,
}

impl NodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeStatus::Ok => "ok",
            NodeStatus::Outside => "outside",
            NodeStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub coords: Vec<f64>,
    pub lambda: Option<f64>,
    pub entangled: bool,
    pub status: NodeStatus,
    pub message: Option<String>,
}

/// A classified grid. Nodes are stored with the first axis varying slowest.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub spec: GridSpec,
    pub nodes: Vec<Node>,
}

impl RegionGrid {
    pub fn count(&self, status: NodeStatus) -> usize {
        self.nodes.iter().filter(|n| n.status == status).count()
    }

    pub fn entangled_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.entangled).count()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.status == NodeStatus::Error)
    }

    pub fn mask(&self) -> Vec<bool> {
        self.nodes.iter().map(|n| n.entangled).collect()
    }

    /// Whether the mask is unchanged by negating every axis value. Only
    /// meaningful when every axis range is symmetric about zero.
    pub fn is_point_symmetric(&self) -> bool {
        let m = self.mask();
        m.iter().eq(m.iter().rev())
    }
}

/// Classifies every node of `g`, in parallel.
pub fn scan(g: &GridSpec, cache: Option<&OracleCache>) -> Result<RegionGrid> {
    g.validate()?;
    let nodes = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let coords = g.coords(i);
            let outcome = g.evaluate(&g.point(&coords), cache);
            let (lambda, status, message) = match outcome {
                NodeOutcome::Value(v) => (Some(v), NodeStatus::Ok, None),
                NodeOutcome::Outside => (None, NodeStatus::Outside, None),
                NodeOutcome::Failed(m) => (None, NodeStatus::Error, Some(m)),
            };
            Node {
                coords,
                entangled: lambda.is_some_and(|l| l < -g.eps),
                lambda,
                status,
                message,
            }
        })
        .collect();
    Ok(RegionGrid { spec: g.clone(), nodes })
}
