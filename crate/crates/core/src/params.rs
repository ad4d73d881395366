//! Model parameters and their validity domains.
//!
//! The driving parameters `(mu, mu_bar)` live in a rhombus with corners
//! `(0, ±1)` and `(±2, 0)`. The linear map `c = mu/2 - mu_bar`,
//! `d = mu/2 + mu_bar` sends that rhombus onto the square `[-1, 1]²`, which is
//! the coordinate system used by every phase-diagram routine in this crate.
//!
//! All quantities are dimensionless: the XX coupling sets the unit of energy
//! and rate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the closed rhombus/square boundary to absorb rounding.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Number of sites in the open chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
}

impl ChainSpec {
    pub fn new(n: usize) -> Result<Self> {
        let c = ChainSpec { n };
        let mut v = Vec::new();
        c.check(&mut v);
        if v.is_empty() {
            Ok(c)
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    fn check(&self, out: &mut Vec<Violation>) {
        if self.n < 2 {
            out.push(Violation::ChainTooShort { n: self.n });
        }
    }
}

/// Bath couplings and driving strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivingParams {
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub mu: f64,
    pub mu_bar: f64,
}

/// The driving part `(mu, mu_bar)` of [`DrivingParams`] on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Driving {
    pub mu: f64,
    pub mu_bar: f64,
}

/// Square coordinates `c = mu/2 - mu_bar`, `d = mu/2 + mu_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareCoords {
    pub c: f64,
    pub d: f64,
}

/// Uniform dephasing rate on every site.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DephasingSpec {
    pub gamma: f64,
}

impl DephasingSpec {
    pub const NONE: DephasingSpec = DephasingSpec { gamma: 0.0 };

    pub fn new(gamma: f64) -> Result<Self> {
        let d = DephasingSpec { gamma };
        let mut v = Vec::new();
        d.check(&mut v);
        if v.is_empty() {
            Ok(d)
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    fn check(&self, out: &mut Vec<Violation>) {
        if !self.gamma.is_finite() {
            out.push(Violation::NonFinite {
                name: "gamma_dephasing".into(),
            });
        } else if self.gamma < 0.0 {
            out.push(Violation::NegativeDephasing { value: self.gamma });
        }
    }
}

/// Inverse temperature and chemical-potential parameter of a grand-canonical
/// state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrandCanonicalParams {
    pub beta: f64,
    pub phi: f64,
}

impl GrandCanonicalParams {
    pub fn new(beta: f64, phi: f64) -> Result<Self> {
        let mut v = Vec::new();
        if !beta.is_finite() {
            v.push(Violation::NonFinite { name: "beta".into() });
        } else if beta < 0.0 {
            v.push(Violation::NegativeBeta { value: beta });
        }
        if !phi.is_finite() {
            v.push(Violation::NonFinite { name: "phi".into() });
        }
        if v.is_empty() {
            Ok(GrandCanonicalParams { beta, phi })
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// Which end of the chain a bath sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// A single violated parameter invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite {
        name: String,
    },
    NegativeCoupling {
        side: Side,
        value: f64,
    },
    NoBath,
    /// `1 + s_mu * mu/2 + s_bar * mu_bar < 0` for the given signs.
    OutsideRhombus {
        s_mu: i8,
        s_bar: i8,
        value: f64,
    },
    NegativeDephasing {
        value: f64,
    },
    ChainTooShort {
        n: usize,
    },
    NegativeBeta {
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { name } => write!(f, "{name} is not finite"),
            Violation::NegativeCoupling { side, value } => {
                write!(f, "{side} coupling is negative ({value})")
            }
            Violation::NoBath => f.write_str("both bath couplings vanish; the steady state is not unique"),
            Violation::OutsideRhombus { s_mu, s_bar, value } => {
                let sm = if *s_mu > 0 { '+' } else { '-' };
                let sb = if *s_bar > 0 { '+' } else { '-' };
                write!(f, "1 {sm} mu/2 {sb} mu_bar = {value} < 0 (outside the rhombus)")
            }
            Violation::NegativeDephasing { value } => write!(f, "dephasing rate is negative ({value})"),
            Violation::ChainTooShort { n } => write!(f, "chain needs at least 2 sites, got {n}"),
            Violation::NegativeBeta { value } => write!(f, "inverse temperature is negative ({value})"),
        }
    }
}

/// Every violated invariant of a parameter set; empty iff all hold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(self.violations))
        }
    }
}

impl DrivingParams {
    /// Checked constructor.
    pub fn new(gamma_left: f64, gamma_right: f64, mu: f64, mu_bar: f64) -> Result<Self> {
        let p = DrivingParams {
            gamma_left,
            gamma_right,
            mu,
            mu_bar,
        };
        let mut v = Vec::new();
        p.check(&mut v);
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// Equal couplings `gamma` at both ends.
    pub fn symmetric(gamma: f64, mu: f64, mu_bar: f64) -> Result<Self> {
        Self::new(gamma, gamma, mu, mu_bar)
    }

    /// Equal couplings with the driving given in square coordinates.
    pub fn from_square_symmetric(gamma: f64, s: SquareCoords) -> Result<Self> {
        let d = from_square(s)?;
        Self::new(gamma, gamma, d.mu, d.mu_bar)
    }

    pub fn with_driving(gamma_left: f64, gamma_right: f64, d: Driving) -> Result<Self> {
        Self::new(gamma_left, gamma_right, d.mu, d.mu_bar)
    }

    pub fn driving(&self) -> Driving {
        Driving {
            mu: self.mu,
            mu_bar: self.mu_bar,
        }
    }

    /// Left-right mirror image: couplings swapped and `mu -> -mu`.
    pub fn mirrored(&self) -> Self {
        DrivingParams {
            gamma_left: self.gamma_right,
            gamma_right: self.gamma_left,
            mu: -self.mu,
            mu_bar: self.mu_bar,
        }
    }

    /// The four rhombus expressions `1 ± mu/2 ± mu_bar`, in the order
    /// `(+,+), (+,-), (-,+), (-,-)`.
    pub fn rhombus_margins(&self) -> [(i8, i8, f64); 4] {
        let h = self.mu / 2.0;
        [
            (1, 1, 1.0 + h + self.mu_bar),
            (1, -1, 1.0 + h - self.mu_bar),
            (-1, 1, 1.0 - h + self.mu_bar),
            (-1, -1, 1.0 - h - self.mu_bar),
        ]
    }

    fn check(&self, out: &mut Vec<Violation>) {
        let fields = [
            ("gamma_left", self.gamma_left),
            ("gamma_right", self.gamma_right),
            ("mu", self.mu),
            ("mu_bar", self.mu_bar),
        ];
        let mut finite = true;
        for (name, v) in fields {
            if !v.is_finite() {
                out.push(Violation::NonFinite { name: name.into() });
                finite = false;
            }
        }
        if !finite {
            return;
        }
        if self.gamma_left < 0.0 {
            out.push(Violation::NegativeCoupling {
                side: Side::Left,
                value: self.gamma_left,
            });
        }
        if self.gamma_right < 0.0 {
            out.push(Violation::NegativeCoupling {
                side: Side::Right,
                value: self.gamma_right,
            });
        }
        if self.gamma_left <= 0.0 && self.gamma_right <= 0.0 {
            out.push(Violation::NoBath);
        }
        for (s_mu, s_bar, value) in self.rhombus_margins() {
            if value < -DOMAIN_TOL {
                out.push(Violation::OutsideRhombus { s_mu, s_bar, value });
            }
        }
    }
}

/// Maps `(mu, mu_bar)` into square coordinates.
pub fn to_square(p: &DrivingParams) -> Result<SquareCoords> {
    let mut v = Vec::new();
    p.check(&mut v);
    v.retain(|x| matches!(x, Violation::OutsideRhombus { .. } | Violation::NonFinite { .. }));
    if !v.is_empty() {
        return Err(Error::InvalidParams(v));
    }
    let h = p.mu / 2.0;
    Ok(SquareCoords {
        c: h - p.mu_bar,
        d: h + p.mu_bar,
    })
}

/// Inverse of [`to_square`]: `mu = c + d`, `mu_bar = (d - c)/2`.
pub fn from_square(s: SquareCoords) -> Result<Driving> {
    if !(s.c.abs() <= 1.0 + DOMAIN_TOL && s.d.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(Error::OutOfSquare { c: s.c, d: s.d });
    }
    Ok(Driving {
        mu: s.c + s.d,
        mu_bar: (s.d - s.c) / 2.0,
    })
}

/// Collects every violated invariant of a full model specification.
pub fn validate(p: &DrivingParams, dephasing: &DephasingSpec, chain: &ChainSpec) -> ValidationReport {
    let mut violations = Vec::new();
    p.check(&mut violations);
    dephasing.check(&mut violations);
    chain.check(&mut violations);
    ValidationReport { violations }
}
