use std::fs;
use std::path::{Path, PathBuf};

use anyhow::bail;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use xxness::scanner::{Axis, Classifier, FigureId};

#[derive(Debug, Parser)]
#[command(
    name = "xxness",
    version,
    about = "Entanglement in the nonequilibrium steady state of the boundary-driven XX chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Grand-canonical two-spin state at (--beta, --phi).
    Thermal,
    /// Inverse temperature below which thermal entanglement vanishes, at --phi.
    ThermalCritical,
    /// Closed-form steady-state expectations and pair entanglement.
    Ness,
    /// Coupling thresholds and region edges at --gamma.
    Boundaries,
    /// Exact steady state of an --n site chain.
    Oracle,
    /// Classify every node of a --grid.
    Scan,
    /// Bisect the entanglement boundary along one --grid axis.
    Trace,
    /// Write the data behind one figure, or all of them.
    Figure {
        /// fig1 .. fig10, or "all".
        #[arg(default_value = "all")]
        id: FigureSelection,
    },
    /// Compare the exact steady states against every closed form.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Thermal => "thermal",
            Command::ThermalCritical => "thermal-critical",
            Command::Ness => "ness",
            Command::Boundaries => "boundaries",
            Command::Oracle => "oracle",
            Command::Scan => "scan",
            Command::Trace => "trace",
            Command::Figure { .. } => "figure",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureSelection {
    All,
    One(FigureId),
}

impl std::str::FromStr for FigureSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(FigureSelection::All);
        }
        s.parse()
            .map(FigureSelection::One)
            .map_err(|e: xxness::Error| e.to_string())
    }
}

/// Every option, settable from a flag or from the config file under the
/// same name. Flags win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Left bath coupling.
    #[arg(long, global = true)]
    pub gamma_left: Option<f64>,
    /// Right bath coupling.
    #[arg(long, global = true)]
    pub gamma_right: Option<f64>,
    /// Both bath couplings at once.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Driving strength, the difference of the bath magnetizations.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Average bath magnetization.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu_bar: Option<f64>,
    /// Square coordinate mu/2 - mu_bar.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Square coordinate mu/2 + mu_bar.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Dephasing rate on every site.
    #[arg(long, global = true)]
    pub gamma_dephasing: Option<f64>,
    /// Chain length. For verify: the largest chain length sampled.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Grid axis as name=lo:hi:points; repeat for up to three axes.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<String>,
    /// Classifier for scan and trace.
    #[arg(long, global = true)]
    pub classifier: Option<String>,
    /// Axis bisected by trace; defaults to the last grid axis.
    #[arg(long, global = true)]
    pub scan_axis: Option<String>,
    /// Final bracket width for trace.
    #[arg(long, global = true)]
    pub width: Option<f64>,
    /// Entangled means lambda_min < -eps.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Largest chain the exact solver accepts.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Random samples per chain length for verify.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Points per axis of figure grids.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// JSON file that caches exact-solver results across runs.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat JSON or TOML file with the same keys as the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Fail when any grid node could not be evaluated.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict: bool,
    /// Worker threads for every parallel section.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Settings {
    pub fn load(path: &Path) -> anyhow::Result<Settings> {
        let shown = path.display();
        let text = fs::read_to_string(path).map_err(|e| usage(format!("reading {shown}: {e}")))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let parsed = if is_toml {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        Ok(parsed.map_err(|e| usage(format!("parsing {shown}: {e}")))?)
    }

    /// Fills every unset field from `base`.
    pub fn over(mut self, base: Settings) -> Settings {
        overlay!(self, base; gamma_left, gamma_right, gamma, mu, mu_bar, c, d, gamma_dephasing, n, phi, beta,
            classifier, scan_axis, width, eps, n_max, samples, seed, resolution, cache, out, threads);
        if self.grid.is_empty() {
            self.grid = base.grid;
        }
        self.strict |= base.strict;
        self
    }

    /// Flags merged over the config file, if one was given.
    pub fn resolve(self) -> anyhow::Result<Settings> {
        match &self.config {
            Some(p) => {
                let base = Settings::load(p)?;
                Ok(self.over(base))
            }
            None => Ok(self),
        }
    }

    pub fn axes(&self) -> anyhow::Result<Vec<Axis>> {
        if self.grid.is_empty() {
            bail!(usage("give at least one --grid axis, e.g. --grid c=-1:1:201"));
        }
        self.grid
            .iter()
            .map(|g| g.parse::<Axis>().map_err(|e| usage(e.to_string()).into()))
            .collect()
    }

    pub fn classifier(&self) -> anyhow::Result<Classifier> {
        let s = self.classifier.as_deref().ok_or_else(|| {
            usage("--classifier is required (boundary-pair, bulk-pair, central-pair-oracle, thermal, dephasing-window)")
        })?;
        s.parse().map_err(|e: xxness::Error| usage(e.to_string()).into())
    }
}

/// A problem with the command line or config rather than with the
/// computation; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let flags = Settings {
            mu: Some(1.0),
            ..Default::default()
        };
        let file: Settings = toml::from_str("mu = 0.5\ngamma = 2.0\ngrid = [\"c=-1:1:3\"]\nstrict = true").unwrap();
        let s = flags.over(file);
        assert_eq!(s.mu, Some(1.0));
        assert_eq!(s.gamma, Some(2.0));
        assert_eq!(s.grid, ["c=-1:1:3"]);
        assert!(s.strict);
    }

    #[test]
    fn json_config_uses_flag_names() {
        let s: Settings = serde_json::from_str(r#"{"gamma-left": 1.5, "mu-bar": -0.2, "n": 4}"#).unwrap();
        assert_eq!((s.gamma_left, s.mu_bar, s.n), (Some(1.5), Some(-0.2), Some(4)));
        assert!(serde_json::from_str::<Settings>(r#"{"gamma_lft": 1}"#).is_err());
    }
}
