//! Batch comparison of the exact steady states with every closed form.
//!
//! [`run`] executes a fixed list of checks and returns one [`CheckResult`]
//! per check. Sampling is seeded, so a report is reproducible.

use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ness::{
    boundary_rdm, boundary_tongue_cmin, bulk_coupling_window, bulk_lambda_min, bulk_rdm, dephasing_gamma_c,
    gamma_min_boundary, ness_expectations, nn_pair_rdm, non_nn_entanglement_margin, right_boundary_rdm,
};
use crate::numerics::{bisect_sign, brent};
use crate::oracle::{
    bond_current, bond_energy, build_liouvillian, central_pair, partial_trace_pair, site_magnetization, steady_state,
    SteadyStateSolution, DEFAULT_N_MAX,
};
use crate::params::{from_square, ChainSpec, DephasingSpec, DrivingParams, SquareCoords};
use crate::thermal::critical_beta;
use crate::twoqubit::{dense_eigenvalues, partial_transpose, x_matrix_eigenvalues, Mat4, TwoQubitState, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Chain lengths sampled by the oracle comparisons.
    pub sizes: Vec<usize>,
    /// Random parameter sets per chain length.
    pub samples: usize,
    pub equilibrium_samples: usize,
    /// Random driving parameters for the non-nearest-neighbour margin.
    pub margin_samples: usize,
    /// Random two-qubit matrices for the linear-algebra properties.
    pub property_samples: usize,
    /// Chain length of the dephasing bisection.
    pub dephasing_n: usize,
    /// Chain lengths over which the critical dephasing must decrease.
    pub scaling_sizes: Vec<usize>,
    pub seed: u64,
    pub n_max: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            sizes: vec![3, 4, 5, 6],
            samples: 100,
            equilibrium_samples: 20,
            margin_samples: 10_000,
            property_samples: 10_000,
            dephasing_n: 6,
            scaling_sizes: vec![4, 5, 6, 7],
            seed: 20_240_601,
            n_max: DEFAULT_N_MAX,
        }
    }
}

impl VerifyOptions {
    /// Defaults with every chain length capped at `n`.
    pub fn up_to(n: usize) -> Self {
        let n = n.max(3);
        let top = (n + 1).clamp(5, DEFAULT_N_MAX);
        VerifyOptions {
            sizes: (3..=n).collect(),
            dephasing_n: n,
            scaling_sizes: (4..=top).collect(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen; the check passes when it is at most
    /// `tolerance`. Checks combining several bounds report ratios to them.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            writeln!(
                f,
                "{}  {:<w$}  worst={:<12.4e} tol={:<9.1e} {:>7.2}s  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.tolerance,
                c.seconds,
                c.detail
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Every check name, in execution order.
pub const CHECKS: [&str; 12] = [
    "thermal-critical",
    "boundary-threshold",
    "coupling-window",
    "largest-tongue",
    "oracle-equivalence",
    "equilibrium",
    "zero-energy",
    "dephasing-critical",
    "dephasing-scaling",
    "non-nn-separable",
    "two-qubit-properties",
    "bulk-example",
];

struct Outcome {
    worst: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

impl Outcome {
    fn within(worst: f64, tolerance: f64, detail: String) -> Self {
        Outcome {
            passed: worst <= tolerance,
            worst,
            tolerance,
            detail,
        }
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<Outcome>) -> CheckResult {
    let start = Instant::now();
    let r = f();
    let seconds = start.elapsed().as_secs_f64();
    match r {
        Ok(o) => CheckResult {
            name: name.into(),
            passed: o.passed,
            worst: o.worst,
            tolerance: o.tolerance,
            detail: o.detail,
            seconds,
        },
        Err(e) => CheckResult {
            name: name.into(),
            passed: false,
            worst: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {e}"),
            seconds,
        },
    }
}

/// One oracle sample: parameters plus its steady state.
struct Sample {
    n: usize,
    p: DrivingParams,
    sol: SteadyStateSolution,
}

/// Random valid parameters with couplings in `[0.2, 5]`, kept slightly away
/// from the rhombus edges where a bath rate vanishes.
pub fn random_params(rng: &mut impl Rng) -> DrivingParams {
    let gl = rng.random_range(0.2..5.0);
    let gr = rng.random_range(0.2..5.0);
    let s = SquareCoords {
        c: rng.random_range(-0.98..0.98),
        d: rng.random_range(-0.98..0.98),
    };
    let d = from_square(s).expect("inside the square");
    DrivingParams::with_driving(gl, gr, d).expect("inside the rhombus")
}

fn solve(n: usize, p: DrivingParams, gamma: f64) -> Result<SteadyStateSolution> {
    steady_state(&build_liouvillian(ChainSpec::new(n)?, p, DephasingSpec::new(gamma)?)?)
}

fn draw_samples(opts: &VerifyOptions, rng: &mut ChaCha8Rng, dephased: bool) -> Result<Vec<Sample>> {
    let mut jobs = Vec::new();
    for &n in &opts.sizes {
        if n > opts.n_max {
            return Err(Error::SizeLimit { n, n_max: opts.n_max });
        }
        let count = if dephased {
            opts.samples.div_ceil(4)
        } else {
            opts.samples
        };
        for _ in 0..count {
            let p = random_params(rng);
            let g = if dephased { rng.random_range(0.01..0.5) } else { 0.0 };
            jobs.push((n, p, g));
        }
    }
    jobs.into_par_iter()
        .map(|(n, p, g)| {
            Ok(Sample {
                n,
                p,
                sol: solve(n, p, g)?,
            })
        })
        .collect()
}

fn pair_error(s: &Sample) -> Result<f64> {
    let (n, p, sol) = (s.n, &s.p, &s.sol);
    let mut worst: f64 = 0.0;
    for j in 1..n {
        let got = partial_trace_pair(sol, j, j + 1)?;
        worst = worst.max(got.max_abs_diff(&nn_pair_rdm(p, n, j)?));
        let shape = match j {
            1 if n > 2 => Some(boundary_rdm(p)?),
            _ if j + 1 == n && n > 2 => Some(right_boundary_rdm(p)?),
            _ if j > 1 && j + 1 < n => Some(bulk_rdm(p)?),
            _ => None,
        };
        if let Some(r) = shape {
            worst = worst.max(got.max_abs_diff(&r));
        }
    }
    Ok(worst)
}

fn expectation_error(s: &Sample) -> Result<f64> {
    let e = ness_expectations(&s.p)?;
    let n = s.n;
    let mut worst: f64 = 0.0;
    for j in 1..n {
        worst = worst.max((bond_current(&s.sol, j)? - e.t).abs());
    }
    for j in 1..=n {
        let want = match j {
            1 => e.a1,
            _ if j == n => e.an,
            _ => e.a,
        };
        worst = worst.max((site_magnetization(&s.sol, j)? - want).abs());
    }
    Ok(worst)
}

fn energy_error(s: &Sample) -> Result<f64> {
    (1..s.n)
        .map(|j| bond_energy(&s.sol, j).map(f64::abs))
        .try_fold(0.0, |a, x| Ok(f64::max(a, x?)))
}

fn non_nn_lambda(s: &Sample) -> Result<f64> {
    let mut low = f64::INFINITY;
    for j in 1..=s.n {
        for k in j + 2..=s.n {
            low = low.min(partial_trace_pair(&s.sol, j, k)?.lambda_min_pt());
        }
    }
    Ok(low)
}

fn max_over(samples: &[Sample], f: impl Fn(&Sample) -> Result<f64> + Sync + Send) -> Result<f64> {
    samples
        .par_iter()
        .map(f)
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))
}

fn product_state(n: usize, mb: f64) -> DMatrix<C64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |s, t| {
        if s != t {
            return C64::new(0.0, 0.0);
        }
        let downs = s.count_ones() as i32;
        let w = ((1.0 + mb) / 2.0).powi(n as i32 - downs) * ((1.0 - mb) / 2.0).powi(downs);
        C64::new(w, 0.0)
    })
}

/// Dephasing rate at which the central pair at `c = d = 1`, `Γ = 1` stops
/// being entangled, bisected to `width`.
pub fn bisect_gamma_c(n: usize, width: f64) -> Result<f64> {
    let p = DrivingParams::symmetric(1.0, 2.0, 0.0)?;
    let (j, k) = central_pair(n);
    let lambda = |g: f64| -> Result<f64> { Ok(partial_trace_pair(&solve(n, p, g)?, j, k)?.lambda_min_pt()) };
    let (lo, hi) = bisect_sign(lambda, 0.0, 0.5, width)?;
    Ok(0.5 * (lo + hi))
}

fn random_state(rng: &mut impl Rng) -> TwoQubitState {
    let g = Mat4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = g * g.adjoint();
    let tr = m.trace();
    TwoQubitState::new(m / tr).expect("positive by construction")
}

fn random_x_matrix(rng: &mut impl Rng) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..4 {
        m[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
    }
    for (i, j) in [(0, 3), (1, 2)] {
        m[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        m[(j, i)] = m[(i, j)].conj();
    }
    m
}

/// Runs every check in [`CHECKS`].
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    checks.push(timed("thermal-critical", || {
        let b0 = critical_beta(0.0)?;
        let b4 = critical_beta(4.0)?;
        let worst = (b0 - 0.5162).abs().max((b4 - 0.5146).abs());
        Ok(Outcome::within(
            worst,
            5e-4,
            format!("beta_c(0)={b0:.6} beta_c(4)={b4:.6} T_c={:.4}", 1.0 / b0),
        ))
    }));

    checks.push(timed("boundary-threshold", || {
        let g = gamma_min_boundary();
        let root = brent(|x| boundary_tongue_cmin(x) - 1.0, 0.3, 1.0, 1e-12)?;
        let worst = ((g - 0.511).abs() / 1e-3).max((root - g).abs() / 1e-4);
        Ok(Outcome::within(
            worst,
            1.0,
            format!("closed form {g:.6}, c_min=1 at {root:.6}"),
        ))
    }));

    checks.push(timed("coupling-window", || {
        let (lo, hi) = bulk_coupling_window();
        let worst = ((lo - 0.531).abs().max((hi - 1.883).abs()) / 1e-3).max((lo * hi - 1.0).abs() / 1e-9);
        Ok(Outcome::within(
            worst,
            1.0,
            format!("({lo:.6}, {hi:.6}), product-1={:.1e}", lo * hi - 1.0),
        ))
    }));

    checks.push(timed("largest-tongue", || {
        let h = 1e-5;
        let slope = |x: f64| (boundary_tongue_cmin(x + h) - boundary_tongue_cmin(x - h)) / (2.0 * h);
        let arg = brent(slope, 0.8, 1.5, 1e-10)?;
        Ok(Outcome::within(
            (arg - 1.08873).abs(),
            1e-3,
            format!("argmin {arg:.6}, c_min {:.6}", boundary_tongue_cmin(arg)),
        ))
    }));

    let start = Instant::now();
    let clean = draw_samples(opts, &mut rng, false);
    let dephased = draw_samples(opts, &mut rng, true);
    let solve_seconds = start.elapsed().as_secs_f64();

    checks.push(timed("oracle-equivalence", || {
        let s = clean.as_ref().map_err(Clone::clone)?;
        let rdm = max_over(s, pair_error)?;
        let exp = max_over(s, expectation_error)?;
        Ok(Outcome::within(
            rdm.max(exp),
            1e-8,
            format!(
                "{} states over n={:?} solved in {solve_seconds:.2}s; rdm {rdm:.1e}, expectations {exp:.1e}",
                s.len(),
                opts.sizes
            ),
        ))
    }));

    checks.push(timed("equilibrium", || {
        let jobs: Vec<_> = (0..opts.equilibrium_samples)
            .map(|_| {
                let n = opts.sizes[rng.random_range(0..opts.sizes.len())];
                let gamma = rng.random_range(0.2..5.0);
                let mb = rng.random_range(-0.95..0.95);
                let g = rng.random_range(0.0..0.5);
                (n, gamma, mb, g)
            })
            .collect();
        let worst = jobs
            .into_par_iter()
            .map(|(n, gamma, mb, g)| -> Result<f64> {
                let sol = solve(n, DrivingParams::symmetric(gamma, 0.0, mb)?, g)?;
                Ok((&sol.rho - product_state(n, mb))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max))
            })
            .try_reduce(|| 0.0, |a: f64, b: f64| Ok(a.max(b)))?;
        Ok(Outcome::within(
            worst,
            1e-10,
            format!("{} samples", opts.equilibrium_samples),
        ))
    }));

    checks.push(timed("zero-energy", || {
        let a = clean.as_ref().map_err(Clone::clone)?;
        let b = dephased.as_ref().map_err(Clone::clone)?;
        let worst = max_over(a, energy_error)?.max(max_over(b, energy_error)?);
        Ok(Outcome::within(
            worst,
            1e-10,
            format!("{} states, every bond", a.len() + b.len()),
        ))
    }));

    checks.push(timed("dephasing-critical", || {
        let n = opts.dephasing_n;
        let found = bisect_gamma_c(n, 1e-6)?;
        let want = dephasing_gamma_c(1.0, n)?;
        Ok(Outcome::within(
            (found - want).abs(),
            1e-3,
            format!("n={n}: bisected {found:.6}, closed form {want:.6}"),
        ))
    }));

    checks.push(timed("dephasing-scaling", || {
        let found = opts
            .scaling_sizes
            .par_iter()
            .map(|&n| bisect_gamma_c(n, 1e-5))
            .collect::<Result<Vec<_>>>()?;
        let increase = found.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let detail = opts
            .scaling_sizes
            .iter()
            .zip(&found)
            .map(|(n, g)| format!("n={n}:{g:.5}"))
            .collect::<Vec<_>>()
            .join(" ");
        Ok(Outcome {
            passed: increase < 0.0,
            worst: increase,
            tolerance: 0.0,
            detail,
        })
    }));

    checks.push(timed("non-nn-separable", || {
        let margins: Vec<DrivingParams> = (0..opts.margin_samples).map(|_| random_params(&mut rng)).collect();
        let margin = margins
            .par_iter()
            .map(non_nn_entanglement_margin)
            .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
        let a = clean.as_ref().map_err(Clone::clone)?;
        let b = dephased.as_ref().map_err(Clone::clone)?;
        let low = -max_over(a, |s| non_nn_lambda(s).map(|x| -x))?.max(max_over(b, |s| non_nn_lambda(s).map(|x| -x))?);
        let worst = (margin / 1e-12).max(-low / 1e-10);
        Ok(Outcome::within(
            worst,
            1.0,
            format!("max margin {margin:.3e}; min oracle lambda {low:.3e}"),
        ))
    }));

    checks.push(timed("two-qubit-properties", || {
        let mut worst_eig: f64 = 0.0;
        let mut worst_pt: f64 = 0.0;
        let mut lowest: f64 = 0.0;
        for _ in 0..opts.property_samples {
            let m = random_x_matrix(&mut rng);
            let x = x_matrix_eigenvalues(&m);
            let d = dense_eigenvalues(&m);
            worst_eig = worst_eig.max(x.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

            let rho = random_state(&mut rng);
            let pt = partial_transpose(&rho);
            worst_pt = worst_pt.max(partial_transpose(&pt).max_abs_diff(&rho));
            let m = pt.matrix();
            worst_pt = worst_pt.max((m.trace() - C64::new(1.0, 0.0)).norm());
            worst_pt = worst_pt.max((m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max));
            lowest = lowest.min(rho.lambda_min_pt());
        }
        let below = (-0.5 - lowest).max(0.0);
        let worst = worst_eig.max(worst_pt).max(below);
        Ok(Outcome::within(
            worst,
            1e-12,
            format!("eigenvalues {worst_eig:.1e}, transpose {worst_pt:.1e}, lowest lambda {lowest:.4}"),
        ))
    }));

    checks.push(timed("bulk-example", || {
        let p = DrivingParams::symmetric(1.0, 2.0, 0.0)?;
        let closed = bulk_lambda_min(&p)?;
        let n = opts.sizes.iter().copied().filter(|&n| n >= 4).max().unwrap_or(4);
        let (j, k) = central_pair(n);
        let oracle = partial_trace_pair(&solve(n, p, 0.0)?, j, k)?.lambda_min_pt();
        let worst = (closed + 0.0625).abs().max((oracle - closed).abs());
        Ok(Outcome::within(
            worst,
            1e-8,
            format!("closed form {closed}, oracle n={n} {oracle:.12}"),
        ))
    }));

    VerifyReport {
        options: opts.clone(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes() {
        let opts = VerifyOptions {
            sizes: vec![3, 4],
            samples: 6,
            equilibrium_samples: 4,
            margin_samples: 200,
            property_samples: 200,
            dephasing_n: 4,
            scaling_sizes: vec![4, 5],
            ..Default::default()
        };
        let r = run(&opts);
        assert_eq!(r.checks.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), CHECKS);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn capped_options() {
        let o = VerifyOptions::up_to(4);
        assert_eq!(o.sizes, [3, 4]);
        assert_eq!(o.scaling_sizes, [4, 5]);
        assert_eq!(VerifyOptions::up_to(6).scaling_sizes, [4, 5, 6, 7]);
    }
}
