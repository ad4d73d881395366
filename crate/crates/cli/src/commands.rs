use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail};
use serde_json::{json, Value};
use xxness::ness::{
    boundary_lambda_min, boundary_tongue_cmin, boundary_tongue_edge, bulk_coupling_window, bulk_lambda_min,
    bulk_pocket_cmin, bulk_pocket_edge, dephasing_coupling_window, dephasing_gamma_c, gamma_min_boundary,
    ness_expectations, nn_pair_rdm, non_nn_entanglement_margin, pocket_boundary, right_boundary_rdm, tongue_boundary,
    u_coordinate,
};
use xxness::oracle::{
    bond_current, bond_energy, partial_trace_pair, site_magnetization, steady_state, Liouvillian, Model, SolveOptions,
    DEFAULT_N_MAX,
};
use xxness::params::{
    from_square, to_square, ChainSpec, DephasingSpec, DrivingParams, GrandCanonicalParams, SquareCoords,
};
use xxness::scanner::{
    figure_data, fmt_num, scan, trace_boundary, write_json, AxisName, FigureId, FigureOptions, GridSpec, NodeStatus,
    OracleCache, ParamPoint, Table, DEFAULT_TRACE_WIDTH, SIGNIFICANT_DIGITS,
};
use xxness::thermal::{critical_beta, gc_two_spin_rdm, thermal_expectations};
use xxness::twoqubit::{negativity, DEFAULT_ENTANGLEMENT_EPS};
use xxness::verify::{self, VerifyOptions};

use crate::args::{usage, Command, FigureSelection, Settings};
use crate::manifest::RunManifest;

/// Ordered name/value pairs printed one per line and optionally saved as JSON.
#[derive(Default)]
struct Report(Vec<(String, Value)>);

impl Report {
    fn num(&mut self, k: impl Into<String>, v: f64) {
        self.0.push((k.into(), json!(v)));
    }

    fn val(&mut self, k: impl Into<String>, v: impl Into<Value>) {
        self.0.push((k.into(), v.into()));
    }

    fn print(&self) {
        let mut out = std::io::stdout().lock();
        let w = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.0 {
            let shown = match v {
                Value::Number(x) => x.as_f64().map(fmt_num).unwrap_or_else(|| x.to_string()),
                Value::String(s) => s.clone(),
                Value::Null => "-".into(),
                other => other.to_string(),
            };
            // A closed pipe only means nobody reads the rest.
            if writeln!(out, "{k:<w$}  {shown}").is_err() {
                return;
            }
        }
    }

    fn to_json(&self) -> Value {
        Value::Object(self.0.iter().cloned().collect())
    }
}

struct Run<'a> {
    s: &'a Settings,
    manifest: RunManifest,
}

impl Run<'_> {
    fn out_dir(&self) -> Option<&Path> {
        self.s.out.as_deref()
    }

    fn out_or(&self, default: &str) -> PathBuf {
        self.s.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn record(&mut self, path: &Path) -> anyhow::Result<()> {
        self.manifest.add(path)
    }

    /// Prints the report and saves it as `<command>.json` under `--out`.
    fn finish_report(&mut self, r: &Report) -> anyhow::Result<()> {
        r.print();
        if let Some(dir) = self.out_dir() {
            let p = dir.join(format!("{}.json", self.manifest.command));
            write_json(&p, &r.to_json())?;
            self.record(&p)?;
        }
        Ok(())
    }
}

pub fn run(cmd: Command, s: &Settings) -> anyhow::Result<()> {
    let tolerances = json!({
        "entanglement_eps": s.eps.unwrap_or(DEFAULT_ENTANGLEMENT_EPS),
        "trace_width": s.width.unwrap_or(DEFAULT_TRACE_WIDTH),
        "steady_state_residual": SolveOptions::default().residual_tol,
        "significant_digits": SIGNIFICANT_DIGITS,
    });
    let mut r = Run {
        s,
        manifest: RunManifest::new(cmd.name(), s, tolerances)?,
    };
    match cmd {
        Command::Thermal => thermal(&mut r)?,
        Command::ThermalCritical => thermal_critical(&mut r)?,
        Command::Ness => ness(&mut r)?,
        Command::Boundaries => boundaries(&mut r)?,
        Command::Oracle => oracle(&mut r)?,
        Command::Scan => scan_cmd(&mut r)?,
        Command::Trace => trace_cmd(&mut r)?,
        Command::Figure { id } => figure(&mut r, id)?,
        Command::Verify => return verify_cmd(&mut r),
    }
    r.manifest.emit(r.s.out.as_deref())?;
    Ok(())
}

fn couplings(s: &Settings) -> anyhow::Result<(f64, f64)> {
    match (s.gamma_left.or(s.gamma), s.gamma_right.or(s.gamma)) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => bail!(usage("set --gamma, or both --gamma-left and --gamma-right")),
    }
}

fn equal_coupling(s: &Settings) -> anyhow::Result<f64> {
    let (l, r) = couplings(s)?;
    if l != r {
        bail!(usage("this command needs equal couplings; use --gamma"));
    }
    Ok(l)
}

fn driving(s: &Settings) -> anyhow::Result<DrivingParams> {
    let (gl, gr) = couplings(s)?;
    let d = match (s.c, s.d, s.mu) {
        (Some(c), Some(d), None) => from_square(SquareCoords { c, d })?,
        (None, None, Some(mu)) => xxness::params::Driving {
            mu,
            mu_bar: s.mu_bar.unwrap_or(0.0),
        },
        _ => bail!(usage("set either --mu (with optional --mu-bar) or both --c and --d")),
    };
    Ok(DrivingParams::with_driving(gl, gr, d)?)
}

fn dephasing(s: &Settings) -> anyhow::Result<DephasingSpec> {
    Ok(DephasingSpec::new(s.gamma_dephasing.unwrap_or(0.0))?)
}

fn grand_canonical(s: &Settings) -> anyhow::Result<GrandCanonicalParams> {
    let beta = s.beta.ok_or_else(|| usage("--beta is required"))?;
    Ok(GrandCanonicalParams::new(beta, s.phi.unwrap_or(0.0))?)
}

fn thermal(r: &mut Run) -> anyhow::Result<()> {
    let g = grand_canonical(r.s)?;
    let e = thermal_expectations(&g)?;
    let rho = gc_two_spin_rdm(&g)?;
    let eps = r.s.eps.unwrap_or(DEFAULT_ENTANGLEMENT_EPS);
    let lambda = rho.lambda_min_pt();
    let mut rep = Report::default();
    rep.num("beta", g.beta);
    rep.num("phi", g.phi);
    rep.num("z", e.z);
    rep.num("xx", e.xx);
    rep.num("zz", e.zz);
    rep.num("energy", e.energy());
    rep.num("lambda_min", lambda);
    rep.num("negativity", negativity(&rho));
    rep.val("entangled", lambda < -eps);
    r.finish_report(&rep)
}

fn thermal_critical(r: &mut Run) -> anyhow::Result<()> {
    let phi = r.s.phi.unwrap_or(0.0);
    let b = critical_beta(phi)?;
    let mut rep = Report::default();
    rep.num("phi", phi);
    rep.num("beta_c", b);
    rep.num("temperature_c", 1.0 / b);
    r.finish_report(&rep)
}

fn ness(r: &mut Run) -> anyhow::Result<()> {
    let p = driving(r.s)?;
    let e = ness_expectations(&p)?;
    let eps = r.s.eps.unwrap_or(DEFAULT_ENTANGLEMENT_EPS);
    let mut rep = Report::default();
    rep.num("gamma_left", p.gamma_left);
    rep.num("gamma_right", p.gamma_right);
    rep.num("mu", p.mu);
    rep.num("mu_bar", p.mu_bar);
    let sq = to_square(&p)?;
    rep.num("c", sq.c);
    rep.num("d", sq.d);
    rep.num("current", e.t);
    rep.num("z_first", e.a1);
    rep.num("z_bulk", e.a);
    rep.num("z_last", e.an);
    rep.num("u", u_coordinate(&p)?);
    let lb = boundary_lambda_min(&p)?;
    let lr = right_boundary_rdm(&p)?.lambda_min_pt();
    let lk = bulk_lambda_min(&p)?;
    rep.num("lambda_boundary_left", lb);
    rep.num("lambda_boundary_right", lr);
    rep.num("lambda_bulk", lk);
    rep.val("entangled_boundary_left", lb < -eps);
    rep.val("entangled_boundary_right", lr < -eps);
    rep.val("entangled_bulk", lk < -eps);
    rep.num("non_nn_margin", non_nn_entanglement_margin(&p)?);
    if let Some(n) = r.s.n {
        ChainSpec::new(n)?;
        for j in 1..n {
            rep.num(format!("lambda_{j}_{}", j + 1), nn_pair_rdm(&p, n, j)?.lambda_min_pt());
        }
    }
    r.finish_report(&rep)
}

fn boundaries(r: &mut Run) -> anyhow::Result<()> {
    let mut rep = Report::default();
    let (lo, hi) = bulk_coupling_window();
    rep.num("gamma_min_boundary", gamma_min_boundary());
    rep.num("bulk_window_lo", lo);
    rep.num("bulk_window_hi", hi);
    let gamma = match (r.s.gamma, r.s.gamma_left, r.s.gamma_right) {
        (None, None, None) => None,
        _ => Some(equal_coupling(r.s)?),
    };
    if let Some(g) = gamma {
        rep.num("gamma", g);
        let (tc, pc) = (boundary_tongue_cmin(g), bulk_pocket_cmin(g));
        rep.num("boundary_c_min", tc);
        rep.num("bulk_c_min", pc);
        if let Some(c) = r.s.c {
            rep.val("boundary_edge_d", boundary_tongue_edge(c, g).ok());
            rep.val("bulk_edge_d", bulk_pocket_edge(c, g).ok());
        }
        if let Some(n) = r.s.n {
            rep.num("dephasing_gamma_c", dephasing_gamma_c(g, n)?);
        }
        if let Some(dir) = r.out_dir().map(Path::to_path_buf) {
            let samples = r.s.resolution.unwrap_or(201);
            for (name, region) in [
                ("tongue", tongue_boundary(g, samples)?),
                ("pocket", pocket_boundary(g, samples)?),
            ] {
                let mut t = Table::new(["c", "d"]);
                for q in &region.curve {
                    t.push(vec![q.c.into(), q.d.into()]);
                }
                let p = dir.join(format!("{name}_edge.csv"));
                t.write_csv(&p)?;
                r.record(&p)?;
            }
        }
    }
    if let (Some(n), Some(gd)) = (r.s.n, r.s.gamma_dephasing) {
        match dephasing_coupling_window(gd, n) {
            Ok((a, b)) => {
                rep.num("dephasing_window_lo", a);
                rep.num("dephasing_window_hi", b);
            }
            Err(xxness::Error::EmptyWindow { .. }) => rep.val("dephasing_window", "empty"),
            Err(e) => return Err(e.into()),
        }
    }
    r.finish_report(&rep)
}

fn oracle(r: &mut Run) -> anyhow::Result<()> {
    let n = r.s.n.ok_or_else(|| usage("--n is required"))?;
    let model = Model {
        chain: ChainSpec::new(n)?,
        params: driving(r.s)?,
        dephasing: dephasing(r.s)?,
    };
    let l = Liouvillian::new(model, r.s.n_max.unwrap_or(DEFAULT_N_MAX), 0)?;
    let sol = steady_state(&l)?;
    let eps = r.s.eps.unwrap_or(DEFAULT_ENTANGLEMENT_EPS);
    let mut rep = Report::default();
    rep.val("n", n);
    rep.val("sector_dimension", l.dimension());
    rep.val("method", format!("{:?}", sol.method).to_lowercase());
    rep.num("residual", sol.residual);
    rep.val("nullity", sol.nullity);
    rep.val("gap_ratio", sol.gap_ratio);
    rep.num("min_eigenvalue", sol.min_eigenvalue);
    rep.num("hermiticity_adjustment", sol.hermiticity_adjustment);
    for j in 1..=n {
        rep.num(format!("z_{j}"), site_magnetization(&sol, j)?);
    }
    for j in 1..n {
        rep.num(format!("current_{j}"), bond_current(&sol, j)?);
    }
    for j in 1..n {
        rep.num(format!("energy_{j}"), bond_energy(&sol, j)?);
    }
    let mut pairs = Table::new(["j", "k", "lambda_min", "entangled"]);
    for j in 1..=n {
        for k in j + 1..=n {
            let lam = partial_trace_pair(&sol, j, k)?.lambda_min_pt();
            rep.num(format!("lambda_{j}_{k}"), lam);
            pairs.push(vec![j.into(), k.into(), lam.into(), (lam < -eps).into()]);
        }
    }
    if let Some(dir) = r.out_dir() {
        let p = dir.join("oracle_pairs.csv");
        pairs.write_csv(&p)?;
        r.record(&p)?;
    }
    r.finish_report(&rep)
}

fn fixed_point(s: &Settings) -> anyhow::Result<ParamPoint> {
    let mut p = ParamPoint::default();
    let mut set = |name, v: Option<f64>| {
        if let Some(v) = v {
            p.set(name, v);
        }
    };
    match (s.gamma, s.gamma_left, s.gamma_right) {
        (Some(g), None, None) => set(AxisName::Gamma, Some(g)),
        (None, Some(l), Some(r)) if l == r => set(AxisName::Gamma, Some(l)),
        (None, None, None) => {}
        _ => bail!(usage("grids use equal couplings; set --gamma")),
    }
    if let Some(mu) = s.mu {
        let mb = s.mu_bar.unwrap_or(0.0);
        set(AxisName::C, Some(mu / 2.0 - mb));
        set(AxisName::D, Some(mu / 2.0 + mb));
    }
    set(AxisName::C, s.c);
    set(AxisName::D, s.d);
    set(AxisName::MuBar, s.mu_bar);
    set(AxisName::GammaDephasing, s.gamma_dephasing);
    set(AxisName::Phi, s.phi);
    set(AxisName::Beta, s.beta);
    Ok(p)
}

fn grid_spec(s: &Settings) -> anyhow::Result<GridSpec> {
    let mut g = GridSpec::new(s.axes()?, fixed_point(s)?, s.classifier()?);
    if let Some(n) = s.n {
        g = g.with_n(n);
    }
    if let Some(e) = s.eps {
        g.eps = e;
    }
    if let Some(m) = s.n_max {
        g.n_max = m;
    }
    g.validate()?;
    Ok(g)
}

fn open_cache(s: &Settings) -> anyhow::Result<Option<OracleCache>> {
    Ok(match &s.cache {
        Some(p) => Some(OracleCache::open(p)?),
        None => None,
    })
}

fn close_cache(c: Option<OracleCache>) -> anyhow::Result<()> {
    if let Some(c) = c {
        let (hits, misses) = c.stats();
        log::info!("oracle cache: {hits} hits, {misses} misses, {} entries", c.len());
        c.save()?;
    }
    Ok(())
}

fn scan_cmd(r: &mut Run) -> anyhow::Result<()> {
    let g = grid_spec(r.s)?;
    let cache = open_cache(r.s)?;
    let grid = scan(&g, cache.as_ref())?;
    close_cache(cache)?;
    let dir = r.out_or(".");
    for p in grid.write(&dir.join("scan.csv"))? {
        println!("wrote {}", p.display());
        r.record(&p)?;
    }
    let errors = grid.count(NodeStatus::Error);
    println!(
        "nodes {}  entangled {}  outside {}  errors {errors}",
        grid.nodes.len(),
        grid.entangled_count(),
        grid.count(NodeStatus::Outside)
    );
    for n in grid.errors().take(5) {
        eprintln!("node {:?}: {}", n.coords, n.message.as_deref().unwrap_or(""));
    }
    if r.s.strict && errors > 0 {
        r.manifest.emit(Some(&dir))?;
        bail!("{errors} grid nodes failed");
    }
    Ok(())
}

fn trace_cmd(r: &mut Run) -> anyhow::Result<()> {
    let g = grid_spec(r.s)?;
    let scan_axis: AxisName = match &r.s.scan_axis {
        Some(a) => a.parse().map_err(|e: xxness::Error| usage(e.to_string()))?,
        None => g.axes.last().expect("validated grid").name,
    };
    let cache = open_cache(r.s)?;
    let curve = trace_boundary(&g, scan_axis, r.s.width.unwrap_or(DEFAULT_TRACE_WIDTH), cache.as_ref())?;
    close_cache(cache)?;
    let table = curve.to_table();
    println!("{}", table.columns.join(","));
    for p in &curve.points {
        let mut cells = Vec::new();
        if let Some(f) = p.free {
            cells.push(fmt_num(f));
        }
        cells.extend([fmt_num(p.value), fmt_num(p.est_error), fmt_num(p.lambda)]);
        println!("{}", cells.join(","));
    }
    if let Some(dir) = r.out_dir() {
        let p = dir.join("trace.csv");
        table.write_csv(&p)?;
        r.record(&p)?;
    }
    Ok(())
}

fn figure(r: &mut Run, sel: FigureSelection) -> anyhow::Result<()> {
    let mut opts = FigureOptions::default();
    if let Some(res) = r.s.resolution {
        opts.resolution = res;
    }
    if let Some(e) = r.s.eps {
        opts.eps = e;
    }
    if let Some(m) = r.s.n_max {
        opts.n_max = m;
    }
    if let Some(w) = r.s.width {
        opts.trace_width = w;
    }
    let ids: Vec<FigureId> = match sel {
        FigureSelection::All => FigureId::ALL.to_vec(),
        FigureSelection::One(id) => vec![id],
    };
    let dir = r.out_or("figures");
    let cache = open_cache(r.s)?;
    for id in ids {
        let out = figure_data(id, &dir, &opts, cache.as_ref())?;
        for w in &out.warnings {
            eprintln!("warning: {id}: {w}");
        }
        for p in &out.files {
            println!("wrote {}", p.display());
            r.record(p)?;
        }
        for (k, v) in &out.checks {
            println!("{id} {k} {}", fmt_num(*v));
        }
    }
    close_cache(cache)?;
    if r.s.out.is_none() {
        r.manifest.emit(Some(&dir))?;
    }
    Ok(())
}

fn verify_cmd(r: &mut Run) -> anyhow::Result<()> {
    let mut opts = match r.s.n {
        Some(n) => VerifyOptions::up_to(n),
        None => VerifyOptions::default(),
    };
    if let Some(k) = r.s.samples {
        opts.samples = k;
    }
    if let Some(seed) = r.s.seed {
        opts.seed = seed;
    }
    if let Some(m) = r.s.n_max {
        opts.n_max = m;
    }
    let report = verify::run(&opts);
    println!("{report}");
    if let Some(dir) = r.out_dir().map(Path::to_path_buf) {
        let p = dir.join("verify.json");
        write_json(&p, &report)?;
        r.record(&p)?;
    }
    r.manifest.emit(r.s.out.as_deref())?;
    if !report.all_passed() {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        return Err(anyhow!("failed checks: {}", failed.join(", ")));
    }
    Ok(())
}
