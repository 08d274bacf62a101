use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use twodelay::dynamics::{
    detect_locking, poincare_trace, project3, rotation_number, sweep, LockingResult, SweepOptions,
};
use twodelay::history::ConstantHistory;
use twodelay::integrator::{integrate_model, IntegrationOptions};
use twodelay::normalform::analyze;
use twodelay::registry::{delay_models, multilinear_forms};
use twodelay::spectral::{
    detect_hopf_hopf, find_hopf_hopf, trace_hopf_curve, Branch, HopfHopfPoint, TraceBox,
};
use twodelay::verify::{builtin_golden, verify, GoldenEntry, VerifyOptions};
use twodelay::Parameters;

mod output;
use output::{num, Csv};

#[derive(Parser)]
#[command(name = "twodelay", version, about = "Hopf-Hopf analysis and simulation of a two-delay equation")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace Hopf curves in the (kappa1, kappa2) plane
    HopfCurves(HopfCurvesArgs),
    /// Locate Hopf-Hopf points
    FindHh(FindHhArgs),
    /// Normal-form coefficients and classification at a Hopf-Hopf point
    NormalForm(NormalFormArgs),
    /// Torus-bifurcation rays near a Hopf-Hopf point
    LocalRays(LocalRaysArgs),
    /// Integrate the equation from a constant history
    Simulate(SimulateArgs),
    /// Poincare trace of a long simulation
    Poincare(PoincareArgs),
    /// One-parameter sweep in kappa1 with locking detection
    Sweep(SweepArgs),
    /// Compare against reference values and check invariants
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Parameter file with `key = value` lines
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kappa1: Option<f64>,
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<Parameters> {
        let mut p = match &self.params {
            Some(path) => Parameters::from_file(path)?,
            None => Parameters::default(),
        };
        let overrides = [
            (self.gamma, &mut p.gamma),
            (self.kappa1, &mut p.kappa1),
            (self.kappa2, &mut p.kappa2),
            (self.a1, &mut p.a1),
            (self.a2, &mut p.a2),
            (self.c, &mut p.c),
        ];
        for (v, slot) in overrides {
            if let Some(v) = v {
                *slot = v;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutArgs {
    /// Output file (default: standard output)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn parse_seed(s: &str) -> std::result::Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected four comma-separated numbers kappa1,omega1,kappa2,omega2".to_string())
}

#[derive(Args)]
struct HopfCurvesArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Branches to trace (default: all)
    #[arg(long, value_delimiter = ',')]
    branch: Vec<Branch>,
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    #[arg(long, default_value_t = 14.0)]
    kappa1_max: f64,
    #[arg(long, default_value_t = 4.75)]
    kappa2_max: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct FindHhArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Newton seed kappa1,omega1,kappa2,omega2; without it all traced curves are scanned
    #[arg(long, value_parser = parse_seed)]
    seed: Option<[f64; 4]>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct NormalFormArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Hopf-Hopf seed kappa1,omega1,kappa2,omega2
    #[arg(long, value_parser = parse_seed)]
    hh_seed: [f64; 4],
    /// Quadratic/cubic form evaluation strategy
    #[arg(long, default_value = "taylor")]
    forms: String,
    /// Also write the two torus rays as CSV
    #[arg(long, value_name = "PATH")]
    rays_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    ray_length: f64,
    #[arg(long, default_value_t = 21)]
    ray_samples: usize,
}

#[derive(Args)]
struct LocalRaysArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, value_parser = parse_seed)]
    hh_seed: [f64; 4],
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long, default_value_t = 21)]
    samples: usize,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    history_const: f64,
    #[arg(long, default_value_t = 1e-9)]
    atol: f64,
    #[arg(long, default_value_t = 1e-7)]
    rtol: f64,
    #[arg(long, default_value_t = 0.05)]
    max_step: f64,
    /// Disable the a-priori solution bound check
    #[arg(long)]
    no_bound_check: bool,
}

impl SimArgs {
    fn options(&self) -> IntegrationOptions {
        IntegrationOptions {
            atol: self.atol,
            rtol: self.rtol,
            max_step: self.max_step,
            bound_check: !self.no_bound_check,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 500.0)]
    t_end: f64,
    /// Drop output before this time
    #[arg(long, default_value_t = 0.0)]
    skip: f64,
    /// Sample (t, u, u(t-a1), u(t-a2)) on a uniform grid instead of writing breakpoints
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "state-dependent")]
    model: String,
}

#[derive(Args)]
struct PoincareArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 2000.0)]
    t_end: f64,
    #[arg(long, default_value_t = 300.0)]
    skip: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 31)]
    points: usize,
    #[arg(long, default_value_t = 2000.0)]
    t_end: f64,
    #[arg(long, default_value_t = 300.0)]
    skip: f64,
    /// Start every point from the constant history
    #[arg(long)]
    no_warm_start: bool,
    /// Worker threads (only without warm start)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Long-format trace output (kappa1,u_a1)
    #[arg(long, value_name = "PATH")]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Reference values as JSON (default: built in)
    #[arg(long, value_name = "FILE")]
    golden: Option<PathBuf>,
    /// Write the built-in reference values and exit
    #[arg(long, value_name = "PATH")]
    write_golden: Option<PathBuf>,
    /// Skip the long simulations
    #[arg(long)]
    no_dynamics: bool,
    #[arg(long, default_value_t = 6)]
    bound_simulations: usize,
}

/// Errors caused by the invocation rather than the numerics.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match e.downcast_ref::<twodelay::Error>() {
        Some(twodelay::Error::Config(_) | twodelay::Error::UnknownName { .. }) => 2,
        Some(twodelay::Error::InvalidParameters(_)) if e.chain().count() == 1 => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::HopfCurves(a) => hopf_curves(a),
        Command::FindHh(a) => find_hh(a),
        Command::NormalForm(a) => normal_form(a),
        Command::LocalRays(a) => local_rays(a),
        Command::Simulate(a) => simulate(a),
        Command::Poincare(a) => poincare(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn hopf_curves(a: HopfCurvesArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let branches = if a.branch.is_empty() { Branch::ALL.to_vec() } else { a.branch.clone() };
    let bounds = TraceBox {
        kappa1: (0.0, a.kappa1_max),
        kappa2: (0.0, a.kappa2_max),
    };
    let mut all = Vec::new();
    for b in branches {
        all.extend(trace_hopf_curve(&p, b, bounds, a.step).with_context(|| format!("tracing {b}"))?);
    }
    match a.format {
        Format::Json => output::json(a.out.out.as_deref(), &all),
        Format::Csv => {
            let mut csv = Csv::new(output::open(a.out.out.as_deref())?, &["branch", "kappa1", "kappa2", "omega"])?;
            for h in &all {
                csv.row(&[h.branch_label.clone(), num(h.kappa1), num(h.kappa2), num(h.omega)])?;
            }
            csv.finish()
        }
    }
}

#[derive(Serialize)]
struct HhOut {
    kappa1: f64,
    kappa2: f64,
    omega1: f64,
    omega2: f64,
    residual: f64,
}

impl HhOut {
    fn new(hh: &HopfHopfPoint, p: &Parameters) -> Self {
        Self {
            kappa1: hh.kappa1,
            kappa2: hh.kappa2,
            omega1: hh.omega1,
            omega2: hh.omega2,
            residual: hh.residual(p),
        }
    }
}

fn locate(p: &Parameters, seed: [f64; 4]) -> Result<HopfHopfPoint> {
    let [k1, w1, k2, w2] = seed;
    find_hopf_hopf(p, (k1, w1, k2, w2)).context("Hopf-Hopf solve")
}

fn find_hh(a: FindHhArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let found: Vec<HhOut> = match a.seed {
        Some(seed) => vec![HhOut::new(&locate(&p, seed)?, &p)],
        None => {
            let mut pts: Vec<HopfHopfPoint> = Vec::new();
            for b in Branch::ALL {
                let curve = trace_hopf_curve(&p, b, TraceBox::default(), 0.02)?;
                for hh in detect_hopf_hopf(&p, &curve) {
                    let dup = pts
                        .iter()
                        .any(|q| (q.kappa1 - hh.kappa1).abs() < 1e-8 && (q.kappa2 - hh.kappa2).abs() < 1e-8);
                    if !dup {
                        pts.push(hh);
                    }
                }
            }
            pts.sort_by(|x, y| x.kappa1.total_cmp(&y.kappa1));
            pts.iter().map(|hh| HhOut::new(hh, &p)).collect()
        }
    };
    match a.format {
        Format::Json if a.seed.is_some() => output::json(a.out.out.as_deref(), &found[0]),
        Format::Json => output::json(a.out.out.as_deref(), &found),
        Format::Csv => {
            let mut csv = Csv::new(
                output::open(a.out.out.as_deref())?,
                &["kappa1", "kappa2", "omega1", "omega2", "residual"],
            )?;
            for h in &found {
                csv.nums(&[h.kappa1, h.kappa2, h.omega1, h.omega2, h.residual])?;
            }
            csv.finish()
        }
    }
}

fn normal_form(a: NormalFormArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let forms = multilinear_forms().get(&a.forms)?;
    let hh = locate(&p, a.hh_seed)?;
    let nf = analyze(&p, &hh, forms.as_ref())?;
    if let Some(path) = &a.rays_csv {
        let Some((t1, t2)) = &nf.rays else {
            bail!(twodelay::Error::WrongCase(nf.case.to_string()));
        };
        write_rays(Some(path), &[t1, t2], a.ray_samples, a.ray_length)?;
    }
    output::json(a.out.out.as_deref(), &nf.report())
}

fn write_rays(path: Option<&Path>, rays: &[&twodelay::normalform::TorusRay], n: usize, length: f64) -> Result<()> {
    let mut csv = Csv::new(output::open(path)?, &["ray", "s", "mu1", "mu2", "kappa1", "kappa2"])?;
    for r in rays {
        for row in r.sample(n, length) {
            let mut fields = vec![r.name.clone()];
            fields.extend(row.iter().map(|&v| num(v)));
            csv.row(&fields)?;
        }
    }
    csv.finish()
}

fn local_rays(a: LocalRaysArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let hh = locate(&p, a.hh_seed)?;
    let nf = analyze(&p, &hh, multilinear_forms().get("taylor")?.as_ref())?;
    let Some((t1, t2)) = &nf.rays else {
        bail!(twodelay::Error::WrongCase(nf.case.to_string()));
    };
    write_rays(a.out.out.as_deref(), &[t1, t2], a.samples, a.length)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let model = delay_models().get(&a.model)?;
    let history = ConstantHistory::new(a.sim.history_const, -model.max_lag(&p), 0.0);
    let sol = integrate_model(model.as_ref(), &p, Arc::new(history), a.t_end, &a.sim.options())?;
    let out = output::open(a.out.out.as_deref())?;
    match a.dt {
        Some(dt) => {
            let mut csv = Csv::new(out, &["t", "u", "u_a1", "u_a2"])?;
            for s in project3(&sol, &p, dt)?.iter().filter(|s| s.t >= a.skip) {
                csv.nums(&[s.t, s.u, s.u_a1, s.u_a2])?;
            }
            csv.finish()
        }
        None => {
            let mut csv = Csv::new(out, &["t", "u"])?;
            for (&t, &u) in sol.breakpoints().iter().zip(sol.values()) {
                if t >= a.skip {
                    csv.nums(&[t, u])?;
                }
            }
            csv.finish()
        }
    }
}

#[derive(Serialize)]
struct PoincareOut {
    events: Vec<[f64; 3]>,
    locking: LockingResult,
    rotation_number: Option<f64>,
}

fn poincare(a: PoincareArgs) -> Result<()> {
    let p = a.params.resolve()?;
    let model = delay_models().get("state-dependent")?;
    let history = ConstantHistory::new(a.sim.history_const, -model.max_lag(&p), 0.0);
    let sol = integrate_model(model.as_ref(), &p, Arc::new(history), a.t_end, &a.sim.options())?;
    let trace = poincare_trace(&p, &sol, a.skip)?;
    let locking = detect_locking(&trace, None);
    match locking.ratio() {
        Some((pp, q)) => log::info!("locked {pp}:{q}"),
        None => log::info!("quasi-periodic or unresolved"),
    }
    match a.format {
        Format::Json => output::json(
            a.out.out.as_deref(),
            &PoincareOut {
                events: trace.events.iter().map(|e| [e.t, e.u_a1, e.u_a2]).collect(),
                rotation_number: rotation_number(&trace),
                locking,
            },
        ),
        Format::Csv => {
            let mut csv = Csv::new(output::open(a.out.out.as_deref())?, &["t_event", "u_a1", "u_a2"])?;
            for e in &trace.events {
                csv.nums(&[e.t, e.u_a1, e.u_a2])?;
            }
            csv.finish()
        }
    }
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let p = a.params.resolve()?;
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    if a.threads == 0 {
        return Err(usage("--threads must be positive"));
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| a.from + (a.to - a.from) * i as f64 / (a.points - 1) as f64)
        .collect();
    let opts = SweepOptions {
        t_end: a.t_end,
        skip: a.skip,
        history_const: a.sim.history_const,
        warm_start: !a.no_warm_start,
        threads: a.threads,
        integration: a.sim.options(),
    };
    let recs = sweep(&p, &grid, &opts)?;
    let mut csv = Csv::new(output::open(a.out.out.as_deref())?, &["kappa1", "locked", "p", "q", "amplitude"])?;
    for r in &recs {
        if let Some(e) = &r.error {
            log::warn!("kappa1 = {}: {e}", r.kappa1);
        }
        let ratio = r.locking.as_ref().and_then(|l| l.ratio());
        csv.row(&[
            num(r.kappa1),
            ratio.is_some().to_string(),
            ratio.map_or(String::new(), |x| x.0.to_string()),
            ratio.map_or(String::new(), |x| x.1.to_string()),
            r.amplitude.map_or(String::new(), num),
        ])?;
    }
    csv.finish()?;
    if let Some(path) = &a.trace_out {
        let mut csv = Csv::new(output::open(Some(path))?, &["kappa1", "u_a1"])?;
        for r in &recs {
            for &u in &r.ordinates {
                csv.nums(&[r.kappa1, u])?;
            }
        }
        csv.finish()?;
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    if let Some(path) = &a.write_golden {
        return output::json(Some(path), &builtin_golden());
    }
    let p = a.params.resolve()?;
    let golden: Vec<GoldenEntry> = match &a.golden {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => builtin_golden(),
    };
    let report = verify(
        &p,
        &golden,
        &VerifyOptions {
            bound_simulations: a.bound_simulations,
            dynamics: !a.no_dynamics,
        },
    );
    println!("{report}");
    if report.all_pass() {
        Ok(())
    } else {
        bail!("{} check(s) failed", report.failures().count())
    }
}
