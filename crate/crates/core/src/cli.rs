//! The `abdirac` command-line front end.
//!
//! Every subcommand accepts `--config <file.json>` holding a [`RunConfig`];
//! explicit flags override values from the file. Outputs embed the resolved
//! configuration and [`crate::VERSION`] and contain no timing information, so
//! identical inputs give byte-identical files.
//!
//! Exit codes: 0 on a completed run, 2 on usage or configuration errors, 1 on
//! numerical failures (a diagnostic JSON object goes to stderr). `selftest`
//! also exits with 1 when any of its checks fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::estimates::{
    bessel_average, landau_sup, smoothing_constant, verify_kss, verify_local_smoothing,
    verify_norm_identity, verify_weighted_strichartz, EstimateReport, KssConfig, KssWeight,
    SmoothingConfig, StrichartzConfig,
};
use crate::fracpow::{kernel_closed_form, kernel_quadrature};
use crate::grids::{GridScheme, GridSpec, RadialGrid, RadialSpinor};
use crate::partialwave::ChannelSet;
use crate::propagator::{evolve_oracle, evolve_spectral_times, select_convention, time_grid, Trajectory};
use crate::spectral::{BranchConvention, Channel, SpectralPlan};
use crate::{Error, Result, VERSION};

#[derive(Debug, Parser)]
#[command(name = "abdirac", version, about = "Spectral toolkit for the Aharonov-Bohm Dirac operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the built-in invariant suite.
    #[command(after_help = "Output (JSON): {version, command, config, checks: [{name, value, tolerance, pass}], pass}.")]
    Selftest(SelftestArgs),
    /// Evolve one channel in time.
    #[command(after_help = PROPAGATE_HELP)]
    Propagate(PropagateArgs),
    /// Local smoothing ratios against the explicit constant.
    #[command(after_help = SMOOTHING_HELP)]
    Smoothing(SmoothingArgs),
    /// Growth exponents of weighted space-time norms.
    #[command(after_help = KSS_HELP)]
    Kss(KssArgs),
    /// Weighted Strichartz ratios for random multi-channel data.
    #[command(after_help = STRICHARTZ_HELP)]
    Strichartz(StrichartzArgs),
    /// Bessel averages (1/R) int_0^R J_lambda(r)^2 r dr and Landau suprema.
    #[command(after_help = BESSEL_HELP)]
    Bessel(BesselArgs),
    /// Integral kernel of |D|^p in closed form and by quadrature.
    #[command(after_help = KERNEL_HELP)]
    Kernel(KernelArgs),
    /// Compare ||D_A f|| with ||grad_A f|| on random channel data.
    #[command(after_help = NORMCHECK_HELP)]
    Normcheck(NormcheckArgs),
}

const PROPAGATE_HELP: &str = "Output (JSON): {version, command, config, convention, spectral: trajectory, oracle: trajectory, discrepancy: [relative L2 difference per snapshot]}.\n\
Trajectories hold {times, states} with states in channel-set form {grid, l_min, l_max, channels: [{l, f_re, f_im, g_re, g_im}]}.\n\
Output (CSV): columns t, norm_spectral, norm_oracle, discrepancy.";
const SMOOTHING_HELP: &str = "Output (JSON): one estimate report per gamma.\n\
Output (CSV): columns gamma, alpha, l, max_ratio_sq, bound, ratio, sharp_constant, time_route_rel_diff, pass.";
const KSS_HELP: &str = "Output (JSON): one estimate report per mu.\n\
Output (CSV): columns mu, weight, T, norm, exponent, pass.";
const STRICHARTZ_HELP: &str = "Output (JSON): estimate report with per-sample ratios.\n\
Output (CSV): columns sample, ratio.";
const BESSEL_HELP: &str = "Output (CSV, default): columns lambda, R, average.\n\
Output (JSON): {rows: [{lambda, R, average}], landau_sup: [{lambda, value}]}.";
const KERNEL_HELP: &str = "Output (JSON): {closed_form: {f, g}, quadrature: {value: {f, g}, error_estimate, converged}}.\n\
Output (CSV): columns r, s, f_closed, g_closed, f_quadrature, g_quadrature, error_estimate.";
const NORMCHECK_HELP: &str = "Output (JSON): estimate report with lhs = ||D_A f||, bound = ||grad_A f||.\n\
Output (CSV): columns alpha, dirac_norm, gradient_norm, relative_difference, pass.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Spectral,
    Oracle,
    Both,
}

/// Values accepted from `--config`. Every field is optional; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub l: Option<i32>,
    pub l_min: Option<i32>,
    pub l_max: Option<i32>,
    pub gamma: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub q: Option<f64>,
    pub epsilon: Option<f64>,
    pub lambda: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub r_max: Option<f64>,
    pub n_r: Option<usize>,
    pub e_max: Option<f64>,
    pub n_e: Option<usize>,
    pub grid_scheme: Option<GridScheme>,
    pub times: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub dt_oracle: Option<f64>,
    pub time_window: Option<f64>,
    pub snapshots: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub weight: Option<KssWeight>,
    pub method: Option<Method>,
    pub initial: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON file with default values for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Radial grid extent.
    #[arg(long)]
    r_max: Option<f64>,
    /// Number of radial nodes.
    #[arg(long)]
    n_r: Option<usize>,
    /// Energy grid extent.
    #[arg(long)]
    e_max: Option<f64>,
    /// Number of energy nodes.
    #[arg(long)]
    n_e: Option<usize>,
    /// Quadrature scheme of both grids.
    #[arg(long, value_enum)]
    grid_scheme: Option<SchemeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    CompositeGauss,
    UniformTrapezoid,
}

impl From<SchemeArg> for GridScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::CompositeGauss => GridScheme::CompositeGauss,
            SchemeArg::UniformTrapezoid => GridScheme::UniformTrapezoid,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: Common,
    /// Seed of the random sample data.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
struct PropagateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Flux parameter.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Channel index.
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    /// Final time (may be negative).
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Number of snapshot intervals on [0, t].
    #[arg(long)]
    snapshots: Option<usize>,
    /// Time step of the Crank-Nicolson oracle.
    #[arg(long)]
    dt_oracle: Option<f64>,
    /// Evolution method.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Initial data: gaussian(r0,sigma,component) with component f, g or both,
    /// or a path to a radial spinor in JSON form.
    #[arg(long)]
    initial: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct SmoothingArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    /// Smoothing exponents (comma separated).
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Number of random samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Half-width of the time window of the time-domain route.
    #[arg(long)]
    time_window: Option<f64>,
    /// Snapshot spacing of the time-domain route.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct KssArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    /// Weight exponents (comma separated, nonpositive).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu: Option<Vec<f64>>,
    /// Weight kind.
    #[arg(long, value_enum)]
    weight: Option<WeightArg>,
    /// Window lengths T (comma separated, ascending).
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Snapshot spacing.
    #[arg(long)]
    dt: Option<f64>,
    /// Width of the initial Gaussian.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Japanese,
    Homogeneous,
}

impl From<WeightArg> for KssWeight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Japanese => KssWeight::Japanese,
            WeightArg::Homogeneous => KssWeight::Homogeneous,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct StrichartzArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Time-space integrability exponent (q >= 2).
    #[arg(long)]
    q: Option<f64>,
    /// Regularity loss epsilon in (0, 1/2).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l_min: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    l_max: Option<i32>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    time_window: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct BesselArgs {
    #[command(flatten)]
    common: Common,
    /// Bessel orders (comma separated).
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Largest radius R.
    #[arg(long)]
    rmax: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i32>,
    /// Exponent p of |D|^p (negative).
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// First radii (comma separated).
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<f64>>,
    /// Second radius.
    #[arg(long)]
    s: Option<f64>,
    /// Energy cutoff of the quadrature; 0 skips the quadrature.
    #[arg(long)]
    e_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct NormcheckArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l_min: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    l_max: Option<i32>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

struct Rendered {
    json: Value,
    csv: Option<String>,
    default_format: Format,
    pass: bool,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn parse_and_dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (common, outcome) = dispatch(cli.command);
    match outcome {
        Ok(r) => {
            let file = common.1;
            let format = common.0.unwrap_or(r.default_format);
            let text = match (format, &r.csv) {
                (Format::Csv, Some(csv)) => csv.clone(),
                (Format::Csv, None) => {
                    eprintln!("this subcommand has no CSV form");
                    return 2;
                }
                (Format::Json, _) => {
                    let mut s = serde_json::to_string_pretty(&r.json).expect("serializable");
                    s.push('\n');
                    s
                }
            };
            if let Err(e) = write_output(file.as_deref(), &text) {
                eprintln!("{}", diagnostic(&Error::from(e)));
                return 1;
            }
            if r.pass {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("{}", diagnostic(&e));
            1
        }
    }
}

fn diagnostic(e: &Error) -> String {
    serde_json::to_string_pretty(&json!({ "version": VERSION, "error": format!("{e:?}"), "message": e.to_string() }))
        .expect("serializable")
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

type Outcome = ((Option<Format>, Option<PathBuf>), std::result::Result<Rendered, Failure>);

fn dispatch(cmd: Command) -> Outcome {
    let common = match &cmd {
        Command::Selftest(a) => a.common.clone(),
        Command::Propagate(a) => a.common.clone(),
        Command::Smoothing(a) => a.common.clone(),
        Command::Kss(a) => a.common.clone(),
        Command::Strichartz(a) => a.common.clone(),
        Command::Bessel(a) => a.common.clone(),
        Command::Kernel(a) => a.common.clone(),
        Command::Normcheck(a) => a.common.clone(),
    };
    let file = match load_config(common.config.as_deref()) {
        Ok(f) => f,
        Err(e) => return ((common.format, common.output), Err(usage(e))),
    };
    let format = common.format.or(file.format);
    let output = common.output.clone().or(file.output.clone());
    let result = match cmd {
        Command::Selftest(a) => selftest(a.seed.or(file.seed).unwrap_or(42)),
        Command::Propagate(a) => propagate(&a, &file),
        Command::Smoothing(a) => smoothing(&a, &file),
        Command::Kss(a) => kss(&a, &file),
        Command::Strichartz(a) => strichartz(&a, &file),
        Command::Bessel(a) => bessel(&a, &file),
        Command::Kernel(a) => kernel(&a, &file),
        Command::Normcheck(a) => normcheck(&a, &file),
    };
    ((format, output), result)
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

fn envelope(command: &str, config: Value, body: Value) -> Value {
    let mut v = json!({ "version": VERSION, "command": command, "config": config });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn csv_header(command: &str, config: &Value, columns: &[&str]) -> String {
    let mut s = format!("# {VERSION}\n# command: {command}\n# config: {config}\n");
    s.push_str(&columns.join(","));
    s.push('\n');
    s
}

/// Scientific notation with 15 significant digits.
fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn resolve_grid(args: Option<&GridArgs>, file: &RunConfig, default_r: GridSpec, default_e: GridSpec) -> (GridSpec, GridSpec) {
    let scheme_flag = args.and_then(|a| a.grid_scheme).map(GridScheme::from);
    let r_scheme = scheme_flag.or(file.grid_scheme).unwrap_or(default_r.scheme);
    let e_scheme = scheme_flag.or(file.grid_scheme).unwrap_or(default_e.scheme);
    let r = GridSpec {
        max: args.and_then(|a| a.r_max).or(file.r_max).unwrap_or(default_r.max),
        n: args.and_then(|a| a.n_r).or(file.n_r).unwrap_or(default_r.n),
        scheme: r_scheme,
    };
    let e = GridSpec {
        max: args.and_then(|a| a.e_max).or(file.e_max).unwrap_or(default_e.max),
        n: args.and_then(|a| a.n_e).or(file.n_e).unwrap_or(default_e.n),
        scheme: e_scheme,
    };
    (r, e)
}

fn check_grid(spec: GridSpec) -> std::result::Result<(), Failure> {
    RadialGrid::new(spec).map(|_| ()).map_err(usage)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: &str, value: f64, tolerance: f64) -> Check {
    Check { name: name.into(), value, tolerance, pass: value.is_finite() && value.abs() <= tolerance }
}

fn selftest(seed: u64) -> std::result::Result<Rendered, Failure> {
    use crate::specfun::{bessel_j, gamma_fn, gauss_2f1, gauss_2f1_at_one, BesselOrder, HypergeometricParams};
    let mut checks = Vec::new();
    let o = |v: f64| BesselOrder::new(v).expect("valid order");

    checks.push(check("gamma(1/2) = sqrt(pi)", gamma_fn(0.5)? - std::f64::consts::PI.sqrt(), 1e-14));
    checks.push(check("J_5(30)", bessel_j(o(5.0), 30.0) + 0.14324029551207708, 1e-12));
    checks.push(check("J_30(20)", (bessel_j(o(30.0), 20.0) - 1.2401536360354328e-4) / 1.2401536360354328e-4, 1e-9));
    let x = 7.3;
    let half = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin();
    checks.push(check("J_1/2 closed form", bessel_j(o(0.5), x) - half, 1e-13));
    let z = 0.5f64;
    checks.push(check("2F1(1,1;2;z) = -ln(1-z)/z", gauss_2f1(HypergeometricParams::new(1.0, 1.0, 2.0)?, z)? + (1.0 - z).ln() / z, 1e-13));
    let one = gauss_2f1_at_one(HypergeometricParams::new(0.3, 0.4, 2.2)?)?;
    checks.push(check("2F1 at one vs z -> 1", (gauss_2f1(HypergeometricParams::new(0.3, 0.4, 2.2)?, 1.0 - 1e-9)? - one) / one, 1e-6));

    // transform
    let rg = Arc::new(RadialGrid::new(GridSpec::composite(40.0, 1600))?);
    let eg = Arc::new(crate::grids::EnergyGrid::new(GridSpec::composite(20.0, 1600))?);
    let data: Vec<RadialSpinor> = normcheck_data(rg.clone(), 0, 2, seed)?.channels.into_values().collect();
    for &(l, alpha) in &[(0, 0.3), (-1, 0.3), (3, 0.5)] {
        let plan = SpectralPlan::new(Channel::new(l, alpha)?, rg.clone(), eg.clone());
        let cs = plan.forward_batch(&data);
        let back = plan.inverse_batch(&cs);
        let (mut iso, mut rt) = (0.0f64, 0.0f64);
        for ((d, c), b) in data.iter().zip(&cs).zip(&back) {
            iso = iso.max((c.l2_norm() - d.l2_norm()).abs() / d.l2_norm());
            rt = rt.max(b.rel_diff(d));
        }
        checks.push(check(&format!("isometry l={l} alpha={alpha}"), iso, 1e-3));
        checks.push(check(&format!("round trip l={l} alpha={alpha}"), rt, 1e-3));
    }

    // kernel
    let ch = Channel::new(0, 0.3)?;
    let closed = kernel_closed_form(ch, -0.6, 1.0, 2.0)?;
    let quad = kernel_quadrature(ch, -0.6, 1.0, 2.0, 4000.0, 0.005)?;
    checks.push(check("kernel closed form vs quadrature", closed.rel_diff(&quad.value), 1e-3));

    // propagation
    let ug = Arc::new(RadialGrid::new(GridSpec::uniform(40.0, 4000))?);
    let ueg = Arc::new(crate::grids::EnergyGrid::new(GridSpec::composite(12.0, 1600))?);
    let phi = crate::estimates::bump(ug.clone(), 12.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.5));
    let free = Channel::new(0, 0.0)?;
    let plan = SpectralPlan::new(free, ug.clone(), ueg);
    let choice = select_convention(&plan, &phi, 1.0, 0.005)?;
    checks.push(check("spectral vs oracle, alpha=0 l=0, t=1", choice.discrepancy_signed, 1e-2));
    let oracle = evolve_oracle(free, &phi, 0.5, 0.01)?;
    checks.push(check("oracle unitarity", (oracle.l2_norm() - phi.l2_norm()) / phi.l2_norm(), 1e-10));

    // estimates
    checks.push(check(
        "smoothing constant at (1, 0.5, 0)",
        smoothing_constant(1.0, 0.5, 0)? - 2.0 * std::f64::consts::PI / 3.0,
        1e-12,
    ));
    let mut previous = f64::INFINITY;
    let mut increases = 0.0;
    for l in 0..6 {
        let c = smoothing_constant(0.9, 0.3, l)?;
        if c > previous {
            increases += 1.0;
        }
        previous = c;
    }
    checks.push(check("smoothing constant monotone in l", increases, 0.0));
    checks.push(check("landau sup at 1/2", landau_sup(0.5, 60.0)? - (2.0 / std::f64::consts::PI).sqrt(), 1e-3));
    checks.push(check("bessel average bounded", (bessel_average(0.3, 1000.0)? - 1.0).max(0.0), 0.0));
    let ng = Arc::new(RadialGrid::new(GridSpec::composite(30.0, 3000))?);
    let set = normcheck_data(ng, -1, 1, seed)?;
    let rep = verify_norm_identity(&set, 0.5)?;
    checks.push(check("norm identity alpha=0.5", rep.details.get("relative_difference").copied().unwrap_or(0.0), 1e-3));

    let pass = checks.iter().all(|c| c.pass);
    let config = json!({ "seed": seed });
    let mut csv = csv_header("selftest", &config, &["name", "value", "tolerance", "pass"]);
    for c in &checks {
        let _ = writeln!(csv, "\"{}\",{},{},{}", c.name, num(c.value), num(c.tolerance), c.pass);
    }
    Ok(Rendered {
        json: envelope("selftest", config, json!({ "checks": checks, "pass": pass })),
        csv: Some(csv),
        default_format: Format::Json,
        pass,
    })
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct PropagateConfig {
    alpha: f64,
    l: i32,
    t: f64,
    snapshots: usize,
    dt_oracle: f64,
    method: Method,
    initial: String,
    radial: GridSpec,
    energy: GridSpec,
}

fn parse_initial(spec: &str, grid: Arc<RadialGrid>) -> Result<RadialSpinor> {
    if let Some(inner) = spec.strip_prefix("gaussian(").and_then(|s| s.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameter(format!("expected gaussian(r0,sigma,component), got {spec}")));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("not a number: {s}")))
        };
        let (r0, sigma) = (parse(parts[0])?, parse(parts[1])?);
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (af, ag) = match parts[2] {
            "f" => (one, zero),
            "g" => (zero, one),
            "both" => (one, Complex64::new(0.0, 1.0)),
            other => return Err(Error::InvalidParameter(format!("unknown component {other}"))),
        };
        Ok(crate::estimates::bump(grid, r0, sigma, af, ag))
    } else {
        let text = std::fs::read_to_string(spec)?;
        let phi: RadialSpinor = serde_json::from_str(&text)?;
        if phi.grid.spec() != grid.spec() {
            return Err(Error::InvalidParameter("initial data lives on a different radial grid".into()));
        }
        Ok(phi)
    }
}

fn propagate(a: &PropagateArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let method = a.method.or(file.method).unwrap_or(Method::Both);
    let (radial, energy) = resolve_grid(
        Some(&a.grid),
        file,
        GridSpec::uniform(40.0, 4000),
        GridSpec::composite(12.0, 1600),
    );
    let cfg = PropagateConfig {
        alpha: a.alpha.or(file.alpha).unwrap_or(0.3),
        l: a.l.or(file.l).unwrap_or(0),
        t: a.t.or(file.t).unwrap_or(1.0),
        snapshots: a.snapshots.or(file.snapshots).unwrap_or(4),
        dt_oracle: a.dt_oracle.or(file.dt_oracle).unwrap_or(1e-3),
        method,
        initial: a.initial.clone().or(file.initial.clone()).unwrap_or_else(|| "gaussian(12,1,both)".into()),
        radial,
        energy,
    };
    let ch = Channel::new(cfg.l, cfg.alpha).map_err(usage)?;
    if cfg.snapshots == 0 || !(cfg.dt_oracle > 0.0) {
        return Err(Failure::Usage("snapshots and dt-oracle must be positive".into()));
    }
    if method != Method::Spectral && radial.scheme != GridScheme::UniformTrapezoid {
        return Err(Failure::Usage("the oracle needs --grid-scheme uniform-trapezoid".into()));
    }
    check_grid(radial)?;
    check_grid(energy)?;
    let rg = Arc::new(RadialGrid::new(radial)?);
    let eg = Arc::new(crate::grids::EnergyGrid::new(energy)?);
    let phi = parse_initial(&cfg.initial, rg.clone()).map_err(usage)?;
    let times = time_grid(0.0, cfg.t, cfg.snapshots);
    let ascending: Vec<f64> = if cfg.t < 0.0 { times.iter().rev().copied().collect() } else { times.clone() };
    let wrap = |states: Vec<RadialSpinor>| -> Result<Trajectory> {
        let mut sets = Vec::with_capacity(states.len());
        for s in states {
            sets.push(ChannelSet::from_channels(rg.clone(), [(cfg.l, s)])?);
        }
        if cfg.t < 0.0 {
            sets.reverse();
        }
        Trajectory::new(ascending.clone(), sets)
    };

    let mut body = serde_json::Map::new();
    let mut spectral_states = None;
    if method != Method::Oracle {
        let plan = SpectralPlan::new(ch, rg.clone(), eg.clone());
        if method == Method::Both {
            let choice = select_convention(&plan, &phi, cfg.t, cfg.dt_oracle)?;
            body.insert("convention".into(), serde_json::to_value(&choice).map_err(Error::from)?);
        }
        let states = evolve_spectral_times(&plan, &phi, &times, BranchConvention::Signed);
        spectral_states = Some(states.clone());
        body.insert("spectral".into(), serde_json::to_value(wrap(states)?).map_err(Error::from)?);
    }
    let mut oracle_states = None;
    if method != Method::Spectral {
        let mut states = vec![phi.clone()];
        for w in times.windows(2) {
            let last = states.last().expect("nonempty");
            states.push(evolve_oracle(ch, last, w[1] - w[0], cfg.dt_oracle)?);
        }
        oracle_states = Some(states.clone());
        body.insert("oracle".into(), serde_json::to_value(wrap(states)?).map_err(Error::from)?);
    }
    let discrepancy: Option<Vec<f64>> = match (&spectral_states, &oracle_states) {
        (Some(s), Some(o)) => Some(s.iter().zip(o).map(|(a, b)| a.rel_diff(b)).collect()),
        _ => None,
    };
    if let Some(d) = &discrepancy {
        body.insert("discrepancy".into(), json!(d));
    }
    let config = serde_json::to_value(&cfg).map_err(Error::from)?;
    let mut csv = csv_header("propagate", &config, &["t", "norm_spectral", "norm_oracle", "discrepancy"]);
    for (i, t) in times.iter().enumerate() {
        let ns = spectral_states.as_ref().map(|s| num(s[i].l2_norm())).unwrap_or_default();
        let no = oracle_states.as_ref().map(|s| num(s[i].l2_norm())).unwrap_or_default();
        let d = discrepancy.as_ref().map(|d| num(d[i])).unwrap_or_default();
        let _ = writeln!(csv, "{},{ns},{no},{d}", num(*t));
    }
    Ok(Rendered {
        json: envelope("propagate", config, Value::Object(body)),
        csv: Some(csv),
        default_format: Format::Json,
        pass: true,
    })
}

// ---------------------------------------------------------------------------

fn reports_json(command: &str, config: Value, reports: &[EstimateReport]) -> std::result::Result<Value, Failure> {
    Ok(envelope(command, config, json!({ "reports": serde_json::to_value(reports).map_err(Error::from)? })))
}

fn detail(r: &EstimateReport, key: &str) -> String {
    r.details.get(key).map(|v| num(*v)).unwrap_or_default()
}

fn smoothing(a: &SmoothingArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let d = SmoothingConfig::default();
    let (radial, energy) = resolve_grid(Some(&a.grid), file, d.radial, d.energy);
    let gammas = a.gamma.clone().or(file.gamma.clone()).unwrap_or_else(|| vec![d.gamma]);
    let base = SmoothingConfig {
        alpha: a.alpha.or(file.alpha).unwrap_or(d.alpha),
        l: a.l.or(file.l).unwrap_or(d.l),
        samples: a.samples.or(file.samples).unwrap_or(d.samples),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        time_window: a.time_window.or(file.time_window).unwrap_or(d.time_window),
        dt: a.dt.or(file.dt).unwrap_or(d.dt),
        radial,
        energy,
        ..d
    };
    let cfgs: Vec<SmoothingConfig> = gammas.iter().map(|&gamma| SmoothingConfig { gamma, ..base.clone() }).collect();
    check_grid(radial)?;
    check_grid(energy)?;
    for c in &cfgs {
        c.validate().map_err(usage)?;
    }
    let reports: Vec<EstimateReport> = cfgs.iter().map(verify_local_smoothing).collect::<Result<_>>()?;
    let config = serde_json::to_value(&cfgs).map_err(Error::from)?;
    let mut csv = csv_header(
        "smoothing",
        &config,
        &["gamma", "alpha", "l", "max_ratio_sq", "bound", "ratio", "sharp_constant", "time_route_rel_diff", "pass"],
    );
    for (c, r) in cfgs.iter().zip(&reports) {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            num(c.gamma),
            num(c.alpha),
            c.l,
            num(r.lhs),
            r.bound.map(num).unwrap_or_default(),
            r.ratio.map(num).unwrap_or_default(),
            detail(r, "sharp_constant"),
            detail(r, "time_route_rel_diff"),
            r.pass
        );
    }
    Ok(Rendered {
        json: reports_json("smoothing", config, &reports)?,
        csv: Some(csv),
        default_format: Format::Json,
        pass: true,
    })
}

fn kss(a: &KssArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let d = KssConfig::default();
    let (radial, energy) = resolve_grid(Some(&a.grid), file, d.radial, d.energy);
    let mus = a.mu.clone().or(file.mu.clone()).unwrap_or_else(|| vec![0.0, -0.25, -1.0]);
    let base = KssConfig {
        alpha: a.alpha.or(file.alpha).unwrap_or(d.alpha),
        l: a.l.or(file.l).unwrap_or(d.l),
        weight: a.weight.map(KssWeight::from).or(file.weight).unwrap_or(d.weight),
        times: a.times.clone().or(file.times.clone()).unwrap_or(d.times.clone()),
        dt: a.dt.or(file.dt).unwrap_or(d.dt),
        sigma: a.sigma.or(file.sigma).unwrap_or(d.sigma),
        radial,
        energy,
        ..d
    };
    check_grid(radial)?;
    check_grid(energy)?;
    Channel::new(base.l, base.alpha).map_err(usage)?;
    if mus.iter().any(|&m| m > 0.0) || base.times.iter().any(|&t| t < 1.0) || !(base.dt > 0.0) {
        return Err(Failure::Usage("need mu <= 0, T >= 1 and dt > 0".into()));
    }
    if base.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::Usage("times must be ascending".into()));
    }
    let cfgs: Vec<KssConfig> = mus.iter().map(|&mu| KssConfig { mu, ..base.clone() }).collect();
    let reports: Vec<EstimateReport> = cfgs.iter().map(verify_kss).collect::<Result<_>>()?;
    let config = serde_json::to_value(&cfgs).map_err(Error::from)?;
    let mut csv = csv_header("kss", &config, &["mu", "weight", "T", "norm", "exponent", "pass"]);
    for (c, r) in cfgs.iter().zip(&reports) {
        let weight = match c.weight {
            KssWeight::Japanese => "japanese",
            KssWeight::Homogeneous => "homogeneous",
        };
        for (t, v) in r.series["times"].iter().zip(&r.series["norms"]) {
            let _ = writeln!(csv, "{},{weight},{},{},{},{}", num(c.mu), num(*t), num(*v), num(r.lhs), r.pass);
        }
    }
    Ok(Rendered { json: reports_json("kss", config, &reports)?, csv: Some(csv), default_format: Format::Json, pass: true })
}

fn strichartz(a: &StrichartzArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let d = StrichartzConfig::default();
    let (radial, energy) = resolve_grid(Some(&a.grid), file, d.radial, d.energy);
    let cfg = StrichartzConfig {
        alpha: a.alpha.or(file.alpha).unwrap_or(d.alpha),
        q: a.q.or(file.q).unwrap_or(d.q),
        epsilon: a.epsilon.or(file.epsilon).unwrap_or(d.epsilon),
        l_min: a.l_min.or(file.l_min).unwrap_or(d.l_min),
        l_max: a.l_max.or(file.l_max).unwrap_or(d.l_max),
        samples: a.samples.or(file.samples).unwrap_or(d.samples),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        time_window: a.time_window.or(file.time_window).unwrap_or(d.time_window),
        dt: a.dt.or(file.dt).unwrap_or(d.dt),
        radial,
        energy,
    };
    check_grid(radial)?;
    check_grid(energy)?;
    if !(cfg.q >= 2.0 && cfg.q.is_finite()) || !(cfg.epsilon > 0.0 && cfg.epsilon < 0.5) {
        return Err(Failure::Usage("need 2 <= q < inf and 0 < epsilon < 1/2".into()));
    }
    if cfg.l_max < cfg.l_min || !(cfg.time_window > 0.0 && cfg.dt > 0.0) {
        return Err(Failure::Usage("need l_min <= l_max and positive time window and step".into()));
    }
    for l in cfg.l_min..=cfg.l_max {
        Channel::new(l, cfg.alpha).map_err(usage)?;
    }
    let report = verify_weighted_strichartz(&cfg)?;
    let config = serde_json::to_value(&cfg).map_err(Error::from)?;
    let mut csv = csv_header("strichartz", &config, &["sample", "ratio"]);
    for (i, v) in report.series["ratios"].iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", num(*v));
    }
    Ok(Rendered {
        json: reports_json("strichartz", config, std::slice::from_ref(&report))?,
        csv: Some(csv),
        default_format: Format::Json,
        pass: true,
    })
}

fn bessel(a: &BesselArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let lambdas = a.lambda.clone().or(file.lambda.clone()).unwrap_or_else(|| vec![1.0, 2.0, 5.0, 10.0]);
    let rmax = a.rmax.or(file.r_max).unwrap_or(1000.0);
    if !(rmax >= 1.0) || lambdas.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(Failure::Usage("need rmax >= 1 and nonnegative orders".into()));
    }
    let mut radii = Vec::new();
    let mut decade = 1.0;
    'outer: loop {
        for m in [1.0, 2.0, 5.0] {
            let r = m * decade;
            if r >= rmax {
                break 'outer;
            }
            radii.push(r);
        }
        decade *= 10.0;
    }
    radii.push(rmax);
    let config = json!({ "lambda": lambdas, "rmax": rmax, "radii": radii });
    let mut rows = Vec::new();
    let mut csv = csv_header("bessel", &config, &["lambda", "R", "average"]);
    for &lam in &lambdas {
        for &r in &radii {
            let v = bessel_average(lam, r)?;
            let _ = writeln!(csv, "{},{},{}", num(lam), num(r), num(v));
            rows.push(json!({ "lambda": lam, "R": r, "average": v }));
        }
    }
    let mut sups = Vec::new();
    for &lam in &lambdas {
        let v = landau_sup(lam, (4.0 * lam * lam + 50.0).max(rmax.min(500.0)))?;
        sups.push(json!({ "lambda": lam, "value": v }));
    }
    Ok(Rendered {
        json: envelope("bessel", config, json!({ "rows": rows, "landau_sup": sups })),
        csv: Some(csv),
        default_format: Format::Csv,
        pass: true,
    })
}

fn kernel(a: &KernelArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let alpha = a.alpha.or(file.alpha).unwrap_or(0.3);
    let l = a.l.or(file.l).unwrap_or(0);
    let p = a.p.or(file.p).unwrap_or(-0.6);
    let rs = a.r.clone().or(file.r.clone()).unwrap_or_else(|| vec![0.5, 1.0, 1.5]);
    let s = a.s.or(file.s).unwrap_or(2.0);
    let e_max = a.e_max.or(file.e_max).unwrap_or(4000.0);
    let ch = Channel::new(l, alpha).map_err(usage)?;
    let (lo, hi) = crate::fracpow::kernel_exponent_range(ch);
    if !(p > lo && p < hi) {
        return Err(Failure::Usage(format!("p = {p} outside ({lo}, {hi})")));
    }
    let config = json!({ "alpha": alpha, "l": l, "p": p, "r": rs, "s": s, "e_max": e_max });
    let mut entries = Vec::new();
    let mut csv = csv_header(
        "kernel",
        &config,
        &["r", "s", "f_closed", "g_closed", "f_quadrature", "g_quadrature", "error_estimate"],
    );
    for &r in &rs {
        let closed = kernel_closed_form(ch, p, r, s).map_err(usage)?;
        let quad = if e_max > 0.0 { Some(kernel_quadrature(ch, p, r, s, e_max, 0.005)?) } else { None };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            num(r),
            num(s),
            num(closed.f),
            num(closed.g),
            quad.as_ref().map(|q| num(q.value.f)).unwrap_or_default(),
            quad.as_ref().map(|q| num(q.value.g)).unwrap_or_default(),
            quad.as_ref().map(|q| num(q.error_estimate)).unwrap_or_default()
        );
        entries.push(json!({ "r": r, "s": s, "closed_form": closed, "quadrature": quad }));
    }
    Ok(Rendered {
        json: envelope("kernel", config, json!({ "entries": entries })),
        csv: Some(csv),
        default_format: Format::Json,
        pass: true,
    })
}

/// Random bumps per channel, narrow enough to vanish at both grid ends.
pub fn normcheck_data(grid: Arc<RadialGrid>, l_min: i32, l_max: i32, seed: u64) -> Result<ChannelSet> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut chans = Vec::new();
    for l in l_min..=l_max {
        let r0 = rng.gen_range(6.0..14.0);
        let sigma = rng.gen_range(0.5..1.0);
        let af = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let ag = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        chans.push((l, crate::estimates::bump(grid.clone(), r0, sigma, af, ag)));
    }
    ChannelSet::from_channels(grid, chans)
}

fn normcheck(a: &NormcheckArgs, file: &RunConfig) -> std::result::Result<Rendered, Failure> {
    let (radial, _) = resolve_grid(
        Some(&a.grid),
        file,
        GridSpec::composite(30.0, 3000),
        GridSpec::composite(1.0, 1),
    );
    let alpha = a.alpha.or(file.alpha).unwrap_or(0.5);
    let l_min = a.l_min.or(file.l_min).unwrap_or(-1);
    let l_max = a.l_max.or(file.l_max).unwrap_or(1);
    let seed = a.seed.or(file.seed).unwrap_or(42);
    check_grid(radial)?;
    if l_max < l_min {
        return Err(Failure::Usage("need l_min <= l_max".into()));
    }
    if radial.max < 20.0 {
        return Err(Failure::Usage("normcheck data needs r_max >= 20".into()));
    }
    let rg = Arc::new(RadialGrid::new(radial)?);
    let set = normcheck_data(rg, l_min, l_max, seed)?;
    let report = verify_norm_identity(&set, alpha)?;
    let config = json!({ "alpha": alpha, "l_min": l_min, "l_max": l_max, "seed": seed, "radial": radial });
    let mut csv = csv_header("normcheck", &config, &["alpha", "dirac_norm", "gradient_norm", "relative_difference", "pass"]);
    let _ = writeln!(
        csv,
        "{},{},{},{},{}",
        num(alpha),
        num(report.lhs),
        report.bound.map(num).unwrap_or_default(),
        detail(&report, "relative_difference"),
        report.pass
    );
    Ok(Rendered {
        json: reports_json("normcheck", config, std::slice::from_ref(&report))?,
        csv: Some(csv),
        default_format: Format::Json,
        pass: true,
    })
}
