//! Command-line front end over the band-structure library: computes band
//! diagrams, asymptotic error series, quasi-mode residuals, localization
//! series, negative-eigenvalue counts, and norm bounds, writing plot-ready
//! CSV plus a JSON manifest that echoes the fully resolved configuration.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wirebands_core::agmon::{
    rho_tail_mass, weighted_norm, AgmonWeight, WeightRepresentation,
};
use wirebands_core::bands::{band_family, BandConfig};
use wirebands_core::counting::{
    accumulation_demo, hs_bound, iota_norm, IotaFunction, SeparablePotential, VPerp,
};
use wirebands_core::eigen::solve_fiber;
use wirebands_core::hermite::{asymptotic_error, quasimode_residual};
use wirebands_core::{FiberMode, Grid1d, SpectralParam};

#[derive(Parser)]
#[command(
    name = "wirebands",
    version,
    about = "Band structure of the fibered magnetic Laplacian of a straight wire",
    after_help = "Exit codes: 0 success, 1 numerical failure, 2 usage error.\n\
                  Ranges are written lo:hi[:step] (step optional where a default exists);\n\
                  comma lists and single values are accepted wherever a range is.\n\
                  Potentials are written kind:param, e.g. gaussian:1.0, powerdecay:2.0,\n\
                  poschlteller:2.  Every run writes <out> and <out stem>.manifest.json."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Band functions lambda_{m,n}(k) over a k-range, one curve per (m, n)
    Bands(BandsArgs),
    /// Distance of a band from its two-term small-h expansion, with fitted slope
    AsymCheck(AsymCheckArgs),
    /// Quasi-mode residual against h, with fitted log-log slope
    Quasimode(QuasimodeArgs),
    /// Radial localization series: window mass and weighted norm along k
    Agmon(AgmonArgs),
    /// Negative-eigenvalue counts of the perturbed operator per k-window
    PerturbCount(PerturbCountArgs),
    /// Norm bounds controlling the perturbation-theoretic counting step
    BsNorm(BsNormArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Bands(a) => cmd_bands(a),
        Command::AsymCheck(a) => cmd_asym_check(a),
        Command::Quasimode(a) => cmd_quasimode(a),
        Command::Agmon(a) => cmd_agmon(a),
        Command::PerturbCount(a) => cmd_perturb_count(a),
        Command::BsNorm(a) => cmd_bs_norm(a),
    }
}

// ---------------------------------------------------------------- errors

#[derive(Debug)]
enum CliError {
    /// Bad arguments: exit code 2.
    Usage(String),
    /// The computation or the output write failed: exit code 1.
    Run(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Run(m) => f.write_str(m),
        }
    }
}

impl From<wirebands_core::Error> for CliError {
    fn from(e: wirebands_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("output write failed: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(format!("manifest serialization failed: {e}"))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// --------------------------------------------------------------- parsing

fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("{what}: expected a number, got '{text}'")))
}

/// `lo:hi` inclusive integer range, or a single integer.
fn parse_int_range(text: &str, what: &str) -> Result<Vec<i64>, CliError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| usage(format!("{what}: expected an integer, got '{s}'")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse(one)?]),
        [lo, hi] => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if hi < lo {
                return Err(usage(format!("{what}: reversed range {lo}:{hi}")));
            }
            Ok((lo..=hi).collect())
        }
        _ => Err(usage(format!(
            "{what}: expected a single integer or lo:hi, got '{text}'"
        ))),
    }
}

/// Rounds to 10 decimals so generated grid values print cleanly and
/// identically on every run.
fn round10(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

fn linspace(lo: f64, hi: f64, step: f64, what: &str) -> Result<Vec<f64>, CliError> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(usage(format!("{what}: range ends must be finite")));
    }
    if hi < lo {
        return Err(usage(format!("{what}: reversed range {lo}:{hi}")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(usage(format!("{what}: step must be positive, got {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| round10(lo + step * i as f64)).collect())
}

/// Numeric value list: a comma list `a,b,c`, a single value, `lo:hi` with the
/// command's default step, `lo:hi:step`, or `lo:hi:halving` (successive
/// halvings from `lo` down to `hi`, both ends included).
fn parse_values(
    text: &str,
    what: &str,
    default_step: Option<f64>,
) -> Result<Vec<f64>, CliError> {
    if text.contains(',') {
        return text.split(',').map(|s| parse_f64(s, what)).collect();
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse_f64(one, what)?]),
        [lo, hi] => {
            let step = default_step
                .ok_or_else(|| usage(format!("{what}: this range needs an explicit step")))?;
            linspace(parse_f64(lo, what)?, parse_f64(hi, what)?, step, what)
        }
        [lo, hi, step] if step.trim() == "halving" => {
            let (lo, hi) = (parse_f64(lo, what)?, parse_f64(hi, what)?);
            if !(lo > hi && hi > 0.0) {
                return Err(usage(format!(
                    "{what}: halving needs lo > hi > 0, got {lo}:{hi}"
                )));
            }
            let mut vals = Vec::new();
            let mut v = lo;
            while v > hi * (1.0 - 1e-9) {
                vals.push(v);
                v *= 0.5;
            }
            Ok(vals)
        }
        [lo, hi, step] => linspace(
            parse_f64(lo, what)?,
            parse_f64(hi, what)?,
            parse_f64(step, what)?,
            what,
        ),
        _ => Err(usage(format!(
            "{what}: expected value, list, or lo:hi[:step], got '{text}'"
        ))),
    }
}

/// `kind:param` potential spec.
fn parse_vperp(text: &str) -> Result<VPerp, CliError> {
    let Some((kind, rest)) = text.split_once(':') else {
        return Err(usage(format!(
            "potential spec needs kind:param, got '{text}'"
        )));
    };
    let p = parse_f64(rest, "potential parameter")?;
    let v = match kind.trim().to_ascii_lowercase().as_str() {
        "gaussian" => VPerp::Gaussian { sigma: p },
        "powerdecay" => VPerp::PowerDecay { gamma: p },
        "poschlteller" => VPerp::PoschlTeller { s: p },
        other => {
            return Err(usage(format!(
                "unknown potential kind '{other}' (expected gaussian, powerdecay, or poschlteller)"
            )))
        }
    };
    v.validate().map_err(|e| usage(e.to_string()))?;
    Ok(v)
}

fn to_i32(vals: &[i64], what: &str) -> Result<Vec<i32>, CliError> {
    vals.iter()
        .map(|&v| {
            i32::try_from(v).map_err(|_| usage(format!("{what}: {v} out of range")))
        })
        .collect()
}

fn to_band_indices(vals: &[i64], what: &str) -> Result<Vec<usize>, CliError> {
    vals.iter()
        .map(|&v| {
            if v >= 1 {
                Ok(v as usize)
            } else {
                Err(usage(format!("{what}: band indices start at 1, got {v}")))
            }
        })
        .collect()
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

// ---------------------------------------------------------------- output

#[derive(Serialize)]
struct Manifest<C: Serialize> {
    tool: &'static str,
    tool_version: &'static str,
    command: &'static str,
    config: C,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<serde_json::Value>,
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

/// Writes the CSV and, next to it, `<stem>.manifest.json` echoing the
/// resolved configuration, tool version, and any fitted summary values.
fn write_report<C: Serialize>(
    out: &Path,
    header: &str,
    rows: &[String],
    command: &'static str,
    config: C,
    results: Option<serde_json::Value>,
) -> Result<(), CliError> {
    let mut csv = String::with_capacity(header.len() + 1 + 24 * rows.len());
    csv.push_str(header);
    csv.push('\n');
    for row in rows {
        csv.push_str(row);
        csv.push('\n');
    }
    fs::write(out, csv)?;
    let manifest = Manifest {
        tool: "wirebands",
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        outputs: vec![out.display().to_string()],
        results,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(manifest_path(out), text)?;
    Ok(())
}

// ----------------------------------------------------------------- bands

#[derive(Args)]
struct BandsArgs {
    /// Angular sectors: a single integer or lo:hi inclusive
    #[arg(long, default_value = "0:2")]
    m: String,
    /// Band indices (1-based): a single integer or lo:hi inclusive
    #[arg(long, default_value = "1:4")]
    n: String,
    /// Fourier parameter range lo:hi[:step], default step 0.05
    #[arg(long, default_value = "-2:6:0.05")]
    k: String,
    /// Append a `leading` column with the first-order value (2n-1) exp(-k)
    #[arg(long)]
    overlay_asymptotics: bool,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct BandsConfig {
    m: Vec<i32>,
    n: Vec<usize>,
    k: Vec<f64>,
    overlay_asymptotics: bool,
    solver: BandConfig,
    out: String,
}

fn cmd_bands(args: BandsArgs) -> Result<(), CliError> {
    let ms = to_i32(&parse_int_range(&args.m, "--m")?, "--m")?;
    let ns = to_band_indices(&parse_int_range(&args.n, "--n")?, "--n")?;
    let ks = parse_values(&args.k, "--k", Some(0.05))?;
    if ks.is_empty() {
        return Err(usage("--k: empty range"));
    }
    let solver = BandConfig::default();
    let n_max = *ns.last().unwrap();
    let mut rows = Vec::new();
    for &m in &ms {
        let tables = band_family(m, n_max, &ks, &solver)?;
        for table in &tables {
            if !ns.contains(&table.mode.n) {
                continue;
            }
            let n = table.mode.n;
            for (i, &k) in table.ks.iter().enumerate() {
                let lam = table.lambdas[i];
                if args.overlay_asymptotics {
                    let lead = (2 * n - 1) as f64 * (-k).exp();
                    rows.push(format!("{m},{n},{k},{lam},{lead}"));
                } else {
                    rows.push(format!("{m},{n},{k},{lam}"));
                }
            }
        }
    }
    let header = if args.overlay_asymptotics {
        "m,n,k,lambda,leading"
    } else {
        "m,n,k,lambda"
    };
    let config = BandsConfig {
        m: ms,
        n: ns,
        k: ks,
        overlay_asymptotics: args.overlay_asymptotics,
        solver,
        out: args.out.display().to_string(),
    };
    write_report(&args.out, header, &rows, "bands", config, None)
}

// ------------------------------------------------------------ asym-check

#[derive(Args)]
struct AsymCheckArgs {
    /// Angular sector
    #[arg(long, default_value_t = 0)]
    m: i32,
    /// Band index (1-based)
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Fourier parameter range lo:hi[:step], default step 0.125
    #[arg(long, default_value = "3:6:0.125")]
    k: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct AsymCheckConfig {
    m: i32,
    n: usize,
    k: Vec<f64>,
    out: String,
}

fn cmd_asym_check(args: AsymCheckArgs) -> Result<(), CliError> {
    let mode = single_mode(args.m, args.n)?;
    let ks = parse_values(&args.k, "--k", Some(0.125))?;
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &k in &ks {
        let err = asymptotic_error(mode, k)?;
        rows.push(format!("{k},{err:e}"));
        pts.push((k, err.max(1e-300).ln()));
    }
    let results = (pts.len() >= 2)
        .then(|| serde_json::json!({ "fitted_slope": fit_slope(&pts) }));
    let config = AsymCheckConfig {
        m: args.m,
        n: args.n,
        k: ks,
        out: args.out.display().to_string(),
    };
    write_report(&args.out, "k,error", &rows, "asym-check", config, results)
}

// ------------------------------------------------------------- quasimode

#[derive(Args)]
struct QuasimodeArgs {
    /// Angular sector
    #[arg(long, default_value_t = 0)]
    m: i32,
    /// Band index (1-based)
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Semiclassical parameters, comma list; default 10^-2.5 .. 10^-4
    #[arg(long)]
    h: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct QuasimodeConfig {
    m: i32,
    n: usize,
    h: Vec<f64>,
    out: String,
}

fn cmd_quasimode(args: QuasimodeArgs) -> Result<(), CliError> {
    let mode = single_mode(args.m, args.n)?;
    let hs = match &args.h {
        Some(text) => parse_values(text, "--h", None)?,
        None => vec![
            10f64.powf(-2.5),
            10f64.powf(-3.0),
            10f64.powf(-3.5),
            10f64.powf(-4.0),
        ],
    };
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for &h in &hs {
        let res = quasimode_residual(mode, h)?;
        rows.push(format!("{h},{res:e}"));
        pts.push((h.ln(), res.max(1e-300).ln()));
    }
    let results = (pts.len() >= 2)
        .then(|| serde_json::json!({ "fitted_slope": fit_slope(&pts) }));
    let config = QuasimodeConfig {
        m: args.m,
        n: args.n,
        h: hs,
        out: args.out.display().to_string(),
    };
    write_report(&args.out, "h,residual", &rows, "quasimode", config, results)
}

// ----------------------------------------------------------------- agmon

#[derive(Args)]
struct AgmonArgs {
    /// Angular sector
    #[arg(long, default_value_t = 0)]
    m: i32,
    /// Band index (1-based)
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Fourier parameter range lo:hi[:step], default step 0.5
    #[arg(long, default_value = "3:6:0.5")]
    k: String,
    /// Weight strength in [0, 1)
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct AgmonConfig {
    m: i32,
    n: usize,
    k: Vec<f64>,
    beta: f64,
    window: (f64, f64),
    solver: BandConfig,
    out: String,
}

fn cmd_agmon(args: AgmonArgs) -> Result<(), CliError> {
    let mode = single_mode(args.m, args.n)?;
    let ks = parse_values(&args.k, "--k", Some(0.5))?;
    let weight = AgmonWeight::new(0.0, args.beta, WeightRepresentation::RhoVariable)
        .map_err(|e| usage(e.to_string()))?;
    let solver = BandConfig::default();
    let grid = Grid1d::new(solver.grid_lo, solver.grid_hi, solver.grid_points)?;
    let window = (0.3, 3.0);
    let mut rows = Vec::new();
    for &k in &ks {
        let param = SpectralParam::new(k)?;
        let pairs = solve_fiber(solver.gauge, mode, param, grid, args.n, solver.tol)?;
        let f = &pairs[args.n - 1].function;
        let mass = rho_tail_mass(f, window.0, window.1);
        let norm = weighted_norm(f, &weight, param)?;
        rows.push(format!(
            "{k},{mass:e},{},{},{norm}",
            k.exp(),
            mass.max(1e-300).ln()
        ));
    }
    let config = AgmonConfig {
        m: args.m,
        n: args.n,
        k: ks,
        beta: args.beta,
        window,
        solver,
        out: args.out.display().to_string(),
    };
    write_report(
        &args.out,
        "k,tail_mass,inv_h,log_tail_mass,agmon_norm",
        &rows,
        "agmon",
        config,
        None,
    )
}

// ---------------------------------------------------------- perturb-count

#[derive(Args)]
struct PerturbCountArgs {
    /// Radial decay exponent of the perturbation
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Axial profile, kind:param
    #[arg(long, default_value = "gaussian:1.0")]
    vperp: String,
    /// Angular sector
    #[arg(long, default_value_t = 0)]
    m: i32,
    /// Band index (1-based)
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Fourier parameters, comma list or range
    #[arg(long, default_value = "4,6,8,10")]
    k: String,
    /// Relative margin in the counting threshold
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct PerturbCountConfig {
    alpha: f64,
    vperp: VPerp,
    m: i32,
    n: usize,
    k: Vec<f64>,
    epsilon: f64,
    out: String,
}

fn cmd_perturb_count(args: PerturbCountArgs) -> Result<(), CliError> {
    let mode = single_mode(args.m, args.n)?;
    let vperp = parse_vperp(&args.vperp)?;
    let ks = parse_values(&args.k, "--k", None)?;
    let pot = SeparablePotential::new(args.alpha, vperp.clone())
        .map_err(|e| usage(e.to_string()))?;
    if !(args.epsilon > 0.0) || !args.epsilon.is_finite() {
        return Err(usage(format!(
            "--epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    let counts = accumulation_demo(&pot, mode, &ks, args.epsilon)?;
    let rows: Vec<String> = ks
        .iter()
        .zip(&counts)
        .map(|(k, c)| format!("{k},{c}"))
        .collect();
    let config = PerturbCountConfig {
        alpha: args.alpha,
        vperp,
        m: args.m,
        n: args.n,
        k: ks,
        epsilon: args.epsilon,
        out: args.out.display().to_string(),
    };
    write_report(&args.out, "k,count", &rows, "perturb-count", config, None)
}

// --------------------------------------------------------------- bs-norm

#[derive(Args)]
struct BsNormArgs {
    /// Radial decay exponent; must exceed 1 for the norms to converge
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Coupling values: comma list, lo:hi:step, or lo:hi:halving
    #[arg(long, default_value = "0.125:0.0078125:halving")]
    nu: String,
    /// Which series to compute: `hs` (double-integral bound) or `iota`
    /// (single-band norm)
    #[arg(long, default_value = "hs")]
    quantity: String,
    /// Norm exponent for the iota series
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Integration cutoff in k for the iota series
    #[arg(long, default_value_t = 16.0)]
    kmax: f64,
    /// Integration grid lo:hi:step for the hs series
    #[arg(long, default_value = "0:30:0.05")]
    kgrid: String,
    /// Axial profile for the hs series, kind:param
    #[arg(long, default_value = "gaussian:1.0")]
    vperp: String,
    /// Spectral shift; defaults to the row's nu when omitted
    #[arg(long)]
    shift: Option<f64>,
    /// Angular sectors: single integer (iota) or lo:hi (hs)
    #[arg(long, default_value = "0")]
    m: String,
    /// Band index for the iota series (1-based)
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct BsNormConfig {
    quantity: String,
    alpha: f64,
    nu: Vec<f64>,
    /// `null` means the shift follows the row's nu
    shift: Option<f64>,
    m: Vec<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kmax: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kgrid: Option<Grid1d>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vperp: Option<VPerp>,
    out: String,
}

fn cmd_bs_norm(args: BsNormArgs) -> Result<(), CliError> {
    let nus = parse_values(&args.nu, "--nu", None)?;
    let ms = to_i32(&parse_int_range(&args.m, "--m")?, "--m")?;
    let out = args.out.display().to_string();
    match args.quantity.as_str() {
        "hs" => {
            let vperp = parse_vperp(&args.vperp)?;
            let kvals = parse_values(&args.kgrid, "--kgrid", Some(0.05))?;
            if kvals.len() < 2 {
                return Err(usage("--kgrid: need at least two points"));
            }
            let kgrid = Grid1d::new(kvals[0], kvals[kvals.len() - 1], kvals.len())
                .map_err(|e| usage(e.to_string()))?;
            let mut rows = Vec::new();
            for &nu in &nus {
                let shift = args.shift.unwrap_or(nu);
                let bound = hs_bound(nu, shift, args.alpha, &vperp, &ms, kgrid)?;
                rows.push(format!("{nu},{bound}"));
            }
            let config = BsNormConfig {
                quantity: args.quantity,
                alpha: args.alpha,
                nu: nus,
                shift: args.shift,
                m: ms,
                n: None,
                q: None,
                kmax: None,
                kgrid: Some(kgrid),
                vperp: Some(vperp),
                out,
            };
            write_report(&args.out, "nu,bound", &rows, "bs-norm", config, None)
        }
        "iota" => {
            let [m] = ms.as_slice() else {
                return Err(usage("--quantity iota needs a single --m"));
            };
            let mode = single_mode(*m, args.n)?;
            let mut rows = Vec::new();
            for &nu in &nus {
                let shift = args.shift.unwrap_or(nu);
                let iota = IotaFunction::new(mode, nu, shift, args.alpha)
                    .map_err(|e| usage(e.to_string()))?;
                let norm = iota_norm(&iota, args.q, args.kmax)?;
                rows.push(format!("{nu},{norm}"));
            }
            let config = BsNormConfig {
                quantity: args.quantity,
                alpha: args.alpha,
                nu: nus,
                shift: args.shift,
                m: ms,
                n: Some(args.n),
                q: Some(args.q),
                kmax: Some(args.kmax),
                kgrid: None,
                vperp: None,
                out,
            };
            write_report(&args.out, "nu,norm", &rows, "bs-norm", config, None)
        }
        other => Err(usage(format!(
            "--quantity must be hs or iota, got '{other}'"
        ))),
    }
}

// --------------------------------------------------------------- helpers

fn single_mode(m: i32, n: usize) -> Result<FiberMode, CliError> {
    FiberMode::new(m, n).map_err(|e| usage(e.to_string()))
}
