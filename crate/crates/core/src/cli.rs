//! Batch command line: every subcommand loads a JSON problem file, runs one
//! analysis and prints a table (CSV or JSON) with one row per result.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 `b` identically zero,
//! 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{self, CommandConfig, ConfigFile, Grid, ProblemConfig, RunConfig};
use crate::corpus;
use crate::error::{Error, Result};
use crate::scattering::{coefficients, reflection};
use crate::series::{evaluate_series, series_coefficients, QuadratureSpec, DEFAULT_ORDER};
use crate::spectral::{boundary_angles, negative_eigenvalue_count, tent_witness};
use crate::zeros::{default_nodes, disk_zero_count, order_fit, real_zero_scan};

/// Environment variable read for the default worker count.
pub const JOBS_ENV: &str = "COUPLING_SCATTER_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "coupling-scatter",
    version,
    about = "Scattering coefficients a(λ), b(λ) and the zeros of b",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = JOBS_ENV)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// a(λ) and b(λ) by integration, one row per λ.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// `re` or `re,im`; repeatable.
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
        /// `lo:hi:points` on the real axis.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Real zeros of b with multiplicities.
    Zeros {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Zeros of b in |λ| ≤ r by the argument principle.
    Count {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "radius")]
        radii: Vec<f64>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Growth and zero-count exponents over several radii.
    Order {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "radius")]
        radii: Vec<f64>,
    },
    /// Traveling-wave amplitudes and reflection probability at real λ.
    Reflect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Truncated power series with certified error bounds.
    Series {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Negative eigenvalues of the operator with the boundary conditions of u0.
    Eigencount {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Disjoint tents with negative Rayleigh quotients.
    Witness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        tents: Option<usize>,
    },
    /// Write the bundled problem files into a directory.
    Examples {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// 17 significant digits for floats; the same text goes to CSV and JSON.
    fn text(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => self.text(),
            Cell::Num(x) => serde_json::to_string(&x.to_string()).expect("string"),
            Cell::Text(s) => serde_json::to_string(s).expect("string"),
            _ => self.text(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            s.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (k, v)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format!("\"{k}\": {}", v.json()));
            }
            s.push('}');
        }
        s.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate => 2,
        Error::IntegrationFailure { .. }
        | Error::Precision { .. }
        | Error::ContourCollision { .. }
        | Error::WindingUnresolved { .. }
        | Error::NoWitness => 3,
        _ => 1,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidProblem(_) => "invalid_problem",
        Error::InvalidPotential(_) => "invalid_potential",
        Error::UnsupportedBackground => "unsupported_background",
        Error::IntegrationFailure { .. } => "integration_failure",
        Error::MeasureUnsupported => "measure_unsupported",
        Error::Precision { .. } => "precision",
        Error::NoTravelingBasis => "no_traveling_basis",
        Error::RequiresRealification => "requires_realification",
        Error::Degenerate => "degenerate",
        Error::ContourCollision { .. } => "contour_collision",
        Error::WindingUnresolved { .. } => "winding_unresolved",
        Error::NoWitness => "no_witness",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Config(_) => "config",
    }
}

/// `error kind=<kind> code=<n>: <message>` on one line.
pub fn diagnostic(e: &Error) -> String {
    format!("error kind={} code={}: {}", kind(e), exit_code(e), e.to_string().replace('\n', " "))
}

fn parse_lambda(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidArgument(format!("cannot parse coupling constant {s:?}; expected re or re,im"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

fn parse_grid(s: &str) -> Result<Grid> {
    let bad = || Error::InvalidArgument(format!("cannot parse grid {s:?}; expected lo:hi:points"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
    let g = Grid {
        lo: lo.parse().map_err(|_| bad())?,
        hi: hi.parse().map_err(|_| bad())?,
        points: n.parse().map_err(|_| bad())?,
    };
    config::validate_grid(g)?;
    Ok(g)
}

/// λ values from flags, else the config's `lambdas`, else its `grid`.
fn lambdas_from(flags: &[String], grid: &Option<String>, cmd: &CommandConfig) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = flags.iter().map(|s| parse_lambda(s)).collect::<Result<_>>()?;
    if let Some(g) = grid {
        out.extend(parse_grid(g)?.points().into_iter().map(|x| Complex64::new(x, 0.0)));
    }
    if out.is_empty() {
        out = cmd.lambdas();
    }
    if out.is_empty() {
        if let Some(g) = cmd.grid {
            out = g.points().into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(
            "no coupling constants given; use --lambda, --grid or command.lambdas".into(),
        ));
    }
    Ok(out)
}

fn real_only(ls: Vec<Complex64>) -> Result<Vec<f64>> {
    ls.into_iter()
        .map(|z| {
            if z.im == 0.0 {
                Ok(z.re)
            } else {
                Err(Error::InvalidArgument(format!("this analysis needs real coupling constants, got {z}")))
            }
        })
        .collect()
}

fn radii_from(flags: &[f64], cmd: &CommandConfig) -> Result<Vec<f64>> {
    let radii = if flags.is_empty() { cmd.radii.clone() } else { flags.to_vec() };
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given; use --radius or command.radii".into()));
    }
    config::validate_radii(&radii)?;
    Ok(radii)
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

pub fn cmd_scan(run: &RunConfig, lambdas: &[Complex64]) -> Result<Table> {
    let mut t = Table::new(vec!["lambda_re", "lambda_im", "a_re", "a_im", "b_re", "b_im", "err_abs", "method"]);
    let rows = lambdas.par_iter().map(|&l| coefficients(&run.problem, l)).collect::<Result<Vec<_>>>()?;
    for c in rows {
        t.rows.push(vec![
            Cell::Num(c.lambda.re),
            Cell::Num(c.lambda.im),
            Cell::Num(c.a.re),
            Cell::Num(c.a.im),
            Cell::Num(c.b.re),
            Cell::Num(c.b.im),
            Cell::Num(c.err),
            Cell::Text(c.method.to_string()),
        ]);
    }
    Ok(t)
}

pub fn cmd_zeros(run: &RunConfig, grid: Grid) -> Result<Table> {
    let report = real_zero_scan(&run.problem, grid.lo, grid.hi, grid.points)?;
    if report.identically_zero {
        return Err(Error::Degenerate);
    }
    let mut t = Table::new(vec!["lambda", "multiplicity", "residual_abs", "capped", "method"]);
    for z in report.zeros {
        t.rows.push(vec![
            Cell::Num(z.lambda.re),
            Cell::Int(z.multiplicity as i64),
            Cell::Num(z.residual),
            Cell::Bool(z.capped),
            text("ode+bracket"),
        ]);
    }
    Ok(t)
}

pub fn cmd_count(run: &RunConfig, radii: &[f64], nodes: Option<usize>) -> Result<Table> {
    let mut t = Table::new(vec!["radius", "zero_count", "method"]);
    for &r in radii {
        let n = disk_zero_count(&run.problem, r, nodes.unwrap_or_else(|| default_nodes(r)))?;
        t.rows.push(vec![Cell::Num(r), Cell::Int(n as i64), text("argument-principle")]);
    }
    Ok(t)
}

pub fn cmd_order(run: &RunConfig, radii: &[f64]) -> Result<Table> {
    let fit = order_fit(&run.problem, radii)?;
    let mut t = Table::new(vec![
        "radius",
        "zero_count",
        "ln_max_abs_b",
        "count_exponent",
        "growth_exponent",
        "fit_residual",
        "method",
    ]);
    for ((r, n), m) in fit.radii.iter().zip(&fit.counts).zip(&fit.log_max_modulus) {
        t.rows.push(vec![
            Cell::Num(*r),
            Cell::Int(*n as i64),
            Cell::Num(*m),
            Cell::Num(fit.count_exponent),
            Cell::Num(fit.growth_exponent),
            Cell::Num(fit.fit_residual),
            text("argument-principle"),
        ]);
    }
    Ok(t)
}

pub fn cmd_reflect(run: &RunConfig, lambdas: &[f64]) -> Result<Table> {
    let mut t =
        Table::new(vec!["lambda", "alpha_re", "alpha_im", "beta_re", "beta_im", "reflection", "flux_defect", "method"]);
    let rows = lambdas.par_iter().map(|&l| reflection(&run.problem, l)).collect::<Result<Vec<_>>>()?;
    for (l, r) in lambdas.iter().zip(rows) {
        t.rows.push(vec![
            Cell::Num(*l),
            Cell::Num(r.alpha.re),
            Cell::Num(r.alpha.im),
            Cell::Num(r.beta.re),
            Cell::Num(r.beta.im),
            Cell::Num(r.reflection),
            Cell::Num(r.flux_defect),
            text("ode"),
        ]);
    }
    Ok(t)
}

pub fn cmd_series(run: &RunConfig, lambdas: &[Complex64], order: usize) -> Result<Table> {
    let exp = series_coefficients(&run.problem, order, QuadratureSpec::default())?;
    let mut t = Table::new(vec![
        "lambda_re",
        "lambda_im",
        "a_re",
        "a_im",
        "b_re",
        "b_im",
        "a_err_abs",
        "b_err_abs",
        "usable",
        "order",
        "method",
    ]);
    for &l in lambdas {
        let e = evaluate_series(&exp, l);
        let c = e.coefficients;
        t.rows.push(vec![
            Cell::Num(l.re),
            Cell::Num(l.im),
            Cell::Num(c.a.re),
            Cell::Num(c.a.im),
            Cell::Num(c.b.re),
            Cell::Num(c.b.im),
            Cell::Num(e.a_err),
            Cell::Num(e.b_err),
            Cell::Bool(e.usable),
            Cell::Int(order as i64),
            Cell::Text(c.method.to_string()),
        ]);
    }
    Ok(t)
}

pub fn cmd_eigencount(run: &RunConfig, lambdas: &[f64]) -> Result<Table> {
    let angles = boundary_angles(&run.problem)?;
    let rows =
        lambdas.par_iter().map(|&l| negative_eigenvalue_count(&run.problem, l, angles)).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(vec!["lambda", "negative_count", "zero_is_eigenvalue", "phase_rad", "method"]);
    for (l, c) in lambdas.iter().zip(rows) {
        t.rows.push(vec![
            Cell::Num(*l),
            Cell::Int(c.count as i64),
            Cell::Bool(c.zero_is_eigenvalue),
            Cell::Num(c.phase),
            text("pruefer"),
        ]);
    }
    Ok(t)
}

pub fn cmd_witness(run: &RunConfig, lambda: f64, tents: usize) -> Result<Table> {
    let w = tent_witness(&run.problem, lambda, tents)?;
    let mut t = Table::new(vec!["lambda", "epsilon", "center", "rayleigh_quotient", "method"]);
    for (c, r) in w.centers.iter().zip(&w.rayleigh_values) {
        t.rows.push(vec![Cell::Num(lambda), Cell::Num(w.epsilon), Cell::Num(*c), Cell::Num(*r), text("tent")]);
    }
    Ok(t)
}

/// File name and contents of every bundled config.
pub fn bundled_configs() -> Vec<(&'static str, String)> {
    let lam = |xs: &[[f64; 2]]| xs.to_vec();
    let grid = |lo, hi, points| Some(Grid { lo, hi, points });
    let entries = [
        (
            "example1.json",
            corpus::example1(1.0),
            CommandConfig { lambdas: lam(&[[0.0, 0.0], [2.0, 0.0]]), grid: grid(-5.0, 5.0, 41), ..Default::default() },
        ),
        (
            "example2.json",
            corpus::example2(),
            CommandConfig { grid: grid(-50.0, 50.0, 200), radii: vec![50.0, 500.0, 5000.0], ..Default::default() },
        ),
        (
            "free_chi.json",
            corpus::free_chi(),
            CommandConfig {
                grid: grid(-1000.0, 0.0, 101),
                radii: vec![1e2, 1e3, 1e4, 1e5],
                tents: Some(5),
                ..Default::default()
            },
        ),
        (
            "traveling_barrier.json",
            corpus::traveling_barrier(1.0),
            CommandConfig { grid: grid(-10.0, 10.0, 21), ..Default::default() },
        ),
        (
            "noise.json",
            corpus::noise(corpus::NOISE_SEED),
            CommandConfig { grid: grid(-20.0, 20.0, 81), order: Some(DEFAULT_ORDER), ..Default::default() },
        ),
    ];
    entries
        .into_iter()
        .map(|(name, p, command)| {
            (name, config::to_json(&ConfigFile { problem: ProblemConfig::from_problem(&p), command }))
        })
        .collect()
}

pub fn cmd_examples(dir: &Path) -> Result<Table> {
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut t = Table::new(vec!["path", "method"]);
    for (name, body) in bundled_configs() {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(io)?;
        t.rows.push(vec![Cell::Text(path.display().to_string()), text("bundled")]);
    }
    Ok(t)
}

fn real_lambda(s: &str) -> Result<f64> {
    real_only(vec![parse_lambda(s)?]).map(|v| v[0])
}

/// Runs a parsed command and returns the table.
pub fn execute(command: &Command) -> Result<Table> {
    let load = |p: &PathBuf| config::load_config(p);
    match command {
        Command::Scan { config, lambdas, grid } => {
            let run = load(config)?;
            let ls = lambdas_from(lambdas, grid, &run.command)?;
            cmd_scan(&run, &ls)
        }
        Command::Zeros { config, grid } => {
            let run = load(config)?;
            let g = match grid {
                Some(g) => parse_grid(g)?,
                None => run.command.grid.unwrap_or(Grid { lo: -50.0, hi: 50.0, points: 1001 }),
            };
            cmd_zeros(&run, g)
        }
        Command::Count { config, radii, nodes } => {
            let run = load(config)?;
            let rs = radii_from(radii, &run.command)?;
            cmd_count(&run, &rs, nodes.or(run.command.nodes))
        }
        Command::Order { config, radii } => {
            let run = load(config)?;
            let rs = radii_from(radii, &run.command)?;
            cmd_order(&run, &rs)
        }
        Command::Reflect { config, lambdas, grid } => {
            let run = load(config)?;
            let ls = real_only(lambdas_from(lambdas, grid, &run.command)?)?;
            cmd_reflect(&run, &ls)
        }
        Command::Series { config, lambdas, grid, order } => {
            let run = load(config)?;
            let ls = lambdas_from(lambdas, grid, &run.command)?;
            cmd_series(&run, &ls, order.or(run.command.order).unwrap_or(DEFAULT_ORDER))
        }
        Command::Eigencount { config, lambdas, grid } => {
            let run = load(config)?;
            let ls = real_only(lambdas_from(lambdas, grid, &run.command)?)?;
            cmd_eigencount(&run, &ls)
        }
        Command::Witness { config, lambda, tents } => {
            let run = load(config)?;
            let n = tents.or(run.command.tents).unwrap_or(1);
            cmd_witness(&run, real_lambda(lambda)?, n)
        }
        Command::Examples { dir } => cmd_examples(dir),
    }
}

fn run_parsed(cli: &Cli) -> Result<String> {
    let table = match cli.jobs {
        Some(0) => return Err(Error::InvalidArgument("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| execute(&cli.command))?,
        None => execute(&cli.command)?,
    };
    let body = table.render(cli.format);
    if let Some(path) = &cli.output {
        std::fs::write(path, &body).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        return Ok(String::new());
    }
    Ok(body)
}

/// Parses `args` (program name first), runs, and writes the table or a
/// one-line diagnostic. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let first = e.to_string();
                    let line = first.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
                    let _ = writeln!(err, "error kind=usage code=1: {line}");
                    1
                }
            };
        }
    };
    match run_parsed(&cli) {
        Ok(body) => {
            if out.write_all(body.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", diagnostic(&e));
            exit_code(&e)
        }
    }
}
