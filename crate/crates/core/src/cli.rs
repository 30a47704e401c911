//! Command-line front end: `solve`, `charfn`, `powers` and `bench`.
//!
//! Exit codes: 0 on success, 1 when the solver fails or a benchmark row misses
//! its tolerance, 2 when the configuration cannot be parsed or the problem
//! cannot be built.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::powers::PencilRecursion;
use crate::problem::expr::parse_complex;
use crate::problem::{builtin, builtin_names, load_problem_file_with, BuiltinOptions, SpectralProblem, Window};
use crate::quadrature::GridKind;
use crate::series::shift_pencil;
use crate::spectrum::{solve, Engine, EigenvalueEstimate, SolveConfig, SolveReport, Stage, Strategy};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for solver failures and benchmark misses.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "spps", version, about = "Spectral parameter power series eigenvalue solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find eigenvalues by spectral shifts.
    Solve(SolveArgs),
    /// Sample the characteristic function on a λ grid.
    Charfn(CharfnArgs),
    /// Dump the formal powers at λ = 0.
    Powers(PowersArgs),
    /// Compare against a reference table (table1 .. table7).
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quadrature {
    NewtonCotes,
    ClenshawCurtis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

/// Problem selection and discretization, shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Builtin name or path to a TOML problem file.
    #[arg(long, env = "SPPS_PROBLEM")]
    pub problem: String,
    /// Truncation order: formal powers up to index 2N+1.
    #[arg(long = "N", env = "SPPS_N", default_value_t = 100)]
    pub n: usize,
    /// Number of grid intervals (rounded up to whole integration blocks).
    #[arg(long = "M", env = "SPPS_M")]
    pub m: Option<usize>,
    #[arg(long, env = "SPPS_QUADRATURE", value_enum)]
    pub quadrature: Option<Quadrature>,
    /// Anchor point x0 of the recursive integrals.
    #[arg(long, env = "SPPS_X0", allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, env = "SPPS_STRATEGY", value_enum, default_value_t = Strategy::Auto)]
    pub strategy: Strategy,
    /// Replacement magnitude for non-finite samples at singular endpoints.
    #[arg(long, env = "SPPS_ENDPOINT_CAP")]
    pub endpoint_cap: Option<f64>,
    /// Semiclassical parameter of `bronski`.
    #[arg(long, env = "SPPS_EPSILON")]
    pub epsilon: Option<f64>,
    /// Support half-width of `bronski`.
    #[arg(long, env = "SPPS_HALF_WIDTH")]
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "SPPS_COUNT", default_value_t = 5)]
    pub count: usize,
    /// `re_min,re_max[,im_min,im_max]`; empty bounds are open.
    #[arg(long, env = "SPPS_WINDOW", allow_hyphen_values = true)]
    pub window: Option<String>,
    /// First spectral-shift center, e.g. `0`, `2.5`, `1+0.5i`.
    #[arg(long, env = "SPPS_START", allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long, env = "SPPS_MAX_SHIFTS")]
    pub max_shifts: Option<usize>,
    #[arg(long, env = "SPPS_OUTPUT", value_enum, default_value_t = Output::Json)]
    pub output: Output,
    /// Write the particular solutions at the first center to this CSV file.
    #[arg(long, env = "SPPS_DUMP_SEED")]
    pub dump_seed: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CharfnArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Real axis samples `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub re: String,
    /// Imaginary axis samples `min:max:count`.
    #[arg(long, allow_hyphen_values = true, default_value = "0:0:1")]
    pub im: String,
    /// Center of the expansion.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PowersArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// `table1` .. `table7`.
    pub table: String,
}

/// A failure classified by exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    fn failure(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: message.into() }
    }
}

/// Problem construction errors are configuration errors; everything else is
/// a solver failure.
fn classify(e: Error) -> CliError {
    match e {
        Error::UnknownBuiltin { .. } | Error::Parse(_) | Error::Problem(_) | Error::Grid(_) | Error::Io(_) => {
            CliError::config(e.to_string())
        }
        _ => CliError::failure(e.to_string()),
    }
}

/// Parses arguments and runs the command, writing results to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return EXIT_CONFIG;
        }
        // --help and --version
        Err(e) => {
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out, err),
        Command::Charfn(a) => cmd_charfn(a, out),
        Command::Powers(a) => cmd_powers(a, out),
        Command::Bench(a) => cmd_bench(&a.table, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

impl RunArgs {
    fn options(&self) -> BuiltinOptions {
        BuiltinOptions {
            intervals: self.m,
            kind: self.quadrature.map(|q| match q {
                Quadrature::NewtonCotes => GridKind::Uniform,
                Quadrature::ClenshawCurtis => GridKind::Chebyshev,
            }),
            x0: self.x0,
            endpoint_cap: self.endpoint_cap,
            epsilon: self.epsilon,
            half_width: self.half_width,
        }
    }

    fn load(&self) -> Result<SpectralProblem, CliError> {
        if self.n == 0 {
            return Err(CliError::config("--N must be at least 1"));
        }
        if self.m.is_some_and(|m| m < 10) {
            return Err(CliError::config("--M must be at least 10"));
        }
        let options = self.options();
        let path = Path::new(&self.problem);
        if builtin_names().contains(&self.problem.as_str()) || !path.exists() {
            builtin(&self.problem, &options).map_err(classify)
        } else {
            load_problem_file_with(path, &options).map_err(classify)
        }
    }
}

/// Converts a spectral parameter from the reported convention to the solver's.
fn to_internal(problem: &SpectralProblem, lam: Complex64) -> Complex64 {
    problem.zs.map_or(lam, |z| lam / z.scale)
}

/// Maps a reported-convention window into the solver's convention. The
/// Zakharov-Shabat scale is a quarter-turn rotation times a positive factor,
/// so the image of the rectangle is again a rectangle.
fn window_to_internal(problem: &SpectralProblem, w: Window) -> Window {
    let Some(zs) = problem.zs else { return w };
    let corners = [
        Complex64::new(w.re_min, w.im_min),
        Complex64::new(w.re_min, w.im_max),
        Complex64::new(w.re_max, w.im_min),
        Complex64::new(w.re_max, w.im_max),
    ]
    .map(|c| {
        // 0·∞ must stay an open bound rather than become NaN.
        let s = Complex64::new(1.0, 0.0) / zs.scale;
        let part = |x: f64, f: f64| if f == 0.0 { 0.0 } else { x * f };
        Complex64::new(part(c.re, s.re) - part(c.im, s.im), part(c.re, s.im) + part(c.im, s.re))
    });
    let fold = |f: fn(&Complex64) -> f64, pick: fn(f64, f64) -> f64, init: f64| corners.iter().map(f).fold(init, pick);
    Window {
        re_min: fold(|c| c.re, f64::min, f64::INFINITY),
        re_max: fold(|c| c.re, f64::max, f64::NEG_INFINITY),
        im_min: fold(|c| c.im, f64::min, f64::INFINITY),
        im_max: fold(|c| c.im, f64::max, f64::NEG_INFINITY),
    }
}

fn parse_lambda(text: &str, what: &str) -> Result<Complex64, CliError> {
    parse_complex(text).map_err(|e| CliError::config(format!("bad {what} `{text}`: {e}")))
}

/// Seventeen significant digits, `null` when not finite.
fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).unwrap_or(Value::Null)
}

fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn record(e: &EigenvalueEstimate, problem: &SpectralProblem) -> Value {
    let center = problem.zs.map_or(e.center_used, |z| z.scale * e.center_used);
    json!({
        "index_hint": e.index_hint,
        "re": number(e.lam_reported.re),
        "im": number(e.lam_reported.im),
        "residual": number(e.residual),
        "center_used_re": number(center.re),
        "center_used_im": number(center.im),
        "outside_theorem_hypotheses": e.outside_theorem_hypotheses,
    })
}

/// Writes eigenvalue records as a JSON array.
pub fn write_json(report: &SolveReport, problem: &SpectralProblem, out: &mut impl Write) -> std::io::Result<()> {
    let records: Vec<Value> = report.eigenvalues.iter().map(|e| record(e, problem)).collect();
    serde_json::to_writer_pretty(&mut *out, &records)?;
    writeln!(out)
}

pub const CSV_HEADER: &str = "index_hint,re,im,residual,center_used_re,center_used_im,outside_theorem_hypotheses";

/// Writes eigenvalue records as CSV under [`CSV_HEADER`].
pub fn write_csv(report: &SolveReport, problem: &SpectralProblem, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for e in &report.eigenvalues {
        let center = problem.zs.map_or(e.center_used, |z| z.scale * e.center_used);
        let index = e.index_hint.map(|i| i.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{index},{},{},{},{},{},{}",
            float17(e.lam_reported.re),
            float17(e.lam_reported.im),
            float17(e.residual),
            float17(center.re),
            float17(center.im),
            e.outside_theorem_hypotheses
        )?;
    }
    Ok(())
}

fn io_failure(e: std::io::Error) -> CliError {
    CliError::failure(format!("write failed: {e}"))
}

fn cmd_solve(a: &SolveArgs, out: &mut impl Write, err: &mut impl Write) -> Result<i32, CliError> {
    if a.count == 0 {
        return Err(CliError::config("--count must be at least 1"));
    }
    let problem = a.run.load()?;
    let window = match &a.window {
        Some(w) => Some(window_to_internal(&problem, Window::parse(w).map_err(classify)?)),
        None => None,
    };
    let start = match &a.start {
        Some(s) => to_internal(&problem, parse_lambda(s, "start")?),
        None => ZERO,
    };
    if let Some(path) = &a.dump_seed {
        let engine = Engine::new(&problem, a.run.n, a.run.strategy).map_err(classify)?;
        let basis = engine.particular_solutions_at(start).map_err(classify)?;
        let mut file = std::fs::File::create(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        dump_basis(&basis, &mut file).map_err(io_failure)?;
    }
    let config = SolveConfig {
        order: a.run.n,
        count: a.count,
        window,
        strategy: a.run.strategy,
        max_shifts: a.max_shifts,
        start,
        ..SolveConfig::default()
    };
    let report = solve(&problem, &config).map_err(classify)?;
    match a.output {
        Output::Json => write_json(&report, &problem, out),
        Output::Csv => write_csv(&report, &problem, out),
    }
    .map_err(io_failure)?;
    if !report.complete {
        let _ = writeln!(
            err,
            "warning: found {} of {} requested eigenvalues",
            report.eigenvalues.len(),
            a.count
        );
        for d in &report.diagnostics {
            let _ = writeln!(err, "  {d}");
        }
    }
    Ok(0)
}

fn dump_basis(basis: &crate::powers::SolutionBasis, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "x,f_re,f_im,g_re,g_im,pfp_re,pfp_im,pgp_re,pgp_im")?;
    let nodes = basis.f.grid().nodes().to_vec();
    for (i, x) in nodes.iter().enumerate() {
        let (f, g, pf, pg) = (basis.f.at(i), basis.g.at(i), basis.pfp.at(i), basis.pgp.at(i));
        writeln!(
            out,
            "{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            f.re, f.im, g.re, g.im, pf.re, pf.im, pg.re, pg.im
        )?;
    }
    Ok(())
}

/// `min:max:count` with `count >= 1`; a single sample sits at `min`.
fn parse_axis(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("axis `{text}` must be `min:max:count`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// The stage at `center`, reached from λ = 0 by spectral shifts.
fn stage_at(engine: &Engine, center: Complex64) -> crate::Result<Stage> {
    let stage = engine.stage(ZERO, engine.particular_solutions_at(ZERO)?)?;
    if center == ZERO {
        Ok(stage)
    } else {
        engine.shift(&stage, center)
    }
}

fn cmd_charfn(a: &CharfnArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let problem = a.run.load()?;
    let res = parse_axis(&a.re)?;
    let ims = parse_axis(&a.im)?;
    let center = match &a.center {
        Some(c) => to_internal(&problem, parse_lambda(c, "center")?),
        None => ZERO,
    };
    let engine = Engine::new(&problem, a.run.n, a.run.strategy).map_err(classify)?;
    let stage = stage_at(&engine, center).map_err(classify)?;
    let poly = &stage.poly;
    writeln!(out, "re_lambda,im_lambda,abs_phi,re_phi,im_phi,warning").map_err(io_failure)?;
    for &im in &ims {
        for &re in &res {
            let lam = Complex64::new(re, im);
            let phi = poly.eval(to_internal(&problem, lam));
            let warning =
                if (to_internal(&problem, lam) - poly.center).norm() > poly.trust_radius { "outside-trust-radius" } else { "" };
            writeln!(
                out,
                "{},{},{},{},{},{warning}",
                float17(re),
                float17(im),
                float17(phi.norm()),
                float17(phi.re),
                float17(phi.im)
            )
            .map_err(io_failure)?;
        }
    }
    Ok(0)
}

fn cmd_powers(a: &PowersArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let problem = a.run.load()?;
    let engine = Engine::new(&problem, a.run.n, a.run.strategy).map_err(classify)?;
    let basis = engine.particular_solutions_at(ZERO).map_err(classify)?;
    let shifted = shift_pencil(&problem, ZERO).map_err(classify)?;
    let table = PencilRecursion::from_terms(&basis, &shifted.r_t, &shifted.s_t)
        .and_then(|rec| rec.table(a.run.n))
        .map_err(classify)?;
    match &a.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            table.dump(&mut std::io::BufWriter::new(file))
        }
        None => table.dump(out),
    }
    .map_err(io_failure)?;
    Ok(0)
}

/// Reference tables shipped with the crate.
pub const BENCHMARKS: &str = include_str!("../data/benchmarks.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub table: Vec<BenchTable>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchTable {
    pub name: String,
    pub title: String,
    pub citation: String,
    #[serde(default)]
    pub note: Option<String>,
    /// Reason the table cannot be reproduced; its runs are not executed.
    #[serde(default)]
    pub skip: Option<String>,
    #[serde(default)]
    pub run: Vec<BenchRun>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRun {
    pub problem: String,
    pub count: usize,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub intervals: Option<usize>,
    /// `[re_min, re_max]`.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub first_index: Option<i64>,
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRow {
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub source: String,
    #[serde(default)]
    pub tol: Option<f64>,
}

pub fn benchmarks() -> Result<BenchFile, CliError> {
    toml::from_str(BENCHMARKS).map_err(|e| CliError::failure(format!("benchmark data: {e}")))
}

/// Outcome of one reference row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub row: BenchRow,
    pub computed: Option<Complex64>,
    pub diff: Option<f64>,
    pub pass: bool,
}

/// Solves one benchmark run and compares its rows.
pub fn bench_run(run: &BenchRun) -> Result<(Vec<RowResult>, SolveReport), CliError> {
    let options = BuiltinOptions { intervals: run.intervals, ..BuiltinOptions::default() };
    let mut problem = builtin(&run.problem, &options).map_err(classify)?;
    if let Some(first) = run.first_index {
        problem.meta.first_index = first;
    }
    let config = SolveConfig {
        order: run.order.unwrap_or(100),
        count: run.count,
        strategy: run.strategy,
        window: run.window.map(|[lo, hi]| Window { re_min: lo, re_max: hi, ..Window::ALL }),
        ..SolveConfig::default()
    };
    let report = solve(&problem, &config).map_err(classify)?;
    let rows = run
        .rows
        .iter()
        .map(|row| {
            let computed = report.eigenvalues.iter().find(|e| e.index_hint == Some(row.n)).map(|e| e.lam_reported);
            let diff = computed.map(|c| (c - Complex64::new(row.re, row.im)).norm());
            let pass = match (row.tol, diff) {
                (Some(tol), Some(d)) => d <= tol,
                (Some(_), None) => false,
                (None, _) => true,
            };
            RowResult { row: row.clone(), computed, diff, pass }
        })
        .collect();
    Ok((rows, report))
}

fn format_lambda(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.16e}", z.re)
    } else {
        format!("{:.16e}{:+.16e}i", z.re, z.im)
    }
}

fn cmd_bench(name: &str, out: &mut impl Write) -> Result<i32, CliError> {
    let file = benchmarks()?;
    let Some(table) = file.table.iter().find(|t| t.name == name) else {
        let names: Vec<&str> = file.table.iter().map(|t| t.name.as_str()).collect();
        return Err(CliError::config(format!("unknown table `{name}` (available: {})", names.join(", "))));
    };
    let mut text = String::new();
    let _ = writeln!(text, "{}: {}", table.name, table.title);
    let _ = writeln!(text, "reference: {}", table.citation);
    if let Some(note) = &table.note {
        let _ = writeln!(text, "note: {note}");
    }
    if let Some(reason) = &table.skip {
        let _ = writeln!(text, "SKIPPED: {reason}");
        out.write_all(text.as_bytes()).map_err(io_failure)?;
        return Ok(0);
    }
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    let mut failed = 0;
    for run in &table.run {
        let started = Instant::now();
        let (rows, report) = bench_run(run)?;
        let mut text = String::new();
        let _ = writeln!(
            text,
            "\nrun: {} count={} strategy={:?} ({:.2} s, {} shifts)",
            run.problem,
            run.count,
            run.strategy,
            started.elapsed().as_secs_f64(),
            report.shifts
        );
        let _ = writeln!(
            text,
            "{:>4}  {:<22} {:>48}  {:>48}  {:>9}  {:>7}  status",
            "n", "source", "reference", "computed", "abs diff", "tol"
        );
        for r in &rows {
            let reference = format_lambda(Complex64::new(r.row.re, r.row.im));
            let computed = r.computed.map_or_else(|| "not found".to_string(), format_lambda);
            let diff = r.diff.map_or_else(|| "-".to_string(), |d| format!("{d:.1e}"));
            let tol = r.row.tol.map_or_else(|| "-".to_string(), |t| format!("{t:.0e}"));
            let status = match (r.row.tol, r.pass) {
                (None, _) => "info",
                (Some(_), true) => "ok",
                (Some(_), false) => "FAIL",
            };
            if !r.pass {
                failed += 1;
            }
            let _ = writeln!(
                text,
                "{:>4}  {:<22} {:>48}  {:>48}  {:>9}  {:>7}  {status}",
                r.row.n, r.row.source, reference, computed, diff, tol
            );
        }
        out.write_all(text.as_bytes()).map_err(io_failure)?;
    }
    if failed > 0 {
        writeln!(out, "\n{failed} row(s) outside tolerance").map_err(io_failure)?;
        return Ok(EXIT_FAILURE);
    }
    writeln!(out, "\nall rows within tolerance").map_err(io_failure)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("spps").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn benchmark_data_parses() {
        let file = benchmarks().unwrap();
        let names: Vec<&str> = file.table.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["table1", "table2", "table3", "table4", "table5", "table6", "table7"]);
        for t in &file.table {
            assert!(t.skip.is_some() != !t.run.is_empty(), "{}", t.name);
            for r in &t.run {
                assert!(builtin_names().contains(&r.problem.as_str()));
            }
        }
    }

    #[test]
    fn axis_parsing() {
        assert_eq!(parse_axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("-2:5:1").unwrap(), vec![-2.0]);
        assert!(parse_axis("0:1").is_err());
        assert!(parse_axis("0:1:0").is_err());
    }

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(number(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(number(f64::NAN), Value::Null);
        let back: f64 = number(std::f64::consts::PI).to_string().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn zs_window_is_rotated() {
        let mut p = builtin("dirichlet_free", &BuiltinOptions { intervals: Some(100), ..Default::default() }).unwrap();
        p.zs = Some(crate::problem::ZsInfo { scale: Complex64::new(0.0, 0.5), epsilon: None });
        let w = window_to_internal(&p, Window { re_min: -1.0, re_max: 1.0, im_min: 0.0, im_max: f64::INFINITY });
        // λ = z / (0.5 i) = -2 i z: Im z ≥ 0 maps to Re λ ≥ 0.
        assert_eq!((w.re_min, w.re_max), (0.0, f64::INFINITY));
        assert_eq!((w.im_min, w.im_max), (-2.0, 2.0));
    }

    #[test]
    fn unknown_builtin_is_a_config_error() {
        let (code, _, err) = run_cli(&["solve", "--problem", "bogus"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("pryce10") && err.contains("dirichlet_free"), "{err}");
    }

    #[test]
    fn bad_flag_is_a_config_error() {
        let (code, _, _) = run_cli(&["solve", "--problem", "dirichlet_free", "--count", "x"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_cli(&["solve", "--problem", "dirichlet_free", "--M", "5"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_cli(&["solve", "--problem", "dirichlet_free", "--window", "a,b"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn solve_free_json() {
        let (code, out, _) = run_cli(&["solve", "--problem", "dirichlet_free", "--N", "40", "--M", "1000", "--count", "3"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let recs = v.as_array().unwrap();
        assert_eq!(recs.len(), 3);
        for (k, r) in recs.iter().enumerate() {
            let n = (k + 1) as f64;
            assert!((r["re"].as_f64().unwrap() - n * n).abs() < 1e-8);
            assert_eq!(r["index_hint"].as_i64(), Some(k as i64 + 1));
        }
    }

    #[test]
    fn solve_output_is_deterministic() {
        let args = ["solve", "--problem", "dirichlet_free", "--N", "30", "--M", "500", "--count", "2", "--output", "csv"];
        let (_, a, _) = run_cli(&args);
        let (_, b, _) = run_cli(&args);
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn charfn_single_point_is_c0() {
        let (code, out, _) =
            run_cli(&["charfn", "--problem", "dirichlet_free", "--N", "40", "--M", "1000", "--re", "0:0:1"]);
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        // Φ(0) = −π for the sine characteristic function.
        let re: f64 = row[3].parse().unwrap();
        assert!((re + std::f64::consts::PI).abs() < 1e-10, "{re}");
    }

    #[test]
    fn table7_is_skipped() {
        let (code, out, _) = run_cli(&["bench", "table7"]);
        assert_eq!(code, 0);
        assert!(out.contains("SKIPPED"));
        let (code, _, _) = run_cli(&["bench", "table9"]);
        assert_eq!(code, EXIT_CONFIG);
    }
}
