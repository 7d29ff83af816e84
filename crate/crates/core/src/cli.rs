//! Command-line front end.
//!
//! Every command prints JSON (or CSV for tabular results) on stdout. With
//! `--out DIR` the artifacts go to `DIR` and stdout gets an aligned summary
//! table instead. Failures print `{"error": kind, "message": text}` on stderr
//! and exit with 1 for invalid input or 2 for a computation without a finite
//! answer.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::design::{design_report, DesignResult, DEFAULT_EPS};
use crate::error::{invalid, Result};
use crate::io;
use crate::numeric::{format_float, UniformGrid};
use crate::observables::{
    absorption_pattern, fringe_period, scale_relative, total_absorption_rate, width_report, MonteCarloConfig,
    PatternProfile, RateReport, WidthReport,
};
use crate::optics::{chain, ChainResult, ChainStep};
use crate::oracle::{compare, GridSpec, OracleComparison, DEFAULT_REL_TOL};
use crate::soliton::{expansion_table, ExpansionRow, ExpansionSchedule};
use crate::state::{BandLimit, PhotonCount, SpectralEnvelope, StateSpec};

pub const THREADS_ENV: &str = "PHOTON_SQL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "photon-sql", version, about = "Spatial quantum limits of N-photon states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory; created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Significant digits in CSV and JSON output; 17 means exact round trip.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=17))]
    precision: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Marginal and conditional center-of-mass widths.
    Widths {
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// N-photon absorption pattern on a grid.
    Pattern {
        #[arg(long)]
        state: PathBuf,
        /// "min,max,points"
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Total N-photon absorption rate, optionally after relative dilation.
    Rate {
        #[arg(long)]
        state: PathBuf,
        /// Relative-coordinate dilation factor; reports the rate ratio.
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Adiabatic soliton expansion table.
    Expand {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Runs an imaging chain and prints the audit trail.
    Chain {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        /// Wavelength for band-limit bookkeeping.
        #[arg(long)]
        lambda: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Designs a Fourier-plane transfer function for a target pattern.
    Design {
        /// CSV with columns x,intensity[,phase].
        #[arg(long)]
        target: PathBuf,
        /// State whose envelope is the filter input.
        #[arg(long)]
        state: PathBuf,
        /// Photon number; defaults to the state's.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Compares analytic observables with brute-force lattice quadrature.
    OracleCompare {
        #[arg(long)]
        state: PathBuf,
        /// "min,max,points" per axis.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Widths { common, .. }
            | Command::Pattern { common, .. }
            | Command::Rate { common, .. }
            | Command::Expand { common, .. }
            | Command::Chain { common, .. }
            | Command::Design { common, .. }
            | Command::OracleCompare { common, .. } => common,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = writeln!(err, "{}", json!({"error": "Usage", "message": e.to_string().trim_end()}));
            return EXIT_VALIDATION;
        }
    };
    match configure_threads().and_then(|()| dispatch(&cli.command, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.kind(), "message": e.to_string()}));
            if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_COMPUTATION
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    let common = command.common();
    let precision = common.precision as usize;
    let mc = MonteCarloConfig { seed: common.seed, ..MonteCarloConfig::default() };
    let out_dir = common.out.as_deref().map(prepare_dir).transpose()?;
    match command {
        Command::Widths { state, .. } => {
            let report = width_report(&io::read_state(state)?)?;
            emit_json(out, out_dir, "widths.json", &report, precision, || width_table(&report, precision))
        }
        Command::Pattern { state, grid, .. } => {
            let state = io::read_state(state)?;
            let grid = UniformGrid::parse(grid)?;
            let profile = absorption_pattern(&state, &grid)?;
            let summary = PatternSummary::new(&state, &profile);
            match out_dir {
                Some(dir) => {
                    write_pattern_csv(&dir.join("pattern.csv"), &profile, precision)?;
                    io::write_json(&dir.join("pattern.json"), &summary, precision)?;
                    write_table(out, &pattern_table(&summary, precision))
                }
                None => pattern_csv_to(out, &profile, precision),
            }
        }
        Command::Rate { state, gamma, .. } => {
            let state = io::read_state(state)?;
            let report = match gamma {
                None => total_absorption_rate(&state, None)?,
                Some(g) => {
                    let reference = total_absorption_rate(&state, None)?.total_rate;
                    total_absorption_rate(&scale_relative(&state, *g)?, Some(reference))?
                }
            };
            let report = RateSummary { n: state.n().get(), gamma: *gamma, rate: report };
            emit_json(out, out_dir, "rate.json", &report, precision, || rate_table(&report, precision))
        }
        Command::Expand { state, schedule, .. } => {
            let state = io::read_state(state)?;
            let schedule = ExpansionSchedule::from_json(&io::read_text(schedule)?)?;
            let rows = expansion_table(&state, &schedule, &mc)?;
            match out_dir {
                Some(dir) => {
                    write_expansion_csv(fs::File::create(dir.join("expansion.csv"))?, &rows, precision)?;
                    io::write_json(&dir.join("expansion.json"), &rows, precision)?;
                    write_table(out, &expansion_table_text(&rows, precision))
                }
                None => write_expansion_csv(out, &rows, precision),
            }
        }
        Command::Chain { state, chain: steps, lambda, .. } => {
            let state = io::read_state(state)?;
            let steps = read_chain(steps)?;
            let band = lambda.map(BandLimit::new).transpose()?;
            let result = chain(&state, &steps, band.as_ref())?;
            emit_json(out, out_dir, "chain.json", &result, precision, || chain_table(&result, precision))
        }
        Command::Design { target, state, n, lambda, .. } => {
            let target = io::read_target_csv(target)?;
            let state = io::read_state(state)?;
            let g_in =
                state.envelope().ok_or_else(|| invalid("the design input state must carry a spectral envelope"))?;
            let n = match n {
                Some(n) => PhotonCount::new(*n)?,
                None => state.n(),
            };
            let result = design_report(&target, n, &BandLimit::new(*lambda)?, g_in, DEFAULT_EPS)?;
            let report = DesignSummary::new(&result);
            match out_dir {
                Some(dir) => {
                    write_design_bundle(&dir, &result, &report, precision)?;
                    write_table(out, &design_table(&report, precision))
                }
                None => emit_json(out, None, "", &report, precision, String::new),
            }
        }
        Command::OracleCompare { state, grid, .. } => {
            let state = io::read_state(state)?;
            let grid = grid.as_deref().map(parse_grid_spec).transpose()?;
            let rows = compare(&state, grid, &mc, DEFAULT_REL_TOL)?;
            emit_json(out, out_dir, "oracle.json", &rows, precision, || oracle_table(&rows, precision))
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

fn emit_json<T: Serialize>(
    out: &mut dyn Write,
    dir: Option<PathBuf>,
    name: &str,
    value: &T,
    precision: usize,
    table: impl FnOnce() -> String,
) -> Result<()> {
    match dir {
        Some(dir) => {
            io::write_json(&dir.join(name), value, precision)?;
            write_table(out, &table())
        }
        None => {
            out.write_all(io::to_json_string(value, precision)?.as_bytes())?;
            Ok(())
        }
    }
}

fn write_table(out: &mut dyn Write, table: &str) -> Result<()> {
    out.write_all(table.as_bytes())?;
    Ok(())
}

fn parse_grid_spec(text: &str) -> Result<GridSpec> {
    let g = UniformGrid::parse(text)?;
    GridSpec::new(g.start, g.end(), g.points)
}

fn read_chain(path: &Path) -> Result<Vec<ChainStep>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum ChainDoc {
        Steps(Vec<ChainStep>),
        Wrapped { steps: Vec<ChainStep> },
    }
    Ok(match serde_json::from_str(&io::read_text(path)?)? {
        ChainDoc::Steps(s) | ChainDoc::Wrapped { steps: s } => s,
    })
}

#[derive(Debug, Serialize)]
struct PatternSummary {
    n: usize,
    variant: &'static str,
    points: usize,
    x_min: f64,
    x_max: f64,
    normalization: String,
    /// Autocorrelation period; absent for non-oscillating profiles.
    fringe_period: Option<f64>,
}

impl PatternSummary {
    fn new(state: &StateSpec, profile: &PatternProfile) -> Self {
        Self {
            n: state.n().get(),
            variant: state.variant(),
            points: profile.x_grid.points,
            x_min: profile.x_grid.start,
            x_max: profile.x_grid.end(),
            normalization: profile.normalization.clone(),
            fringe_period: fringe_period(profile),
        }
    }
}

fn pattern_rows(profile: &PatternProfile) -> Vec<Vec<f64>> {
    profile.xs().into_iter().zip(&profile.intensity).map(|(x, i)| vec![x, *i]).collect()
}

fn pattern_csv_to(out: &mut dyn Write, profile: &PatternProfile, precision: usize) -> Result<()> {
    io::write_csv_to(out, &["x", "intensity"], &pattern_rows(profile), precision)
}

fn write_pattern_csv(path: &Path, profile: &PatternProfile, precision: usize) -> Result<()> {
    io::write_csv(path, &["x", "intensity"], &pattern_rows(profile), precision)
}

#[derive(Debug, Serialize)]
struct RateSummary {
    n: usize,
    gamma: Option<f64>,
    #[serde(flatten)]
    rate: RateReport,
}

fn write_expansion_csv<W: Write>(out: W, rows: &[ExpansionRow], precision: usize) -> Result<()> {
    let body: Vec<(usize, Vec<f64>)> = rows
        .iter()
        .map(|r| {
            (r.step, vec![r.ratio, r.b_integral, r.marginal_width, r.conditional_width, r.delta_xi_rms, r.uql_metric])
        })
        .collect();
    io::write_indexed_csv_to(out, &EXPANSION_HEADER, &body, precision)
}

const EXPANSION_HEADER: [&str; 7] =
    ["step", "ratio", "b_integral", "marginal_width", "conditional_width", "delta_xi_rms", "uql_metric"];

/// Compact design report; the sampled arrays go to the CSV files.
#[derive(Debug, Serialize)]
struct DesignSummary {
    n: usize,
    points: usize,
    residual: f64,
    in_band_fraction: f64,
    max_abs_h: f64,
    masked_points: usize,
    transfer: String,
    warnings: Vec<String>,
}

impl DesignSummary {
    fn new(r: &DesignResult) -> Self {
        Self {
            n: r.n,
            points: r.x_grid.points,
            residual: r.residual,
            in_band_fraction: r.in_band_fraction,
            max_abs_h: r.max_abs_h,
            masked_points: r.masked_points,
            transfer: r.transfer.description.clone(),
            warnings: r.warnings.clone(),
        }
    }
}

fn write_design_bundle(dir: &Path, r: &DesignResult, report: &DesignSummary, precision: usize) -> Result<()> {
    if let SpectralEnvelope::Sampled(s) = &r.envelope {
        io::write_spectrum_csv(&dir.join("envelope.csv"), s, precision)?;
    }
    if let crate::optics::Transfer::Sampled(s) = &r.transfer.repr {
        io::write_spectrum_csv(&dir.join("transfer.csv"), s, precision)?;
    }
    write_achieved_csv(&dir.join("achieved_pattern.csv"), &r.achieved, precision)?;
    io::write_json(&dir.join("report.json"), report, precision)
}

fn write_achieved_csv(path: &Path, p: &PatternProfile, precision: usize) -> Result<()> {
    io::write_csv(path, &["x", "intensity"], &pattern_rows(p), precision)
}

/// Left-aligned text table with a header rule.
#[derive(Debug, Default)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut s = String::new();
        let mut line = |cells: &[String]| {
            let mut text = String::new();
            for (i, w) in widths.iter().enumerate().take(cols) {
                let cell = cells.get(i).map_or("", String::as_str);
                let pad = w - cell.chars().count();
                text.push_str(cell);
                if i + 1 < cols {
                    text.push_str(&" ".repeat(pad + 2));
                }
            }
            let _ = writeln!(s, "{}", text.trim_end());
        };
        line(&self.headers);
        line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for row in &self.rows {
            line(row);
        }
        s
    }
}

fn num(v: f64, precision: usize) -> String {
    format_float(v, precision)
}

fn opt(v: Option<f64>, precision: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| num(v, precision))
}

fn width_table(r: &WidthReport, p: usize) -> String {
    let mut t = Table::new(["n", "marginal", "conditional", "sql_ref", "uql_ref", "separable"]);
    t.row([
        r.n.to_string(),
        num(r.marginal, p),
        num(r.conditional, p),
        opt(r.sql_ref, p),
        opt(r.uql_ref, p),
        r.separable.to_string(),
    ]);
    t.render()
}

fn pattern_table(s: &PatternSummary, p: usize) -> String {
    let mut t = Table::new(["n", "variant", "points", "x_min", "x_max", "fringe_period"]);
    t.row([
        s.n.to_string(),
        s.variant.to_string(),
        s.points.to_string(),
        num(s.x_min, p),
        num(s.x_max, p),
        opt(s.fringe_period, p),
    ]);
    t.render()
}

fn rate_table(r: &RateSummary, p: usize) -> String {
    let mut t = Table::new(["n", "gamma", "total_rate", "reference_rate", "ratio"]);
    t.row([
        r.n.to_string(),
        opt(r.gamma, p),
        num(r.rate.total_rate, p),
        opt(r.rate.reference_rate, p),
        opt(r.rate.ratio, p),
    ]);
    t.render()
}

fn expansion_table_text(rows: &[ExpansionRow], p: usize) -> String {
    let mut t = Table::new(EXPANSION_HEADER);
    for r in rows {
        t.row([
            r.step.to_string(),
            num(r.ratio, p),
            num(r.b_integral, p),
            num(r.marginal_width, p),
            num(r.conditional_width, p),
            num(r.delta_xi_rms, p),
            num(r.uql_metric, p),
        ]);
    }
    t.render()
}

fn chain_table(r: &ChainResult, p: usize) -> String {
    let mut t = Table::new(["index", "op", "variant", "norm", "norm_loss", "band_fraction", "residual", "non_passive"]);
    for a in &r.audit {
        t.row([
            a.index.to_string(),
            a.op.clone(),
            a.variant.clone(),
            num(a.norm, p),
            num(a.norm_loss, p),
            opt(a.band_fraction, p),
            num(a.residual, p),
            a.non_passive.to_string(),
        ]);
    }
    t.render()
}

fn design_table(r: &DesignSummary, p: usize) -> String {
    let mut t = Table::new(["n", "points", "residual", "in_band_fraction", "max_abs_h", "masked_points", "warnings"]);
    t.row([
        r.n.to_string(),
        r.points.to_string(),
        num(r.residual, p),
        num(r.in_band_fraction, p),
        num(r.max_abs_h, p),
        r.masked_points.to_string(),
        if r.warnings.is_empty() { "-".to_string() } else { r.warnings.join("; ") },
    ]);
    t.render()
}

fn oracle_table(rows: &[OracleComparison], p: usize) -> String {
    let mut t = Table::new(["observable", "analytic", "oracle", "abs_err", "rel_err", "pass"]);
    for r in rows {
        t.row([
            r.observable.clone(),
            num(r.analytic, p),
            num(r.oracle, p),
            num(r.abs_err, p),
            num(r.rel_err, p),
            r.pass.to_string(),
        ]);
    }
    t.render()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let mut t = Table::new(["a", "long_header"]);
        t.row(["12345", "x"]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "a      long_header");
        assert_eq!(lines[2], "12345  x");
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["photon-sql", "widths"], &mut out, &mut err), EXIT_VALIDATION);
        let v: serde_json::Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(v["error"], "Usage");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["photon-sql", "--help"], &mut out, &mut err), EXIT_OK);
        assert!(!out.is_empty());
    }

    #[test]
    fn missing_file_is_validation() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(["photon-sql", "widths", "--state", "/nonexistent/state.json"], &mut out, &mut err);
        assert_eq!(code, EXIT_VALIDATION);
    }
}
