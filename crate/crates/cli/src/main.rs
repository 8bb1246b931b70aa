//! `funcoord`: run verification suites, apply kernels to generalized
//! functions, and tabulate kernel-equation residuals.
//!
//! Exit codes: 0 pass, 1 suite or computation failure, 2 configuration
//! error, 3 I/O error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use funcoord::{
    apply, discretize, invert, kernel_pde_residual, run_suite, tabulate, Coefficient, Error,
    GeneralizedFunction, Grid, Kernel, ResidualDomain, VerificationReport,
};
use serde::Serialize;

use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Failed(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Failed(_) => 1,
            Self::Config(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

/// Misuse of the library is a configuration problem; anything else is a
/// failed computation.
fn classify(e: Error) -> CliError {
    match e {
        Error::Domain(_)
        | Error::Precondition(_)
        | Error::Unsupported(_)
        | Error::UnsupportedOrder { .. }
        | Error::NotASolution(_) => CliError::Config(e.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

#[derive(Parser)]
#[command(name = "funcoord", version, about = "Kernel coordinate changes for local differential operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write one JSON report per suite.
    Verify {
        /// Suite id or `all`; repeat or comma-separate for several.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a kernel to a generalized function read from JSON.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// Also invert the discretized kernel and print its condition report.
        #[arg(long)]
        invert: bool,
        /// Write the kernel table as (x, y, ω) CSV.
        #[arg(long)]
        export_kernel: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate R = a·∂xⁿω − (−1)ⁿ·∂yᵐ(ω·b) for a kernel.
    Residual {
        /// Derivative order in x.
        #[arg(value_name = "N")]
        x_order: usize,
        /// Derivative order in y.
        #[arg(value_name = "M")]
        y_order: usize,
        /// Registered coefficient name for a(x), e.g. `1`, `x`, `exp_neg_x`.
        #[arg(long)]
        a: Option<String>,
        /// Registered coefficient name for b(y), e.g. `1`, `-iy`, `-y2`.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<String>,
    /// Parameter for parametrized kernels (the dilation factor).
    #[arg(long, allow_hyphen_values = true)]
    kernel_param: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    periodic: Option<bool>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    format: Vec<Format>,
    /// Tolerance override `label=value`; labels are `suite.label` or `label`.
    #[arg(long = "tol", value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected label=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("tolerance `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    fn merge(self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::load(self.config.as_deref())?;
        c.kernel = self.kernel.or(c.kernel);
        c.kernel_param = self.kernel_param.or(c.kernel_param);
        c.grid.n = self.n.or(c.grid.n);
        c.grid.lo = self.lo.or(c.grid.lo);
        c.grid.hi = self.hi.or(c.grid.hi);
        c.grid.periodic = self.periodic.or(c.grid.periodic);
        if let Some(t) = self.threshold {
            c.threshold = t;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = self.out {
            c.out = o;
        }
        if !self.format.is_empty() {
            c.formats = self.format;
        }
        c.tolerances.extend(self.tolerances);
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("funcoord: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Verify { suite, common } => {
            let mut cfg = common.merge()?;
            if !suite.is_empty() {
                cfg.suites = suite;
            }
            cmd_verify(&cfg)
        }
        Command::Transform { input, invert, export_kernel, common } => {
            let mut cfg = common.merge()?;
            cfg.invert |= invert;
            cmd_transform(&cfg, &input, export_kernel)
        }
        Command::Residual { x_order, y_order, a, b, common } => {
            let mut cfg = common.merge()?;
            cfg.a = a.or(cfg.a);
            cfg.b = b.or(cfg.b);
            cmd_residual(&cfg, x_order, y_order)
        }
    }
}

#[derive(Serialize)]
struct SuiteSummary {
    name: String,
    passed: bool,
    failing: Vec<String>,
}

#[derive(Serialize)]
struct VerifySummary {
    seed: u64,
    passed: bool,
    suites: Vec<SuiteSummary>,
}

fn cmd_verify(cfg: &RunConfig) -> Result<u8, CliError> {
    cfg.validate()?;
    output::ensure_dir(&cfg.out)?;
    let suite_config = cfg.suite_config();
    let mut summary = VerifySummary { seed: cfg.seed, passed: true, suites: Vec::new() };
    for id in cfg.selected_suites() {
        let report = match run_suite(id, &suite_config) {
            Ok(r) => r,
            Err(e) => match classify(e) {
                CliError::Failed(msg) => {
                    let mut r = VerificationReport::new(id);
                    r.passed = false;
                    r.note(format!("error: {msg}"));
                    r
                }
                CliError::Config(msg) | CliError::Io(msg) => {
                    return Err(CliError::Config(format!("suite `{id}`: {msg}")))
                }
            },
        };
        print_report(&report);
        output::write_json(&cfg.out.join(format!("{id}.json")), &report)?;
        if cfg.wants(Format::Csv) {
            write_report_csv(&cfg.out.join(format!("{id}.csv")), &report)?;
        }
        let failing = report
            .residuals
            .iter()
            .filter(|(k, r)| !report.tolerances.get(*k).is_some_and(|t| *r <= t))
            .map(|(k, _)| k.clone())
            .collect();
        summary.passed &= report.passed;
        summary.suites.push(SuiteSummary { name: id.to_string(), passed: report.passed, failing });
    }
    output::write_json(&cfg.out.join("summary.json"), &summary)?;
    println!("{}", if summary.passed { "all suites passed" } else { "some suites FAILED" });
    Ok(if summary.passed { 0 } else { 1 })
}

fn print_report(r: &VerificationReport) {
    println!("{:<22} {}", r.name, if r.passed { "PASS" } else { "FAIL" });
    for (label, res) in &r.residuals {
        let tol = r.tolerances.get(label).copied().unwrap_or(f64::NAN);
        let mark = if *res <= tol { ' ' } else { '!' };
        println!("  {mark} {label:<40} {res:>12.3e}  (tol {tol:.1e})");
    }
    for note in &r.notes {
        println!("    {note}");
    }
}

fn write_report_csv(path: &std::path::Path, r: &VerificationReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(["kind", "label", "value", "tolerance"]).map_err(io)?;
    for (label, v) in &r.residuals {
        let tol = r.tolerances.get(label).copied().unwrap_or(f64::NAN);
        w.write_record(["residual", label, &output::fmt_f64(*v), &output::fmt_f64(tol)]).map_err(io)?;
    }
    for (label, v) in &r.measurements {
        w.write_record(["measurement", label, &output::fmt_f64(*v), ""]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn build_kernel(cfg: &RunConfig) -> Result<Kernel<f64>, CliError> {
    let id = cfg.kernel.as_deref().unwrap_or("gaussian");
    Kernel::by_name(id, cfg.kernel_param).map_err(classify)
}

/// Real and imaginary parts as CSV columns, dropping the imaginary one when
/// it vanishes identically.
fn split_complex(values: &[funcoord::C<f64>]) -> (bool, Vec<f64>, Vec<f64>) {
    let complex = values.iter().any(|z| z.im != 0.0);
    (complex, values.iter().map(|z| z.re).collect(), values.iter().map(|z| z.im).collect())
}

#[derive(Serialize)]
struct TransformOutput<'a> {
    kernel: &'a str,
    grid: &'a Grid<f64>,
    x: &'a [f64],
    re: &'a [f64],
    im: &'a [f64],
}

fn cmd_transform(cfg: &RunConfig, input: &std::path::Path, export_kernel: bool) -> Result<u8, CliError> {
    cfg.validate()?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", input.display())))?;
    let u: GeneralizedFunction<f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let grid = u.grid().clone();
    let o = &cfg.grid;
    let clash = o.n.is_some_and(|n| n != grid.len())
        || o.lo.is_some_and(|lo| lo != grid.lo())
        || o.hi.is_some_and(|hi| hi != grid.hi())
        || o.periodic.is_some_and(|p| p != grid.is_periodic());
    if clash {
        return Err(CliError::Config("grid flags disagree with the input's grid".into()));
    }
    let kernel = build_kernel(cfg)?;
    let values = apply(&kernel, &u).map_err(classify)?;
    output::ensure_dir(&cfg.out)?;

    let (complex, re, im) = split_complex(&values);
    let x = grid.nodes();
    if cfg.wants(Format::Csv) {
        let path = cfg.out.join("transform.csv");
        if complex {
            let rows: Vec<Vec<f64>> = (0..x.len()).map(|i| vec![x[i], re[i], im[i]]).collect();
            output::write_csv(&path, &["x", "re", "im"], &rows)?;
        } else {
            let rows: Vec<Vec<f64>> = (0..x.len()).map(|i| vec![x[i], re[i]]).collect();
            output::write_csv(&path, &["x", "value"], &rows)?;
        }
    }
    if cfg.wants(Format::Json) {
        let out = TransformOutput { kernel: kernel.id(), grid: &grid, x, re: &re, im: &im };
        output::write_json(&cfg.out.join("transform.json"), &out)?;
    }

    if cfg.invert || export_kernel {
        let w = discretize(&kernel, &grid).map_err(classify)?;
        if cfg.invert {
            let (_, report) = invert(&w, cfg.threshold).map_err(classify)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Failed(e.to_string()))?;
            println!("{text}");
            output::write_json(&cfg.out.join("condition.json"), &report)?;
        }
        if export_kernel {
            let table = tabulate(&kernel, x, w.col_grid().nodes()).map_err(classify)?;
            let complex = table.iter().any(|(_, _, z)| z.im != 0.0);
            let path = cfg.out.join("kernel.csv");
            if complex {
                let rows: Vec<Vec<f64>> = table.iter().map(|(x, y, z)| vec![*x, *y, z.re, z.im]).collect();
                output::write_csv(&path, &["x", "y", "re", "im"], &rows)?;
            } else {
                let rows: Vec<Vec<f64>> = table.iter().map(|(x, y, z)| vec![*x, *y, z.re]).collect();
                output::write_csv(&path, &["x", "y", "omega"], &rows)?;
            }
        }
    }
    println!("applied `{}` on {} nodes; output in {}", kernel.id(), grid.len(), cfg.out.display());
    Ok(0)
}

#[derive(Serialize)]
struct ResidualSummary<'a> {
    kernel: &'a str,
    n: usize,
    m: usize,
    a: &'a str,
    b: &'a str,
    x_grid: Grid<f64>,
    y_grid: Grid<f64>,
    max_norm: f64,
    tolerance: Option<f64>,
    passed: bool,
    notes: Vec<String>,
}

fn cmd_residual(cfg: &RunConfig, n: usize, m: usize) -> Result<u8, CliError> {
    cfg.validate()?;
    let kernel = build_kernel(cfg)?;
    let parse = |name: &Option<String>| {
        let name = name.as_deref().unwrap_or("1");
        Coefficient::<f64>::parse(name).map_err(|e| CliError::Config(format!("coefficient `{name}`: {e}")))
    };
    let (a, b) = (parse(&cfg.a)?, parse(&cfg.b)?);
    let rect = kernel.rect();
    let nodes = cfg.grid.n.unwrap_or(21);
    let x_grid = Grid::uniform(
        cfg.grid.lo.unwrap_or(rect.x_lo),
        cfg.grid.hi.unwrap_or(rect.x_hi),
        nodes,
        cfg.grid.periodic.unwrap_or(false),
    )
    .map_err(classify)?;
    let y_grid = Grid::uniform(rect.y_lo, rect.y_hi, nodes, false).map_err(classify)?;
    let domain = ResidualDomain::from_grids(&x_grid, &y_grid);
    let r = kernel_pde_residual(&kernel, n, m, &a, &b, &domain).map_err(classify)?;

    let tolerance = cfg.tolerances.get("residual").copied();
    let passed = tolerance.is_none_or(|t| r.max_norm <= t);
    let mut notes = Vec::new();
    if kernel.id() == "fourier" {
        notes.push(
            "∂xⁿ e^{ixy} = (iy)ⁿ·e^{ixy}: with m = 0 the matching b is (−1)ⁿ(iy)ⁿ, so b = −y² for n = 2".into(),
        );
    }
    if kernel.id() == "exp_exp_plus" {
        notes.push("e^{x·e^{y}} solves x·ω_x − ∂yω = 0; the minus-sign kernel pairs with a = x, b = 1".into());
    }
    output::ensure_dir(&cfg.out)?;
    if cfg.wants(Format::Csv) {
        let triples: Vec<_> = r.triples().collect();
        let path = cfg.out.join("residual.csv");
        if triples.iter().any(|(_, _, z)| z.im != 0.0) {
            let rows: Vec<Vec<f64>> = triples.iter().map(|(x, y, z)| vec![*x, *y, z.re, z.im]).collect();
            output::write_csv(&path, &["x", "y", "re", "im"], &rows)?;
        } else {
            let rows: Vec<Vec<f64>> = triples.iter().map(|(x, y, z)| vec![*x, *y, z.re]).collect();
            output::write_csv(&path, &["x", "y", "R"], &rows)?;
        }
    }
    let summary = ResidualSummary {
        kernel: kernel.id(),
        n,
        m,
        a: a.name(),
        b: b.name(),
        x_grid,
        y_grid,
        max_norm: r.max_norm,
        tolerance,
        passed,
        notes,
    };
    output::write_json(&cfg.out.join("summary.json"), &summary)?;
    println!("max |R| = {:.6e} for `{}` with n = {n}, m = {m}", r.max_norm, kernel.id());
    for note in &summary.notes {
        println!("  {note}");
    }
    Ok(if passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn tolerance_flag_parses() {
        assert_eq!(parse_tol("fourier.order1=1e-9").unwrap(), ("fourier.order1".into(), 1e-9));
        assert!(parse_tol("order1").is_err());
    }
}
