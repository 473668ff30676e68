//! Command-line driver: sensitivity/bound reports, convergence benchmarks,
//! and the function registry.
//!
//! Exit codes: 0 success, 2 unknown function, 3 constant model, 4 missing
//! analytic references, 1 anything else. Diagnostics go to stderr; data goes
//! to the `--out` target (stdout with `--out -`).

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dgsm_core::bench::{rmse_convergence, ConvergenceTable};
use dgsm_core::bounds::{assemble_report, BoundsReport, ReportOptions};
use dgsm_core::error::Error;
use dgsm_core::model::DistributionSpec;
use dgsm_core::qmc::DEFAULT_SEED;
use dgsm_core::testfns::{Registry, TestFunction};
use dgsm_core::Quantity;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "dgsm",
    about = "Sobol' sensitivity indices and derivative-based bounds by QMC",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate indices, derivative measures and all bounds for one function.
    Analyze(AnalyzeArgs),
    /// Replicated RMSE convergence of one quantity against its closed form.
    Convergence(ConvergenceArgs),
    /// List the registered functions and their parameter schemas.
    ListFunctions,
}

#[derive(Args)]
struct CommonArgs {
    /// Registry function name (see list-functions).
    #[arg(long)]
    function: String,
    /// Function parameters as inline JSON or @path to a JSON file.
    #[arg(long)]
    params: Option<String>,
    /// Seed for replicate-shift derivation (env DGSM_SEED overrides the
    /// built-in default).
    #[arg(long)]
    seed: Option<u64>,
    /// Output target: a path, or - for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for model evaluation (0 = automatic).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Points per sample block.
    #[arg(long, default_value_t = 1 << 14)]
    n: usize,
    /// Moment-exponent search range, lo:hi.
    #[arg(long, default_value = "0.1:100", value_parser = parse_range)]
    m_range: (f64, f64),
    /// Input distribution override for every coordinate.
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    /// Comma-separated means for --dist normal.
    #[arg(long, allow_hyphen_values = true)]
    means: Option<String>,
    /// Comma-separated standard deviations for --dist normal.
    #[arg(long)]
    sigmas: Option<String>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Quantity to track: s, s-tot, lb1, lb2, ub1 or ub2.
    #[arg(long)]
    quantity: String,
    /// One-based variable index.
    #[arg(long, default_value_t = 1)]
    variable: usize,
    /// Randomized replicates per point count (at least 2).
    #[arg(long, default_value_t = 25)]
    k: usize,
    /// Point-count grid lo:hi, doubling from lo up to hi.
    #[arg(long, default_value = "256:16384", value_parser = parse_usize_range)]
    n_grid: (usize, usize),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Normal,
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {text:?}"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo > 0.0 && hi > lo) {
        return Err(format!("need 0 < lo < hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_usize_range(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {text:?}"))?;
    let lo: usize = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: usize = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("need 0 < lo <= hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_float_list(name: &str, text: &str, expected: usize) -> anyhow::Result<Vec<f64>> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse()).collect();
    let values: Vec<f64> = values.map_err(|e| anyhow::anyhow!("--{name}: {e}"))?;
    if values.len() != expected {
        anyhow::bail!(
            "--{name}: expected {expected} comma-separated values, got {}",
            values.len()
        );
    }
    Ok(values)
}

/// Failure classes with documented exit codes.
enum CliFailure {
    UnknownFunction(String),
    ConstantModel(String),
    MissingReference(String),
    Other(anyhow::Error),
}

impl CliFailure {
    fn code(&self) -> u8 {
        match self {
            CliFailure::UnknownFunction(_) => 2,
            CliFailure::ConstantModel(_) => 3,
            CliFailure::MissingReference(_) => 4,
            CliFailure::Other(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliFailure::UnknownFunction(m)
            | CliFailure::ConstantModel(m)
            | CliFailure::MissingReference(m) => m.clone(),
            CliFailure::Other(e) => format!("{e:#}"),
        }
    }
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        match &e {
            Error::InvalidParameter {
                name: "function", ..
            } => CliFailure::UnknownFunction(e.to_string()),
            Error::ConstantModel { .. } => CliFailure::ConstantModel(e.to_string()),
            Error::MissingReference { .. } => CliFailure::MissingReference(e.to_string()),
            _ => CliFailure::Other(anyhow::Error::new(e)),
        }
    }
}

impl From<anyhow::Error> for CliFailure {
    fn from(e: anyhow::Error) -> Self {
        CliFailure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::ListFunctions => cmd_list_functions(),
    }
}

fn setup(common: &CommonArgs) -> Result<(TestFunction, u64), CliFailure> {
    if common.threads > 0 {
        // a second build_global in one process is a no-op, not a failure
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
    let params: Value = match &common.params {
        None => json!({}),
        Some(text) => {
            let raw = match text.strip_prefix('@') {
                Some(path) => {
                    fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {path}: {e}"))?
                }
                None => text.clone(),
            };
            serde_json::from_str(&raw).map_err(|e| anyhow::anyhow!("--params: {e}"))?
        }
    };
    let function = Registry::build(&common.function, &params)?;
    let seed = common.seed.unwrap_or_else(|| {
        std::env::var("DGSM_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(DEFAULT_SEED)
    });
    Ok((function, seed))
}

fn write_output(target: &str, data: &str) -> Result<(), CliFailure> {
    if target == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(data.as_bytes())
            .and_then(|_| stdout.write_all(b"\n"))
            .map_err(|e| CliFailure::Other(anyhow::anyhow!("writing to stdout: {e}")))
    } else {
        fs::write(target, format!("{data}\n"))
            .map_err(|e| CliFailure::Other(anyhow::anyhow!("writing {target}: {e}")))
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliFailure> {
    let (mut function, seed) = setup(&args.common)?;
    let dimension = function.dimension();

    let mut overridden = false;
    if let Some(Dist::Normal) = args.dist {
        let means = match &args.means {
            Some(t) => parse_float_list("means", t, dimension)?,
            None => vec![0.0; dimension],
        };
        let sigmas = match &args.sigmas {
            Some(t) => parse_float_list("sigmas", t, dimension)?,
            None => vec![1.0; dimension],
        };
        let domain = means
            .iter()
            .zip(&sigmas)
            .map(|(&m, &s)| DistributionSpec::normal(m, s))
            .collect::<Result<Vec<_>, _>>()?;
        function.model = function.model.with_domain(domain)?;
        // the closed forms describe the unit-cube version of the function
        function.analytic = None;
        overridden = true;
    } else if args.means.is_some() || args.sigmas.is_some() {
        return Err(CliFailure::Other(anyhow::anyhow!(
            "--means/--sigmas require --dist normal"
        )));
    }

    let report = assemble_report(
        &function.model,
        &ReportOptions {
            count: args.n,
            seed,
            m_range: args.m_range,
            ..ReportOptions::default()
        },
    )?;

    let rendered = match args.common.format {
        Format::Json => {
            let document = report_document(&function, &report, overridden);
            serde_json::to_string_pretty(&document).map_err(|e| CliFailure::Other(e.into()))?
        }
        Format::Csv => report_csv(&function, &report),
    };
    write_output(&args.common.out, &rendered)
}

fn json_opt(v: Option<f64>) -> Value {
    match v {
        Some(x) => json!(x),
        None => Value::Null,
    }
}

fn report_document(function: &TestFunction, report: &BoundsReport, overridden: bool) -> Value {
    let forms = function.analytic.as_deref();
    let mut notes: Vec<String> = Vec::new();
    if let Some(forms) = forms {
        let ub2 = forms.ub2();
        let total = forms.total();
        if ub2
            .iter()
            .zip(&total)
            .all(|(u, t)| (u - t).abs() <= 1e-12 * t.abs().max(1.0))
        {
            notes.push("tight: analytic UB2 equals S_i^tot for every variable".into());
        }
    }
    if overridden {
        notes.push(
            "input distributions overridden on the command line; closed-form references \
             describe the unit-cube version and are omitted"
                .into(),
        );
    }
    if report.range_is_empirical {
        notes.push(
            "derivative-range bounds use sample extremes of |df/dx_i| and are heuristic".into(),
        );
    }
    let variables: Vec<Value> = report
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let analytic = forms.map(|forms| {
                json!({
                    "s": forms.first_order()[i],
                    "s_tot": forms.total()[i],
                    "lb1": forms.lb1()[i],
                    "lb2": forms.lb2(i),
                    "m_star": forms.m_star(i),
                    "lb_star": forms.lb_star()[i],
                    "ub1": forms.ub1()[i],
                    "ub2": forms.ub2()[i],
                })
            });
            json!({
                "index": i + 1,
                "s": v.s,
                "s_tot": v.s_tot,
                "lb1": json_opt(v.lb1),
                "lb2": json_opt(v.lb2),
                "m_star": json_opt(v.m_star),
                "lb_star": json_opt(v.lb_star),
                "ub1": json_opt(v.ub1),
                "ub2": json_opt(v.ub2),
                "lb_normal": json_opt(v.lb_normal),
                "ub_normal": json_opt(v.ub_normal),
                "range_lower": json_opt(v.range_lower),
                "range_upper": json_opt(v.range_upper),
                "inert": v.inert,
                "analytic": analytic.unwrap_or(Value::Null),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "function": function.name,
        "params": function.params,
        "distribution": report.distribution,
        "n": report.count,
        "seed": report.seed,
        "mean": report.mean,
        "variance": report.variance,
        "evaluations": report.ledger,
        "variables": variables,
        "notes": notes,
    })
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flattened convenience export of the per-variable records.
fn report_csv(function: &TestFunction, report: &BoundsReport) -> String {
    let mut out = String::from(
        "variable,s,s_tot,lb1,lb2,m_star,lb_star,ub1,ub2,lb_normal,ub_normal,inert,\
         analytic_s,analytic_s_tot,analytic_lb_star,analytic_ub1,analytic_ub2",
    );
    let forms = function.analytic.as_deref();
    for (i, v) in report.variables.iter().enumerate() {
        let analytic = forms.map(|f| {
            (
                f.first_order()[i],
                f.total()[i],
                f.lb_star()[i],
                f.ub1()[i],
                f.ub2()[i],
            )
        });
        out.push_str(&format!(
            "\n{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            i + 1,
            v.s,
            v.s_tot,
            csv_cell(v.lb1),
            csv_cell(v.lb2),
            csv_cell(v.m_star),
            csv_cell(v.lb_star),
            csv_cell(v.ub1),
            csv_cell(v.ub2),
            csv_cell(v.lb_normal),
            csv_cell(v.ub_normal),
            v.inert,
            csv_cell(analytic.map(|a| a.0)),
            csv_cell(analytic.map(|a| a.1)),
            csv_cell(analytic.map(|a| a.2)),
            csv_cell(analytic.map(|a| a.3)),
            csv_cell(analytic.map(|a| a.4)),
        ));
    }
    out
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<(), CliFailure> {
    let (function, seed) = setup(&args.common)?;
    let quantity = Quantity::parse(&args.quantity)?;
    if args.variable == 0 || args.variable > function.dimension() {
        return Err(CliFailure::Other(anyhow::anyhow!(
            "--variable must be in 1..={}",
            function.dimension()
        )));
    }
    let (lo, hi) = args.n_grid;
    let mut grid = Vec::new();
    let mut n = lo;
    while n <= hi {
        grid.push(n);
        match n.checked_mul(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    let table = rmse_convergence(&function, quantity, args.variable - 1, &grid, args.k, seed)?;

    let rendered = match args.common.format {
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "convergence",
                "function": function.name,
                "params": function.params,
                "table": convergence_document(&table),
            });
            serde_json::to_string_pretty(&doc).map_err(|e| CliFailure::Other(e.into()))?
        }
        Format::Csv => convergence_csv(&table),
    };
    write_output(&args.common.out, &rendered)
}

fn convergence_document(table: &ConvergenceTable) -> Value {
    json!({
        "quantity": table.quantity.label(),
        "variable": table.variable + 1,
        "replicates": table.replicates,
        "seed": table.seed,
        "reference": table.reference,
        "absolute_errors": table.absolute_errors,
        "rows": table.rows.iter().map(|r| json!({"n": r.n, "rmse": r.rmse})).collect::<Vec<_>>(),
        "fit": table.fit.map(|f| json!({
            "coefficient": f.coefficient,
            "exponent": f.exponent,
            "r_squared": f.r_squared,
            "excluded_smallest": f.excluded_smallest,
            "excluded_zero": f.excluded_zero,
        })),
    })
}

fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("quantity,variable,n,rmse,k");
    for row in &table.rows {
        out.push_str(&format!(
            "\n{},{},{},{},{}",
            table.quantity.label(),
            table.variable + 1,
            row.n,
            row.rmse,
            table.replicates
        ));
    }
    out
}

fn cmd_list_functions() -> Result<(), CliFailure> {
    let registry = Registry::standard();
    let mut stdout = std::io::stdout().lock();
    for f in registry.entries() {
        writeln!(
            stdout,
            "{}  dimension={}  analytic-references={}  params: {}",
            f.name,
            f.dimension(),
            if f.analytic.is_some() { "yes" } else { "no" },
            Registry::parameter_schema(&f.name),
        )
        .map_err(|e| CliFailure::Other(anyhow::anyhow!("writing to stdout: {e}")))?;
    }
    Ok(())
}
