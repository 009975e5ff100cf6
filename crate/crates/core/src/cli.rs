//! Command-line surface: simulate paths, run the kernel transforms,
//! evaluate likelihood ratios, estimate mean reversion, and run the
//! verification suites.
//!
//! Every command is deterministic given its flags (seed included) and its
//! report echoes all inputs, so a run can be replayed from the report
//! alone. Exit codes: 0 success, 1 failed verification check, 2 usage
//! error, 3 numerical failure, 4 malformed input file, 5 degenerate input.

use crate::error::{Error, Result};
use crate::fbm::{sample_fbm, sample_fou, FouParams, RngSeed};
use crate::girsanov::{density_for_drifted_path, fou_mle};
use crate::grid::{SampledPath, TimeGrid};
use crate::hurst::norros_constants;
use crate::io::{read_path_file, write_path_file, ReportFile};
use crate::transform::Transformer;
use crate::verify::{run_suite, Suite, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::str::FromStr;

// The library accepts H anywhere in (0,1); the command line stays inside
// (0.01, 0.99) so Gamma(2 - 2H) and the kernel exponents remain well
// conditioned for file-sized runs.
const HURST_MIN: f64 = 0.01;
const HURST_MAX: f64 = 0.99;

// path_0000.csv through path_9999.csv.
const MAX_PATHS: usize = 10_000;

/// Parse the process-level arguments and run the selected command,
/// returning the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; clap routes them to
            // stdout and they exit 0, real usage errors exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Density(args) => cmd_density(args),
        Command::Mle(args) => cmd_mle(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("fracbm: {msg}");
            2
        }
        Err(CliError::Lib(e)) => {
            eprintln!("fracbm: {e}");
            match e {
                Error::InputFormat(_) => 4,
                Error::Degenerate(_) => 5,
                _ => 3,
            }
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "fracbm",
    version,
    about = "Fractional Brownian motion: exact simulation, martingale transforms, \
             Girsanov likelihood ratios, and drift estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample fractional Brownian motion or fractional Ornstein-Uhlenbeck paths
    Simulate(SimulateArgs),
    /// Transform an fBm path to Y, M, and the innovation Brownian motion B
    Transform(TransformArgs),
    /// Girsanov log likelihood ratio of a drifted path against the driftless model
    Density(DensityArgs),
    /// Closed-form MLE of the mean-reversion speed from one fOU path
    Mle(MleArgs),
    /// Run the acceptance check suites
    Verify(VerifyArgs),
}

fn parse_hurst(s: &str) -> std::result::Result<f64, String> {
    let h: f64 = s.parse().map_err(|_| format!("not a number: '{s}'"))?;
    if h > HURST_MIN && h < HURST_MAX {
        Ok(h)
    } else {
        Err(format!(
            "Hurst exponent must lie in ({HURST_MIN}, {HURST_MAX}), got {h}"
        ))
    }
}

fn parse_cells(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("not a cell count: '{s}'"))?;
    if n == 0 {
        return Err("grid needs at least one cell".into());
    }
    Ok(n)
}

fn parse_horizon(s: &str) -> std::result::Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("not a number: '{s}'"))?;
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(format!("horizon must be a positive finite time, got {t}"))
    }
}

fn parse_path_count(s: &str) -> std::result::Result<usize, String> {
    let k: usize = s.parse().map_err(|_| format!("not a path count: '{s}'"))?;
    if (1..=MAX_PATHS).contains(&k) {
        Ok(k)
    } else {
        Err(format!("path count must lie in 1..={MAX_PATHS}, got {k}"))
    }
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::from_str(s)
}

#[derive(Args)]
struct SimulateArgs {
    /// Process to sample
    #[arg(long, value_parser = ["fbm", "fou"])]
    model: String,
    /// Hurst exponent, in (0.01, 0.99)
    #[arg(long, value_parser = parse_hurst)]
    hurst: f64,
    /// Number of grid cells; each path file has n + 1 rows of data
    #[arg(long, value_parser = parse_cells)]
    n: usize,
    /// Final time T of the grid
    #[arg(long, value_parser = parse_horizon)]
    horizon: f64,
    /// Base RNG seed; path k draws from stream k of this seed
    #[arg(long)]
    seed: u64,
    /// Number of independent paths
    #[arg(long, default_value_t = 1, value_parser = parse_path_count)]
    paths: usize,
    /// Mean-reversion speed rho (fou only)
    #[arg(long)]
    rho: Option<f64>,
    /// Long-run mean m (fou only)
    #[arg(long, value_name = "M")]
    mean: Option<f64>,
    /// Starting level X_0 (fou only)
    #[arg(long)]
    x0: Option<f64>,
    /// Output directory for path_NNNN.csv files and report.json
    #[arg(long)]
    out: PathBuf,
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<i32> {
    let fou = match a.model.as_str() {
        "fou" => {
            let rho = a.rho.ok_or_else(|| usage("--model fou requires --rho"))?;
            Some(FouParams::new(
                rho,
                a.mean.unwrap_or(0.0),
                a.x0.unwrap_or(0.0),
            )?)
        }
        _ => {
            if a.rho.is_some() || a.mean.is_some() || a.x0.is_some() {
                return Err(usage("--rho, --mean, and --x0 apply only to --model fou"));
            }
            None
        }
    };
    let grid = TimeGrid::new(a.n, a.horizon)?;
    std::fs::create_dir_all(&a.out)?;
    let mut files = Vec::with_capacity(a.paths);
    for k in 0..a.paths {
        let seed = RngSeed::new(a.seed, k as u64);
        let path = match &fou {
            Some(p) => sample_fou(grid, a.hurst, seed, p)?,
            None => sample_fbm(grid, a.hurst, seed)?,
        };
        let name = format!("path_{k:04}.csv");
        write_path_file(&path, &a.out.join(&name))?;
        files.push(name);
    }
    let mut params = json!({
        "model": a.model,
        "hurst": a.hurst,
        "n": a.n,
        "horizon": a.horizon,
        "seed": a.seed,
        "paths": a.paths,
        "out": a.out.display().to_string(),
    });
    if let Some(p) = &fou {
        params["rho"] = json!(p.rho);
        params["mean"] = json!(p.m);
        params["x0"] = json!(p.x0);
    }
    let report = ReportFile::new("simulate", params, json!({ "files": files }), vec![]);
    report.write_file(&a.out.join("report.json"))?;
    println!(
        "simulate: wrote {} {} path(s) to {} (H={}, n={}, T={}, seed={})",
        a.paths,
        a.model,
        a.out.display(),
        a.hurst,
        a.n,
        a.horizon,
        a.seed
    );
    Ok(0)
}

#[derive(Args)]
struct TransformArgs {
    /// Input fBm path file (CSV, header "t,value", starts at W_0 = 0)
    #[arg(long = "in")]
    input: PathBuf,
    /// Hurst exponent of the input path, in (0.01, 0.99)
    #[arg(long, value_parser = parse_hurst)]
    hurst: f64,
    /// Comma-separated subset of Y,M,B,recon
    #[arg(long, default_value = "Y,M,B")]
    emit: String,
    /// Output directory for the emitted paths and report.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq)]
enum Emit {
    Y,
    M,
    B,
    Recon,
}

fn parse_emit(spec: &str) -> CliResult<Vec<Emit>> {
    let mut emits = Vec::new();
    for token in spec.split(',') {
        let emit = match token.trim() {
            "Y" => Emit::Y,
            "M" => Emit::M,
            "B" => Emit::B,
            "recon" => Emit::Recon,
            other => {
                return Err(usage(format!(
                    "--emit tokens must be drawn from Y,M,B,recon, got '{other}'"
                )))
            }
        };
        if !emits.contains(&emit) {
            emits.push(emit);
        }
    }
    if emits.is_empty() {
        return Err(usage("--emit needs at least one of Y,M,B,recon"));
    }
    Ok(emits)
}

// Relative L2 distance over the grid nodes, falling back to the absolute
// norm when the reference path is identically zero.
fn l2_rel_error(reference: &SampledPath, other: &SampledPath) -> f64 {
    let (a, b) = (reference.values(), other.values());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = a.iter().map(|x| x * x).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn cmd_transform(a: TransformArgs) -> CliResult<i32> {
    let emits = parse_emit(&a.emit)?;
    let w = read_path_file(&a.input)?;
    let tr = Transformer::new(*w.grid(), a.hurst)?;
    let bundle = tr.forward(&w)?;
    let qv_realized: f64 = bundle
        .m
        .values()
        .windows(2)
        .map(|p| (p[1] - p[0]) * (p[1] - p[0]))
        .sum();
    let (_, _, c2) = norros_constants(a.hurst)?;
    let horizon = w.grid().horizon();
    let qv_theoretical = c2 * c2 * horizon.powf(2.0 - 2.0 * a.hurst);
    let qv_rel_error = (qv_realized / qv_theoretical - 1.0).abs();

    let recon = if emits.contains(&Emit::Recon) {
        Some(tr.reconstruct(&bundle.b)?)
    } else {
        None
    };
    std::fs::create_dir_all(&a.out)?;
    let mut files = Vec::new();
    let mut tokens = Vec::new();
    for emit in &emits {
        let (token, name, path) = match emit {
            Emit::Y => ("Y", "y.csv", &bundle.y),
            Emit::M => ("M", "m.csv", &bundle.m),
            Emit::B => ("B", "b.csv", &bundle.b),
            Emit::Recon => (
                "recon",
                "recon.csv",
                recon.as_ref().expect("computed above"),
            ),
        };
        write_path_file(path, &a.out.join(name))?;
        files.push(name.to_string());
        tokens.push(token.to_string());
    }
    let mut results = json!({
        "files": files,
        "n": w.grid().n(),
        "horizon": horizon,
        "qvRealized": qv_realized,
        "qvTheoretical": qv_theoretical,
        "qvRelError": qv_rel_error,
    });
    if let Some(r) = &recon {
        results["roundTripL2RelError"] = json!(l2_rel_error(&w, r));
    }
    let params = json!({
        "in": a.input.display().to_string(),
        "hurst": a.hurst,
        "emit": tokens,
        "out": a.out.display().to_string(),
    });
    let report = ReportFile::new("transform", params, results, vec![]);
    report.write_file(&a.out.join("report.json"))?;
    println!(
        "transform: emitted {} to {} (H={}, QV rel error {:.3e})",
        tokens.join(","),
        a.out.display(),
        a.hurst,
        qv_rel_error
    );
    Ok(0)
}

#[derive(Args)]
struct DensityArgs {
    /// Input path file for the observed process X
    #[arg(long = "in")]
    input: PathBuf,
    /// Hurst exponent of the driving noise, in (0.01, 0.99)
    #[arg(long, value_parser = parse_hurst)]
    hurst: f64,
    /// Drift of the alternative model: "zero" or "fou:RHO,M" for rho*(m - x)
    #[arg(long)]
    drift: String,
    /// Starting level X_0 of the observed path
    #[arg(long, default_value_t = 0.0)]
    x0: f64,
    /// Report file; the report is printed to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

enum DriftSpec {
    Zero,
    Fou { rho: f64, m: f64 },
}

fn parse_drift(spec: &str) -> CliResult<DriftSpec> {
    if spec == "zero" {
        return Ok(DriftSpec::Zero);
    }
    if let Some(rest) = spec.strip_prefix("fou:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            let rho: std::result::Result<f64, _> = parts[0].trim().parse();
            let m: std::result::Result<f64, _> = parts[1].trim().parse();
            if let (Ok(rho), Ok(m)) = (rho, m) {
                if rho.is_finite() && m.is_finite() {
                    return Ok(DriftSpec::Fou { rho, m });
                }
            }
        }
    }
    Err(usage(format!(
        "--drift must be \"zero\" or \"fou:RHO,M\", got '{spec}'"
    )))
}

// Writes the report to `out` and prints the given one-line summary, or
// prints the full report to stdout when no file was requested.
fn deliver_report(report: &ReportFile, out: Option<&PathBuf>, summary: &str) -> Result<()> {
    for w in &report.warnings {
        eprintln!("fracbm: warning: {w}");
    }
    match out {
        Some(path) => {
            report.write_file(path)?;
            println!("{summary}");
        }
        None => println!("{}", report.to_json()),
    }
    Ok(())
}

fn cmd_density(a: DensityArgs) -> CliResult<i32> {
    let drift = parse_drift(&a.drift)?;
    let x = read_path_file(&a.input)?;
    let report = match drift {
        DriftSpec::Zero => density_for_drifted_path(&x, |_| 0.0, a.hurst, a.x0)?,
        DriftSpec::Fou { rho, m } => {
            density_for_drifted_path(&x, move |v| rho * (m - v), a.hurst, a.x0)?
        }
    };
    let mut params = json!({
        "in": a.input.display().to_string(),
        "hurst": a.hurst,
        "drift": a.drift,
        "x0": a.x0,
    });
    if let Some(out) = &a.out {
        params["out"] = json!(out.display().to_string());
    }
    let results = json!({
        "logDensity": report.log_density,
        "itoSum": report.ito_sum,
        "l2NormSq": report.l2_norm_sq,
        "singularFlag": report.singular,
    });
    let warnings = if report.singular {
        vec![
            "drift integrand diverges at t = 0; discrete sums start at the first positive node"
                .to_string(),
        ]
    } else {
        vec![]
    };
    let file = ReportFile::new("density", params, results, warnings);
    let summary = format!(
        "density: logDensity={} (itoSum={}, l2NormSq={}, singular={})",
        report.log_density, report.ito_sum, report.l2_norm_sq, report.singular
    );
    deliver_report(&file, a.out.as_ref(), &summary)?;
    Ok(0)
}

#[derive(Args)]
struct MleArgs {
    /// Input path file for the observed fOU process
    #[arg(long = "in")]
    input: PathBuf,
    /// Hurst exponent of the driving noise, in (0.01, 0.99)
    #[arg(long, value_parser = parse_hurst)]
    hurst: f64,
    /// Known long-run mean m of the model
    #[arg(long, value_name = "M")]
    mean: f64,
    /// Starting level X_0; defaults to the first value of the input path
    #[arg(long)]
    x0: Option<f64>,
    /// Report file; the report is printed to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_mle(a: MleArgs) -> CliResult<i32> {
    let x = read_path_file(&a.input)?;
    let x0 = a.x0.unwrap_or_else(|| x.value(0));
    let report = fou_mle(&x, a.mean, x0, a.hurst)?;
    let mut params = json!({
        "in": a.input.display().to_string(),
        "hurst": a.hurst,
        "mean": a.mean,
        "x0": x0,
    });
    if let Some(out) = &a.out {
        params["out"] = json!(out.display().to_string());
    }
    let results = json!({
        "rhoHat": report.rho_hat,
        "score": report.score,
        "information": report.information,
        "logLikAtHat": report.log_lik_at_hat,
    });
    let file = ReportFile::new("mle", params, results, vec![]);
    let summary = format!(
        "mle: rhoHat={} (score={}, information={})",
        report.rho_hat, report.score, report.information
    );
    deliver_report(&file, a.out.as_ref(), &summary)?;
    Ok(0)
}

#[derive(Args)]
struct VerifyArgs {
    /// Check suite: constants, fbm, fraccalc, transform, girsanov, or all
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    /// RNG seed shared by every stochastic check
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Quarter-scale sizes and path counts with proportionally wider gates
    #[arg(long)]
    fast: bool,
    /// Also write the check results as a report file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_verify(a: VerifyArgs) -> CliResult<i32> {
    let results = run_suite(a.suite, a.seed, a.fast);
    for r in &results {
        println!(
            "{} {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let failed = results.len() - passed;
    println!(
        "verify {}: {}/{} checks passed (seed {}{})",
        a.suite.name(),
        passed,
        results.len(),
        a.seed,
        if a.fast { ", fast" } else { "" }
    );
    if let Some(out) = &a.out {
        let checks: Vec<serde_json::Value> = results
            .iter()
            .map(|r| json!({ "name": r.name, "pass": r.pass, "detail": r.detail }))
            .collect();
        let params = json!({
            "suite": a.suite.name(),
            "seed": a.seed,
            "fast": a.fast,
            "out": out.display().to_string(),
        });
        let report = ReportFile::new(
            "verify",
            params,
            json!({ "checks": checks, "passed": passed, "failed": failed }),
            vec![],
        );
        report.write_file(out)?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurst_parser_enforces_the_cli_range() {
        assert!(parse_hurst("0.5").is_ok());
        assert!(parse_hurst("0.01").is_err());
        assert!(parse_hurst("0.99").is_err());
        assert!(parse_hurst("half").is_err());
    }

    #[test]
    fn drift_parser_accepts_the_two_documented_forms() {
        assert!(matches!(parse_drift("zero"), Ok(DriftSpec::Zero)));
        match parse_drift("fou:0.5,-1.25") {
            Ok(DriftSpec::Fou { rho, m }) => {
                assert_eq!(rho, 0.5);
                assert_eq!(m, -1.25);
            }
            _ => panic!("fou spec should parse"),
        }
        for bad in ["fou:", "fou:1", "fou:1,2,3", "fou:a,b", "none", "fou:inf,0"] {
            assert!(parse_drift(bad).is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn emit_parser_dedups_and_rejects_unknown_tokens() {
        let emits = parse_emit("Y,B,Y").unwrap();
        assert_eq!(emits.len(), 2);
        assert!(parse_emit("Y,W").is_err());
        assert!(parse_emit("").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
