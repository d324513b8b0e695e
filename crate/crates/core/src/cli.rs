//! Command-line front end: `solve`, `bench` and `list`.
//!
//! Settings come from built-in defaults, then an optional `key = value`
//! config file, then flags.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::bench::{builtin_problem_with, run_problem, BenchmarkSpec, ParamOverrides, ProblemOptions, PROBLEM_NAMES};
use crate::cg::{solve, BetaRule, CGParams, IterateRecord, SolveStatus};
use crate::error::{Error, Result};
use crate::linesearch::WolfeVariant;

/// Exit code for configuration and I/O errors.
pub const EXIT_CONFIG: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "setcg", version, about = "Conjugate gradient methods for set optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one solve and optionally write its JSON trace.
    Solve(SolveArgs),
    /// Run a seeded batch of starts and summarize iteration counts.
    Bench(BenchArgs),
    /// List the built-in problems.
    List,
}

#[derive(Debug, Args)]
struct SolverFlags {
    #[arg(long)]
    problem: String,
    /// `key = value` file with solver settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// `standard` or `strong`.
    #[arg(long)]
    wolfe: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Second perturbation vector for `ex4_*`, as `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    ex4_second_vector: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverFlags,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    #[arg(long, default_value = "dy")]
    beta: String,
    /// Path of the JSON trace.
    #[arg(long, alias = "out")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, default_value = "dy,prp,hs")]
    rules: String,
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Path of the summary CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path of the per-run JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::List => cmd_list(out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Settings read from a config file. Unknown keys are rejected.
#[derive(Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub overrides: ParamOverrides,
    pub ex4_second_vector: Option<[f64; 2]>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let o = &mut cfg.overrides;
            match key {
                "epsilon" => o.epsilon = Some(parse_num(key, value)?),
                "rho" => o.rho = Some(parse_num(key, value)?),
                "sigma" => o.sigma = Some(parse_num(key, value)?),
                "alpha0" => o.alpha0 = Some(parse_num(key, value)?),
                "alpha_max" => o.alpha_max = Some(parse_num(key, value)?),
                "eta" => o.eta = Some(parse_num(key, value)?),
                "wolfe" | "wolfe_variant" => o.wolfe_variant = Some(value.parse()?),
                "max_iter" => o.max_iter = Some(parse_num(key, value)?),
                "ex4_second_vector" => cfg.ex4_second_vector = Some(parse_pair(value)?),
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "config line {}: unknown key `{key}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{value}` is not a valid value for {key}")))
}

/// Parses a comma-separated list of reals.
pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| parse_num::<f64>("a coordinate", s.trim()))
        .collect()
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    match parse_point(text)?.as_slice() {
        &[a, b] => Ok([a, b]),
        other => Err(Error::InvalidParameter(format!(
            "expected two numbers, got {}",
            other.len()
        ))),
    }
}

/// Parses a comma-separated list of β rule names.
pub fn parse_rules(text: &str) -> Result<Vec<BetaRule>> {
    text.split(',').map(|s| s.trim().parse()).collect()
}

impl SolverFlags {
    fn resolve(&self) -> Result<(ParamOverrides, ProblemOptions)> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut o = file.overrides;
        let flags = [
            (&mut o.epsilon, self.epsilon),
            (&mut o.rho, self.rho),
            (&mut o.sigma, self.sigma),
            (&mut o.alpha0, self.alpha0),
            (&mut o.alpha_max, self.alpha_max),
            (&mut o.eta, self.eta),
        ];
        for (slot, flag) in flags {
            if flag.is_some() {
                *slot = flag;
            }
        }
        if let Some(w) = &self.wolfe {
            o.wolfe_variant = Some(w.parse::<WolfeVariant>()?);
        }
        if self.max_iter.is_some() {
            o.max_iter = self.max_iter;
        }
        let second = match &self.ex4_second_vector {
            Some(s) => Some(parse_pair(s)?),
            None => file.ex4_second_vector,
        };
        Ok((
            o,
            ProblemOptions {
                ex4_second_vector: second,
            },
        ))
    }
}

/// Top-level JSON trace of a single solve.
#[derive(Debug, Serialize)]
pub struct Trace<'a> {
    pub problem: &'a str,
    pub rule: BetaRule,
    pub params: &'a CGParams,
    pub status: SolveStatus,
    pub iterations: usize,
    pub x_final: Vec<f64>,
    pub records: &'a [IterateRecord],
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    serde_json::to_vec_pretty(value).map_err(|e| Error::InvalidParameter(format!("JSON encoding failed: {e}")))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let (overrides, options) = args.solver.resolve()?;
    let problem = builtin_problem_with(&args.solver.problem, &options)?;
    let rule: BetaRule = args.beta.parse()?;
    let params = overrides.params_for(rule)?;
    let x0 = parse_point(&args.x0)?;
    if x0.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            expected: problem.n(),
            got: x0.len(),
        });
    }
    let result = solve(&problem, &DVector::from_vec(x0), &params)?;

    if let Some(path) = &args.json {
        let trace = Trace {
            problem: problem.name(),
            rule,
            params: &params,
            status: result.status,
            iterations: result.iterations,
            x_final: result.x_final.as_slice().to_vec(),
            records: &result.trace,
        };
        write_file(path, &to_json(&trace)?)?;
    }

    let _ = writeln!(out, "status: {:?}", result.status);
    let _ = writeln!(out, "iterations: {}", result.iterations);
    let _ = writeln!(out, "u_norm: {:e}", result.final_u_norm);
    let _ = writeln!(out, "x_final: {:?}", result.x_final.as_slice());
    if let Some(msg) = &result.message {
        let _ = writeln!(out, "note: {msg}");
    }
    Ok(result.status.exit_code())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let (overrides, options) = args.solver.resolve()?;
    let problem = builtin_problem_with(&args.solver.problem, &options)?;
    let mut spec = BenchmarkSpec::new(
        args.solver.problem.clone(),
        parse_rules(&args.rules)?,
        args.starts,
        args.seed,
    );
    spec.overrides = overrides;
    spec.problem_options = options;

    let report = run_problem(problem, &spec)?;
    let stats = report.stats();
    if let Some(path) = &args.out {
        write_file(path, stats.to_csv_string()?.as_bytes())?;
    }
    if let Some(path) = &args.json {
        write_file(path, &to_json(&report.run_summaries())?)?;
    }
    let _ = write!(out, "{}", stats.render_table());
    Ok(0)
}

fn cmd_list(out: &mut dyn Write) -> Result<i32> {
    for name in PROBLEM_NAMES {
        let p = builtin_problem_with(name, &ProblemOptions::default())?;
        let bounds: Vec<String> = p
            .start_box()
            .iter()
            .map(|(lo, hi)| format!("[{lo:.4}, {hi:.4}]"))
            .collect();
        let _ = writeln!(
            out,
            "{name:<6}  n={} m={} p={} cone={}  box={}",
            p.n(),
            p.m(),
            p.p(),
            p.cone().label(),
            bounds.join("x")
        );
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("setcg").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_parsing() {
        let cfg =
            ConfigFile::parse("# defaults\nsigma = 0.2\nwolfe = standard\nmax_iter=7\n\nex4_second_vector = 1, 1\n")
                .unwrap();
        assert_eq!(cfg.overrides.sigma, Some(0.2));
        assert_eq!(cfg.overrides.wolfe_variant, Some(WolfeVariant::Standard));
        assert_eq!(cfg.overrides.max_iter, Some(7));
        assert_eq!(cfg.ex4_second_vector, Some([1.0, 1.0]));
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("sigma 0.2").is_err());
        assert!(ConfigFile::parse("rho = abc").is_err());
    }

    #[test]
    fn points_and_rules() {
        assert_eq!(parse_point("-1.5, 2").unwrap(), vec![-1.5, 2.0]);
        assert!(parse_point("1,,2").is_err());
        assert_eq!(parse_rules("dy,hs").unwrap(), vec![BetaRule::Dy, BetaRule::Hs]);
        assert!(parse_rules("dy,cg").is_err());
    }

    #[test]
    fn list_has_every_problem() {
        let (code, out, _) = run_capture(&["list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 7);
        assert!(out.contains("ex5_k2  n=1 m=3 p=5 cone=soc3"));
    }

    #[test]
    fn invalid_parameters_exit_one() {
        let (code, _, err) = run_capture(&["solve", "--problem", "ex1", "--x0", "0"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("dimension"));
        let (code, _, _) = run_capture(&[
            "solve",
            "--problem",
            "ex1",
            "--x0",
            "0,0",
            "--rho",
            "0.5",
            "--sigma",
            "0.2",
        ]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_capture(&["solve", "--problem", "nope", "--x0", "0"]);
        assert_eq!(code, EXIT_CONFIG);
        let (code, _, _) = run_capture(&["frobnicate"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn solve_stationary_start() {
        let (code, out, _) = run_capture(&["solve", "--problem", "ex4_k2", "--x0", "-10.4", "--beta", "dy"]);
        assert_eq!(code, 0);
        assert!(out.contains("iterations: 0"));
    }

    #[test]
    fn max_iterations_exit_code() {
        let (code, out, _) = run_capture(&[
            "solve",
            "--problem",
            "ex2",
            "--x0",
            "2.5,-2.5",
            "--max-iter",
            "1",
            "--epsilon",
            "1e-12",
        ]);
        assert_eq!(code, 3, "{out}");
    }
}
