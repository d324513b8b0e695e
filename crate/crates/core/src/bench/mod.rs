//! Built-in instances, seeded start sampling and batch statistics.

mod problems;

pub use problems::{
    builtin_problem, builtin_problem_with, ex4_cone_k2, facility_offsets, ProblemOptions, FACILITY_GRID,
    FACILITY_SITES, PROBLEM_NAMES,
};

use std::io::{Read, Write};
use std::time::Duration;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cg::{solve, BetaRule, CGParams, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::linesearch::WolfeVariant;
use crate::problem::SetValuedProblem;

/// Environment variable capping the worker count (`0` means one per core).
pub const THREADS_ENV: &str = "SETCG_THREADS";

/// Header of the statistics CSV.
pub const CSV_HEADER: [&str; 7] = ["problem", "rule", "metric", "min", "mean", "max", "failures"];

/// Uniform samples from `bounds`, reproducible across platforms for a fixed seed.
pub fn sample_starts(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            DVector::from_iterator(
                bounds.len(),
                bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()),
            )
        })
        .collect()
}

/// Optional solver settings layered over [`CGParams::for_rule`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha0: Option<f64>,
    pub alpha_max: Option<f64>,
    pub eta: Option<f64>,
    pub wolfe_variant: Option<WolfeVariant>,
    pub max_iter: Option<usize>,
    pub clip_nonnegative: Option<bool>,
    pub sufficient_descent_mu: Option<f64>,
}

impl ParamOverrides {
    /// Parameters for `rule` with every set override applied.
    ///
    /// A changed `sigma` without an explicit `eta` moves the DY fraction along
    /// so that it stays below its admissible bound.
    pub fn params_for(&self, rule: BetaRule) -> Result<CGParams> {
        let mut p = CGParams::for_rule(rule);
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.rho {
            p.linesearch.rho = v;
        }
        if let Some(v) = self.sigma {
            p.linesearch.sigma = v;
            p.eta = 0.9 * crate::cg::dy_eta_bound(v);
        }
        if let Some(v) = self.alpha0 {
            p.linesearch.alpha0 = v;
        }
        if let Some(v) = self.alpha_max {
            p.linesearch.alpha_max = v;
        }
        if let Some(v) = self.eta {
            p.eta = v;
        }
        if let Some(v) = self.wolfe_variant {
            p.wolfe_variant = v;
        }
        if let Some(v) = self.max_iter {
            p.max_iter = v;
        }
        if let Some(v) = self.clip_nonnegative {
            p.clip_nonnegative = v;
        }
        if self.sufficient_descent_mu.is_some() {
            p.sufficient_descent_mu = self.sufficient_descent_mu;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub problem: String,
    pub rules: Vec<BetaRule>,
    pub starts: usize,
    pub seed: u64,
    pub overrides: ParamOverrides,
    pub problem_options: ProblemOptions,
}

impl BenchmarkSpec {
    pub fn new(problem: impl Into<String>, rules: Vec<BetaRule>, starts: usize, seed: u64) -> Self {
        Self {
            problem: problem.into(),
            rules,
            starts,
            seed,
            overrides: ParamOverrides::default(),
            problem_options: ProblemOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParameter("starts must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidParameter("no beta rule selected".into()));
        }
        Ok(())
    }
}

/// `(min, mean, max)` of a sample; all `NaN` when the sample is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                min: f64::NAN,
                mean: f64::NAN,
                max: f64::NAN,
            };
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = (values.iter().sum::<f64>() / values.len() as f64).clamp(min, max);
        Self { min, mean, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    pub rule: BetaRule,
    pub iterations: Summary,
    pub time_s: Summary,
    /// Runs that did not converge; they are left out of both summaries.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub problem: String,
    pub rules: Vec<RuleStats>,
}

/// Outcome of one start under one rule.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub start_index: usize,
    pub x0: DVector<f64>,
    /// `Err` only when the solver rejected its input.
    pub result: std::result::Result<SolveResult, String>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        matches!(&self.result, Ok(r) if r.status == SolveStatus::Converged)
    }
}

#[derive(Debug, Clone)]
pub struct RuleRuns {
    pub rule: BetaRule,
    pub params: CGParams,
    /// Ordered by start index.
    pub runs: Vec<RunOutcome>,
}

/// Every individual run of a benchmark, kept for post-hoc checks.
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub problem: SetValuedProblem,
    pub starts: Vec<DVector<f64>>,
    pub per_rule: Vec<RuleRuns>,
}

impl BenchmarkReport {
    pub fn stats(&self) -> RunStats {
        let rules = self
            .per_rule
            .iter()
            .map(|rr| {
                let ok: Vec<&SolveResult> = rr
                    .runs
                    .iter()
                    .filter(|r| r.converged())
                    .filter_map(|r| r.result.as_ref().ok())
                    .collect();
                let iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
                let times: Vec<f64> = ok.iter().map(|r| r.wall_time.as_secs_f64()).collect();
                RuleStats {
                    rule: rr.rule,
                    iterations: Summary::of(&iters),
                    time_s: Summary::of(&times),
                    failures: rr.runs.len() - ok.len(),
                }
            })
            .collect();
        RunStats {
            problem: self.problem.name().to_string(),
            rules,
        }
    }
}

/// Worker count from [`THREADS_ENV`], `0` when unset or unparsable.
pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs every rule from the same seeded starts, in parallel over starts.
pub fn run_benchmark_detailed(spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let problem = builtin_problem_with(&spec.problem, &spec.problem_options)?;
    run_problem(problem, spec)
}

/// Same as [`run_benchmark_detailed`] with a caller-supplied problem; the
/// spec's problem name is ignored.
pub fn run_problem(problem: SetValuedProblem, spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let starts = sample_starts(problem.start_box(), spec.starts, spec.seed);
    let params: Vec<CGParams> = spec
        .rules
        .iter()
        .map(|&r| spec.overrides.params_for(r))
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(configured_threads())
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let per_rule = pool.install(|| {
        params
            .iter()
            .map(|p| RuleRuns {
                rule: p.beta_rule,
                params: p.clone(),
                runs: starts
                    .par_iter()
                    .enumerate()
                    .map(|(i, x0)| RunOutcome {
                        start_index: i,
                        x0: x0.clone(),
                        result: solve(&problem, x0, p).map_err(|e| e.to_string()),
                    })
                    .collect(),
            })
            .collect()
    });
    Ok(BenchmarkReport {
        problem,
        starts,
        per_rule,
    })
}

pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<RunStats> {
    Ok(run_benchmark_detailed(spec)?.stats())
}

fn fmt_real(v: f64) -> String {
    // Rust's shortest round-trip formatting; parses back to the same bits
    format!("{v:?}")
}

impl RunStats {
    /// Two rows per rule: `iterations` then `time_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rules {
            for (metric, s) in [("iterations", r.iterations), ("time_s", r.time_s)] {
                w.write_record([
                    self.problem.clone(),
                    r.rule.to_string(),
                    metric.to_string(),
                    fmt_real(s.min),
                    fmt_real(s.mean),
                    fmt_real(s.max),
                    r.failures.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("csv: {msg}"));
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut problem = None;
        let mut rules: Vec<RuleStats> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num =
                |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| bad(format!("bad number `{}`", &rec[i]))) };
            problem.get_or_insert_with(|| rec[0].to_string());
            let rule: BetaRule = rec[1].parse()?;
            let s = Summary {
                min: num(3)?,
                mean: num(4)?,
                max: num(5)?,
            };
            let failures: usize = rec[6].parse().map_err(|_| bad("bad failure count".into()))?;
            let idx = match rules.iter().position(|r| r.rule == rule) {
                Some(i) => i,
                None => {
                    let nan = Summary::of(&[]);
                    rules.push(RuleStats {
                        rule,
                        iterations: nan,
                        time_s: nan,
                        failures,
                    });
                    rules.len() - 1
                }
            };
            match &rec[2] {
                "iterations" => rules[idx].iterations = s,
                "time_s" => rules[idx].time_s = s,
                other => return Err(bad(format!("unknown metric `{other}`"))),
            }
        }
        Ok(Self {
            problem: problem.unwrap_or_default(),
            rules,
        })
    }

    /// Plain-text summary, one line per rule.
    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{}\n{:<6}{:>8}{:>10}{:>8}{:>12}{:>12}{:>12}{:>10}\n",
            self.problem, "rule", "min", "mean", "max", "t_min", "t_mean", "t_max", "failures"
        );
        for r in &self.rules {
            s.push_str(&format!(
                "{:<6}{:>8}{:>10.2}{:>8}{:>12.4e}{:>12.4e}{:>12.4e}{:>10}\n",
                r.rule.to_string(),
                r.iterations.min,
                r.iterations.mean,
                r.iterations.max,
                r.time_s.min,
                r.time_s.mean,
                r.time_s.max,
                r.failures
            ));
        }
        s
    }
}

/// Per-run record for the optional JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rule: BetaRule,
    pub start_index: usize,
    pub x0: Vec<f64>,
    pub status: Option<SolveStatus>,
    pub iterations: Option<usize>,
    pub x_final: Option<Vec<f64>>,
    pub final_u_norm: Option<f64>,
    pub time_s: Option<f64>,
    pub error: Option<String>,
}

impl BenchmarkReport {
    pub fn run_summaries(&self) -> Vec<RunSummary> {
        self.per_rule
            .iter()
            .flat_map(|rr| {
                rr.runs.iter().map(move |run| {
                    let mut s = RunSummary {
                        rule: rr.rule,
                        start_index: run.start_index,
                        x0: run.x0.as_slice().to_vec(),
                        status: None,
                        iterations: None,
                        x_final: None,
                        final_u_norm: None,
                        time_s: None,
                        error: None,
                    };
                    match &run.result {
                        Ok(r) => {
                            s.status = Some(r.status);
                            s.iterations = Some(r.iterations);
                            s.x_final = Some(r.x_final.as_slice().to_vec());
                            s.final_u_norm = Some(r.final_u_norm);
                            s.time_s = Some(r.wall_time.as_secs_f64());
                        }
                        Err(e) => s.error = Some(e.clone()),
                    }
                    s
                })
            })
            .collect()
    }

    pub fn total_wall_time(&self) -> Duration {
        self.per_rule
            .iter()
            .flat_map(|rr| rr.runs.iter())
            .filter_map(|r| r.result.as_ref().ok())
            .map(|r| r.wall_time)
            .sum()
    }
}
