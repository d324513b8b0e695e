use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use setcg::bench::RunStats;

fn setcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setcg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file exists")
}

#[test]
fn list_prints_every_problem() {
    let o = setcg(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("ex5_k2  n=1 m=3 p=5 cone=soc3"));
    assert!(text.contains("ex3"));
}

#[test]
fn solve_stops_at_stationary_start() {
    let o = setcg(&["solve", "--problem", "ex4_k2", "--x0", "-10.4", "--beta", "dy"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("iterations: 0"));
}

#[test]
fn solve_facility_location_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let o = setcg(&[
        "solve",
        "--problem",
        "ex1",
        "--x0",
        "30,-20",
        "--beta",
        "hs",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let trace: Value = serde_json::from_str(&read(&path)).unwrap();
    for key in [
        "problem",
        "rule",
        "params",
        "status",
        "iterations",
        "x_final",
        "records",
    ] {
        assert!(trace.get(key).is_some(), "missing {key}");
    }
    assert_eq!(trace["problem"], "ex1");
    assert_eq!(trace["rule"], "hs");
    assert_eq!(trace["status"], "Converged");
    let iterations = trace["iterations"].as_u64().unwrap();
    assert!((1..=10).contains(&iterations));
    let records = trace["records"].as_array().unwrap();
    assert_eq!(records.len() as u64, iterations);
    let fields = [
        "k",
        "x",
        "a",
        "u",
        "d",
        "beta",
        "alpha",
        "phi",
        "F_u",
        "F_d",
        "restarted",
        "zoutendijk_term",
    ];
    for rec in records {
        for f in fields {
            assert!(rec.get(f).is_some(), "record missing {f}");
        }
    }
}

#[test]
fn trace_floats_round_trip_exactly() {
    use nalgebra::DVector;
    use setcg::bench::builtin_problem;
    use setcg::cg::{solve, BetaRule, CGParams};

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let o = setcg(&[
        "solve",
        "--problem",
        "ex2",
        "--x0",
        "2.5,-2.5",
        "--beta",
        "prp",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let trace: Value = serde_json::from_str(&read(&path)).unwrap();

    let r = solve(
        &builtin_problem("ex2").unwrap(),
        &DVector::from_vec(vec![2.5, -2.5]),
        &CGParams::for_rule(BetaRule::Prp),
    )
    .unwrap();
    let x_final: Vec<f64> = serde_json::from_value(trace["x_final"].clone()).unwrap();
    assert_eq!(x_final, r.x_final.as_slice());
    let records: Vec<setcg::cg::IterateRecord> = serde_json::from_value(trace["records"].clone()).unwrap();
    assert_eq!(records, r.trace);
}

#[test]
fn wrong_dimension_is_a_config_error() {
    let o = setcg(&["solve", "--problem", "ex1", "--x0", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn invalid_wolfe_parameters_are_rejected() {
    let o = setcg(&[
        "solve",
        "--problem",
        "ex1",
        "--x0",
        "0,0",
        "--rho",
        "0.3",
        "--sigma",
        "0.2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = setcg(&["bench", "--problem", "ex1", "--starts", "2", "--sigma", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes_follow_status() {
    let o = setcg(&[
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
    assert_eq!(o.status.code(), Some(3));
    // The unbounded direction needs a step far beyond alpha_max.
    let o = setcg(&["solve", "--problem", "ex4_k1", "--x0", "-3.96"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("LineSearchFailed"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solver.cfg");
    std::fs::write(&cfg, "# bad on purpose\nrho = 0.5\nsigma = 0.2\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = setcg(&["solve", "--problem", "ex1", "--x0", "0,0", "--config", c]);
    assert_eq!(o.status.code(), Some(1));
    let o = setcg(&[
        "solve",
        "--problem",
        "ex1",
        "--x0",
        "0,0",
        "--config",
        c,
        "--rho",
        "1e-4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = setcg(&[
        "solve",
        "--problem",
        "ex1",
        "--x0",
        "0,0",
        "--config",
        "/nonexistent/cfg",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_csv_has_two_rows_per_rule_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let runs = dir.path().join("runs.json");
    let base = [
        "bench",
        "--problem",
        "ex1",
        "--rules",
        "dy,prp,hs",
        "--starts",
        "100",
        "--seed",
        "42",
    ];
    let o = setcg(
        &[
            &base[..],
            &["--out", a.to_str().unwrap(), "--json", runs.to_str().unwrap()],
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(0));
    let o = setcg(&[&base[..], &["--out", b.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0));

    let text = read(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "problem,rule,metric,min,mean,max,failures");
    assert_eq!(lines.len(), 7);
    let iteration_rows = |t: &str| {
        t.lines()
            .filter(|l| l.contains(",iterations,"))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(iteration_rows(&text), iteration_rows(&read(&b)));

    let stats = RunStats::read_csv(text.as_bytes()).unwrap();
    assert_eq!(stats.rules.len(), 3);
    let per_run: Value = serde_json::from_str(&read(&runs)).unwrap();
    assert_eq!(per_run.as_array().unwrap().len(), 300);
}

#[test]
fn bench_scalar_pair_under_k2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex4.csv");
    let o = setcg(&[
        "bench",
        "--problem",
        "ex4_k2",
        "--starts",
        "100",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stats = RunStats::read_csv(read(&out).as_bytes()).unwrap();
    for r in &stats.rules {
        assert!(r.iterations.mean <= 1.0, "{}: {}", r.rule, r.iterations.mean);
        assert_eq!(r.failures, 0);
    }
}

#[test]
fn second_vector_override_is_accepted() {
    let o = setcg(&[
        "solve",
        "--problem",
        "ex4_k2",
        "--x0",
        "2",
        "--ex4-second-vector",
        "-1,1",
    ]);
    assert!(matches!(o.status.code(), Some(0 | 2 | 3)));
    let o = setcg(&["solve", "--problem", "ex4_k2", "--x0", "2", "--ex4-second-vector", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_start_bench_has_degenerate_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let o = setcg(&[
        "bench",
        "--problem",
        "ex2",
        "--rules",
        "prp",
        "--starts",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stats = RunStats::read_csv(read(&out).as_bytes()).unwrap();
    let it = stats.rules[0].iterations;
    assert_eq!(it.min, it.mean);
    assert_eq!(it.mean, it.max);
}
