//! Prints iteration summaries for every built-in instance.
//!
//! Usage: `cargo run --release --example benchmark_tables -- [starts] [seed] [problem...]`

use setcg::bench::{run_benchmark_detailed, BenchmarkSpec, PROBLEM_NAMES};
use setcg::cg::BetaRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let starts = args.first().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let seed = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let names: Vec<String> = if args.len() > 2 {
        args[2..].to_vec()
    } else {
        PROBLEM_NAMES.iter().map(|s| s.to_string()).collect()
    };
    for name in names {
        let spec = BenchmarkSpec::new(name, vec![BetaRule::Dy, BetaRule::Prp, BetaRule::Hs], starts, seed);
        let t = std::time::Instant::now();
        let report = run_benchmark_detailed(&spec)?;
        print!("{}", report.stats().render_table());
        for rr in &report.per_rule {
            for run in rr.runs.iter().filter(|r| !r.converged()) {
                match &run.result {
                    Ok(r) => println!(
                        "  {} start {} -> {:?} after {} ({})",
                        rr.rule,
                        run.start_index,
                        r.status,
                        r.iterations,
                        r.message.as_deref().unwrap_or("")
                    ),
                    Err(e) => println!("  {} start {} -> error {e}", rr.rule, run.start_index),
                }
            }
        }
        println!("elapsed {:.2?}\n", t.elapsed());
    }
    Ok(())
}
