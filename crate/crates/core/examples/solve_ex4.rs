//! Solves the scalar two-objective problem under both ordering cones and
//! with each beta rule, printing the iterate trace.

use nalgebra::DVector;
use setcg::bench::builtin_problem;
use setcg::cg::{solve, BetaRule, CGParams};

fn main() {
    let x0 = DVector::from_vec(vec![std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7.5)]);
    for name in ["ex4_k1", "ex4_k2"] {
        let problem = builtin_problem(name).expect("registered");
        for rule in [BetaRule::Dy, BetaRule::Prp, BetaRule::Hs] {
            let r = solve(&problem, &x0, &CGParams::for_rule(rule)).expect("valid input");
            println!(
                "{name} {rule}: {:?} after {} iterations, x = {:.6}, |u| = {:.2e}",
                r.status, r.iterations, r.x_final[0], r.final_u_norm
            );
            for rec in &r.trace {
                println!(
                    "    k={} x={:.6} alpha={:.4e} beta={:.4} F_d={:.4e} restarted={}",
                    rec.k, rec.x[0], rec.alpha, rec.beta, rec.f_d, rec.restarted
                );
            }
        }
    }
}
