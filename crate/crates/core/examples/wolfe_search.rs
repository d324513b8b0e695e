//! Runs the set-valued Wolfe line search along the steepest descent
//! direction and re-checks the accepted step.

use nalgebra::DVector;
use setcg::bench::builtin_problem;
use setcg::linesearch::{curvature_value, wolfe_conditions_hold, wolfe_search, LineSearchParams, WolfeVariant};
use setcg::subproblem::{compute_direction, SubproblemOptions};

fn main() {
    let problem = builtin_problem("ex2").expect("registered");
    let x = DVector::from_vec(vec![2.0, -1.0]);
    let dir = compute_direction(&problem, &x, &SubproblemOptions::default()).expect("direction");
    let params = LineSearchParams::default();

    for variant in [WolfeVariant::Standard, WolfeVariant::Strong] {
        let step = wolfe_search(&problem, &dir.a, &x, &dir.u, dir.f_at_u, &params, variant).expect("step");
        let ok = wolfe_conditions_hold(&problem, &dir.a, &x, &dir.u, dir.f_at_u, step.alpha, &params, variant);
        println!(
            "{variant:?}: alpha = {:.6}, F(x,d) = {:.6}, F(x+ad,d) = {:.6}, evaluations = {}, verified = {ok}",
            step.alpha,
            dir.f_at_u,
            curvature_value(&problem, &dir.a, &x, &dir.u, step.alpha),
            step.evaluations
        );
    }
}
