//! Solves the direction subproblem at a point of the facility location
//! problem and at a point of the second-order cone problem.

use nalgebra::DVector;
use setcg::bench::builtin_problem;
use setcg::subproblem::{compute_direction, SubproblemOptions};

fn main() {
    for (name, x) in [
        ("ex1", vec![20.0, -15.0]),
        ("ex2", vec![2.5, -2.5]),
        ("ex5_k2", vec![-12.0]),
    ] {
        let problem = builtin_problem(name).expect("registered");
        let x = DVector::from_vec(x);
        let r = compute_direction(&problem, &x, &SubproblemOptions::default()).expect("direction");
        println!(
            "{name} at {:?}: a = {:?}, u = {:?}, F(x,u) = {:.6}, phi = {:.6}",
            x.as_slice(),
            r.a.indices(),
            r.u.as_slice(),
            r.f_at_u,
            r.phi
        );
    }
}
