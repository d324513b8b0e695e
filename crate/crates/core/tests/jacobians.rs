//! Analytic Jacobians of the built-in problems against central differences.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use setcg::bench::{builtin_problem, builtin_problem_with, ProblemOptions, PROBLEM_NAMES};
use setcg::problem::SetValuedProblem;

fn central_difference(problem: &SetValuedProblem, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
    let f = &problem.functions()[i];
    let m = problem.m();
    let mut jac = DMatrix::zeros(m, x.len());
    for k in 0..x.len() {
        let h = 1e-6 * (1.0 + x[k].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        jac.set_column(k, &((f.eval(&xp) - f.eval(&xm)) / (2.0 * h)));
    }
    jac
}

fn check(problem: &SetValuedProblem, bounds: &[(f64, f64)], points: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..points {
        let x = DVector::from_iterator(bounds.len(), bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)));
        for i in 0..problem.p() {
            let analytic = problem.functions()[i].jacobian(&x);
            let fd = central_difference(problem, i, &x);
            let err = (&analytic - &fd).abs().max();
            let scale = 1.0 + analytic.abs().max();
            assert!(
                err <= 1e-5 * scale,
                "{} f{i} at {:?}: error {err:e}\n{analytic}\n{fd}",
                problem.name(),
                x.as_slice()
            );
        }
    }
}

#[test]
fn analytic_jacobians_match_differences() {
    for name in PROBLEM_NAMES {
        let p = builtin_problem(name).unwrap();
        // The exponential term of ex3 overwhelms double precision far out in x1.
        let bounds: Vec<(f64, f64)> = if name == "ex3" {
            vec![(-20.0, 20.0), (-20.0, 20.0), (-20.0, 20.0)]
        } else {
            p.start_box().to_vec()
        };
        check(&p, &bounds, 8, 11);
    }
}

#[test]
fn overridden_ex4_jacobians_match_differences() {
    let options = ProblemOptions {
        ex4_second_vector: Some([-1.0, 1.0]),
    };
    for name in ["ex4_k1", "ex4_k2"] {
        let p = builtin_problem_with(name, &options).unwrap();
        check(&p, p.start_box(), 10, 12);
    }
}

#[test]
fn every_problem_is_analytic() {
    for name in PROBLEM_NAMES {
        let p = builtin_problem(name).unwrap();
        assert!(p.functions().iter().all(|f| f.is_analytic()), "{name}");
    }
}
