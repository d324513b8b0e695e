//! Builds a user-defined set-valued problem, one with an analytic Jacobian
//! and one relying on finite differences, and solves it.

use nalgebra::{DMatrix, DVector};
use setcg::cg::{solve, BetaRule, CGParams};
use setcg::cone::OrderingCone;
use setcg::problem::{SetValuedProblem, VectorFunction};

fn main() -> setcg::Result<()> {
    // Three shifted bi-objective quadratics.
    let mut functions = Vec::new();
    for shift in [-1.0, 0.0, 1.0] {
        functions.push(VectorFunction::new(
            move |x: &DVector<f64>| {
                DVector::from_vec(vec![
                    (x[0] - shift).powi(2) + x[1].powi(2),
                    x[0].powi(2) + (x[1] - 1.0).powi(2) + shift,
                ])
            },
            move |x: &DVector<f64>| {
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[2.0 * (x[0] - shift), 2.0 * x[1], 2.0 * x[0], 2.0 * (x[1] - 1.0)],
                )
            },
        ));
    }
    functions.push(VectorFunction::finite_difference(|x: &DVector<f64>| {
        DVector::from_vec(vec![x.norm_squared() + 0.5, (x[0] + x[1]).cosh()])
    }));

    let problem = SetValuedProblem::new(
        "quadratics",
        2,
        functions,
        OrderingCone::nonnegative_orthant(2),
        vec![(-5.0, 5.0), (-5.0, 5.0)],
    )?;

    let x0 = DVector::from_vec(vec![4.0, -3.0]);
    for rule in BetaRule::ALL {
        let r = solve(&problem, &x0, &CGParams::for_rule(rule))?;
        println!(
            "{rule}: {:?} in {} iterations, x = {:?}, |u| = {:.2e}",
            r.status,
            r.iterations,
            r.x_final.as_slice(),
            r.final_u_norm
        );
    }
    Ok(())
}
