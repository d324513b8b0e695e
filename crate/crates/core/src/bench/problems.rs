//! The built-in test instances.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::cone::OrderingCone;
use crate::error::{Error, Result};
use crate::problem::{SetValuedProblem, VectorFunction};

/// Registered names, in listing order.
pub const PROBLEM_NAMES: [&str; 7] = ["ex1", "ex2", "ex3", "ex4_k1", "ex4_k2", "ex5_k1", "ex5_k2"];

/// The grid `U₁` of the facility location instance.
pub const FACILITY_GRID: [f64; 10] = [
    -1.0, -0.7778, -0.5556, -0.3333, -0.1111, 0.1111, 0.3333, 0.5556, 0.7778, 1.0,
];

/// Facility locations `l₁, l₂, l₃`.
pub const FACILITY_SITES: [[f64; 2]; 3] = [[0.0, 0.0], [0.0, 8.0], [8.0, 0.0]];

/// Knobs for the built-in instances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemOptions {
    /// Replaces the second `(1, −1)` vector in the `ex4_*` perturbation term.
    /// With the default both vectors coincide and the five functions are
    /// identical.
    pub ex4_second_vector: Option<[f64; 2]>,
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

/// Builds a registered problem with default options.
pub fn builtin_problem(name: &str) -> Result<SetValuedProblem> {
    builtin_problem_with(name, &ProblemOptions::default())
}

pub fn builtin_problem_with(name: &str, options: &ProblemOptions) -> Result<SetValuedProblem> {
    match name {
        "ex1" => facility_location(),
        "ex2" => trig_family(),
        "ex3" => exponential_family(),
        "ex4_k1" => scalar_pair(options, OrderingCone::nonnegative_orthant(2), "ex4_k1"),
        "ex4_k2" => scalar_pair(options, ex4_cone_k2(), "ex4_k2"),
        "ex5_k1" => scalar_triple(OrderingCone::nonnegative_orthant(3), "ex5_k1"),
        "ex5_k2" => scalar_triple(OrderingCone::second_order(), "ex5_k2"),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

/// `K₂ = {y : −y₁ + 3y₂ ≥ 0, 3y₁ − y₂ ≥ 0}` with `e = (1, 1)`.
pub fn ex4_cone_k2() -> OrderingCone {
    OrderingCone::polyhedral(&[v(&[-1.0, 3.0]), v(&[3.0, -1.0])], v(&[1.0, 1.0])).expect("valid cone")
}

/// Row-major enumeration of `U₁ × U₁`.
pub fn facility_offsets() -> Vec<[f64; 2]> {
    FACILITY_GRID
        .iter()
        .flat_map(|&a| FACILITY_GRID.iter().map(move |&b| [a, b]))
        .collect()
}

/// `fⁱ(x) = ½(‖x − l₁ − uᵢ‖², ‖x − l₂ − uᵢ‖², ‖x − l₃ − uᵢ‖²)`.
fn facility_location() -> Result<SetValuedProblem> {
    let functions = facility_offsets()
        .into_iter()
        .map(|u| {
            let centers: Vec<[f64; 2]> = FACILITY_SITES.iter().map(|l| [l[0] + u[0], l[1] + u[1]]).collect();
            let c2 = centers.clone();
            VectorFunction::new(
                move |x| {
                    DVector::from_iterator(
                        3,
                        centers
                            .iter()
                            .map(|c| 0.5 * ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2))),
                    )
                },
                move |x| DMatrix::from_fn(3, 2, |r, col| x[col] - c2[r][col]),
            )
        })
        .collect();
    SetValuedProblem::new(
        "ex1",
        2,
        functions,
        OrderingCone::nonnegative_orthant(3),
        vec![(-50.0, 50.0); 2],
    )
}

fn trig_family() -> Result<SetValuedProblem> {
    let functions = (0..100)
        .map(|i| {
            let t = i as f64;
            let c1 = (PI * t / 25.0).cos() * (PI * t / 100.0).sin().powi(2);
            let c2 = (PI * t / 25.0).sin() * (PI * t / 100.0).cos().powi(2);
            VectorFunction::new(
                move |x| {
                    let (x1, x2) = (x[0], x[1]);
                    v(&[
                        x1.sin() + x1 * x1 * (1.0 + x2.cos()) + 2.0 * x1 * x2.cos() * c1,
                        x2.cos() + x2 * x2 * (2.0 + x1.cos()) + x1 * x2.sin() * c2,
                    ])
                },
                move |x| {
                    let (x1, x2) = (x[0], x[1]);
                    DMatrix::from_row_slice(
                        2,
                        2,
                        &[
                            x1.cos() + 2.0 * x1 * (1.0 + x2.cos()) + 2.0 * x2.cos() * c1,
                            -x1 * x1 * x2.sin() - 2.0 * x1 * x2.sin() * c1,
                            -x2 * x2 * x1.sin() + x2.sin() * c2,
                            -x2.sin() + 2.0 * x2 * (2.0 + x1.cos()) + x1 * x2.cos() * c2,
                        ],
                    )
                },
            )
        })
        .collect();
    SetValuedProblem::new(
        "ex2",
        2,
        functions,
        OrderingCone::nonnegative_orthant(2),
        vec![(-PI, PI); 2],
    )
}

fn exponential_family() -> Result<SetValuedProblem> {
    let functions = (0..100)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / 100.0;
            let s = theta.sin().powi(3);
            let c = theta.cos();
            VectorFunction::new(
                move |x| {
                    let (x1, x2, x3) = (x[0], x[1], x[2]);
                    let g = [
                        0.5 * (x1 - 2.0).powi(4) + (x2 + 1.0).powi(2) / 13.0 + 3.0,
                        (x1 + x2 - 3.0).powi(2) / 36.0 + (-x1 + x2 + 2.0).powi(2) / 18.0 - 17.0,
                        (x1 + 2.0 * x2 - 1.0).powi(2) / 175.0 + (-x1 + 2.0 * x2).powi(2) / 17.0,
                    ];
                    let h = [
                        (x1 / 2.0).exp() * x2.cos() + x1 * x2.cos() * s - x2 * x2.sin() * c,
                        (x2 / 100.0).exp() * x1.sin() + x1 * x2.sin() * s + x2 * x2.cos() * c,
                        x3.sin().powi(2) * s,
                    ];
                    DVector::from_iterator(3, (0..3).map(|r| g[r] + h[r] / 100.0))
                },
                move |x| {
                    let (x1, x2, x3) = (x[0], x[1], x[2]);
                    let a = x1 + x2 - 3.0;
                    let b = -x1 + x2 + 2.0;
                    let p = x1 + 2.0 * x2 - 1.0;
                    let q = -x1 + 2.0 * x2;
                    let e1 = (x1 / 2.0).exp();
                    let e2 = (x2 / 100.0).exp();
                    let (s2, c2) = x2.sin_cos();
                    let (s1, c1) = x1.sin_cos();
                    let g = [
                        [2.0 * (x1 - 2.0).powi(3), 2.0 * (x2 + 1.0) / 13.0, 0.0],
                        [a / 18.0 - b / 9.0, a / 18.0 + b / 9.0, 0.0],
                        [2.0 * p / 175.0 - 2.0 * q / 17.0, 4.0 * p / 175.0 + 4.0 * q / 17.0, 0.0],
                    ];
                    let h = [
                        [0.5 * e1 * c2 + c2 * s, -e1 * s2 - x1 * s2 * s - (s2 + x2 * c2) * c, 0.0],
                        [
                            e2 * c1 + s2 * s,
                            e2 / 100.0 * s1 + x1 * c2 * s + (c2 - x2 * s2) * c,
                            0.0,
                        ],
                        [0.0, 0.0, (2.0 * x3).sin() * s],
                    ];
                    DMatrix::from_fn(3, 3, |r, col| g[r][col] + h[r][col] / 100.0)
                },
            )
        })
        .collect();
    SetValuedProblem::new(
        "ex3",
        3,
        functions,
        OrderingCone::nonnegative_orthant(3),
        vec![(-500.0, 500.0); 3],
    )
}

/// `fⁱ(x) = (x, ½x sin x) + sin²x [t(1, −1) + (1 − t) w]`, `t = (i − 1)/4`.
fn scalar_pair(options: &ProblemOptions, cone: OrderingCone, name: &str) -> Result<SetValuedProblem> {
    let w = options.ex4_second_vector.unwrap_or([1.0, -1.0]);
    let functions = (0..5)
        .map(|i| {
            let t = i as f64 / 4.0;
            let m = [t + (1.0 - t) * w[0], -t + (1.0 - t) * w[1]];
            VectorFunction::new(
                move |x| {
                    let x = x[0];
                    let s2 = x.sin().powi(2);
                    v(&[x + s2 * m[0], 0.5 * x * x.sin() + s2 * m[1]])
                },
                move |x| {
                    let x = x[0];
                    let ds2 = (2.0 * x).sin();
                    DMatrix::from_column_slice(
                        2,
                        1,
                        &[1.0 + ds2 * m[0], 0.5 * x.sin() + 0.5 * x * x.cos() + ds2 * m[1]],
                    )
                },
            )
        })
        .collect();
    SetValuedProblem::new(name, 1, functions, cone, vec![(-5.0 * PI, 5.0 * PI)])
}

fn scalar_triple(cone: OrderingCone, name: &str) -> Result<SetValuedProblem> {
    let functions = (1..=5)
        .map(|i| {
            let i = i as f64;
            let k1 = (i - 3.0) / 2.0;
            let k2 = (3.0 - i) / 4.0;
            let k3 = (3.0 - i) / 2.0;
            VectorFunction::new(
                move |x| {
                    let x = x[0];
                    let (s, c) = x.sin_cos();
                    v(&[
                        0.5 * x * s + c * c * k1,
                        0.5 * (2.0 * x).cos() + s * s * k2,
                        x * (2.0 * x).sin() + s * s * k3,
                    ])
                },
                move |x| {
                    let x = x[0];
                    let s2x = (2.0 * x).sin();
                    DMatrix::from_column_slice(
                        3,
                        1,
                        &[
                            0.5 * x.sin() + 0.5 * x * x.cos() - s2x * k1,
                            -s2x + s2x * k2,
                            s2x + 2.0 * x * (2.0 * x).cos() + s2x * k3,
                        ],
                    )
                },
            )
        })
        .collect();
    SetValuedProblem::new(name, 1, functions, cone, vec![(-15.5, -8.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeVariant;

    #[test]
    fn registry_shapes() {
        let expect = [
            ("ex1", 2, 3, 100),
            ("ex2", 2, 2, 100),
            ("ex3", 3, 3, 100),
            ("ex4_k1", 1, 2, 5),
            ("ex4_k2", 1, 2, 5),
            ("ex5_k1", 1, 3, 5),
            ("ex5_k2", 1, 3, 5),
        ];
        for (name, n, m, p) in expect {
            let prob = builtin_problem(name).unwrap();
            assert_eq!((prob.n(), prob.m(), prob.p()), (n, m, p), "{name}");
            assert!(prob.functions().iter().all(|f| f.is_analytic()));
        }
        assert!(matches!(builtin_problem("ex6"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn cones() {
        let soc = builtin_problem("ex5_k2").unwrap();
        assert_eq!(soc.cone().variant(), ConeVariant::SecondOrder);
        assert_eq!(soc.cone().e().as_slice(), &[0.0, 0.0, 1.0]);
        let k1 = builtin_problem("ex4_k1").unwrap();
        assert_eq!(k1.cone().dual_generators(), &[v(&[1.0, 0.0]), v(&[0.0, 1.0])]);
    }

    #[test]
    fn ex4_as_printed_collapses() {
        let p = builtin_problem("ex4_k1").unwrap();
        let x = v(&[0.0]);
        let images = p.evaluate_images(&x).unwrap();
        assert!(images.iter().all(|y| y == &v(&[0.0, 0.0])));
        let x = v(&[1.3]);
        let images = p.evaluate_images(&x).unwrap();
        assert!(images.iter().all(|y| (y - &images[0]).norm() < 1e-15));
    }

    #[test]
    fn ex4_override_separates_functions() {
        let opts = ProblemOptions {
            ex4_second_vector: Some([-1.0, 1.0]),
        };
        let p = builtin_problem_with("ex4_k1", &opts).unwrap();
        let images = p.evaluate_images(&v(&[1.3])).unwrap();
        assert!((&images[0] - &images[4]).norm() > 0.1);
        let s2 = 1.3f64.sin().powi(2);
        // i = 1 uses only the second vector, i = 5 only (1, −1)
        assert!((images[0][0] - (1.3 - s2)).abs() < 1e-14);
        assert!((images[4][0] - (1.3 + s2)).abs() < 1e-14);
    }

    #[test]
    fn facility_values() {
        let p = builtin_problem("ex1").unwrap();
        let images = p.evaluate_images(&v(&[-1.0, -1.0])).unwrap();
        // u₁ = (−1, −1) so x − l₁ − u₁ = 0 and the other two residuals have length 8
        assert_eq!(images[0], v(&[0.0, 32.0, 32.0]));
    }
}
