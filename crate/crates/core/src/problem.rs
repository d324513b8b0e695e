//! Set-valued objectives `F(x) = {f¹(x), …, fᵖ(x)}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::cone::OrderingCone;
use crate::error::{Error, Result};

/// Central finite-difference step used when no analytic Jacobian is given.
pub const FD_STEP: f64 = 1e-6;

type EvalFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type JacFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A smooth map `R^n → R^m`.
///
/// Row `r` of the Jacobian is the gradient of output component `r`.
#[derive(Clone)]
pub struct VectorFunction {
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacFn>>,
}

impl fmt::Debug for VectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFunction")
            .field("analytic", &self.is_analytic())
            .finish()
    }
}

impl VectorFunction {
    pub fn new<F, J>(eval: F, jacobian: J) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            jacobian: Some(Arc::new(jacobian)),
        }
    }

    /// A function whose Jacobian is approximated by central differences.
    pub fn finite_difference<F>(eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            jacobian: None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => self.fd_jacobian(x),
        }
    }

    /// Central-difference Jacobian with step [`FD_STEP`], regardless of
    /// whether an analytic one exists.
    pub fn fd_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        let mut cols = Vec::with_capacity(n);
        let mut xp = x.clone();
        for c in 0..n {
            let orig = xp[c];
            xp[c] = orig + FD_STEP;
            let fp = self.eval(&xp);
            xp[c] = orig - FD_STEP;
            let fm = self.eval(&xp);
            xp[c] = orig;
            cols.push((fp - fm) / (2.0 * FD_STEP));
        }
        DMatrix::from_columns(&cols)
    }
}

/// A set optimization problem under the lower set less order of `cone`.
#[derive(Debug, Clone)]
pub struct SetValuedProblem {
    name: String,
    n: usize,
    functions: Vec<VectorFunction>,
    cone: OrderingCone,
    start_box: Vec<(f64, f64)>,
}

impl SetValuedProblem {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        functions: Vec<VectorFunction>,
        cone: OrderingCone,
        start_box: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidParameter("problem needs at least one function".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if start_box.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: start_box.len(),
            });
        }
        if let Some((lo, hi)) = start_box.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidParameter(format!("empty start box [{lo}, {hi}]")));
        }
        let probe = DVector::from_iterator(n, start_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)));
        for f in &functions {
            let y = f.eval(&probe);
            if y.len() != cone.dim() {
                return Err(Error::DimensionMismatch {
                    expected: cone.dim(),
                    got: y.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            functions,
            cone,
            start_box,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.cone.dim()
    }

    pub fn p(&self) -> usize {
        self.functions.len()
    }

    pub fn cone(&self) -> &OrderingCone {
        &self.cone
    }

    pub fn functions(&self) -> &[VectorFunction] {
        &self.functions
    }

    pub fn start_box(&self) -> &[(f64, f64)] {
        &self.start_box
    }

    /// Same functions and start box under a different cone.
    pub fn with_cone(mut self, cone: OrderingCone) -> Result<Self> {
        if cone.dim() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: cone.dim(),
            });
        }
        self.cone = cone;
        Ok(self)
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteValue("point".into()));
        }
        Ok(())
    }

    /// `(f¹(x), …, fᵖ(x))` in index order.
    pub fn evaluate_images(&self, x: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.check_point(x)?;
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let y = f.eval(x);
                if y.iter().all(|c| c.is_finite()) {
                    Ok(y)
                } else {
                    Err(Error::NonFiniteValue(format!("f^{} at {:?}", i + 1, x.as_slice())))
                }
            })
            .collect()
    }

    /// Jacobians `∇fⁱ(x)ᵀ`, one `m × n` matrix per function.
    pub fn jacobians(&self, x: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(x)?;
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let j = f.jacobian(x);
                if j.iter().all(|c| c.is_finite()) {
                    Ok(j)
                } else {
                    Err(Error::NonFiniteValue(format!(
                        "Jacobian of f^{} at {:?}",
                        i + 1,
                        x.as_slice()
                    )))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_problem() -> SetValuedProblem {
        let f = VectorFunction::new(|x| x.clone(), |x| DMatrix::identity(x.len(), x.len()));
        SetValuedProblem::new(
            "identity",
            2,
            vec![f],
            OrderingCone::nonnegative_orthant(2),
            vec![(-1.0, 1.0); 2],
        )
        .unwrap()
    }

    #[test]
    fn identity_images_and_jacobian() {
        let p = identity_problem();
        let x = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(p.evaluate_images(&x).unwrap(), vec![x.clone()]);
        assert_eq!(p.jacobians(&x).unwrap()[0], DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn quadratic_gradient_vanishes_at_center() {
        let c = DVector::from_vec(vec![1.0, -2.0]);
        let cc = c.clone();
        let f = VectorFunction::new(move |x| DVector::from_element(1, 0.5 * (x - &cc).norm_squared()), {
            let c = c.clone();
            move |x| DMatrix::from_row_slice(1, x.len(), (x - &c).as_slice())
        });
        let j = f.jacobian(&c);
        assert!(j.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fd_matches_analytic_to_second_order() {
        let f = VectorFunction::new(
            |x| DVector::from_vec(vec![x[0].sin() * x[1], x[0] * x[0] + x[1].cos()]),
            |x| DMatrix::from_row_slice(2, 2, &[x[0].cos() * x[1], x[0].sin(), 2.0 * x[0], -x[1].sin()]),
        );
        let x = DVector::from_vec(vec![0.7, -1.3]);
        let diff = (f.jacobian(&x) - f.fd_jacobian(&x)).abs().max();
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = identity_problem();
        assert!(matches!(
            p.evaluate_images(&DVector::from_vec(vec![1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(p.evaluate_images(&DVector::from_vec(vec![f64::NAN, 0.0])).is_err());

        let blowup = VectorFunction::finite_difference(|x| x.map(|c| 1.0 / c));
        let q = SetValuedProblem::new(
            "blowup",
            2,
            vec![blowup],
            OrderingCone::nonnegative_orthant(2),
            vec![(1.0, 2.0); 2],
        )
        .unwrap();
        assert!(matches!(
            q.evaluate_images(&DVector::from_vec(vec![0.0, 1.0])),
            Err(Error::NonFiniteValue(_))
        ));
    }

    #[test]
    fn rejects_mismatched_cone() {
        let f = VectorFunction::finite_difference(|x| x.clone());
        let err = SetValuedProblem::new(
            "bad",
            2,
            vec![f],
            OrderingCone::nonnegative_orthant(3),
            vec![(-1.0, 1.0); 2],
        );
        assert!(err.is_err());
    }
}
