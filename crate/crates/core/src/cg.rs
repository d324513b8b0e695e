//! The nonlinear conjugate gradient driver.
//!
//! Each iteration computes the minimal images at `x_k`, solves the direction
//! subproblem for `(a_k, u_k)`, stops once `‖u_k‖ < ε`, and otherwise moves
//! along
//!
//! ```text
//! d_k = u_k                     if k = 0 or |F^{k-1}(x_k, d_{k-1})| < F^k(x_k, d_{k-1})
//! d_k = u_k + β_k d_{k-1}       otherwise
//! ```
//!
//! with a Wolfe step. `F^k(·,·)` is shorthand for `F^{a_k}(·,·)`; the β rules
//! mix the current and previous partition elements exactly as below.

use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linesearch::{wolfe_search, LineSearchParams, WolfeVariant};
use crate::minimal::PartitionElement;
use crate::problem::SetValuedProblem;
use crate::subproblem::{direction_from_parts, f_value, SubproblemOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaRule {
    /// Dai–Yuan, scaled by `eta`.
    Dy,
    /// Polak–Ribière–Polyak.
    Prp,
    /// Hestenes–Stiefel.
    Hs,
    /// `β = 0`: steepest descent with Wolfe steps.
    Zero,
}

impl BetaRule {
    pub const ALL: [BetaRule; 4] = [BetaRule::Dy, BetaRule::Prp, BetaRule::Hs, BetaRule::Zero];

    pub fn name(self) -> &'static str {
        match self {
            BetaRule::Dy => "dy",
            BetaRule::Prp => "prp",
            BetaRule::Hs => "hs",
            BetaRule::Zero => "zero",
        }
    }
}

impl std::fmt::Display for BetaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BetaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dy" => Ok(BetaRule::Dy),
            "prp" => Ok(BetaRule::Prp),
            "hs" => Ok(BetaRule::Hs),
            "zero" => Ok(BetaRule::Zero),
            other => Err(Error::InvalidParameter(format!("unknown beta rule `{other}`"))),
        }
    }
}

/// Largest admissible DY fraction for the given curvature parameter.
pub fn dy_eta_bound(sigma: f64) -> f64 {
    (1.0 - sigma) / (1.0 + sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CGParams {
    pub beta_rule: BetaRule,
    /// `β_k = eta · β_DY` for the DY rule.
    pub eta: f64,
    /// Replace `β` by `max{β, 0}`.
    pub clip_nonnegative: bool,
    pub epsilon: f64,
    pub max_iter: usize,
    pub linesearch: LineSearchParams,
    pub wolfe_variant: WolfeVariant,
    pub subproblem: SubproblemOptions,
    pub denom_guard: f64,
    /// When set to `μ ∈ (0, 1)`, caps `β` at `−μ F^k(x_k,u_k) / F^k(x_k,d_{k−1})`
    /// whenever the denominator is positive, which enforces
    /// `F^k(x_k,d_k) ≤ (1 − μ) F^k(x_k,u_k)`.
    pub sufficient_descent_mu: Option<f64>,
    /// The conjugate direction is replaced by `u_k` unless
    /// `F^k(x_k,d_k) ≤ descent_guard · F^k(x_k,u_k)`.
    pub descent_guard: f64,
}

impl CGParams {
    /// Defaults for `rule`: DY keeps the sign of β, PRP and HS clip at zero.
    pub fn for_rule(rule: BetaRule) -> Self {
        let linesearch = LineSearchParams::default();
        Self {
            beta_rule: rule,
            eta: 0.9 * dy_eta_bound(linesearch.sigma),
            clip_nonnegative: matches!(rule, BetaRule::Prp | BetaRule::Hs),
            epsilon: 1e-4,
            max_iter: 500,
            linesearch,
            wolfe_variant: WolfeVariant::Strong,
            subproblem: SubproblemOptions::default(),
            denom_guard: 1e-12,
            sufficient_descent_mu: None,
            descent_guard: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.linesearch.validate()?;
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta = {} is outside [0, 1)", self.eta)));
        }
        if let Some(mu) = self.sufficient_descent_mu {
            if !(mu > 0.0 && mu < 1.0) {
                return Err(Error::InvalidParameter(format!("mu = {mu} is outside (0, 1)")));
            }
        }
        if !(0.0..1.0).contains(&self.descent_guard) {
            return Err(Error::InvalidParameter("descent_guard must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

impl Default for CGParams {
    fn default() -> Self {
        Self::for_rule(BetaRule::Dy)
    }
}

fn guarded(numerator: f64, denominator: f64, guard: f64) -> Result<f64> {
    if denominator.abs() <= guard || !denominator.is_finite() {
        Err(Error::DenominatorTooSmall(denominator))
    } else {
        Ok(numerator / denominator)
    }
}

/// `β_DY = −F^k(x_k,u_k) / (F^{k−1}(x_k,d_{k−1}) − F^{k−1}(x_{k−1},d_{k−1}))`.
pub fn beta_dy(f_u_k: f64, f_prev_at_xk: f64, f_prev_at_xprev: f64, denom_guard: f64) -> Result<f64> {
    guarded(-f_u_k, f_prev_at_xk - f_prev_at_xprev, denom_guard)
}

/// `β_PRP = (−F^k(x_k,u_k) + F^k(x_{k−1},u_k)) / (−F^{k−1}(x_{k−1},u_{k−1}))`.
pub fn beta_prp(f_u_k: f64, f_u_at_xprev: f64, f_uprev_at_xprev: f64, denom_guard: f64) -> Result<f64> {
    guarded(-f_u_k + f_u_at_xprev, -f_uprev_at_xprev, denom_guard)
}

/// `β_HS = (−F^k(x_k,u_k) + F^k(x_{k−1},u_k)) / (F^{k−1}(x_k,d_{k−1}) − F^{k−1}(x_{k−1},d_{k−1}))`.
pub fn beta_hs(
    f_u_k: f64,
    f_u_at_xprev: f64,
    f_prev_at_xk: f64,
    f_prev_at_xprev: f64,
    denom_guard: f64,
) -> Result<f64> {
    guarded(-f_u_k + f_u_at_xprev, f_prev_at_xk - f_prev_at_xprev, denom_guard)
}

/// Regular restart test `|F^{k−1}(x_k,d_{k−1})| < F^k(x_k,d_{k−1})`.
pub fn restart_condition(f_prev_at_xk: f64, f_curr_at_xk: f64) -> bool {
    f_prev_at_xk.abs() < f_curr_at_xk
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
    SubproblemFailed,
}

impl SolveStatus {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Converged => 0,
            SolveStatus::LineSearchFailed | SolveStatus::SubproblemFailed => 2,
            SolveStatus::MaxIterations => 3,
        }
    }
}

/// One accepted step `x_{k+1} = x_k + α_k d_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub a: Vec<usize>,
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
    pub phi: f64,
    #[serde(rename = "F_u")]
    pub f_u: f64,
    #[serde(rename = "F_d")]
    pub f_d: f64,
    pub restarted: bool,
    /// `F_d² / ‖d‖²`.
    pub zoutendijk_term: f64,
}

impl IterateRecord {
    pub fn partition_element(&self) -> PartitionElement {
        PartitionElement(self.a.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x_final: DVector<f64>,
    pub iterations: usize,
    pub trace: Vec<IterateRecord>,
    pub wall_time: Duration,
    /// `‖u‖` at `x_final` (`NaN` if the subproblem failed there).
    pub final_u_norm: f64,
    pub final_phi: f64,
    /// Largest `β` used, a finite-ness diagnostic for PRP/HS runs.
    pub beta_max: f64,
    pub message: Option<String>,
}

/// State carried from iteration `k − 1`.
struct Previous {
    jacobians: Vec<DMatrix<f64>>,
    a: PartitionElement,
    d: DVector<f64>,
    f_u: f64,
    f_d: f64,
}

enum Step {
    Restart,
    Conjugate(f64),
}

/// Runs the conjugate gradient method from `x0`.
///
/// Failures inside an iteration end the run with the matching status; no
/// error escapes except invalid input.
pub fn solve(problem: &SetValuedProblem, x0: &DVector<f64>, params: &CGParams) -> Result<SolveResult> {
    params.validate()?;
    if x0.len() != problem.n() {
        return Err(Error::DimensionMismatch {
            expected: problem.n(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteValue("initial point".into()));
    }

    let start = Instant::now();
    let cone = problem.cone();
    let mut x = x0.clone();
    let mut trace: Vec<IterateRecord> = Vec::new();
    let mut prev: Option<Previous> = None;
    let mut beta_max = 0.0f64;

    let finish = |status, x: DVector<f64>, trace: Vec<IterateRecord>, u_norm, phi, beta_max, message| {
        Ok(SolveResult {
            status,
            iterations: trace.len(),
            x_final: x,
            trace,
            wall_time: start.elapsed(),
            final_u_norm: u_norm,
            final_phi: phi,
            beta_max,
            message,
        })
    };

    loop {
        let k = trace.len();
        let parts = problem
            .evaluate_images(&x)
            .and_then(|im| problem.jacobians(&x).map(|j| (im, j)));
        let (images, jacobians) = match parts {
            Ok(p) => p,
            Err(e) => {
                return finish(
                    SolveStatus::SubproblemFailed,
                    x,
                    trace,
                    f64::NAN,
                    f64::NAN,
                    beta_max,
                    Some(e.to_string()),
                )
            }
        };
        let dir = match direction_from_parts(&images, &jacobians, cone, &params.subproblem) {
            Ok(d) => d,
            Err(e) => {
                return finish(
                    SolveStatus::SubproblemFailed,
                    x,
                    trace,
                    f64::NAN,
                    f64::NAN,
                    beta_max,
                    Some(e.to_string()),
                )
            }
        };
        let u_norm = dir.u.norm();
        if u_norm < params.epsilon {
            return finish(SolveStatus::Converged, x, trace, u_norm, dir.phi, beta_max, None);
        }
        if k >= params.max_iter {
            return finish(SolveStatus::MaxIterations, x, trace, u_norm, dir.phi, beta_max, None);
        }

        let a = dir.a.clone();
        let u = dir.u.clone();
        let f_u = dir.f_at_u;

        let step = match &prev {
            None => Step::Restart,
            Some(p) => {
                let f_prev_at_xk = f_value(&jacobians, &p.a, cone, &p.d);
                let f_curr_at_xk = f_value(&jacobians, &a, cone, &p.d);
                if restart_condition(f_prev_at_xk, f_curr_at_xk) {
                    Step::Restart
                } else {
                    let raw = match params.beta_rule {
                        BetaRule::Dy => beta_dy(f_u, f_prev_at_xk, p.f_d, params.denom_guard).map(|b| params.eta * b),
                        BetaRule::Prp => {
                            let f_u_at_xprev = f_value(&p.jacobians, &a, cone, &u);
                            beta_prp(f_u, f_u_at_xprev, p.f_u, params.denom_guard)
                        }
                        BetaRule::Hs => {
                            let f_u_at_xprev = f_value(&p.jacobians, &a, cone, &u);
                            beta_hs(f_u, f_u_at_xprev, f_prev_at_xk, p.f_d, params.denom_guard)
                        }
                        BetaRule::Zero => Ok(0.0),
                    };
                    match raw {
                        Ok(mut beta) => {
                            if params.clip_nonnegative {
                                beta = beta.max(0.0);
                            }
                            if let Some(mu) = params.sufficient_descent_mu {
                                beta = beta.max(0.0);
                                if f_curr_at_xk > 0.0 {
                                    beta = beta.min(-mu * f_u / f_curr_at_xk);
                                }
                            }
                            Step::Conjugate(beta)
                        }
                        Err(_) => Step::Restart,
                    }
                }
            }
        };

        let (mut d, mut beta, mut restarted) = match step {
            Step::Restart => (u.clone(), 0.0, true),
            Step::Conjugate(beta) => (&u + prev.as_ref().map(|p| &p.d).unwrap() * beta, beta, false),
        };
        let mut f_d = f_value(&jacobians, &a, cone, &d);
        if !restarted && !(f_d <= params.descent_guard * f_u) {
            d = u.clone();
            beta = 0.0;
            restarted = true;
            f_d = f_u;
        }
        beta_max = beta_max.max(beta);

        let ls = match wolfe_search(problem, &a, &x, &d, f_d, &params.linesearch, params.wolfe_variant) {
            Ok(r) => r,
            Err(e) => {
                return finish(
                    SolveStatus::LineSearchFailed,
                    x,
                    trace,
                    u_norm,
                    dir.phi,
                    beta_max,
                    Some(e.to_string()),
                )
            }
        };

        let d_norm_sq = d.norm_squared();
        trace.push(IterateRecord {
            k,
            x: x.as_slice().to_vec(),
            a: a.0.clone(),
            u: u.as_slice().to_vec(),
            d: d.as_slice().to_vec(),
            beta,
            alpha: ls.alpha,
            phi: dir.phi,
            f_u,
            f_d,
            restarted,
            zoutendijk_term: f_d * f_d / d_norm_sq,
        });
        x += &d * ls.alpha;
        prev = Some(Previous {
            jacobians,
            a,
            d,
            f_u,
            f_d,
        });
    }
}

/// Running sums of `F_d² / ‖d‖²` along a trace.
pub fn zoutendijk_partial_sums(trace: &[IterateRecord]) -> Vec<f64> {
    trace
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.zoutendijk_term;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::OrderingCone;
    use crate::problem::VectorFunction;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dy_formula() {
        assert_abs_diff_eq!(beta_dy(-1.0, -0.05, -1.0, 1e-12).unwrap(), 1.0 / 0.95, epsilon = 1e-15);
        assert_eq!(beta_dy(0.0, -0.05, -1.0, 1e-12).unwrap(), 0.0);
        assert!(matches!(
            beta_dy(-1.0, -1.0, -1.0, 1e-12),
            Err(Error::DenominatorTooSmall(_))
        ));
    }

    #[test]
    fn prp_formula() {
        assert_abs_diff_eq!(beta_prp(-1.0, -0.5, -2.0, 1e-12).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(beta_prp(-1.0, -1.0, -2.0, 1e-12).unwrap(), 0.0);
        assert!(beta_prp(-1.0, -0.5, 0.0, 1e-12).is_err());
    }

    #[test]
    fn hs_formula() {
        assert_abs_diff_eq!(
            beta_hs(-1.0, -0.5, -0.05, -1.0, 1e-12).unwrap(),
            0.5 / 0.95,
            epsilon = 1e-15
        );
        assert_eq!(beta_hs(-1.0, -1.0, -0.05, -1.0, 1e-12).unwrap(), 0.0);
        assert!(beta_hs(-1.0, -0.5, -1.0, -1.0, 1e-12).is_err());
    }

    #[test]
    fn restart_test() {
        assert!(restart_condition(-0.3, 0.5));
        assert!(!restart_condition(-1.0, 0.5));
        assert!(!restart_condition(-0.3, -0.1));
    }

    #[test]
    fn zoutendijk_sums() {
        assert!(zoutendijk_partial_sums(&[]).is_empty());
        let rec = IterateRecord {
            k: 0,
            x: vec![0.0, 0.0],
            a: vec![0],
            u: vec![0.0, 0.0],
            d: vec![2.0, 0.0],
            beta: 0.0,
            alpha: 1.0,
            phi: 0.0,
            f_u: -1.0,
            f_d: -1.0,
            restarted: true,
            zoutendijk_term: 1.0 / 4.0,
        };
        assert_eq!(zoutendijk_partial_sums(&[rec.clone(), rec]), vec![0.25, 0.5]);
    }

    fn half_norm_sq() -> SetValuedProblem {
        let f = VectorFunction::new(
            |x| DVector::from_element(1, 0.5 * x.norm_squared()),
            |x| DMatrix::from_row_slice(1, x.len(), x.as_slice()),
        );
        SetValuedProblem::new(
            "quad",
            2,
            vec![f],
            OrderingCone::nonnegative_orthant(1),
            vec![(-5.0, 5.0); 2],
        )
        .unwrap()
    }

    #[test]
    fn quadratic_converges_for_every_rule() {
        let p = half_norm_sq();
        let x0 = DVector::from_vec(vec![3.0, 4.0]);
        for rule in BetaRule::ALL {
            let r = solve(&p, &x0, &CGParams::for_rule(rule)).unwrap();
            assert_eq!(r.status, SolveStatus::Converged, "{rule}");
            assert!(r.x_final.norm() < 1e-4, "{rule}: {}", r.x_final);
        }
    }

    #[test]
    fn rejects_bad_start() {
        let p = half_norm_sq();
        assert!(solve(&p, &DVector::from_vec(vec![1.0]), &CGParams::default()).is_err());
        let mut bad = CGParams::default();
        bad.linesearch.sigma = 1e-5;
        assert!(solve(&p, &DVector::from_vec(vec![1.0, 1.0]), &bad).is_err());
    }

    #[test]
    fn max_iterations_status() {
        let p = half_norm_sq();
        let params = CGParams {
            max_iter: 0,
            ..CGParams::default()
        };
        let r = solve(&p, &DVector::from_vec(vec![1.0, 1.0]), &params).unwrap();
        assert_eq!(r.status, SolveStatus::MaxIterations);
        assert_eq!(r.status.exit_code(), 3);
    }
}
