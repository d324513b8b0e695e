//! Wolfe step lengths for set-valued objectives.
//!
//! For a descent direction `d` at `x` with active partition element `a` and
//! `F = F^a(x, d) < 0`, a step `α` satisfies the Armijo-type condition when
//!
//! ```text
//! f^{a_j}(x + αd) ⪯_K f^{a_j}(x) + ραF e    for every j,
//! ```
//!
//! checked through the scalarization as
//! `max_j psi_e(f^{a_j}(x + αd) − f^{a_j}(x) − ραF e) ≤ 0`. The curvature
//! condition compares `F^a(x + αd, d)` with `σF` (standard) or bounds its
//! magnitude by `σ|F|` (strong).
//!
//! The search expands `α` geometrically from `alpha0` until the step fails
//! the Armijo test or the curvature value turns nonnegative, then shrinks
//! the bracket with safeguarded secant steps on the curvature value.
//! Because Armijo holds at the left end with a negative curvature value, an
//! acceptable step always lies inside: a scalarized component that climbs
//! back to zero must have slope above `ρF > −σ|F|` somewhere on the way.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cone::MEMBERSHIP_TOL;
use crate::error::{Error, Result};
use crate::minimal::PartitionElement;
use crate::problem::SetValuedProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WolfeVariant {
    Standard,
    Strong,
}

impl std::str::FromStr for WolfeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "strong" => Ok(Self::Strong),
            _ => Err(Error::InvalidParameter(format!("unknown Wolfe variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    pub rho: f64,
    pub sigma: f64,
    pub alpha0: f64,
    pub alpha_max: f64,
    pub max_brackets: usize,
    pub max_zoom: usize,
    /// Extra trials after the first acceptable step, spent pulling the
    /// curvature value towards zero. The best acceptable trial is returned.
    pub refine: usize,
    /// Refinement stops once `|F^a(x + αd, d)| ≤ refine_tol · |F|`.
    pub refine_tol: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            sigma: 0.1,
            alpha0: 1.0,
            alpha_max: 100.0,
            max_brackets: 20,
            max_zoom: 60,
            refine: 6,
            refine_tol: 1e-3,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.rho && self.rho < self.sigma && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < rho < sigma < 1, got rho = {}, sigma = {}",
                self.rho, self.sigma
            )));
        }
        if !(self.alpha0 > 0.0 && self.alpha_max > self.alpha0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < alpha0 < alpha_max, got {} and {}",
                self.alpha0, self.alpha_max
            )));
        }
        if self.max_brackets == 0 {
            return Err(Error::InvalidParameter("max_brackets must be positive".into()));
        }
        Ok(())
    }
}

/// Accepted step with the values the acceptance test saw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    /// `max_j psi_e(f^{a_j}(x + αd) − f^{a_j}(x) − ραF e)`.
    pub armijo_value: f64,
    /// `F^a(x + αd, d)`.
    pub curvature: f64,
    pub evaluations: usize,
}

/// Evaluates the Armijo surrogate and curvature along one ray.
struct Ray<'a> {
    problem: &'a SetValuedProblem,
    a: &'a PartitionElement,
    x: &'a DVector<f64>,
    d: &'a DVector<f64>,
    base: Vec<DVector<f64>>,
    f_xd: f64,
    rho: f64,
}

impl<'a> Ray<'a> {
    fn new(
        problem: &'a SetValuedProblem,
        a: &'a PartitionElement,
        x: &'a DVector<f64>,
        d: &'a DVector<f64>,
        f_xd: f64,
        rho: f64,
    ) -> Self {
        let base = a.indices().iter().map(|&i| problem.functions()[i].eval(x)).collect();
        Self {
            problem,
            a,
            x,
            d,
            base,
            f_xd,
            rho,
        }
    }

    fn point(&self, alpha: f64) -> DVector<f64> {
        self.x + self.d * alpha
    }

    /// Armijo surrogate; `+∞` if the objective is not finite there.
    fn armijo_value(&self, alpha: f64) -> f64 {
        let cone = self.problem.cone();
        let shift = cone.e() * (self.rho * alpha * self.f_xd);
        let z = self.point(alpha);
        let mut worst = f64::NEG_INFINITY;
        for (&i, base) in self.a.indices().iter().zip(&self.base) {
            let y = self.problem.functions()[i].eval(&z);
            if y.iter().any(|c| !c.is_finite()) {
                return f64::INFINITY;
            }
            worst = worst.max(cone.gerstewitz(&(y - base - &shift)));
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    fn curvature(&self, alpha: f64) -> f64 {
        let cone = self.problem.cone();
        let z = self.point(alpha);
        let mut worst = f64::NEG_INFINITY;
        for &i in self.a.indices() {
            let j = self.problem.functions()[i].jacobian(&z);
            let v = cone.gerstewitz(&(j * self.d));
            if !v.is_finite() {
                return f64::NAN;
            }
            worst = worst.max(v);
        }
        worst
    }
}

/// The Armijo-type cone inequality for all active images at step `alpha`.
pub fn armijo_holds(
    problem: &SetValuedProblem,
    a: &PartitionElement,
    x: &DVector<f64>,
    d: &DVector<f64>,
    alpha: f64,
    rho: f64,
    f_xd: f64,
) -> bool {
    Ray::new(problem, a, x, d, f_xd, rho).armijo_value(alpha) <= MEMBERSHIP_TOL
}

/// `F^a(x + αd, d)`.
pub fn curvature_value(
    problem: &SetValuedProblem,
    a: &PartitionElement,
    x: &DVector<f64>,
    d: &DVector<f64>,
    alpha: f64,
) -> f64 {
    Ray::new(problem, a, x, d, -1.0, 0.0).curvature(alpha)
}

fn curvature_ok(curvature: f64, f_xd: f64, sigma: f64, variant: WolfeVariant) -> bool {
    match variant {
        WolfeVariant::Standard => curvature >= sigma * f_xd,
        WolfeVariant::Strong => curvature.abs() <= sigma * f_xd.abs(),
    }
}

/// Re-evaluates both Wolfe predicates at `alpha` from scratch.
#[allow(clippy::too_many_arguments)]
pub fn wolfe_conditions_hold(
    problem: &SetValuedProblem,
    a: &PartitionElement,
    x: &DVector<f64>,
    d: &DVector<f64>,
    f_xd: f64,
    alpha: f64,
    params: &LineSearchParams,
    variant: WolfeVariant,
) -> bool {
    armijo_holds(problem, a, x, d, alpha, params.rho, f_xd)
        && curvature_ok(curvature_value(problem, a, x, d, alpha), f_xd, params.sigma, variant)
}

/// Extra trial steps spent looking for a bracket below `alpha_max`.
const SCAN_BUDGET: usize = 256;

/// One evaluated trial step.
#[derive(Clone, Copy)]
struct Trial {
    alpha: f64,
    h: f64,
    c: f64,
}

/// Tracks the best acceptable trial and the refinement budget.
struct Search<'a, 'p> {
    ray: Ray<'a>,
    problem: &'p SetValuedProblem,
    a: &'a PartitionElement,
    x: &'a DVector<f64>,
    d: &'a DVector<f64>,
    f_xd: f64,
    params: &'a LineSearchParams,
    variant: WolfeVariant,
    evaluations: usize,
    best: Option<Trial>,
    extra: usize,
}

impl Search<'_, '_> {
    fn eval(&mut self, alpha: f64) -> Trial {
        self.evaluations += 1;
        if self.best.is_some() {
            self.extra += 1;
        }
        let t = Trial {
            alpha,
            h: self.ray.armijo_value(alpha),
            c: self.ray.curvature(alpha),
        };
        if t.h <= MEMBERSHIP_TOL
            && curvature_ok(t.c, self.f_xd, self.params.sigma, self.variant)
            && self.best.is_none_or(|b| t.c.abs() < b.c.abs())
            && wolfe_conditions_hold(
                self.problem,
                self.a,
                self.x,
                self.d,
                self.f_xd,
                alpha,
                self.params,
                self.variant,
            )
        {
            self.best = Some(t);
        }
        t
    }

    fn done(&self) -> bool {
        self.best
            .is_some_and(|b| self.extra >= self.params.refine || b.c.abs() <= self.params.refine_tol * self.f_xd.abs())
    }

    fn result(&self) -> Option<LineSearchResult> {
        self.best.map(|b| LineSearchResult {
            alpha: b.alpha,
            armijo_value: b.h,
            curvature: b.c,
            evaluations: self.evaluations,
        })
    }
}

/// Smallest fraction of the bracket a model step may cut down to.
const DEEP_CUT: f64 = 1e-8;

/// Next trial inside `(lo, hi)`.
///
/// Brackets spanning several orders of magnitude are split geometrically.
/// When `hi` breaks the Armijo test, a quadratic model of the unshifted
/// surrogate picks the step (a deep cut if it is not even finite there),
/// falling back to bisection right after a model step landed short;
/// otherwise secant steps aim at a vanishing curvature value, the centre of
/// the strong Wolfe window, with a bisection whenever the same end moved
/// twice in a row.
fn next_trial(lo: &Trial, hi: &Trial, f_xd: f64, rho: f64, moves: (Option<bool>, Option<bool>)) -> f64 {
    let width = hi.alpha - lo.alpha;
    if lo.alpha > 0.0 && hi.alpha > 1e3 * lo.alpha {
        return (lo.alpha * hi.alpha).sqrt();
    }
    let repeated = moves.0.is_some() && moves.0 == moves.1;
    let after_left = moves.1 == Some(true);
    if !(hi.h <= MEMBERSHIP_TOL) {
        if after_left {
            // the model undershot last time
            return lo.alpha + 0.5 * width;
        }
        if !hi.h.is_finite() {
            return lo.alpha + DEEP_CUT * width;
        }
        let r_lo = lo.h + rho * lo.alpha * f_xd;
        let r_hi = hi.h + rho * hi.alpha * f_xd;
        let curv = (r_hi - r_lo - lo.c * width) / (width * width);
        let t = if curv > 0.0 { -lo.c / (2.0 * curv) } else { 0.5 * width };
        return lo.alpha + t.clamp(DEEP_CUT * width, 0.5 * width);
    }
    if repeated || !(hi.c > lo.c) {
        lo.alpha + 0.5 * width
    } else {
        let t = lo.alpha + width * (-lo.c / (hi.c - lo.c));
        t.clamp(lo.alpha + 0.1 * width, hi.alpha - 0.1 * width)
    }
}

/// Left end of a bracket: Armijo holds and the slope is still negative.
fn is_left(t: &Trial) -> bool {
    t.h <= MEMBERSHIP_TOL && t.c < 0.0
}

/// Finds a step satisfying the selected Wolfe conditions along `d`.
pub fn wolfe_search(
    problem: &SetValuedProblem,
    a: &PartitionElement,
    x: &DVector<f64>,
    d: &DVector<f64>,
    f_xd: f64,
    params: &LineSearchParams,
    variant: WolfeVariant,
) -> Result<LineSearchResult> {
    params.validate()?;
    if !(f_xd < 0.0) {
        return Err(Error::LineSearchFailed(format!(
            "direction is not a descent direction (F = {f_xd:e})"
        )));
    }
    let mut s = Search {
        ray: Ray::new(problem, a, x, d, f_xd, params.rho),
        problem,
        a,
        x,
        d,
        f_xd,
        params,
        variant,
        evaluations: 0,
        best: None,
        extra: 0,
    };

    let mut lo = Trial {
        alpha: 0.0,
        h: 0.0,
        c: f_xd,
    };
    let mut hi = None;
    let mut samples = vec![lo];
    let mut alpha = params.alpha0.min(params.alpha_max);
    for _ in 0..params.max_brackets {
        let t = s.eval(alpha);
        if s.done() {
            return Ok(s.result().expect("done implies a step"));
        }
        if !is_left(&t) {
            hi = Some(t);
            break;
        }
        lo = t;
        samples.push(t);
        if alpha >= params.alpha_max {
            break;
        }
        alpha = (2.0 * alpha).min(params.alpha_max);
    }

    if hi.is_none() && s.best.is_none() {
        // Every sample kept Armijo with a negative slope; when the objective
        // oscillates the turn may hide between samples, so refine the gaps.
        let mut budget = SCAN_BUDGET;
        'scan: while budget > 0 && samples.len() > 1 {
            let mut refined = Vec::with_capacity(2 * samples.len());
            for pair in samples.windows(2) {
                let t = s.eval(0.5 * (pair[0].alpha + pair[1].alpha));
                budget -= 1;
                if !is_left(&t) {
                    lo = pair[0];
                    hi = Some(t);
                    break 'scan;
                }
                refined.push(pair[0]);
                refined.push(t);
                if budget == 0 || s.best.is_some() {
                    break 'scan;
                }
            }
            refined.push(*samples.last().expect("nonempty"));
            samples = refined;
        }
    }

    if let Some(mut hi) = hi {
        let mut moves = (None, None);
        for _ in 0..params.max_zoom {
            if s.done() {
                break;
            }
            let width = hi.alpha - lo.alpha;
            if width <= f64::EPSILON * hi.alpha {
                break;
            }
            let mid = next_trial(&lo, &hi, f_xd, params.rho, moves);
            let t = s.eval(mid);
            let left = is_left(&t);
            if left {
                lo = t;
            } else {
                hi = t;
            }
            moves = (moves.1, Some(left));
        }
    }

    s.result().ok_or_else(|| {
        Error::LineSearchFailed(format!(
            "no acceptable step up to alpha = {alpha:e} after {} evaluations",
            s.evaluations
        ))
    })
}
