//! The direction subproblem
//!
//! ```text
//! min_{(a, d) ∈ P_x × R^n}  F^a(x, d) + ½‖d‖²,   F^a(x, d) = max_j psi_e(∇f^{a_j}(x)ᵀ d)
//! ```
//!
//! For fixed `a` the inner problem is strongly convex. Writing
//! `psi_e(y) = max_{w ∈ C} wᵀy` turns it into
//! `min_d max_{j, w} (J_{a_j}ᵀ w)ᵀ d + ½‖d‖²`, whose dual is the minimum-norm
//! point `v` of `conv{J_{a_j}ᵀ w}`; the primal solution is `u = −v` and the
//! optimal value is `−½‖v‖²`.
//!
//! For a polyhedral cone the hull is spanned by finitely many scalarized
//! gradients and Wolfe's minimum-norm-point algorithm solves it exactly. For
//! the second-order cone the hull is a union of ellipses; the same corral
//! iteration is seeded with a 64-generator discretization of `C` and then
//! driven by an exact linear minimization oracle over the ellipses until the
//! duality gap closes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{ConeVariant, OrderingCone};
use crate::error::{Error, Result};
use crate::minimal::{enumerate_partition, minimal_elements, PartitionElement, EQUALITY_TOL, PARTITION_CAP};
use crate::problem::SetValuedProblem;

/// Direction subproblem tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubproblemOptions {
    /// Certificate tolerance for polyhedral cones, relative to the squared
    /// norm of the largest scalarized gradient (floored at 1).
    pub tol_polyhedral: f64,
    /// Duality gap tolerance for the second-order cone, with the same scaling.
    pub tol_second_order: f64,
    /// Major iteration budget of the corral iteration.
    pub max_iter: usize,
    /// Number of generators in the second-order warm start.
    pub seed_generators: usize,
}

impl Default for SubproblemOptions {
    fn default() -> Self {
        Self {
            tol_polyhedral: 1e-10,
            tol_second_order: 1e-8,
            max_iter: 50_000,
            seed_generators: 64,
        }
    }
}

/// Minimizer of the direction subproblem over `P_x × R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub a: PartitionElement,
    pub u: DVector<f64>,
    /// `φ(x) = F^a(x, u) + ½‖u‖²`, never positive.
    pub phi: f64,
    pub f_at_u: f64,
    /// Dual simplex weights over the scalarized gradients `J_{a_j}ᵀ w_l`
    /// (ordered by `j`, then `l`). Empty for the second-order cone.
    pub weights: Vec<f64>,
}

/// Result of a minimum-norm-point computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    pub weights: Vec<f64>,
    pub point: DVector<f64>,
    /// `‖v‖² − min_i pᵢᵀv`, the Frank–Wolfe duality gap at termination.
    pub gap: f64,
    pub iterations: usize,
}

/// `F^a(x, d) = max_j psi_e(J_{a_j} d)`.
pub fn f_value(jacobians: &[DMatrix<f64>], a: &PartitionElement, cone: &OrderingCone, d: &DVector<f64>) -> f64 {
    a.indices()
        .iter()
        .map(|&i| cone.gerstewitz(&(&jacobians[i] * d)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Active set of the corral iteration: atoms with positive convex weights.
struct Corral {
    atoms: Vec<DVector<f64>>,
    keys: Vec<Option<usize>>,
    weights: Vec<f64>,
    point: DVector<f64>,
}

const WEIGHT_EPS: f64 = 1e-15;
const RELATIVE_GAP: f64 = 1e-3;

impl Corral {
    fn single(atom: DVector<f64>, key: Option<usize>) -> Self {
        Self {
            point: atom.clone(),
            atoms: vec![atom],
            keys: vec![key],
            weights: vec![1.0],
        }
    }

    fn recompute_point(&mut self) {
        let mut p = DVector::zeros(self.point.len());
        for (atom, w) in self.atoms.iter().zip(&self.weights) {
            p.axpy(*w, atom, 1.0);
        }
        self.point = p;
    }

    /// Weights of the minimum-norm point of the affine hull of the atoms.
    fn affine_minimizer(&self) -> DVector<f64> {
        let k = self.atoms.len();
        let base = &self.atoms[0];
        if k == 1 {
            return DVector::from_element(1, 1.0);
        }
        // Parametrize by differences to the first atom for conditioning:
        // minimize ‖base + Σ_{i≥1} t_i (p_i − base)‖².
        let diffs = DMatrix::from_columns(&self.atoms[1..].iter().map(|p| p - base).collect::<Vec<_>>());
        let gram = diffs.transpose() * &diffs;
        let rhs = -(diffs.transpose() * base);
        let t = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(k - 1)),
        };
        let mut alpha = DVector::zeros(k);
        alpha[0] = 1.0 - t.sum();
        for i in 1..k {
            alpha[i] = t[i - 1];
        }
        alpha
    }

    /// Wolfe's minor cycle: move to the affine minimizer, stepping back to the
    /// relative boundary of the simplex and dropping atoms while it leaves it.
    fn minor_cycles(&mut self) {
        for _ in 0..=self.atoms.len() + 1 {
            let alpha = self.affine_minimizer();
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                self.weights = alpha.iter().copied().collect();
                self.recompute_point();
                return;
            }
            let mut theta = 1.0f64;
            for (l, a) in self.weights.iter().zip(alpha.iter()) {
                if *a <= WEIGHT_EPS && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            let mut w: Vec<f64> = self
                .weights
                .iter()
                .zip(alpha.iter())
                .map(|(l, a)| (1.0 - theta) * l + theta * a)
                .collect();
            // drop at least the atom that hit zero
            let min_idx = w
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut keep: Vec<bool> = w.iter().map(|&x| x > WEIGHT_EPS).collect();
            keep[min_idx] = false;
            if keep.iter().all(|k| !k) {
                keep[w.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0] = true;
            }
            let mut i = 0;
            self.atoms.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            i = 0;
            self.keys.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            i = 0;
            w.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            let s: f64 = w.iter().sum();
            self.weights = w.into_iter().map(|x| x / s).collect();
            self.recompute_point();
        }
    }

    /// Runs major cycles with `oracle(x)` returning `(atom, key)` minimizing
    /// `atomᵀx` over the set. Returns `(gap, iterations, converged)`.
    fn run<O>(&mut self, mut oracle: O, tol: f64, max_iter: usize, scale: &mut f64) -> (f64, usize, bool)
    where
        O: FnMut(&DVector<f64>) -> (DVector<f64>, Option<usize>),
    {
        let mut gap = f64::INFINITY;
        for iter in 0..max_iter {
            let (q, key) = oracle(&self.point);
            *scale = scale.max(q.norm_squared());
            let xx = self.point.norm_squared();
            gap = xx - q.dot(&self.point);
            // F(−x) = gap − ‖x‖², so the gap must also be small next to ‖x‖²
            // for −x to stay a descent direction
            if gap <= tol * *scale && gap <= RELATIVE_GAP * xx {
                return (gap.max(0.0), iter, true);
            }
            let duplicate = self.atoms.iter().zip(&self.keys).any(|(p, k)| match (k, key) {
                (Some(a), Some(b)) => *a == b,
                _ => (p - &q).norm_squared() <= 1e-26 * *scale,
            });
            if duplicate {
                // no further progress is representable
                return (gap.max(0.0), iter, true);
            }
            self.atoms.push(q);
            self.keys.push(key);
            self.weights.push(0.0);
            self.minor_cycles();
            if self.point.norm_squared() >= xx {
                // stalled in floating point
                return (gap.max(0.0), iter + 1, true);
            }
        }
        (gap, max_iter, false)
    }
}

fn finite_oracle(vectors: &[DVector<f64>]) -> impl FnMut(&DVector<f64>) -> (DVector<f64>, Option<usize>) + '_ {
    move |x| {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (i, p) in vectors.iter().enumerate() {
            let val = p.dot(x);
            if val < best_val {
                best_val = val;
                best = i;
            }
        }
        (vectors[best].clone(), Some(best))
    }
}

fn closest_to_origin(vectors: &[DVector<f64>]) -> usize {
    vectors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm_squared().total_cmp(&b.1.norm_squared()))
        .map(|(i, _)| i)
        .expect("nonempty")
}

fn min_norm_point_with_budget(vectors: &[DVector<f64>], tol: f64, max_iter: usize) -> Result<MinNormPoint> {
    assert!(!vectors.is_empty(), "min-norm point of an empty set");
    let start = closest_to_origin(vectors);
    let mut corral = Corral::single(vectors[start].clone(), Some(start));
    let mut scale = vectors.iter().map(|p| p.norm_squared()).fold(1.0, f64::max);
    let (gap, iterations, converged) = corral.run(finite_oracle(vectors), tol, max_iter, &mut scale);
    if !converged {
        return Err(Error::SubproblemNotConverged { iterations, gap });
    }
    let mut weights = vec![0.0; vectors.len()];
    for (k, w) in corral.keys.iter().zip(&corral.weights) {
        weights[k.expect("finite atoms carry keys")] += w;
    }
    Ok(MinNormPoint {
        weights,
        point: corral.point,
        gap,
        iterations,
    })
}

/// Minimum-norm point of `conv(vectors)` by Wolfe's algorithm.
///
/// Terminates when `‖v‖² − min_i vectorsᵢᵀv ≤ tol · max(1, max_i ‖vectorsᵢ‖²)`
/// and the same gap is below `10⁻³‖v‖²`, or when no further atom improves
/// the point in floating point.
pub fn min_norm_point(vectors: &[DVector<f64>], tol: f64) -> Result<MinNormPoint> {
    min_norm_point_with_budget(vectors, tol, SubproblemOptions::default().max_iter)
}

/// Solves `min_d F^a(x, d) + ½‖d‖²` for a fixed partition element.
///
/// Returns `(u, φ_x(a, u), weights)`.
pub fn solve_direction_for_a(
    jacobians: &[DMatrix<f64>],
    a: &PartitionElement,
    cone: &OrderingCone,
    options: &SubproblemOptions,
) -> Result<(DVector<f64>, f64, Vec<f64>)> {
    let (v, weights) = match cone.variant() {
        ConeVariant::Polyhedral => {
            let gens = cone.dual_generators();
            let grads: Vec<DVector<f64>> = a
                .indices()
                .iter()
                .flat_map(|&i| gens.iter().map(move |w| jacobians[i].transpose() * w))
                .collect();
            let mnp = min_norm_point_with_budget(&grads, options.tol_polyhedral, options.max_iter)?;
            (mnp.point, mnp.weights)
        }
        ConeVariant::SecondOrder => (second_order_min_norm(jacobians, a, cone, options)?, Vec::new()),
    };
    let u = -v;
    let f = f_value(jacobians, a, cone, &u);
    let phi = (f + 0.5 * u.norm_squared()).min(0.0);
    Ok((u, phi, weights))
}

fn second_order_min_norm(
    jacobians: &[DMatrix<f64>],
    a: &PartitionElement,
    cone: &OrderingCone,
    options: &SubproblemOptions,
) -> Result<DVector<f64>> {
    let mats: Vec<&DMatrix<f64>> = a.indices().iter().map(|&i| &jacobians[i]).collect();
    let seeds: Vec<DVector<f64>> = cone
        .discretized_generators(options.seed_generators)
        .iter()
        .flat_map(|w| mats.iter().map(move |j| j.transpose() * w))
        .collect();

    // warm start on the discretized hull
    let start = closest_to_origin(&seeds);
    let mut corral = Corral::single(seeds[start].clone(), Some(start));
    let mut scale = seeds.iter().map(|p| p.norm_squared()).fold(1.0, f64::max);
    corral.run(
        finite_oracle(&seeds),
        options.tol_second_order,
        options.max_iter,
        &mut scale,
    );
    // continuous atoms are not identified by seed keys
    for k in corral.keys.iter_mut() {
        *k = None;
    }

    let oracle = |x: &DVector<f64>| {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in &mats {
            let y = *j * x;
            let w = cone.maximizing_generator(&-&y);
            let val = w.dot(&y);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, j.transpose() * w));
            }
        }
        (best.expect("nonempty partition element").1, None)
    };
    let (gap, iterations, converged) = corral.run(oracle, options.tol_second_order, options.max_iter, &mut scale);
    if !converged {
        return Err(Error::SubproblemNotConverged { iterations, gap });
    }
    Ok(corral.point)
}

/// Minimizes over the whole partition set from precomputed images and
/// Jacobians.
///
/// Ties within `1e-12` keep the lexicographically smallest element.
pub fn direction_from_parts(
    images: &[DVector<f64>],
    jacobians: &[DMatrix<f64>],
    cone: &OrderingCone,
    options: &SubproblemOptions,
) -> Result<DirectionResult> {
    let decomp = minimal_elements(images, cone, EQUALITY_TOL);
    let partition = enumerate_partition(&decomp, PARTITION_CAP)?;
    let mut best: Option<DirectionResult> = None;
    for a in partition {
        let (u, phi, weights) = solve_direction_for_a(jacobians, &a, cone, options)?;
        if best.as_ref().is_none_or(|b| phi < b.phi - 1e-12) {
            let f_at_u = f_value(jacobians, &a, cone, &u);
            best = Some(DirectionResult {
                a,
                u,
                phi,
                f_at_u,
                weights,
            });
        }
    }
    Ok(best.expect("partition set is nonempty"))
}

/// `(a_x, u_x)` and `φ(x)` at the point `x`.
pub fn compute_direction(
    problem: &SetValuedProblem,
    x: &DVector<f64>,
    options: &SubproblemOptions,
) -> Result<DirectionResult> {
    let images = problem.evaluate_images(x)?;
    let jacobians = problem.jacobians(x)?;
    direction_from_parts(&images, &jacobians, problem.cone(), options)
}
