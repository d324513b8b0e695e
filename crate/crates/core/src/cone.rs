//! Ordering cones and the Gerstewitz scalarization.
//!
//! A cone `K` is closed, convex, pointed and solid, and comes with a fixed
//! interior element `e`. The scalarization
//!
//! ```text
//! psi_e(y) = min { t : t e ∈ y + K }
//! ```
//!
//! is evaluated in closed form. For a polyhedral cone the dual cone `K*` is
//! generated by a finite set `C` normalized to `wᵀe = 1`, and
//! `psi_e(y) = max_{w ∈ C} wᵀy`. The second-order cone is the 3-D Lorentz cone
//! `{y : y₃ ≥ √(y₁² + y₂²)}` with `e = (0, 0, 1)`, where
//! `psi_e(y) = y₃ + √(y₁² + y₂²)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Band used for floating point cone membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeVariant {
    Polyhedral,
    SecondOrder,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Polyhedral { generators: Vec<DVector<f64>> },
    SecondOrder,
}

/// A closed convex pointed solid cone together with an interior element `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCone {
    kind: Kind,
    e: DVector<f64>,
}

/// Scales each generator so that `wᵀe = 1`.
pub fn normalize_dual_generators(raw: &[DVector<f64>], e: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    raw.iter()
        .enumerate()
        .map(|(index, w)| {
            if w.len() != e.len() {
                return Err(Error::DimensionMismatch {
                    expected: e.len(),
                    got: w.len(),
                });
            }
            let value = w.dot(e);
            if value <= DEGENERATE_TOL {
                return Err(Error::DegenerateGenerator { index, value });
            }
            Ok(w / value)
        })
        .collect()
}

impl OrderingCone {
    /// Polyhedral cone `K = {y : wᵀy ≥ 0 for all raw generators w}`.
    ///
    /// `raw` generates the dual cone `K*`; the generators are normalized
    /// against `e` on construction.
    pub fn polyhedral(raw: &[DVector<f64>], e: DVector<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidCone("no dual generators".into()));
        }
        if e.is_empty() {
            return Err(Error::InvalidCone("zero-dimensional cone".into()));
        }
        if raw.iter().any(|w| w.iter().all(|c| *c == 0.0)) {
            return Err(Error::InvalidCone("zero dual generator".into()));
        }
        let generators = normalize_dual_generators(raw, &e)?;
        Ok(Self {
            kind: Kind::Polyhedral { generators },
            e,
        })
    }

    /// The nonnegative orthant `R^m_+` with `e = (1, …, 1)`.
    pub fn nonnegative_orthant(m: usize) -> Self {
        let raw: Vec<_> = (0..m)
            .map(|i| DVector::from_fn(m, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        Self::polyhedral(&raw, DVector::from_element(m, 1.0)).expect("orthant is valid")
    }

    /// The 3-D second-order cone with `e = (0, 0, 1)`.
    pub fn second_order() -> Self {
        Self {
            kind: Kind::SecondOrder,
            e: DVector::from_vec(vec![0.0, 0.0, 1.0]),
        }
    }

    pub fn variant(&self) -> ConeVariant {
        match self.kind {
            Kind::Polyhedral { .. } => ConeVariant::Polyhedral,
            Kind::SecondOrder => ConeVariant::SecondOrder,
        }
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    pub fn e(&self) -> &DVector<f64> {
        &self.e
    }

    /// Normalized dual generators. Empty for the second-order cone.
    pub fn dual_generators(&self) -> &[DVector<f64>] {
        match &self.kind {
            Kind::Polyhedral { generators } => generators,
            Kind::SecondOrder => &[],
        }
    }

    /// Short name used in listings and config files.
    pub fn label(&self) -> &'static str {
        match self.kind {
            Kind::Polyhedral { .. } => "polyhedral",
            Kind::SecondOrder => "soc3",
        }
    }

    pub fn gerstewitz(&self, y: &DVector<f64>) -> f64 {
        self.gerstewitz_slice(y.as_slice())
    }

    pub(crate) fn gerstewitz_slice(&self, y: &[f64]) -> f64 {
        match &self.kind {
            Kind::Polyhedral { generators } => generators
                .iter()
                .map(|w| w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max),
            Kind::SecondOrder => y[2] + y[0].hypot(y[1]),
        }
    }

    /// `y ∈ K` up to [`MEMBERSHIP_TOL`].
    pub fn contains(&self, y: &DVector<f64>) -> bool {
        self.gerstewitz(&-y) <= MEMBERSHIP_TOL
    }

    /// `y ∈ int K` with a margin of [`MEMBERSHIP_TOL`].
    pub fn strictly_contains(&self, y: &DVector<f64>) -> bool {
        self.gerstewitz(&-y) < -MEMBERSHIP_TOL
    }

    /// A normalized dual generator attaining `max_{w ∈ C} wᵀy`.
    ///
    /// For the second-order cone the maximizer is `(y₁, y₂)/r` lifted to
    /// `w₃ = 1`; at `r = 0` every generator is a maximizer and `(1, 0, 1)`
    /// is returned.
    pub fn maximizing_generator(&self, y: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            Kind::Polyhedral { generators } => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, w) in generators.iter().enumerate() {
                    let v = w.dot(y);
                    if v > best_val {
                        best_val = v;
                        best = i;
                    }
                }
                generators[best].clone()
            }
            Kind::SecondOrder => {
                let r = y[0].hypot(y[1]);
                if r > 0.0 {
                    DVector::from_vec(vec![y[0] / r, y[1] / r, 1.0])
                } else {
                    DVector::from_vec(vec![1.0, 0.0, 1.0])
                }
            }
        }
    }

    /// Lipschitz constant of `psi_e` with respect to the Euclidean norm.
    pub fn lipschitz_bound(&self) -> f64 {
        match &self.kind {
            Kind::Polyhedral { generators } => generators.iter().map(|w| w.norm()).fold(0.0, f64::max),
            Kind::SecondOrder => std::f64::consts::SQRT_2,
        }
    }

    /// `count` generators evenly spaced on the boundary of the dual base
    /// `{(w₁, w₂, 1) : w₁² + w₂² ≤ 1}`, or the exact generators of a
    /// polyhedral cone.
    pub fn discretized_generators(&self, count: usize) -> Vec<DVector<f64>> {
        match &self.kind {
            Kind::Polyhedral { generators } => generators.clone(),
            Kind::SecondOrder => (0..count)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / count as f64;
                    DVector::from_vec(vec![t.cos(), t.sin(), 1.0])
                })
                .collect(),
        }
    }
}
