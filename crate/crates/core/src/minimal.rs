//! Minimal elements of a finite image set and the partition set built from
//! their active indices.
//!
//! Function indices are 0-based throughout.

use nalgebra::DVector;

use crate::cone::OrderingCone;
use crate::error::{Error, Result};

/// Images closer than this (Euclidean) are treated as one value.
pub const EQUALITY_TOL: f64 = 1e-9;

/// Upper bound on `|P_x|` before enumeration is refused.
pub const PARTITION_CAP: usize = 4096;

/// `Min(F(x), K)` with the active index group of every minimal value.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalDecomposition {
    pub minimal_values: Vec<DVector<f64>>,
    pub groups: Vec<Vec<usize>>,
}

impl MinimalDecomposition {
    pub fn omega(&self) -> usize {
        self.minimal_values.len()
    }

    /// `|P_x|`, saturating on overflow.
    pub fn partition_size(&self) -> u128 {
        self.groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.len() as u128))
    }
}

/// One index per minimal value, `a = (a_1, …, a_ω)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionElement(pub Vec<usize>);

impl PartitionElement {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// Groups images equal within `tol` under the first index that opened the
/// group. Returns `(representative index, members)` in order of first
/// appearance.
fn group_equal(images: &[DVector<f64>], tol: f64) -> Vec<(usize, Vec<usize>)> {
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, y) in images.iter().enumerate() {
        match groups.iter_mut().find(|(rep, _)| (&images[*rep] - y).norm() <= tol) {
            Some((_, members)) => members.push(i),
            None => groups.push((i, vec![i])),
        }
    }
    groups
}

/// Pairwise-comparison computation of `Min(A, K)`.
///
/// Numerically equal images are merged into a single value whose group holds
/// all their indices. A value is dropped when some other distinct value `z`
/// satisfies `y − z ∈ K`.
pub fn minimal_elements(images: &[DVector<f64>], cone: &OrderingCone, tol: f64) -> MinimalDecomposition {
    assert!(!images.is_empty(), "image set must be nonempty");
    let groups = group_equal(images, tol);
    let mut minimal_values = Vec::new();
    let mut kept = Vec::new();
    for (a, (rep, members)) in groups.iter().enumerate() {
        let y = &images[*rep];
        let dominated = groups
            .iter()
            .enumerate()
            .any(|(b, (other, _))| a != b && cone.contains(&(y - &images[*other])));
        if !dominated {
            minimal_values.push(y.clone());
            kept.push(members.clone());
        }
    }
    MinimalDecomposition {
        minimal_values,
        groups: kept,
    }
}

/// Indices of `WMin(A, K)`: images with no other image strictly below them.
pub fn weakly_minimal_elements(images: &[DVector<f64>], cone: &OrderingCone, tol: f64) -> Vec<usize> {
    (0..images.len())
        .filter(|&i| {
            !images.iter().enumerate().any(|(j, z)| {
                let diff = &images[i] - z;
                j != i && diff.norm() > tol && cone.strictly_contains(&diff)
            })
        })
        .collect()
}

/// The Cartesian product of the active index groups in lexicographic order.
pub fn enumerate_partition(decomp: &MinimalDecomposition, cap: usize) -> Result<Vec<PartitionElement>> {
    let size = decomp.partition_size();
    if size > cap as u128 {
        return Err(Error::PartitionTooLarge { size, cap });
    }
    let groups: Vec<Vec<usize>> = decomp
        .groups
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_unstable();
            g
        })
        .collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut cursor = vec![0usize; groups.len()];
    loop {
        out.push(PartitionElement(
            cursor.iter().zip(&groups).map(|(&c, g)| g[c]).collect(),
        ));
        // odometer increment, last position fastest
        let mut pos = groups.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < groups[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn ex4_k2() -> OrderingCone {
        OrderingCone::polyhedral(&[v(&[-1.0, 3.0]), v(&[3.0, -1.0])], v(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn orthant_minimal_elements() {
        let a = [v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])];
        let d = minimal_elements(&a, &OrderingCone::nonnegative_orthant(2), EQUALITY_TOL);
        assert_eq!(d.omega(), 2);
        assert_eq!(d.minimal_values, vec![a[0].clone(), a[1].clone()]);
        assert_eq!(d.groups, vec![vec![0], vec![1]]);
    }

    #[test]
    fn singleton() {
        let d = minimal_elements(&[v(&[0.0, 0.0])], &OrderingCone::nonnegative_orthant(2), EQUALITY_TOL);
        assert_eq!(d.omega(), 1);
        assert_eq!(d.groups, vec![vec![0]]);
    }

    #[test]
    fn narrow_cone_keeps_all() {
        let a = [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
        let k2 = ex4_k2();
        // brute force: no pairwise difference satisfies both -y1+3y2 >= 0 and 3y1-y2 >= 0
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let d = &a[i] - &a[j];
                    assert!(!(-d[0] + 3.0 * d[1] >= 0.0 && 3.0 * d[0] - d[1] >= 0.0));
                }
            }
        }
        assert_eq!(minimal_elements(&a, &k2, EQUALITY_TOL).omega(), 3);
    }

    #[test]
    fn equal_images_share_a_group() {
        let a = [v(&[1.0, 1.0]), v(&[2.0, 2.0]), v(&[1.0, 1.0 + 1e-12])];
        let d = minimal_elements(&a, &OrderingCone::nonnegative_orthant(2), EQUALITY_TOL);
        assert_eq!(d.groups, vec![vec![0, 2]]);
    }

    #[test]
    fn weakly_minimal() {
        let orthant = OrderingCone::nonnegative_orthant(2);
        let a = [v(&[0.0, 1.0]), v(&[1.0, 0.0]), v(&[1.0, 1.0])];
        assert_eq!(weakly_minimal_elements(&a, &orthant, EQUALITY_TOL), vec![0, 1, 2]);
        let a = [v(&[0.0, 0.0]), v(&[1.0, 1.0])];
        assert_eq!(weakly_minimal_elements(&a, &orthant, EQUALITY_TOL), vec![0]);
        assert_eq!(
            weakly_minimal_elements(&[v(&[0.0, 0.0])], &orthant, EQUALITY_TOL),
            vec![0]
        );
    }

    fn decomp(groups: Vec<Vec<usize>>) -> MinimalDecomposition {
        MinimalDecomposition {
            minimal_values: groups.iter().map(|_| v(&[0.0])).collect(),
            groups,
        }
    }

    fn tuples(p: Vec<PartitionElement>) -> Vec<Vec<usize>> {
        p.into_iter().map(|a| a.0).collect()
    }

    #[test]
    fn partition_products() {
        assert_eq!(
            tuples(enumerate_partition(&decomp(vec![vec![1, 3], vec![2]]), PARTITION_CAP).unwrap()),
            vec![vec![1, 2], vec![3, 2]]
        );
        assert_eq!(
            tuples(enumerate_partition(&decomp(vec![vec![1], vec![2], vec![3]]), PARTITION_CAP).unwrap()),
            vec![vec![1, 2, 3]]
        );
        assert_eq!(
            tuples(enumerate_partition(&decomp(vec![vec![1, 2], vec![3, 4]]), PARTITION_CAP).unwrap()),
            vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]]
        );
    }

    #[test]
    fn partition_cap() {
        let d = decomp(vec![(0..100).collect(), (100..200).collect()]);
        assert!(matches!(
            enumerate_partition(&d, PARTITION_CAP),
            Err(Error::PartitionTooLarge { size: 10_000, .. })
        ));
    }
}
