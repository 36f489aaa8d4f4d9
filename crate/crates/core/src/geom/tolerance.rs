use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::Point3;
use crate::error::GeomError;

/// Shared tolerances for point identification and angular tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Points closer than this are the same point (length units).
    pub merge_eps: f64,
    /// Sine threshold for collinearity and coplanarity tests.
    pub angular_eps: f64,
}

impl TolerancePolicy {
    pub fn new(merge_eps: f64, angular_eps: f64, window_diameter: f64) -> Result<Self, GeomError> {
        if !(merge_eps > 0.0 && merge_eps <= 1e-6 * window_diameter) {
            return Err(GeomError::InvalidArgument(format!(
                "merge_eps {merge_eps:e} must lie in (0, 1e-6 * {window_diameter}]"
            )));
        }
        if !(angular_eps > 0.0 && angular_eps < 1e-3) {
            return Err(GeomError::InvalidArgument(format!(
                "angular_eps {angular_eps:e} must lie in (0, 1e-3)"
            )));
        }
        Ok(Self {
            merge_eps,
            angular_eps,
        })
    }

    /// Default policy for a cube window of the given side.
    pub fn for_window_side(side: f64) -> Self {
        Self {
            merge_eps: 1e-9 * side,
            angular_eps: 1e-9,
        }
    }
}

/// Integer grid cell used to bucket points for deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointKey(pub [i64; 3]);

/// Grid key of a point: cells have edge `merge_eps`, so two points within
/// `merge_eps` of each other land in equal or neighbouring cells.
pub fn point_key(x: &Point3, policy: &TolerancePolicy) -> PointKey {
    let h = policy.merge_eps;
    PointKey([
        (x.x / h).floor() as i64,
        (x.y / h).floor() as i64,
        (x.z / h).floor() as i64,
    ])
}

/// Clusters points that are within `merge_eps` of each other (transitively).
///
/// Returns one class label per input point; labels are numbered in order of
/// first appearance.
pub fn dedup_points(points: &[Point3], policy: &TolerancePolicy) -> Vec<usize> {
    let mut grid: HashMap<PointKey, Vec<usize>> = HashMap::with_capacity(points.len());
    let mut uf = UnionFind::<usize>::new(points.len());
    let eps2 = policy.merge_eps * policy.merge_eps;
    for (i, p) in points.iter().enumerate() {
        let PointKey([kx, ky, kz]) = point_key(p, policy);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&PointKey([kx + dx, ky + dy, kz + dz])) {
                        for &j in bucket {
                            if (points[j] - p).norm_squared() <= eps2 {
                                uf.union(i, j);
                            }
                        }
                    }
                }
            }
        }
        grid.entry(PointKey([kx, ky, kz])).or_default().push(i);
    }
    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    points
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let root = uf.find(i);
            let next = label_of_root.len();
            *label_of_root.entry(root).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> TolerancePolicy {
        TolerancePolicy::for_window_side(1.0)
    }

    #[test]
    fn identical_points_share_a_key() {
        let p = Point3::new(0.3, 0.7, 0.11);
        assert_eq!(point_key(&p, &policy()), point_key(&p.clone(), &policy()));
    }

    #[test]
    fn far_points_stay_distinct() {
        let eps = policy().merge_eps;
        let p = Point3::new(0.3, 0.7, 0.11);
        let q = p + nalgebra::Vector3::new(10.0 * eps, 0.0, 0.0);
        assert_eq!(dedup_points(&[p, q], &policy()), vec![0, 1]);
    }

    #[test]
    fn near_points_merge() {
        let eps = policy().merge_eps;
        let p = Point3::new(0.3, 0.7, 0.11);
        let q = p + nalgebra::Vector3::new(0.1 * eps, -0.05 * eps, 0.0);
        assert_eq!(dedup_points(&[p, q], &policy()), vec![0, 0]);
    }

    #[test]
    fn merging_is_transitive() {
        // a-b and b-c are within eps, a-c is not
        let eps = policy().merge_eps;
        let a = Point3::new(0.5, 0.5, 0.5);
        let b = a + nalgebra::Vector3::new(0.8 * eps, 0.0, 0.0);
        let c = b + nalgebra::Vector3::new(0.8 * eps, 0.0, 0.0);
        assert_eq!(dedup_points(&[a, c, b], &policy()), vec![0, 0, 0]);
    }

    #[test]
    fn rejects_oversized_merge_eps() {
        assert!(TolerancePolicy::new(1e-3, 1e-9, 1.0).is_err());
        assert!(TolerancePolicy::new(0.0, 1e-9, 1.0).is_err());
        assert!(TolerancePolicy::new(1e-9, 1e-9, 1.0).is_ok());
    }
}
