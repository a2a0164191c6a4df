//! Point-cloud surrogates for compact sets: Hausdorff distance and
//! resolution-limited estimates of Painlevé–Kuratowski limits.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyPointSet);
        };
        let d = first.len();
        if points.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("point cloud must be finite with a common dimension".into()));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn distance_to(&self, x: &[f64]) -> f64 {
        self.points.iter().map(|p| euclid(p, x)).fold(f64::INFINITY, f64::min)
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn directed(a: &PointCloud, b: &PointCloud) -> f64 {
    a.points.iter().map(|p| b.distance_to(p)).fold(0.0, f64::max)
}

/// Euclidean Hausdorff distance.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    directed(a, b).max(directed(b, a))
}

/// Numeric estimate of a set limit. `points` is empty when the estimate is
/// the empty set; all statements hold only up to `resolution`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetLimit {
    pub points: Vec<Vec<f64>>,
    pub resolution: f64,
    pub is_empty: bool,
}

impl SetLimit {
    pub fn as_cloud(&self) -> Option<PointCloud> {
        if self.is_empty {
            None
        } else {
            PointCloud::new(self.points.clone()).ok()
        }
    }
}

/// Greedy clustering: candidates from later terms are preferred as
/// representatives.
fn cluster(mut candidates: Vec<(usize, Vec<f64>)>, resolution: f64) -> SetLimit {
    candidates.sort_by(|a, b| b.0.cmp(&a.0));
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for (_, x) in candidates {
        if reps.iter().all(|r| euclid(r, &x) > resolution) {
            reps.push(x);
        }
    }
    SetLimit { is_empty: reps.is_empty(), points: reps, resolution }
}

fn tail_start(len: usize) -> usize {
    len / 2
}

/// Upper closed limit estimate: points of the tail that are still
/// approached by terms in the last quarter of the sequence.
pub fn pk_upper_limit(seq: &[PointCloud], resolution: f64) -> SetLimit {
    if seq.is_empty() {
        return SetLimit { points: Vec::new(), resolution, is_empty: true };
    }
    let late = seq.len() - seq.len().div_ceil(4).max(1);
    let mut candidates = Vec::new();
    for (n, c) in seq.iter().enumerate().skip(tail_start(seq.len())) {
        for x in c.points() {
            if seq[late..].iter().any(|t| t.distance_to(x) <= resolution) {
                candidates.push((n, x.clone()));
            }
        }
    }
    cluster(candidates, resolution)
}

/// Lower closed limit estimate: points of the last term approximated by
/// every term of the tail.
pub fn pk_lower_limit(seq: &[PointCloud], resolution: f64) -> SetLimit {
    let Some(last) = seq.last() else {
        return SetLimit { points: Vec::new(), resolution, is_empty: true };
    };
    let tail = &seq[tail_start(seq.len())..];
    let candidates = last
        .points()
        .iter()
        .filter(|x| tail.iter().all(|c| c.distance_to(x) <= resolution))
        .map(|x| (seq.len() - 1, x.clone()))
        .collect();
    cluster(candidates, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hausdorff_basics() {
        let a = cloud(&[&[0.0, 0.0, 0.0]]);
        let b = cloud(&[&[1.0, 0.0, 0.0]]);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        assert_eq!(hausdorff_distance(&a, &b), 1.0);
        let ab = cloud(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(hausdorff_distance(&a, &ab), 1.0);
        assert!(PointCloud::new(vec![]).is_err());
    }

    #[test]
    fn constant_sequence_limits() {
        let c = cloud(&[&[0.0, 1.0], &[2.0, 0.0]]);
        let seq = vec![c.clone(); 10];
        let up = pk_upper_limit(&seq, 1e-6).as_cloud().unwrap();
        let lo = pk_lower_limit(&seq, 1e-6).as_cloud().unwrap();
        assert_eq!(hausdorff_distance(&up, &c), 0.0);
        assert_eq!(hausdorff_distance(&lo, &c), 0.0);
    }

    #[test]
    fn alternating_sequence_limits() {
        let zero = cloud(&[&[0.0, 0.0, 0.0]]);
        let e1 = cloud(&[&[1.0, 0.0, 0.0]]);
        let seq: Vec<PointCloud> = (0..20).map(|n| if n % 2 == 0 { zero.clone() } else { e1.clone() }).collect();
        let up = pk_upper_limit(&seq, 1e-3).as_cloud().unwrap();
        assert_eq!(hausdorff_distance(&up, &cloud(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]])), 0.0);
        assert!(pk_lower_limit(&seq, 1e-3).is_empty);
    }
}
