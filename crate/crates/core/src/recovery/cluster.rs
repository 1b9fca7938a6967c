//! Correlation scoring and 1-D k-means screening of the observation columns.

use serde::{Deserialize, Serialize};

use crate::linalg::CMat;
use crate::observation::ObservationMatrix;
use crate::scalar::{inner, Cx, Real};

/// Normalized correlation `|y2^H w_i| / ||w_i||` of the measurement with every column.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationVector<T> {
    pub gamma: Vec<T>,
}

pub fn correlations<T: Real>(y2: &[Cx<T>], obs: &ObservationMatrix<T>) -> CorrelationVector<T> {
    correlations_with(y2, &obs.w, &obs.col_norms)
}

pub(crate) fn correlations_with<T: Real>(y2: &[Cx<T>], w: &CMat<T>, col_norms: &[T]) -> CorrelationVector<T> {
    let gamma = (0..w.cols())
        .map(|i| {
            assert!(col_norms[i] > T::zero(), "zero-norm observation column {i}");
            inner(y2, w.col(i)).norm() / col_norms[i]
        })
        .collect();
    CorrelationVector { gamma }
}

/// How the initial centroids are picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMeansInit {
    /// The first `q` distinct values in input order. Reordering the input
    /// (e.g. by a column permutation) changes the starting point.
    #[default]
    InputOrder,
    /// Values at the `(k + 1/2) / q` quantiles of the sorted data; ignores input order.
    SortedQuantile,
}

/// Partition of the input positions into nonempty clusters, sorted by mean.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSet<T> {
    /// Input positions of each cluster, ascending.
    pub members: Vec<Vec<usize>>,
    pub means: Vec<T>,
    /// Clusters that went empty during the iteration and were removed.
    pub dropped: usize,
    pub iterations: usize,
}

impl<T: Real> ClusterSet<T> {
    /// Total within-cluster sum of squares.
    pub fn sse(&self, values: &[T]) -> T {
        self.members
            .iter()
            .zip(&self.means)
            .map(|(m, &c)| m.iter().map(|&i| (values[i] - c).powi(2)).sum::<T>())
            .sum()
    }
}

pub const KMEANS_MAX_ITERATIONS: usize = 100;

fn initial_centroids<T: Real>(values: &[T], sorted: &[(T, usize)], q: usize, init: KMeansInit) -> Vec<T> {
    let mut c: Vec<T> = match init {
        KMeansInit::InputOrder => {
            let mut seen: Vec<T> = Vec::with_capacity(q);
            for &v in values {
                if !seen.contains(&v) {
                    seen.push(v);
                    if seen.len() == q {
                        break;
                    }
                }
            }
            seen
        }
        KMeansInit::SortedQuantile => {
            let n = sorted.len();
            (0..q)
                .map(|k| sorted[((2 * k + 1) * n / (2 * q)).min(n - 1)].0)
                .collect()
        }
    };
    c.sort_by(|a, b| a.partial_cmp(b).expect("finite correlations"));
    c.dedup();
    c
}

/// Lloyd's iteration on scalars. Stops when the assignment no longer changes
/// or after [`KMEANS_MAX_ITERATIONS`] rounds; clusters that empty out are dropped.
pub fn kmeans_1d<T: Real>(values: &[T], q: usize, init: KMeansInit) -> ClusterSet<T> {
    assert!(q >= 1, "need at least one cluster");
    if values.is_empty() {
        return ClusterSet {
            members: Vec::new(),
            means: Vec::new(),
            dropped: 0,
            iterations: 0,
        };
    }
    let mut sorted: Vec<(T, usize)> = values.iter().copied().zip(0..).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite correlations"));
    let mut centroids = initial_centroids(values, &sorted, q.min(values.len()), init);
    let mut dropped = q.saturating_sub(centroids.len());

    // With ascending centroids the nearest-centroid rule splits the sorted
    // data into consecutive runs, so an assignment is a list of run ends.
    let assign = |c: &[T]| -> Vec<usize> {
        let mut ends = Vec::with_capacity(c.len());
        let mut pos = 0;
        for k in 0..c.len() {
            if k + 1 < c.len() {
                let mid = (c[k] + c[k + 1]) / T::lit(2.0);
                while pos < sorted.len() && sorted[pos].0 <= mid {
                    pos += 1;
                }
            } else {
                pos = sorted.len();
            }
            ends.push(pos);
        }
        ends
    };

    let mut ends = assign(&centroids);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next = Vec::with_capacity(centroids.len());
        let mut lo = 0;
        for &hi in &ends {
            if hi > lo {
                let s: T = sorted[lo..hi].iter().map(|p| p.0).sum();
                next.push(s / T::from_usize_lossy(hi - lo));
            } else {
                dropped += 1;
            }
            lo = hi;
        }
        centroids = next;
        let new_ends = assign(&centroids);
        if new_ends == ends || iterations >= KMEANS_MAX_ITERATIONS {
            ends = new_ends;
            break;
        }
        ends = new_ends;
    }

    let mut members = Vec::with_capacity(ends.len());
    let mut means = Vec::with_capacity(ends.len());
    let mut lo = 0;
    for &hi in &ends {
        if hi > lo {
            let mut m: Vec<usize> = sorted[lo..hi].iter().map(|p| p.1).collect();
            m.sort_unstable();
            let s: T = sorted[lo..hi].iter().map(|p| p.0).sum();
            means.push(s / T::from_usize_lossy(hi - lo));
            members.push(m);
        } else {
            dropped += 1;
        }
        lo = hi;
    }
    ClusterSet {
        members,
        means,
        dropped,
        iterations,
    }
}

/// Members of the cluster with the largest mean. Equal means go to the
/// cluster holding the largest single value, then to the earlier cluster.
pub fn select_candidates<T: Real>(values: &[T], clusters: &ClusterSet<T>) -> Vec<usize> {
    assert!(!clusters.members.is_empty(), "empty cluster set");
    let best_mean = clusters.means.iter().copied().fold(T::neg_infinity(), T::max);
    let tied: Vec<usize> = (0..clusters.means.len())
        .filter(|&k| clusters.means[k] == best_mean)
        .collect();
    let pick = if tied.len() == 1 {
        tied[0]
    } else {
        let peak = |k: usize| {
            clusters.members[k]
                .iter()
                .map(|&i| values[i])
                .fold(T::neg_infinity(), T::max)
        };
        let mut best = tied[0];
        for &k in &tied[1..] {
            if peak(k) > peak(best) {
                best = k;
            }
        }
        best
    };
    clusters.members[pick].clone()
}
