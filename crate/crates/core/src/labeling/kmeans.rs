use ndarray::{Array2, ArrayView1, ArrayView2};

use super::PrototypeSet;
use crate::error::{Error, Result};

pub const MAX_LLOYD_ITERATIONS: usize = 100;

/// K-means result. Before matching, center `i` is cluster `i`; after
/// [`super::match_clusters`], center `y` is the cluster matched to class `y`
/// and `membership` holds class ids.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub centers: Array2<f64>,
    pub membership: Vec<usize>,
    /// Center updates performed.
    pub iterations: usize,
    /// Within-cluster sum of squares after the initial assignment and after
    /// each update.
    pub sse_history: Vec<f64>,
}

impl ClusterSet {
    pub fn num_clusters(&self) -> usize {
        self.centers.ncols()
    }
}

/// Lloyd iterations started from the class prototypes. Stops once the
/// assignment no longer changes, or after [`MAX_LLOYD_ITERATIONS`] updates.
///
/// A cluster left empty by an update is re-seeded at the sample farthest
/// from its own center, so exactly one center per class survives.
pub fn kmeans_clusters(samples: ArrayView2<'_, f64>, init: &PrototypeSet) -> Result<ClusterSet> {
    let k = init.num_classes();
    let n = samples.ncols();
    if samples.nrows() != init.centers.nrows() {
        return Err(Error::DimensionMismatch {
            context: "K-means sample dimension",
            expected: init.centers.nrows(),
            found: samples.nrows(),
        });
    }
    if n < k {
        return Err(Error::InvalidInput(format!(
            "K-means needs at least {k} samples, got {n}"
        )));
    }

    let mut centers = init.centers.clone();
    let mut membership = assign(samples, &centers);
    let mut sse_history = vec![within_sse(samples, &centers, &membership)];
    let mut iterations = 0;

    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        update_centers(samples, &mut centers, &mut membership);
        let next = assign(samples, &centers);
        sse_history.push(within_sse(samples, &centers, &next));
        let settled = next == membership;
        membership = next;
        if settled {
            break;
        }
    }

    Ok(ClusterSet {
        centers,
        membership,
        iterations,
        sse_history,
    })
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

// Nearest center per sample, smallest index on ties.
fn assign(samples: ArrayView2<'_, f64>, centers: &Array2<f64>) -> Vec<usize> {
    samples
        .columns()
        .into_iter()
        .map(|s| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.columns().into_iter().enumerate() {
                let d = squared_distance(s, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn within_sse(samples: ArrayView2<'_, f64>, centers: &Array2<f64>, membership: &[usize]) -> f64 {
    samples
        .columns()
        .into_iter()
        .zip(membership)
        .map(|(s, &c)| squared_distance(s, centers.column(c)))
        .sum()
}

fn update_centers(
    samples: ArrayView2<'_, f64>,
    centers: &mut Array2<f64>,
    membership: &mut [usize],
) {
    let k = centers.ncols();
    let mut counts = vec![0usize; k];
    let mut sums = Array2::<f64>::zeros(centers.dim());
    for (s, &c) in samples.columns().into_iter().zip(membership.iter()) {
        counts[c] += 1;
        let mut acc = sums.column_mut(c);
        acc += &s;
    }
    for c in 0..k {
        if counts[c] > 0 {
            let mean = &sums.column(c) / counts[c] as f64;
            centers.column_mut(c).assign(&mean);
        }
    }

    let mut reseeded = vec![false; samples.ncols()];
    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    for c in empty {
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, s) in samples.columns().into_iter().enumerate() {
            if reseeded[i] || counts[membership[i]] <= 1 {
                continue;
            }
            let d = squared_distance(s, centers.column(membership[i]));
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        if let Some(i) = far {
            reseeded[i] = true;
            counts[membership[i]] -= 1;
            counts[c] += 1;
            membership[i] = c;
            centers.column_mut(c).assign(&samples.column(i));
        }
    }
}
