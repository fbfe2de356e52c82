//! Pseudo-label probabilities for target samples in the aligned subspace.
//!
//! Two labelers are combined: distance to L2-normalized source class
//! prototypes, and distance to target K-means centers matched one-to-one
//! with the classes. Both turn distances into a softmax over `−‖z − c‖`.

mod kmeans;

use ndarray::{Array2, ArrayView2, Axis};

use crate::data::{LabelingMode, PseudoLabel, PseudoLabelSet};
use crate::error::{Error, Result};
use crate::linalg::{solve_assignment, CostMatrix, Matching};

pub use kmeans::{kmeans_clusters, ClusterSet, MAX_LLOYD_ITERATIONS};

/// One L2-normalized mean per class, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    pub centers: Array2<f64>,
    /// Classes whose mean was the zero vector and stayed unnormalized.
    pub zero_classes: Vec<usize>,
}

impl PrototypeSet {
    pub fn num_classes(&self) -> usize {
        self.centers.ncols()
    }
}

/// Row `i` holds the class distribution of target sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable(pub Array2<f64>);

impl ProbabilityTable {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn num_samples(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.0.ncols()
    }
}

pub fn compute_prototypes(
    src_embedded: ArrayView2<'_, f64>,
    labels: &[usize],
    num_classes: usize,
) -> Result<PrototypeSet> {
    let (d, n) = src_embedded.dim();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "prototype label count",
            expected: n,
            found: labels.len(),
        });
    }
    let mut centers = Array2::<f64>::zeros((d, num_classes));
    let mut counts = vec![0usize; num_classes];
    for (col, &y) in src_embedded.columns().into_iter().zip(labels) {
        if y >= num_classes {
            return Err(Error::InvalidInput(format!(
                "label {y} outside label space of size {num_classes}"
            )));
        }
        counts[y] += 1;
        let mut c = centers.column_mut(y);
        c += &col;
    }
    let mut zero_classes = Vec::new();
    for (y, mut c) in centers.columns_mut().into_iter().enumerate() {
        if counts[y] == 0 {
            return Err(Error::EmptyClass { class: y });
        }
        c /= counts[y] as f64;
        let norm = c.dot(&c).sqrt();
        if norm > 0.0 {
            c /= norm;
        } else {
            zero_classes.push(y);
        }
    }
    Ok(PrototypeSet {
        centers,
        zero_classes,
    })
}

/// Softmax over classes of the negative Euclidean distance to each center.
pub fn distance_softmax(
    samples: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
) -> Result<ProbabilityTable> {
    if samples.nrows() != centers.nrows() {
        return Err(Error::DimensionMismatch {
            context: "embedding dimension",
            expected: centers.nrows(),
            found: samples.nrows(),
        });
    }
    let n = samples.ncols();
    let k = centers.ncols();
    let mut table = Array2::<f64>::zeros((n, k));
    for (sample, mut row) in samples.columns().into_iter().zip(table.rows_mut()) {
        for (slot, center) in row.iter_mut().zip(centers.columns()) {
            let diff = &sample - &center;
            *slot = -diff.dot(&diff).sqrt();
        }
        let shift = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - shift).exp());
        let total = row.sum();
        row /= total;
    }
    Ok(ProbabilityTable(table))
}

pub fn ncp_probabilities(
    tgt_embedded: ArrayView2<'_, f64>,
    protos: &PrototypeSet,
) -> Result<ProbabilityTable> {
    distance_softmax(tgt_embedded, protos.centers.view())
}

/// Re-indexes clusters by the class each is matched to, minimizing the
/// summed center-to-prototype distance.
pub fn match_clusters(
    clusters: &ClusterSet,
    protos: &PrototypeSet,
) -> Result<(ClusterSet, Matching)> {
    let k = protos.num_classes();
    if clusters.num_clusters() != k {
        return Err(Error::DimensionMismatch {
            context: "cluster count",
            expected: k,
            found: clusters.num_clusters(),
        });
    }
    let costs = Array2::from_shape_fn((k, k), |(i, j)| {
        let diff = &clusters.centers.column(i) - &protos.centers.column(j);
        diff.dot(&diff).sqrt()
    });
    let matching = solve_assignment(&CostMatrix::new(costs)?);
    let cluster_of_class = matching.inverse();
    let centers = clusters.centers.select(Axis(1), &cluster_of_class);
    let membership = clusters
        .membership
        .iter()
        .map(|&c| matching.assignment[c])
        .collect();
    Ok((
        ClusterSet {
            centers,
            membership,
            iterations: clusters.iterations,
            sse_history: clusters.sse_history.clone(),
        },
        matching,
    ))
}

pub fn sp_probabilities(
    tgt_embedded: ArrayView2<'_, f64>,
    matched: &ClusterSet,
) -> Result<ProbabilityTable> {
    distance_softmax(tgt_embedded, matched.centers.view())
}

/// Elementwise maximum of the two tables.
pub fn fuse(p1: &ProbabilityTable, p2: &ProbabilityTable) -> Result<ProbabilityTable> {
    if p1.0.dim() != p2.0.dim() {
        return Err(Error::InvalidInput(format!(
            "probability tables differ in shape: {:?} vs {:?}",
            p1.0.dim(),
            p2.0.dim()
        )));
    }
    let mut fused = p1.0.clone();
    fused.zip_mut_with(&p2.0, |a, &b| *a = a.max(b));
    Ok(ProbabilityTable(fused))
}

/// Argmax label and its probability per row; ties go to the smallest class.
pub fn label_from(table: &ProbabilityTable) -> PseudoLabelSet {
    let entries = table
        .0
        .rows()
        .into_iter()
        .enumerate()
        .map(|(index, row)| {
            let mut class = 0;
            let mut confidence = row[0];
            for (y, &p) in row.iter().enumerate().skip(1) {
                if p > confidence {
                    class = y;
                    confidence = p;
                }
            }
            PseudoLabel {
                index,
                class,
                confidence: confidence.clamp(0.0, 1.0),
            }
        })
        .collect();
    PseudoLabelSet::new(entries).expect("indices are distinct and confidences clamped")
}

/// Picks the table for `mode` and labels every target sample.
pub fn fuse_and_label(
    p1: &ProbabilityTable,
    p2: &ProbabilityTable,
    mode: LabelingMode,
) -> Result<PseudoLabelSet> {
    Ok(match mode {
        LabelingMode::Ncp => label_from(p1),
        LabelingMode::Sp => label_from(p2),
        LabelingMode::Fused => label_from(&fuse(p1, p2)?),
    })
}
