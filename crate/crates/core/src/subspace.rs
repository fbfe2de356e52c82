//! Supervised locality preserving projection (SLPP) and embedding into the
//! aligned subspace.
//!
//! Samples sharing a label are pulled together: with the 0/1 same-label
//! similarity `M`, its degree matrix `D` and Laplacian `L = D − M`, the
//! projection maximizes `tr(Pᵀ X D Xᵀ P) / tr(Pᵀ (X L Xᵀ + I) P)`, i.e. the
//! leading generalized eigenvectors of `(X D Xᵀ, X L Xᵀ + I)`.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{gen_eig, SymMatrix};
use crate::preprocess::l2_normalize_columns;

/// Largest sample count for which the dense graph is materialized.
pub const MAX_GRAPH_SAMPLES: usize = 8192;

/// Dense same-label similarity graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub similarity: Array2<f64>,
    pub degrees: Array1<f64>,
    pub laplacian: Array2<f64>,
}

pub fn build_graph(labels: &[usize]) -> Result<SimilarityGraph> {
    let n = labels.len();
    if n > MAX_GRAPH_SAMPLES {
        return Err(Error::Resource(format!(
            "similarity graph over {n} samples exceeds the dense limit of {MAX_GRAPH_SAMPLES}"
        )));
    }
    let similarity = Array2::from_shape_fn(
        (n, n),
        |(i, j)| if labels[i] == labels[j] { 1.0 } else { 0.0 },
    );
    let degrees = similarity.sum_axis(Axis(1));
    let mut laplacian = -similarity.clone();
    for (i, &deg) in degrees.iter().enumerate() {
        laplacian[[i, i]] += deg;
    }
    Ok(SimilarityGraph {
        similarity,
        degrees,
        laplacian,
    })
}

/// The pair `(X D Xᵀ, X L Xᵀ + I)` for labeled columns `x`.
///
/// Uses per-class sums instead of the dense graph: `X D Xᵀ = Σᵢ n_{yᵢ} xᵢxᵢᵀ`
/// and `X M Xᵀ = Σ_c s_c s_cᵀ` with `s_c` the sum of class-`c` columns.
pub fn slpp_matrices(x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<(SymMatrix, SymMatrix)> {
    let (d, n) = x.dim();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "SLPP label count",
            expected: n,
            found: labels.len(),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    let mut sums = Array2::<f64>::zeros((d, classes));
    for (col, &y) in x.columns().into_iter().zip(labels) {
        counts[y] += 1;
        let mut s = sums.column_mut(y);
        s += &col;
    }

    let weights = Array1::from_iter(labels.iter().map(|&y| counts[y] as f64));
    let weighted = &x * &weights.view().insert_axis(Axis(0));
    let degree_scatter = weighted.dot(&x.t());
    let same_label_scatter = sums.dot(&sums.t());

    let mut penalty = &degree_scatter - &same_label_scatter;
    for i in 0..d {
        penalty[[i, i]] += 1.0;
    }
    Ok((
        SymMatrix::from_scatter(degree_scatter)?,
        SymMatrix::from_scatter(penalty)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlppModel {
    /// `d1 × d2`, unit-norm columns.
    pub projection: Array2<f64>,
    pub eigenvalues: Array1<f64>,
    /// Mean of the projections of every source and target sample.
    pub embedding_mean: Array1<f64>,
}

impl SlppModel {
    pub fn input_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.ncols()
    }
}

/// Learns the projection from `labeled` columns and centers it on `all`
/// (every source and target sample, already PCA-reduced and normalized).
pub fn slpp_fit(
    labeled: ArrayView2<'_, f64>,
    labels: &[usize],
    all: ArrayView2<'_, f64>,
    d2: usize,
) -> Result<SlppModel> {
    let d1 = labeled.nrows();
    if d2 == 0 || d2 > d1 {
        return Err(Error::Config(format!(
            "SLPP dimensionality {d2} must lie in 1..={d1}"
        )));
    }
    if all.nrows() != d1 {
        return Err(Error::DimensionMismatch {
            context: "SLPP centering rows",
            expected: d1,
            found: all.nrows(),
        });
    }
    let (a, b) = slpp_matrices(labeled, labels)?;
    let pairs = gen_eig(&a, &b, d2)?;
    let projected = pairs.vectors.t().dot(&all);
    let embedding_mean = projected
        .mean_axis(Axis(1))
        .ok_or_else(|| Error::InvalidInput("no samples to center the embedding on".into()))?;
    Ok(SlppModel {
        projection: pairs.vectors,
        eigenvalues: pairs.values,
        embedding_mean,
    })
}

/// `Pᵀx − mean`, then L2-normalized per column. Returns the number of zero
/// columns left unnormalized.
pub fn embed(model: &SlppModel, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, usize)> {
    let centered = embed_centered(model, x)?;
    Ok(l2_normalize_columns(centered))
}

/// `Pᵀx − mean` without normalization.
pub fn embed_centered(model: &SlppModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.nrows() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "embedding input rows",
            expected: model.input_dim(),
            found: x.nrows(),
        });
    }
    Ok(model.projection.t().dot(&x) - model.embedding_mean.view().insert_axis(Axis(1)))
}
