//! PCA on the concatenated source and target samples, and per-sample L2
//! normalization.

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};

use crate::data::DomainDataset;
use crate::error::{Error, Result};
use crate::linalg::{sym_eig, SymMatrix};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `d × d1`, orthonormal columns.
    pub components: Array2<f64>,
    /// Scatter eigenvalues for each component, descending.
    pub eigenvalues: Array1<f64>,
    /// Requested dimensionality when it exceeded the numerical rank.
    pub truncated_from: Option<usize>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.components.ncols()
    }
}

/// Fits PCA on `[source | target]`.
pub fn pca_fit(src: &DomainDataset, tgt: &DomainDataset, d1: usize) -> Result<PcaModel> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimensionMismatch {
            context: "target feature dimension",
            expected: src.dim(),
            found: tgt.dim(),
        });
    }
    let x = concatenate(Axis(1), &[src.features().view(), tgt.features().view()])
        .expect("row counts checked");
    pca_fit_matrix(x.view(), d1)
}

/// Fits PCA on the columns of `x` (`d × n`).
///
/// Solves the `d × d` scatter eigenproblem when `d ≤ n` and the `n × n`
/// Gram problem otherwise; both give the same leading components.
pub fn pca_fit_matrix(x: ArrayView2<'_, f64>, d1: usize) -> Result<PcaModel> {
    let (d, n) = x.dim();
    if d1 == 0 || d1 > d.min(n) {
        return Err(Error::Config(format!(
            "PCA dimensionality {d1} must lie in 1..={}",
            d.min(n)
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "features contain non-finite values".into(),
        ));
    }
    let mean = x.mean_axis(Axis(1)).expect("n ≥ 1");
    let centered = &x - &mean.view().insert_axis(Axis(1));

    let (mut eigenvalues, mut components) = if d <= n {
        let scatter = SymMatrix::from_scatter(centered.dot(&centered.t()))?;
        let pairs = sym_eig(&scatter, d1)?;
        (pairs.values, pairs.vectors)
    } else {
        let gram = SymMatrix::from_scatter(centered.t().dot(&centered))?;
        let pairs = sym_eig(&gram, d1)?;
        let mut v = centered.dot(&pairs.vectors);
        for (mut col, &phi) in v.columns_mut().into_iter().zip(pairs.values.iter()) {
            // Renormalize explicitly; dividing by √φ alone leaves rounding drift.
            let norm = col.dot(&col).sqrt();
            if phi > 0.0 && norm > 0.0 {
                col.mapv_inplace(|c| c / norm);
            }
        }
        crate::linalg::canonicalize_signs(&mut v);
        (pairs.values, v)
    };

    let largest = eigenvalues[0];
    if !(largest > 0.0) {
        return Err(Error::InvalidInput("features have zero variance".into()));
    }
    let rank = eigenvalues
        .iter()
        .take_while(|&&phi| phi >= RANK_TOLERANCE * largest)
        .count();
    let truncated_from = if rank < d1 {
        eigenvalues = eigenvalues.slice_move(ndarray::s![..rank]);
        components = components.slice_move(ndarray::s![.., ..rank]);
        Some(d1)
    } else {
        None
    };

    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        truncated_from,
    })
}

/// `Vᵀ (x − mean)` for each column of `x`.
pub fn pca_transform(model: &PcaModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.nrows() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "PCA input rows",
            expected: model.input_dim(),
            found: x.nrows(),
        });
    }
    let centered = &x - &model.mean.view().insert_axis(Axis(1));
    Ok(model.components.t().dot(&centered))
}

/// Scales every nonzero column to unit Euclidean norm. Zero columns are
/// left untouched; their count is returned alongside.
pub fn l2_normalize_columns(mut x: Array2<f64>) -> (Array2<f64>, usize) {
    let mut zero_columns = 0;
    for mut col in x.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        } else {
            zero_columns += 1;
        }
    }
    (x, zero_columns)
}

/// `X H Xᵀ` with `H = I − 𝟙/n`, computed by explicit mean subtraction.
pub fn centered_scatter(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean = x.mean_axis(Axis(1)).expect("n ≥ 1");
    let centered = &x - &mean.view().insert_axis(Axis(1));
    centered.dot(&centered.t())
}
