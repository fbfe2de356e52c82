//! Dense linear algebra used by the adaptation pipeline.
//!
//! Everything here operates on small-to-medium dense `f64` matrices: the
//! symmetric eigensolver (Householder tridiagonalization followed by
//! implicit-shift QL), the Cholesky reduction for the symmetric-definite
//! generalized problem, and a Hungarian solver for square assignment.

mod assignment;
mod eigen;

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

pub use assignment::{solve_assignment, CostMatrix, Matching};
pub use eigen::{cholesky, gen_eig, sym_eig};

const SYMMETRY_TOL: f64 = 1e-10;

/// Square symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Array2<f64>);

impl SymMatrix {
    /// Checks squareness, finiteness and symmetry (to `1e-10`, relative to
    /// the largest entry), then symmetrizes exactly.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        let (rows, cols) = m.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                context: "symmetric matrix columns",
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 {
            return Err(Error::InvalidInput("symmetric matrix has order 0".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "symmetric matrix has non-finite entries".into(),
            ));
        }
        let scale = m.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..rows {
            for j in (i + 1)..rows {
                if (m[[i, j]] - m[[j, i]]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages `m` with its transpose without checking symmetry first.
    /// Intended for matrices assembled as `X W Xᵀ`, where asymmetry is only
    /// rounding noise. Still rejects non-square or non-finite input.
    pub fn from_scatter(m: Array2<f64>) -> Result<Self> {
        let (rows, cols) = m.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                context: "symmetric matrix columns",
                expected: rows,
                found: cols,
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "symmetric matrix has non-finite entries".into(),
            ));
        }
        Ok(Self::symmetrize(m))
    }

    fn symmetrize(mut m: Array2<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
                m[[i, j]] = avg;
                m[[j, i]] = avg;
            }
        }
        SymMatrix(m)
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix(Array2::eye(order))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self.0.view())
    }
}

/// Eigenvalues sorted in descending order with matching unit-norm column
/// eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn frobenius_norm(m: ArrayView2<'_, f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Flips the sign of each column so its largest-magnitude entry is
/// positive. The first index wins among equal magnitudes.
pub(crate) fn canonicalize_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}
