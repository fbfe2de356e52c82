use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::{canonicalize_signs, EigenPairs, SymMatrix};
use crate::error::{Error, Result};

// QL sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_VALUE: usize = 60;

/// The `k` largest eigenpairs of a symmetric matrix.
///
/// Full decomposition by Householder tridiagonalization and implicit QL,
/// then truncation. Eigenvectors are sign-canonicalized.
pub fn sym_eig(m: &SymMatrix, k: usize) -> Result<EigenPairs> {
    let n = m.order();
    check_count(k, n)?;
    let (values, vectors) = full_decomposition(m.view())?;
    Ok(take_largest(values, vectors, k))
}

/// The `k` largest pairs of `a p = λ b p` with `b` positive definite.
///
/// With `b = L Lᵀ` the problem becomes `L⁻¹ a L⁻ᵀ y = λ y` and `p = L⁻ᵀ y`.
/// Returned vectors are rescaled to unit Euclidean norm.
pub fn gen_eig(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<EigenPairs> {
    let n = a.order();
    if b.order() != n {
        return Err(Error::DimensionMismatch {
            context: "generalized eigenproblem",
            expected: n,
            found: b.order(),
        });
    }
    check_count(k, n)?;
    let l = cholesky(b)?;

    // W = L⁻¹ a, then C = L⁻¹ Wᵀ = L⁻¹ a L⁻ᵀ since a is symmetric.
    let w = forward_substitute(&l, a.view());
    let c = forward_substitute(&l, w.t());
    let c = SymMatrix::from_scatter(c)?;

    let (values, y) = full_decomposition(c.view())?;
    let reduced = take_largest(values, y, k);

    let mut p = back_substitute_transposed(&l, reduced.vectors.view());
    for mut col in p.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        }
    }
    canonicalize_signs(&mut p);
    Ok(EigenPairs {
        values: reduced.values,
        vectors: p,
    })
}

/// Lower-triangular `L` with `L Lᵀ = b`.
pub fn cholesky(b: &SymMatrix) -> Result<Array2<f64>> {
    let a = b.view();
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = sum / ljj;
        }
    }
    Ok(l)
}

fn check_count(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs from a matrix of order {n}"
        )));
    }
    Ok(())
}

// Solves L X = rhs column by column.
fn forward_substitute(l: &Array2<f64>, rhs: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = rhs.to_owned();
    for mut col in x.columns_mut() {
        for i in 0..n {
            let mut v = col[i];
            for k in 0..i {
                v -= l[[i, k]] * col[k];
            }
            col[i] = v / l[[i, i]];
        }
    }
    x
}

// Solves Lᵀ X = rhs column by column.
fn back_substitute_transposed(l: &Array2<f64>, rhs: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = rhs.to_owned();
    for mut col in x.columns_mut() {
        for i in (0..n).rev() {
            let mut v = col[i];
            for k in (i + 1)..n {
                v -= l[[k, i]] * col[k];
            }
            col[i] = v / l[[i, i]];
        }
    }
    x
}

fn take_largest(values: Array1<f64>, vectors: Array2<f64>, k: usize) -> EigenPairs {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable: equal eigenvalues keep their QL output order.
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    order.truncate(k);
    let values = order.iter().map(|&i| values[i]).collect::<Array1<f64>>();
    let mut vecs = vectors.select(Axis(1), &order);
    canonicalize_signs(&mut vecs);
    EigenPairs {
        values,
        vectors: vecs,
    }
}

/// All eigenvalues (unsorted) and eigenvectors of a symmetric matrix.
fn full_decomposition(a: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    let mut v = a.to_owned();
    let mut d = Array1::<f64>::zeros(n);
    let mut e = Array1::<f64>::zeros(n);
    if n == 1 {
        d[0] = v[[0, 0]];
        v[[0, 0]] = 1.0;
        return Ok((d, v));
    }
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;
    Ok((d, v))
}

// Householder reduction to tridiagonal form. On return `d` holds the
// diagonal, `e[1..]` the subdiagonal and `v` the accumulated transform.
fn tridiagonalize(v: &mut Array2<f64>, d: &mut Array1<f64>, e: &mut Array1<f64>) {
    let n = v.nrows();
    d.assign(&v.row(n - 1));

    for i in (1..n).rev() {
        let scale: f64 = d.slice(s![..i]).iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
                v[[j, i]] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] -= f * e[k] + g * d[k];
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = 0.0;
    }
    v[[n - 1, n - 1]] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal matrix, accumulating rotations in `v`.
fn tridiagonal_ql(v: &mut Array2<f64>, d: &mut Array1<f64>, e: &mut Array1<f64>) -> Result<()> {
    let n = v.nrows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    let mut total_sweeps = 0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                total_sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_VALUE {
                    return Err(Error::NoConvergence {
                        iterations: total_sweeps,
                    });
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
