//! Dense least-squares kernels shared by both model families.
//!
//! The weighted solver runs a Householder QR over the √w-scaled design,
//! visiting columns left to right. A column whose residual norm falls
//! below [`RANK_TOLERANCE`] times the largest initial column norm is
//! declared linearly dependent and dropped; because columns are visited
//! in order, the later of two dependent columns always loses. Quadratic
//! expansions of correlated sensors are near-collinear, which is why the
//! orthogonal route is used instead of plain normal equations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a column is treated as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Solution of a weighted least-squares problem, with rank bookkeeping.
#[derive(Debug, Clone)]
pub struct WlsSolution {
    /// Coefficients for all m columns; dropped columns hold exactly 0.
    pub coefficients: Array1<f64>,
    /// (DᵀWD)⁻¹ on the retained block, embedded in an m×m matrix that is
    /// zero on dropped rows and columns.
    pub xtwx_inverse: Array2<f64>,
    pub retained_columns: Vec<usize>,
    pub dropped_columns: Vec<usize>,
    /// Set when the retained column count consumes every observation,
    /// leaving no residual degrees of freedom.
    pub saturated: bool,
}

/// Minimize Σ wᵢ (zᵢ − Dᵢβ)² over β.
///
/// Weights must be finite and non-negative with at least one strictly
/// positive entry. Dependent columns are dropped deterministically; their
/// coefficients are reported as 0 and listed in `dropped_columns`.
pub fn weighted_least_squares(
    design: ArrayView2<f64>,
    response: ArrayView1<f64>,
    weights: ArrayView1<f64>,
) -> Result<WlsSolution> {
    let n = design.nrows();
    let m = design.ncols();
    if n == 0 {
        return Err(Error::EmptyDataset("least squares needs at least one row".into()));
    }
    if response.len() != n || weights.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} responses and weights"),
            actual: format!("{} responses, {} weights", response.len(), weights.len()),
        });
    }
    let mut any_positive = false;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::NonFinite { what: "weight", row: i });
        }
        any_positive |= w > 0.0;
    }
    if !any_positive {
        return Err(Error::DegenerateWeights);
    }

    // Scale rows by √w so the problem becomes ordinary least squares.
    let mut a = Array2::<f64>::zeros((n, m));
    let mut b = Array1::<f64>::zeros(n);
    for i in 0..n {
        let s = weights[i].sqrt();
        for j in 0..m {
            a[[i, j]] = s * design[[i, j]];
        }
        b[i] = s * response[i];
    }

    // Reference scale for the rank test: the largest initial column norm.
    let mut ref_scale = 0.0_f64;
    for j in 0..m {
        let norm = column_norm(&a, 0, j);
        ref_scale = ref_scale.max(norm);
    }

    let mut retained: Vec<usize> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();

    for j in 0..m {
        let r = retained.len();
        let norm = column_norm(&a, r, j);
        if r == n || norm <= RANK_TOLERANCE * ref_scale {
            dropped.push(j);
            continue;
        }

        // Householder reflector for rows r.. of column j.
        let alpha = if a[[r, j]] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (r..n).map(|i| a[[i, j]]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            let scale = 2.0 / vtv;
            for k in (j + 1)..m {
                let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * a[[r + i, k]]).sum();
                let s = scale * dot;
                for (i, vi) in v.iter().enumerate() {
                    a[[r + i, k]] -= s * vi;
                }
            }
            let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * b[r + i]).sum();
            let s = scale * dot;
            for (i, vi) in v.iter().enumerate() {
                b[r + i] -= s * vi;
            }
        }
        a[[r, j]] = alpha;
        for i in (r + 1)..n {
            a[[i, j]] = 0.0;
        }
        retained.push(j);
    }

    let rank = retained.len();
    let mut coefficients = Array1::<f64>::zeros(m);
    let mut xtwx_inverse = Array2::<f64>::zeros((m, m));

    if rank > 0 {
        // Back substitution on the retained triangle.
        let mut beta_r = vec![0.0; rank];
        for k in (0..rank).rev() {
            let mut acc = b[k];
            for l in (k + 1)..rank {
                acc -= a[[k, retained[l]]] * beta_r[l];
            }
            beta_r[k] = acc / a[[k, retained[k]]];
        }
        for (k, &col) in retained.iter().enumerate() {
            coefficients[col] = beta_r[k];
        }

        // (RᵀR)⁻¹ = R⁻¹ R⁻ᵀ with R the retained upper triangle.
        let mut rinv = vec![vec![0.0; rank]; rank];
        for col in 0..rank {
            for k in (0..=col).rev() {
                let mut acc = if k == col { 1.0 } else { 0.0 };
                for l in (k + 1)..=col {
                    acc -= a[[k, retained[l]]] * rinv[l][col];
                }
                rinv[k][col] = acc / a[[k, retained[k]]];
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                let mut acc = 0.0;
                for l in i.max(j)..rank {
                    acc += rinv[i][l] * rinv[j][l];
                }
                xtwx_inverse[[retained[i], retained[j]]] = acc;
            }
        }
    }

    Ok(WlsSolution {
        coefficients,
        xtwx_inverse,
        saturated: rank >= n,
        retained_columns: retained,
        dropped_columns: dropped,
    })
}

fn column_norm(a: &Array2<f64>, from_row: usize, col: usize) -> f64 {
    let mut acc = 0.0;
    for i in from_row..a.nrows() {
        acc += a[[i, col]] * a[[i, col]];
    }
    acc.sqrt()
}

/// Cholesky factor L of a symmetric positive-definite matrix (A = LLᵀ).
pub fn cholesky(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(Error::ShapeMismatch {
            expected: "square matrix".into(),
            actual: format!("{}x{}", m, a.ncols()),
        });
    }
    let mut l = Array2::<f64>::zeros((m, m));
    for j in 0..m {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        l[[j, j]] = d.sqrt();
        for i in (j + 1)..m {
            let mut acc = a[[i, j]];
            for k in 0..j {
                acc -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = acc / l[[j, j]];
        }
    }
    Ok(l)
}

/// Solve A·x = b for symmetric positive-definite A.
pub fn solve_spd(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let l = cholesky(a)?;
    let m = l.nrows();
    if b.len() != m {
        return Err(Error::ShapeMismatch {
            expected: format!("right-hand side of length {m}"),
            actual: format!("length {}", b.len()),
        });
    }
    // Ly = b
    let mut y = Array1::<f64>::zeros(m);
    for i in 0..m {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[[i, k]] * y[k];
        }
        y[i] = acc / l[[i, i]];
    }
    // Lᵀx = y
    let mut x = Array1::<f64>::zeros(m);
    for i in (0..m).rev() {
        let mut acc = y[i];
        for k in (i + 1)..m {
            acc -= l[[k, i]] * x[k];
        }
        x[i] = acc / l[[i, i]];
    }
    Ok(x)
}

/// Forward substitution L·x = b for lower-triangular L.
pub(crate) fn solve_lower_triangular(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let m = l.nrows();
    let mut x = vec![0.0; m];
    for i in 0..m {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[[i, k]] * x[k];
        }
        x[i] = acc / l[[i, i]];
    }
    x
}
