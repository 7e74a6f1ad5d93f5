//! Multivariate outlier screening by Mahalanobis distance.
//!
//! Distances use the sample covariance with the n−1 denominator, so
//! Σ dᵢ² = p(n−1) holds exactly and serves as a self-check. Flags come
//! from a chi-square tail cutoff at the requested alpha.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, solve_lower_triangular};
use crate::prob::chi_square_quantile;

/// Ridge factor applied to a numerically singular sample covariance,
/// scaled by trace(S)/p.
pub const RIDGE_FACTOR: f64 = 1e-8;

/// Screening result over one block of rows.
#[derive(Debug, Clone)]
pub struct OutlierScreen {
    /// Column means of the screened block.
    pub center: Vec<f64>,
    /// Sample covariance (n−1 denominator).
    pub covariance: Array2<f64>,
    pub distances: Vec<f64>,
    /// Distance cutoff; infinite until [`OutlierScreen::flag_outliers`].
    pub cutoff: f64,
    pub flags: Vec<bool>,
    /// True when the ridge was needed to invert the covariance.
    pub ridge_applied: bool,
}

/// Mahalanobis distance of every row from the multivariate mean,
/// dᵢ = √((xᵢ − x̄)ᵀ S⁻¹ (xᵢ − x̄)).
pub fn mahalanobis(data: ArrayView2<f64>) -> Result<OutlierScreen> {
    let n = data.nrows();
    let p = data.ncols();
    if p == 0 {
        return Err(Error::InvalidSpec("no columns to screen".into()));
    }
    if n <= p {
        return Err(Error::InvalidSpec(format!(
            "Mahalanobis screening needs more rows than columns (n={n}, p={p})"
        )));
    }
    for (i, v) in data.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                what: "screened value",
                row: i / p,
            });
        }
    }

    let center: Vec<f64> = (0..p).map(|j| data.column(j).sum() / n as f64).collect();
    let mut cov = Array2::<f64>::zeros((p, p));
    for i in 0..n {
        for a in 0..p {
            let da = data[[i, a]] - center[a];
            for b in a..p {
                cov[[a, b]] += da * (data[[i, b]] - center[b]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..p {
        for b in a..p {
            cov[[a, b]] /= denom;
            cov[[b, a]] = cov[[a, b]];
        }
    }

    let (factor, ridge_applied) = match cholesky(cov.view()) {
        Ok(l) => (l, false),
        Err(_) => {
            let trace: f64 = (0..p).map(|j| cov[[j, j]]).sum();
            let ridge = RIDGE_FACTOR * trace / p as f64;
            let mut regularized = cov.clone();
            for j in 0..p {
                regularized[[j, j]] += ridge;
            }
            match cholesky(regularized.view()) {
                Ok(l) => (l, true),
                Err(Error::NotPositiveDefinite { pivot }) => {
                    return Err(Error::SingularCovariance { column: pivot })
                }
                Err(e) => return Err(e),
            }
        }
    };

    let mut distances = Vec::with_capacity(n);
    let mut diff = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            diff[j] = data[[i, j]] - center[j];
        }
        let w = solve_lower_triangular(&factor, &diff);
        distances.push(w.iter().map(|v| v * v).sum::<f64>().sqrt());
    }

    Ok(OutlierScreen {
        center,
        covariance: cov,
        distances,
        cutoff: f64::INFINITY,
        flags: vec![false; n],
        ridge_applied,
    })
}

impl OutlierScreen {
    /// Flag rows beyond the chi-square cutoff √χ²ₚ(1 − alpha).
    pub fn flag_outliers(mut self, alpha: f64) -> Result<OutlierScreen> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "outlier alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let p = self.center.len() as f64;
        self.cutoff = chi_square_quantile(1.0 - alpha, p)?.sqrt();
        self.flags = self.distances.iter().map(|&d| d > self.cutoff).collect();
        Ok(self)
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}
