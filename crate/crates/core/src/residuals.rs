//! Residual extraction, fitted-Normal diagnostics, and plot-data tables
//! for predicted-versus-actual and production-versus-day figures.
//!
//! A well-behaved fit leaves residuals εᵢ = yᵢ − ŷᵢ that center on zero
//! and follow a Normal distribution; the report carries the fitted
//! location/dispersion with their standard errors plus histogram bins
//! with the Normal density overlay evaluated at each midpoint.

use crate::error::{Error, Result};
use crate::prob::normal_pdf;

/// Elementwise y − ŷ.
pub fn residuals(y: &[f64], yhat: &[f64]) -> Result<Vec<f64>> {
    if y.len() != yhat.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", y.len()),
            actual: format!("{}", yhat.len()),
        });
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| a - b).collect())
}

/// Maximum-likelihood Normal fit to a residual vector.
///
/// Dispersion uses the 1/n form; the standard errors are the asymptotic
/// σ̂/√n and σ̂/√(2n).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub se_mu: f64,
    pub se_sigma: f64,
    pub n: usize,
}

pub fn fit_normal(eps: &[f64]) -> Result<NormalFit> {
    let n = eps.len();
    if n < 2 {
        return Err(Error::DegenerateResiduals(
            "need at least two residuals".into(),
        ));
    }
    let nf = n as f64;
    let mu = eps.iter().sum::<f64>() / nf;
    let sigma = (eps.iter().map(|e| (e - mu) * (e - mu)).sum::<f64>() / nf).sqrt();
    if sigma == 0.0 {
        return Err(Error::DegenerateResiduals(
            "all residuals are equal; dispersion is zero".into(),
        ));
    }
    Ok(NormalFit {
        mu,
        sigma,
        se_mu: sigma / nf.sqrt(),
        se_sigma: sigma / (2.0 * nf).sqrt(),
        n,
    })
}

/// One histogram bin with the Normal overlay at its midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub normal_density_at_mid: f64,
}

/// Equal-width bins spanning [min ε, max ε]; a zero-width range falls back
/// to a single unit-width bin. Counts always sum to n.
pub fn histogram(eps: &[f64], bin_count: usize, fit: &NormalFit) -> Result<Vec<HistogramBin>> {
    if bin_count == 0 {
        return Err(Error::InvalidSpec("histogram needs at least one bin".into()));
    }
    if eps.is_empty() {
        return Err(Error::EmptyDataset("histogram needs residuals".into()));
    }
    let min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        let mid = min;
        return Ok(vec![HistogramBin {
            left: mid - 0.5,
            right: mid + 0.5,
            count: eps.len(),
            normal_density_at_mid: normal_pdf(mid, fit.mu, fit.sigma),
        }]);
    }
    let width = (max - min) / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    for &e in eps {
        let mut idx = ((e - min) / width) as usize;
        if idx >= bin_count {
            idx = bin_count - 1; // right edge belongs to the last bin
        }
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let left = min + i as f64 * width;
            let right = min + (i + 1) as f64 * width;
            HistogramBin {
                left,
                right,
                count,
                normal_density_at_mid: normal_pdf(0.5 * (left + right), fit.mu, fit.sigma),
            }
        })
        .collect())
}

/// Full residual diagnostic for one fitted model.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub residuals: Vec<f64>,
    pub normal: NormalFit,
    pub histogram: Vec<HistogramBin>,
}

impl ResidualReport {
    pub fn new(y: &[f64], yhat: &[f64], bin_count: usize) -> Result<Self> {
        let eps = residuals(y, yhat)?;
        let normal = fit_normal(&eps)?;
        let histogram = histogram(&eps, bin_count, &normal)?;
        Ok(Self {
            residuals: eps,
            normal,
            histogram,
        })
    }

    /// Parameter block in the layout of a fitted-distribution report.
    pub fn render_text(&self) -> String {
        format!(
            "Fitted Normal Distribution\n\
             {:<20}{:>14}{:>14}\n\
             {:<20}{:>14}{:>14}\n\
             {:<20}{:>14}{:>14}\n",
            "Parameter",
            "Estimate",
            "Std Error",
            "Location mu",
            trim_sig(self.normal.mu),
            trim_sig(self.normal.se_mu),
            "Dispersion sigma",
            trim_sig(self.normal.sigma),
            trim_sig(self.normal.se_sigma),
        )
    }
}

fn trim_sig(v: f64) -> String {
    format!("{v:.7}")
}

/// Predicted-versus-actual pairs plus the identity-line range.
#[derive(Debug, Clone)]
pub struct ScatterData {
    /// (predicted, actual) per observation.
    pub pairs: Vec<(f64, f64)>,
    /// Range covering both axes; the 45° reference line runs corner to
    /// corner.
    pub identity_line: (f64, f64),
}

pub fn scatter_data(y: &[f64], yhat: &[f64]) -> Result<ScatterData> {
    if y.len() != yhat.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", y.len()),
            actual: format!("{}", yhat.len()),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in y.iter().chain(yhat) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    Ok(ScatterData {
        pairs: yhat.iter().copied().zip(y.iter().copied()).collect(),
        identity_line: (lo, hi),
    })
}

/// Production-versus-day table: one row per retained day, one predicted
/// column per model.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub model_names: Vec<String>,
    pub rows: Vec<SeriesRow>,
}

#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub day: i64,
    pub actual: f64,
    pub predicted: Vec<f64>,
}

/// Build the series table, optionally restricted to a closed day window.
pub fn series_data(
    day: &[i64],
    actual: &[f64],
    models: &[(String, Vec<f64>)],
    window: Option<(i64, i64)>,
) -> Result<SeriesTable> {
    if actual.len() != day.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} actual values", day.len()),
            actual: format!("{}", actual.len()),
        });
    }
    for (name, yhat) in models {
        if yhat.len() != day.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} predictions for model `{name}`", day.len()),
                actual: format!("{}", yhat.len()),
            });
        }
    }
    let keep = |d: i64| window.map_or(true, |(from, to)| d >= from && d <= to);
    let rows = day
        .iter()
        .enumerate()
        .filter(|(_, &d)| keep(d))
        .map(|(i, &d)| SeriesRow {
            day: d,
            actual: actual[i],
            predicted: models.iter().map(|(_, yhat)| yhat[i]).collect(),
        })
        .collect();
    Ok(SeriesTable {
        model_names: models.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}
