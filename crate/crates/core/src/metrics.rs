//! Measures of fit and the per-well model comparison table.
//!
//! Three measures are reported for every (well, response, model) cell:
//! R², the root average squared error (RASE), and the average absolute
//! error (AAE), along with the observation count backing the fit.

use std::collections::BTreeSet;

use crate::dataset::ResponseKind;
use crate::error::{Error, Result};
use crate::glm::Family;

/// R² = 1 − Σ(yᵢ−ŷᵢ)²/Σ(yᵢ−ȳ)². Negative for worse-than-mean predictors.
pub fn rsquare(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::EmptyDataset("R² needs at least two rows".into()));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let total: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if total == 0.0 {
        return Err(Error::ConstantResponse);
    }
    let sse: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(1.0 - sse / total)
}

/// Root average squared error, √(Σ(yᵢ−ŷᵢ)²/n).
pub fn rase(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.is_empty() {
        return Err(Error::EmptyDataset("RASE needs at least one row".into()));
    }
    let sse: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sse / y.len() as f64).sqrt())
}

/// Average absolute error, Σ|yᵢ−ŷᵢ|/n.
pub fn aae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.is_empty() {
        return Err(Error::EmptyDataset("AAE needs at least one row".into()));
    }
    let total: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    Ok(total / y.len() as f64)
}

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", y.len()),
            actual: format!("{}", yhat.len()),
        });
    }
    Ok(())
}

/// Measures of fit for one (model, response) pair. `rsquare` is absent
/// when the response variance is zero and the ratio is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct FitMeasures {
    pub rsquare: Option<f64>,
    pub rase: f64,
    pub aae: f64,
    pub freq: usize,
}

impl FitMeasures {
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<Self> {
        let rsq = match rsquare(y, yhat) {
            Ok(v) => Some(v),
            Err(Error::ConstantResponse) => None,
            Err(e) => return Err(e),
        };
        Ok(FitMeasures {
            rsquare: rsq,
            rase: rase(y, yhat)?,
            aae: aae(y, yhat)?,
            freq: y.len(),
        })
    }
}

/// The four-model grid fitted per (well, response).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    Normal1,
    Normal2,
    Poisson1,
    Poisson2,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Normal1,
        ModelKind::Normal2,
        ModelKind::Poisson1,
        ModelKind::Poisson2,
    ];

    pub fn new(family: Family, degree: u8) -> Self {
        match (family, degree) {
            (Family::NormalIdentity, 1) => ModelKind::Normal1,
            (Family::NormalIdentity, _) => ModelKind::Normal2,
            (Family::PoissonLog, 1) => ModelKind::Poisson1,
            (Family::PoissonLog, _) => ModelKind::Poisson2,
        }
    }

    pub fn family(self) -> Family {
        match self {
            ModelKind::Normal1 | ModelKind::Normal2 => Family::NormalIdentity,
            ModelKind::Poisson1 | ModelKind::Poisson2 => Family::PoissonLog,
        }
    }

    pub fn degree(self) -> u8 {
        match self {
            ModelKind::Normal1 | ModelKind::Poisson1 => 1,
            ModelKind::Normal2 | ModelKind::Poisson2 => 2,
        }
    }

    /// Stable machine-readable name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Normal1 => "Normal-1DG",
            ModelKind::Normal2 => "Normal-2DG",
            ModelKind::Poisson1 => "Poisson-1DG",
            ModelKind::Poisson2 => "Poisson-2DG",
        }
    }

    /// Row label in the rendered comparison block, per response.
    pub fn row_label(self, response: ResponseKind) -> &'static str {
        match (response, self) {
            (ResponseKind::Fluid, ModelKind::Normal1) => "Fluid GLM OLS 1DG",
            (ResponseKind::Fluid, ModelKind::Normal2) => "Fluid GLM OLS 2DG Poly",
            (ResponseKind::Fluid, ModelKind::Poisson1) => "Fluid GLM Poisson 1DG",
            (ResponseKind::Fluid, ModelKind::Poisson2) => "Fluid GLM Poisson 2DG Poly",
            (ResponseKind::Gas, ModelKind::Normal1) => "GAS GLM OLS 1DG",
            (ResponseKind::Gas, ModelKind::Normal2) => "GAS GLM OLS 2DG Polynomial",
            (ResponseKind::Gas, ModelKind::Poisson1) => "GAS GLM Poisson 1DG",
            (ResponseKind::Gas, ModelKind::Poisson2) => "GAS GLM Poisson 2DG Polynomial",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown model kind `{name}`")))
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One comparison cell.
#[derive(Debug, Clone)]
pub struct ComparisonEntry {
    pub well_id: String,
    pub response: ResponseKind,
    pub model: ModelKind,
    pub measures: FitMeasures,
}

/// Model comparison across wells, responses, and the model grid.
#[derive(Debug, Clone, Default)]
pub struct ComparisonTable {
    /// Sorted by well, then response (fluid before gas), then model order.
    pub entries: Vec<ComparisonEntry>,
}

/// Assemble a comparison table from raw (y, ŷ) pairs. Duplicate
/// (well, response, model) keys are rejected. A cell whose R² is
/// undefined keeps its other measures and renders as unavailable.
pub fn build_comparison(
    fits: &[(String, ResponseKind, ModelKind, Vec<f64>, Vec<f64>)],
) -> Result<ComparisonTable> {
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(fits.len());
    for (well_id, response, model, y, yhat) in fits {
        if !seen.insert((well_id.clone(), *response, *model)) {
            return Err(Error::InvalidSpec(format!(
                "duplicate comparison cell ({well_id}, {response}, {model})"
            )));
        }
        entries.push(ComparisonEntry {
            well_id: well_id.clone(),
            response: *response,
            model: *model,
            measures: FitMeasures::compute(y, yhat)?,
        });
    }
    entries.sort_by(|a, b| {
        a.well_id
            .cmp(&b.well_id)
            .then(a.response.cmp(&b.response))
            .then(a.model.cmp(&b.model))
    });
    Ok(ComparisonTable { entries })
}

impl ComparisonTable {
    pub fn get(
        &self,
        well_id: &str,
        response: ResponseKind,
        model: ModelKind,
    ) -> Option<&ComparisonEntry> {
        self.entries
            .iter()
            .find(|e| e.well_id == well_id && e.response == response && e.model == model)
    }

    /// Aligned plain-text rendering: one block per well, fluid rows first,
    /// then gas rows, models in the fixed grid order.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let wells: Vec<&str> = {
            let mut seen = Vec::new();
            for e in &self.entries {
                if !seen.contains(&e.well_id.as_str()) {
                    seen.push(e.well_id.as_str());
                }
            }
            seen
        };
        for (wi, well) in wells.iter().enumerate() {
            if wi > 0 {
                out.push('\n');
            }
            out.push_str(&format!("Model Comparison (\"{well}\")\n"));
            for response in ResponseKind::ALL {
                let rows: Vec<&ComparisonEntry> = self
                    .entries
                    .iter()
                    .filter(|e| e.well_id == *well && e.response == response)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let title = match response {
                    ResponseKind::Fluid => "Measures of Fit for Fluid Prod",
                    ResponseKind::Gas => "Measures of Fit for GAS PRODUCTION",
                };
                out.push_str(&format!("\n{title}\n"));
                out.push_str(&format!(
                    "{:<32}{:>10}{:>12}{:>12}{:>8}\n",
                    "Predictor", "RSquare", "RASE", "AAE", "Freq"
                ));
                for e in rows {
                    let rsq = e
                        .measures
                        .rsquare
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_else(|| "n/a".to_string());
                    out.push_str(&format!(
                        "{:<32}{:>10}{:>12.4}{:>12.4}{:>8}\n",
                        e.model.row_label(response),
                        rsq,
                        e.measures.rase,
                        e.measures.aae,
                        e.measures.freq
                    ));
                }
            }
        }
        out
    }

    /// Machine-readable rows: `well,response,model,rsquare,rase,aae,freq`.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("well,response,model,rsquare,rase,aae,freq\n");
        for e in &self.entries {
            let rsq = e
                .measures
                .rsquare
                .map(crate::dataset::format_float)
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&e.well_id),
                e.response,
                e.model,
                rsq,
                crate::dataset::format_float(e.measures.rase),
                crate::dataset::format_float(e.measures.aae),
                e.measures.freq
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
