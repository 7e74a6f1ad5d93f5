//! Model fitting for the two response families: Normal with identity link
//! (ordinary least squares) and Poisson with log link (iteratively
//! reweighted least squares).
//!
//! IRLS solves the Poisson score equations Dᵀ(y − e^{Dβ}) = 0 by repeated
//! weighted least squares with weights wᵢ = μᵢ and working response
//! zᵢ = ηᵢ + (yᵢ − μᵢ)/μᵢ. The linear predictor is clamped to
//! [`ETA_LOWER_GUARD`], [`ETA_UPPER_GUARD`] before exponentiation; a fit
//! whose upper guard still binds at convergence is reported as divergent.
//! An all-zero response walks the intercept toward −∞ and comes back with
//! `converged = false` at the iteration cap.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{DesignMatrix, FeatureSpec, Term};
use crate::linalg::{weighted_least_squares, WlsSolution};
use crate::prob::{ln_gamma, normal_two_sided_p};

/// Response distribution and link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    /// ŷ = Dβ; predictions may be negative.
    NormalIdentity,
    /// ŷ = e^{Dβ}; predictions are strictly positive.
    PoissonLog,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::NormalIdentity => "normal_identity",
            Family::PoissonLog => "poisson_log",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "normal_identity" => Ok(Family::NormalIdentity),
            "poisson_log" => Ok(Family::PoissonLog),
            other => Err(Error::ModelFormat(format!("unknown family tag `{other}`"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::NormalIdentity => "Normal",
            Family::PoissonLog => "Poisson",
        })
    }
}

pub const IRLS_MAX_ITERATIONS: usize = 100;
pub const IRLS_TOLERANCE: f64 = 1e-8;
/// Upper clamp on the linear predictor during fitting; e^30 ≈ 1.07e13.
pub const ETA_UPPER_GUARD: f64 = 30.0;
/// Lower clamp keeps weights and working responses representable.
pub const ETA_LOWER_GUARD: f64 = -350.0;
/// Prediction-time clamp; keeps e^η finite and strictly positive.
pub const PREDICT_ETA_LIMIT: f64 = 700.0;

/// A fitted model: coefficients, their covariance, and the convergence
/// record, together with the feature spec needed to score new data.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub family: Family,
    pub spec: FeatureSpec,
    /// Coefficients in design-column order, intercept first.
    pub beta: Array1<f64>,
    /// Coefficient covariance; zero on rows/columns of dropped terms.
    pub covariance: Array2<f64>,
    pub n_obs: usize,
    /// OLS: unbiased residual variance SSE/(n − m_retained). Poisson: 1.
    pub dispersion: f64,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Design columns dropped as linearly dependent (aliased).
    pub dropped_columns: Vec<usize>,
}

impl FittedModel {
    pub fn term_labels(&self) -> Vec<String> {
        self.spec.term_labels()
    }

    pub fn is_aliased(&self, column: usize) -> bool {
        self.dropped_columns.contains(&column)
    }

    /// Score new predictor rows through the stored feature spec.
    pub fn predict(&self, temps: ArrayView2<f64>) -> Result<Array1<f64>> {
        let design = self.spec.expand(temps)?;
        Ok(self.predict_design(&design))
    }

    pub fn predict_design(&self, design: &DesignMatrix) -> Array1<f64> {
        let eta = design.values.dot(&self.beta);
        match self.family {
            Family::NormalIdentity => eta,
            Family::PoissonLog => {
                eta.mapv(|e| e.clamp(-PREDICT_ETA_LIMIT, PREDICT_ETA_LIMIT).exp())
            }
        }
    }
}

fn check_response(design: &DesignMatrix, y: &[f64]) -> Result<()> {
    if design.n_rows() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} response values", design.n_rows()),
            actual: format!("{}", y.len()),
        });
    }
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "response", row: i });
        }
    }
    Ok(())
}

fn check_spec_design(spec: &FeatureSpec, design: &DesignMatrix) -> Result<()> {
    if design.terms != spec.terms() {
        return Err(Error::ShapeMismatch {
            expected: format!("design with {} spec columns", spec.column_count()),
            actual: format!("design with {} columns", design.n_columns()),
        });
    }
    Ok(())
}

/// Ordinary least squares for the Normal-identity family.
pub fn fit_ols(spec: &FeatureSpec, design: &DesignMatrix, y: &[f64]) -> Result<FittedModel> {
    check_spec_design(spec, design)?;
    check_response(design, y)?;
    let n = y.len();
    if n < 2 {
        return Err(Error::EmptyDataset(
            "least-squares fit needs at least two rows".into(),
        ));
    }
    let weights = Array1::<f64>::ones(n);
    let yv = Array1::from_vec(y.to_vec());
    let sol = weighted_least_squares(design.values.view(), yv.view(), weights.view())?;
    if sol.retained_columns.is_empty() {
        return Err(Error::DegenerateDesign);
    }

    let fitted = design.values.dot(&sol.coefficients);
    let sse: f64 = y
        .iter()
        .zip(fitted.iter())
        .map(|(yi, fi)| (yi - fi) * (yi - fi))
        .sum();
    let df = n.saturating_sub(sol.retained_columns.len());
    let dispersion = if df > 0 { sse / df as f64 } else { 0.0 };
    let covariance = sol.xtwx_inverse.mapv(|v| v * dispersion);

    // Gaussian log likelihood at the MLE variance; clamped away from a
    // zero-SSE singularity so perfect fits stay finite.
    let sigma2_mle = (sse / n as f64).max(f64::MIN_POSITIVE);
    let log_likelihood =
        -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2_mle).ln() + 1.0);

    Ok(FittedModel {
        family: Family::NormalIdentity,
        spec: spec.clone(),
        beta: sol.coefficients,
        covariance,
        n_obs: n,
        dispersion,
        converged: true,
        iterations: 1,
        log_likelihood,
        dropped_columns: sol.dropped_columns,
    })
}

/// Poisson regression with log link, by iteratively reweighted least
/// squares. The response must be non-negative; zeros are legal.
pub fn fit_poisson_irls(
    spec: &FeatureSpec,
    design: &DesignMatrix,
    y: &[f64],
) -> Result<FittedModel> {
    check_spec_design(spec, design)?;
    check_response(design, y)?;
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyDataset("Poisson fit needs at least one row".into()));
    }
    for (i, &v) in y.iter().enumerate() {
        if v < 0.0 {
            return Err(Error::NegativeResponse { row: i, value: v });
        }
    }
    let m = design.n_columns();
    let ybar = y.iter().sum::<f64>() / n as f64;

    let mut beta = Array1::<f64>::zeros(m);
    beta[0] = ybar.max(1e-8).ln();

    let mut last_sol: Option<WlsSolution> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < IRLS_MAX_ITERATIONS {
        iterations += 1;
        let eta = design.values.dot(&beta);
        let eta_c = eta.mapv(|e| e.clamp(ETA_LOWER_GUARD, ETA_UPPER_GUARD));
        let mu = eta_c.mapv(f64::exp);
        let mut z = Array1::<f64>::zeros(n);
        for i in 0..n {
            z[i] = eta_c[i] + (y[i] - mu[i]) / mu[i];
        }
        let sol = weighted_least_squares(design.values.view(), z.view(), mu.view())?;
        if sol.retained_columns.is_empty() {
            return Err(Error::DegenerateDesign);
        }
        let delta = sol
            .coefficients
            .iter()
            .zip(beta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        beta = sol.coefficients.clone();
        last_sol = Some(sol);
        if delta < IRLS_TOLERANCE {
            converged = true;
            break;
        }
    }
    let sol = last_sol.expect("at least one IRLS step runs");

    let eta = design.values.dot(&beta);
    if converged {
        if let Some(row) = (0..n).find(|&i| eta[i] >= ETA_UPPER_GUARD) {
            return Err(Error::Divergence { row });
        }
    }

    // Full Poisson log likelihood, Σ yᵢηᵢ − μᵢ − ln Γ(yᵢ + 1).
    let mut log_likelihood = 0.0;
    for i in 0..n {
        let eta_c = eta[i].clamp(ETA_LOWER_GUARD, ETA_UPPER_GUARD);
        log_likelihood += y[i] * eta_c - eta_c.exp() - ln_gamma(y[i] + 1.0);
    }

    Ok(FittedModel {
        family: Family::PoissonLog,
        spec: spec.clone(),
        beta,
        covariance: sol.xtwx_inverse,
        n_obs: n,
        dispersion: 1.0,
        converged,
        iterations,
        log_likelihood,
        dropped_columns: sol.dropped_columns,
    })
}

/// Expand `temps` through `spec` and fit the requested family.
pub fn fit_model(
    family: Family,
    spec: &FeatureSpec,
    temps: ArrayView2<f64>,
    y: &[f64],
) -> Result<FittedModel> {
    let design = spec.expand(temps)?;
    match family {
        Family::NormalIdentity => fit_ols(spec, &design, y),
        Family::PoissonLog => fit_poisson_irls(spec, &design, y),
    }
}

// ---------------------------------------------------------------------
// Effect significance
// ---------------------------------------------------------------------

/// One non-intercept effect with its Wald test summary.
#[derive(Debug, Clone)]
pub struct EffectEntry {
    pub term: Term,
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    /// Two-sided p-value in (0, 1].
    pub p_value: f64,
    /// −log10(p_value); 0 for aliased terms.
    pub log_worth: f64,
    /// True when the term's column was dropped as linearly dependent.
    pub aliased: bool,
}

/// The −log10 significance mapping used by effect summaries.
pub fn log_worth(p_value: f64) -> f64 {
    -p_value.log10() + 0.0
}

/// Default number of leading effects shown in ranked summaries.
pub const DEFAULT_TOP_K: usize = 20;

/// Rank all non-intercept effects by descending LogWorth, ties broken by
/// term label. Aliased columns are reported with p = 1; retained columns
/// with a zero standard error cannot be tested and are excluded.
pub fn wald_effects(model: &FittedModel) -> Vec<EffectEntry> {
    let labels = model.spec.predictor_labels();
    let mut entries: Vec<EffectEntry> = Vec::new();
    for (c, term) in model.spec.terms().iter().enumerate() {
        if matches!(term, Term::Intercept) {
            continue;
        }
        let label = term.label(labels);
        if model.is_aliased(c) {
            entries.push(EffectEntry {
                term: *term,
                label,
                estimate: 0.0,
                std_error: 0.0,
                p_value: 1.0,
                log_worth: 0.0,
                aliased: true,
            });
            continue;
        }
        let variance = model.covariance[[c, c]];
        if !(variance > 0.0) {
            // Degenerate: no sampling variability to test against.
            continue;
        }
        let std_error = variance.sqrt();
        let z = model.beta[c] / std_error;
        let p_value = normal_two_sided_p(z);
        entries.push(EffectEntry {
            term: *term,
            label,
            estimate: model.beta[c],
            std_error,
            p_value,
            log_worth: log_worth(p_value),
            aliased: false,
        });
    }
    entries.sort_by(|a, b| {
        b.log_worth
            .partial_cmp(&a.log_worth)
            .expect("log worth is never NaN")
            .then_with(|| a.label.cmp(&b.label))
    });
    entries
}

/// Keep at most `k` leading entries.
pub fn top_k(mut entries: Vec<EffectEntry>, k: usize) -> Vec<EffectEntry> {
    entries.truncate(k);
    entries
}

// ---------------------------------------------------------------------
// Model document
// ---------------------------------------------------------------------

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Provenance stamped into documents written by front-ends.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub config_digest: String,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    family: String,
    degree: u8,
    predictor_labels: Vec<String>,
    centering_means: Option<Vec<f64>>,
    terms: Vec<String>,
    beta: Vec<f64>,
    /// Row-major m×m coefficient covariance.
    covariance: Vec<f64>,
    n_obs: usize,
    dispersion: f64,
    converged: bool,
    iterations: usize,
    log_likelihood: f64,
    dropped_columns: Vec<usize>,
}

/// Serialize a fitted model to its single-file JSON document.
pub fn serialize_model(model: &FittedModel) -> String {
    serialize_model_with_provenance(model, None)
}

pub fn serialize_model_with_provenance(
    model: &FittedModel,
    provenance: Option<Provenance>,
) -> String {
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        provenance,
        family: model.family.tag().to_string(),
        degree: model.spec.degree(),
        predictor_labels: model.spec.predictor_labels().to_vec(),
        centering_means: model.spec.centering_means().map(|m| m.to_vec()),
        terms: model.term_labels(),
        beta: model.beta.to_vec(),
        covariance: model.covariance.iter().copied().collect(),
        n_obs: model.n_obs,
        dispersion: model.dispersion,
        converged: model.converged,
        iterations: model.iterations,
        log_likelihood: model.log_likelihood,
        dropped_columns: model.dropped_columns.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

/// Parse and validate a model document.
pub fn deserialize_model(text: &str) -> Result<FittedModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| {
        Error::ModelFormat(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {}",
            doc.format_version
        )));
    }
    let family = Family::from_tag(&doc.family)?;
    if doc.degree == 2 && doc.centering_means.is_none() {
        return Err(Error::ModelFormat(
            "degree-2 model document is missing centering means".into(),
        ));
    }
    let spec = FeatureSpec::new(doc.degree, doc.predictor_labels, doc.centering_means)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    let m = spec.column_count();
    if doc.beta.len() != m {
        return Err(Error::ModelFormat(format!(
            "{} coefficients for {m} design columns",
            doc.beta.len()
        )));
    }
    if doc.terms.len() != m || doc.terms != spec.term_labels() {
        return Err(Error::ModelFormat(
            "term list does not match the feature spec".into(),
        ));
    }
    if doc.covariance.len() != m * m {
        return Err(Error::ModelFormat(format!(
            "covariance has {} entries, expected {}",
            doc.covariance.len(),
            m * m
        )));
    }
    if doc.dropped_columns.iter().any(|&c| c >= m) {
        return Err(Error::ModelFormat("dropped column index out of range".into()));
    }
    let covariance = Array2::from_shape_vec((m, m), doc.covariance)
        .expect("length checked above");
    Ok(FittedModel {
        family,
        spec,
        beta: Array1::from_vec(doc.beta),
        covariance,
        n_obs: doc.n_obs,
        dispersion: doc.dispersion,
        converged: doc.converged,
        iterations: doc.iterations,
        log_likelihood: doc.log_likelihood,
        dropped_columns: doc.dropped_columns,
    })
}
