//! Regression basis construction.
//!
//! Degree 1 is the plain main-effects basis. Degree 2 adds every two-way
//! interaction and every square, both formed from mean-centered predictors
//! while the main-effect columns stay on the raw scale; centering the
//! higher-order terms reduces collinearity between them and the mains.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// One column of the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Intercept,
    /// Raw predictor x_j.
    Main(usize),
    /// Centered product (x_j − μ_j)(x_k − μ_k), j < k.
    Interaction(usize, usize),
    /// Centered square (x_j − μ_j)².
    Square(usize),
}

impl Term {
    /// Human-readable label, e.g. `T8*T12` for an interaction. Squares are
    /// written as a self-product (`T6*T6`).
    pub fn label(&self, predictor_labels: &[String]) -> String {
        match *self {
            Term::Intercept => "Intercept".to_string(),
            Term::Main(j) => predictor_labels[j].clone(),
            Term::Interaction(j, k) => {
                format!("{}*{}", predictor_labels[j], predictor_labels[k])
            }
            Term::Square(j) => format!("{0}*{0}", predictor_labels[j]),
        }
    }
}

/// Declarative description of the basis: degree, predictor names, and the
/// centering means captured from the fitting rows (degree 2 only). A
/// serialized spec is self-contained for prediction on new data.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    degree: u8,
    predictor_labels: Vec<String>,
    centering_means: Option<Vec<f64>>,
}

impl FeatureSpec {
    pub fn degree1(predictor_labels: Vec<String>) -> Result<Self> {
        Self::new(1, predictor_labels, None)
    }

    pub fn degree2(predictor_labels: Vec<String>, centering_means: Vec<f64>) -> Result<Self> {
        Self::new(2, predictor_labels, Some(centering_means))
    }

    pub fn new(
        degree: u8,
        predictor_labels: Vec<String>,
        centering_means: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(degree == 1 || degree == 2) {
            return Err(Error::InvalidSpec(format!(
                "polynomial degree must be 1 or 2, got {degree}"
            )));
        }
        match (degree, &centering_means) {
            (1, Some(_)) => {
                return Err(Error::InvalidSpec(
                    "degree-1 spec must not carry centering means".into(),
                ))
            }
            (2, None) => {
                return Err(Error::InvalidSpec(
                    "degree-2 spec requires centering means".into(),
                ))
            }
            (2, Some(m)) if m.len() != predictor_labels.len() => {
                return Err(Error::InvalidSpec(format!(
                    "{} centering means for {} predictors",
                    m.len(),
                    predictor_labels.len()
                )))
            }
            _ => {}
        }
        Ok(Self {
            degree,
            predictor_labels,
            centering_means,
        })
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn predictor_count(&self) -> usize {
        self.predictor_labels.len()
    }

    pub fn predictor_labels(&self) -> &[String] {
        &self.predictor_labels
    }

    pub fn centering_means(&self) -> Option<&[f64]> {
        self.centering_means.as_deref()
    }

    /// Column terms in the fixed layout: intercept, mains in label order,
    /// interactions in lexicographic (j, k) order, squares in label order.
    pub fn terms(&self) -> Vec<Term> {
        let p = self.predictor_count();
        let mut terms = Vec::with_capacity(self.column_count());
        terms.push(Term::Intercept);
        for j in 0..p {
            terms.push(Term::Main(j));
        }
        if self.degree == 2 {
            for j in 0..p {
                for k in (j + 1)..p {
                    terms.push(Term::Interaction(j, k));
                }
            }
            for j in 0..p {
                terms.push(Term::Square(j));
            }
        }
        terms
    }

    pub fn term_labels(&self) -> Vec<String> {
        self.terms()
            .iter()
            .map(|t| t.label(&self.predictor_labels))
            .collect()
    }

    /// Number of design columns: 1 + p for degree 1, 1 + 2p + p(p−1)/2 for
    /// degree 2.
    pub fn column_count(&self) -> usize {
        let p = self.predictor_count();
        match self.degree {
            1 => 1 + p,
            _ => 1 + 2 * p + p * (p - 1) / 2,
        }
    }

    /// Materialize the design matrix for `temps` (n×p, one predictor per
    /// column).
    pub fn expand(&self, temps: ArrayView2<f64>) -> Result<DesignMatrix> {
        let p = self.predictor_count();
        if temps.ncols() != p {
            return Err(Error::ShapeMismatch {
                expected: format!("{p} predictor columns"),
                actual: format!("{} columns", temps.ncols()),
            });
        }
        let n = temps.nrows();
        let terms = self.terms();
        let m = terms.len();
        let mut values = Array2::<f64>::zeros((n, m));
        let means = self.centering_means.as_deref();
        for i in 0..n {
            for (c, term) in terms.iter().enumerate() {
                values[[i, c]] = match *term {
                    Term::Intercept => 1.0,
                    Term::Main(j) => temps[[i, j]],
                    Term::Interaction(j, k) => {
                        let mu = means.expect("degree-2 spec carries means");
                        (temps[[i, j]] - mu[j]) * (temps[[i, k]] - mu[k])
                    }
                    Term::Square(j) => {
                        let mu = means.expect("degree-2 spec carries means");
                        let d = temps[[i, j]] - mu[j];
                        d * d
                    }
                };
            }
        }
        Ok(DesignMatrix { values, terms })
    }
}

/// Materialized basis: an n×m value matrix plus the term describing each
/// column.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub values: Array2<f64>,
    pub terms: Vec<Term>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.values.ncols()
    }
}

/// Arithmetic mean of each predictor column over the fitting rows.
pub fn centering_means(temps: ArrayView2<f64>) -> Result<Vec<f64>> {
    let n = temps.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset(
            "centering means need at least one row".into(),
        ));
    }
    Ok((0..temps.ncols())
        .map(|j| temps.column(j).sum() / n as f64)
        .collect())
}
