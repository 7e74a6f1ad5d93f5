//! Synthetic well generator with known ground truth, so every pipeline
//! claim is testable without field data.
//!
//! Temperatures follow per-thermocouple linear ramps with seeded Gaussian
//! noise, clipped to the physical range [0, 700] °C. The fluid response is
//! sampled from the configured true model; the gas response comes from a
//! second coefficient vector when one is supplied, otherwise it is left
//! missing.
//! Temperature and response draws come from independent SplitMix64
//! streams derived from the seed, so the same temperatures underlie both
//! responses.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::WellSeries;
use crate::error::{Error, Result};
use crate::features::{centering_means, FeatureSpec};
use crate::glm::Family;
use crate::rng::SplitMix64;

/// Physical temperature range for generated data, °C.
pub const TEMP_MIN: f64 = 0.0;
pub const TEMP_MAX: f64 = 700.0;
/// Largest admissible Poisson rate; e^η above this is a spec error.
pub const RATE_CAP: f64 = 1e6;

/// Stream salts for deriving independent generators from one seed.
pub const TEMP_STREAM: u64 = 0x54454D50; // "TEMP"
pub const FLUID_STREAM: u64 = 0x464C5549; // "FLUI"
pub const GAS_STREAM: u64 = 0x47415321; // "GAS!"

/// Temperature trajectory parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TempModel {
    /// Baseline level, °C.
    pub base: f64,
    /// Ramp rate, °C per day.
    pub ramp: f64,
    /// Standard deviation of the per-reading noise, °C.
    pub noise_std: f64,
}

impl Default for TempModel {
    fn default() -> Self {
        Self {
            base: 150.0,
            ramp: 0.25,
            noise_std: 8.0,
        }
    }
}

/// Full description of one synthetic well.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub seed: u64,
    pub n_rows: usize,
    pub p: usize,
    pub true_family: Family,
    pub true_degree: u8,
    /// Coefficients of the fluid response model, in design-column order.
    pub true_beta: Vec<f64>,
    /// Optional gas response model; `None` leaves gas missing.
    pub gas_beta: Option<Vec<f64>>,
    pub temp_model: TempModel,
    /// Normal-family noise standard deviation; ignored for Poisson.
    pub response_noise_sigma: f64,
}

/// Ground-truth record written alongside a simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub well_id: String,
    pub seed: u64,
    pub family: String,
    pub degree: u8,
    pub centering_means: Option<Vec<f64>>,
    pub beta_fluid: Vec<f64>,
    pub beta_gas: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimulatedWell {
    pub series: WellSeries,
    pub truth: GroundTruth,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidSpec("simulation needs at least one row".into()));
        }
        if !(self.true_degree == 1 || self.true_degree == 2) {
            return Err(Error::InvalidSpec(format!(
                "true degree must be 1 or 2, got {}",
                self.true_degree
            )));
        }
        let expected = expanded_width(self.p, self.true_degree);
        if self.true_beta.len() != expected {
            return Err(Error::InvalidSpec(format!(
                "{} coefficients for a degree-{} model over {} predictors (want {expected})",
                self.true_beta.len(),
                self.true_degree,
                self.p
            )));
        }
        if let Some(gas) = &self.gas_beta {
            if gas.len() != expected {
                return Err(Error::InvalidSpec(format!(
                    "{} gas coefficients, want {expected}",
                    gas.len()
                )));
            }
        }
        if !(self.response_noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec(
                "response noise sigma must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Design width for `p` predictors at the given degree.
pub fn expanded_width(p: usize, degree: u8) -> usize {
    match degree {
        1 => 1 + p,
        _ => 1 + 2 * p + p * (p - 1) / 2,
    }
}

/// Deterministic temperature block for a seed: ramps plus noise, clipped
/// to [0, 700]. Per-thermocouple base and ramp jitter draw first, then
/// the noise row by row.
pub fn generate_temperatures(seed: u64, n_rows: usize, p: usize, model: &TempModel) -> Array2<f64> {
    let mut rng = SplitMix64::new(SplitMix64::derive(seed, TEMP_STREAM));
    let mut bases = Vec::with_capacity(p);
    let mut ramps = Vec::with_capacity(p);
    for _ in 0..p {
        bases.push(model.base * (0.75 + 0.5 * rng.next_f64()));
        ramps.push(model.ramp * (0.5 + rng.next_f64()));
    }
    let mut temps = Array2::<f64>::zeros((n_rows, p));
    for i in 0..n_rows {
        for j in 0..p {
            let t = bases[j] + ramps[j] * i as f64 + model.noise_std * rng.next_normal();
            temps[[i, j]] = t.clamp(TEMP_MIN, TEMP_MAX);
        }
    }
    temps
}

/// Default thermocouple label set for generated data.
pub fn thermocouple_labels(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("THERMOCOUPLE {i}")).collect()
}

/// Generate one well: temperatures, then one response per configured
/// coefficient vector, each from its own derived stream.
pub fn simulate_well(spec: &SimSpec, well_id: &str) -> Result<SimulatedWell> {
    spec.validate()?;
    let temps = generate_temperatures(spec.seed, spec.n_rows, spec.p, &spec.temp_model);
    let labels = thermocouple_labels(spec.p);

    let (feature_spec, means) = if spec.true_degree == 1 {
        (FeatureSpec::degree1(labels.clone())?, None)
    } else {
        let means = centering_means(temps.view())?;
        (
            FeatureSpec::degree2(labels.clone(), means.clone())?,
            Some(means),
        )
    };
    let design = feature_spec.expand(temps.view())?;

    let sample = |beta: &[f64], stream: u64| -> Result<Vec<Option<f64>>> {
        let mut rng = SplitMix64::new(SplitMix64::derive(spec.seed, stream));
        let mut out = Vec::with_capacity(spec.n_rows);
        for i in 0..spec.n_rows {
            let mut eta = 0.0;
            for (c, b) in beta.iter().enumerate() {
                eta += design.values[[i, c]] * b;
            }
            let y = match spec.true_family {
                Family::NormalIdentity => eta + spec.response_noise_sigma * rng.next_normal(),
                Family::PoissonLog => {
                    let rate = eta.exp();
                    if !(rate <= RATE_CAP) {
                        return Err(Error::SimulationOverflow { row: i });
                    }
                    rng.next_poisson(rate)
                }
            };
            out.push(Some(y));
        }
        Ok(out)
    };

    let fluid_prod = sample(&spec.true_beta, FLUID_STREAM)?;
    let gas_prod = match &spec.gas_beta {
        Some(beta) => sample(beta, GAS_STREAM)?,
        None => vec![None; spec.n_rows],
    };

    let series = WellSeries {
        well_id: well_id.to_string(),
        day: (0..spec.n_rows as i64).collect(),
        temps,
        temp_labels: labels,
        fluid_prod,
        gas_prod,
    };
    let truth = GroundTruth {
        well_id: well_id.to_string(),
        seed: spec.seed,
        family: spec.true_family.tag().to_string(),
        degree: spec.true_degree,
        centering_means: means,
        beta_fluid: spec.true_beta.clone(),
        beta_gas: spec.gas_beta.clone(),
    };
    Ok(SimulatedWell { series, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn basic_spec() -> SimSpec {
        SimSpec {
            seed: 42,
            n_rows: 50,
            p: 2,
            true_family: Family::NormalIdentity,
            true_degree: 1,
            true_beta: vec![20.0, 0.05, -0.02],
            gas_beta: None,
            temp_model: TempModel::default(),
            response_noise_sigma: 0.0,
        }
    }

    #[test]
    fn noiseless_normal_equals_linear_predictor() {
        let spec = basic_spec();
        let well = simulate_well(&spec, "W1").unwrap();
        for i in 0..spec.n_rows {
            let eta = 20.0 + 0.05 * well.series.temps[[i, 0]] - 0.02 * well.series.temps[[i, 1]];
            assert_relative_eq!(well.series.fluid_prod[i].unwrap(), eta, epsilon = 1e-12);
        }
        assert!(well.series.gas_prod.iter().all(|v| v.is_none()));
    }

    #[test]
    fn same_seed_reproduces_identically() {
        let spec = SimSpec {
            response_noise_sigma: 3.0,
            gas_beta: Some(vec![30.0, 0.01, 0.02]),
            ..basic_spec()
        };
        let a = simulate_well(&spec, "W1").unwrap().series;
        let b = simulate_well(&spec, "W1").unwrap().series;
        assert_eq!(a.day, b.day);
        for (x, y) in a.temps.iter().zip(b.temps.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.fluid_prod.iter().zip(&b.fluid_prod) {
            assert_eq!(x.unwrap().to_bits(), y.unwrap().to_bits());
        }
        for (x, y) in a.gas_prod.iter().zip(&b.gas_prod) {
            assert_eq!(x.unwrap().to_bits(), y.unwrap().to_bits());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = simulate_well(&basic_spec(), "W1").unwrap().series;
        let b = simulate_well(&SimSpec { seed: 43, ..basic_spec() }, "W1")
            .unwrap()
            .series;
        assert!(a
            .temps
            .iter()
            .zip(b.temps.iter())
            .any(|(x, y)| x.to_bits() != y.to_bits()));
    }

    #[test]
    fn temperatures_stay_in_physical_range() {
        let spec = SimSpec {
            n_rows: 3000,
            temp_model: TempModel {
                base: 650.0,
                ramp: 0.5,
                noise_std: 60.0,
            },
            ..basic_spec()
        };
        let well = simulate_well(&spec, "W1").unwrap();
        for t in well.series.temps.iter() {
            assert!((TEMP_MIN..=TEMP_MAX).contains(t));
        }
    }

    #[test]
    fn poisson_constant_rate_sample_mean() {
        // Constant η = ln 10 over n = 10⁴ rows: the sample mean sits
        // within 3·√(λ/n) of λ.
        let p = 1;
        let spec = SimSpec {
            seed: 7,
            n_rows: 10_000,
            p,
            true_family: Family::PoissonLog,
            true_degree: 1,
            true_beta: vec![10.0_f64.ln(), 0.0],
            gas_beta: None,
            temp_model: TempModel::default(),
            response_noise_sigma: 0.0,
        };
        let well = simulate_well(&spec, "W1").unwrap();
        let mean: f64 = well
            .series
            .fluid_prod
            .iter()
            .map(|v| v.unwrap())
            .sum::<f64>()
            / spec.n_rows as f64;
        let tol = 3.0 * (10.0 / spec.n_rows as f64).sqrt();
        assert!((mean - 10.0).abs() < tol, "mean {mean}, tolerance {tol}");
    }

    #[test]
    fn rate_overflow_is_a_spec_error() {
        let spec = SimSpec {
            true_family: Family::PoissonLog,
            true_beta: vec![50.0, 0.0, 0.0],
            ..basic_spec()
        };
        match simulate_well(&spec, "W1") {
            Err(Error::SimulationOverflow { .. }) => {}
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn beta_width_is_validated() {
        let spec = SimSpec {
            true_beta: vec![1.0, 2.0],
            ..basic_spec()
        };
        assert!(matches!(
            simulate_well(&spec, "W1"),
            Err(Error::InvalidSpec(_))
        ));
        let spec = SimSpec {
            true_degree: 2,
            true_beta: vec![0.0; 6],
            ..basic_spec()
        };
        assert!(simulate_well(&spec, "W1").is_ok());
    }

    #[test]
    fn emits_loadable_dataset() {
        use crate::dataset::{load_wells, write_wells, LoadSchema};
        let spec = SimSpec {
            gas_beta: Some(vec![5.0, 0.01, 0.01]),
            response_noise_sigma: 1.0,
            ..basic_spec()
        };
        let well = simulate_well(&spec, "SIM01").unwrap();
        let mut buf = Vec::new();
        write_wells(&mut buf, &[well.series.clone()]).unwrap();
        let schema = LoadSchema {
            well: "well".into(),
            day: "day".into(),
            fluid: Some("fluid_prod".into()),
            gas: Some("gas_prod".into()),
            temps: thermocouple_labels(2),
        };
        let reloaded = load_wells(buf.as_slice(), &schema).unwrap();
        assert_eq!(reloaded.len(), 1);
        assert_eq!(reloaded[0].n_rows(), well.series.n_rows());
        for i in 0..well.series.n_rows() {
            assert_eq!(
                reloaded[0].fluid_prod[i].unwrap().to_bits(),
                well.series.fluid_prod[i].unwrap().to_bits()
            );
        }
    }
}
