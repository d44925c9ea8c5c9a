//! Binary-response GLM (logit link) with period and discipline fixed
//! effects, Wald inference, McFadden pseudo-R2, and diagnostics.
//!
//! Fixed effects enter as explicit dummies: with 5 periods and at most 15
//! disciplines the design stays small, so exact dense maximum likelihood is
//! cheap and no concentrated-likelihood machinery is needed.

pub mod design;
pub mod diagnostics;
mod irls;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

pub use design::{build_dataset, build_dataset_with_response, Covariate, DisciplineCoding, GlmDataset, GlmSpec};
pub use diagnostics::{ci_overlap_report, collinearity_diagnostic, OverlapRow};

use crate::error::Result;
use irls::{fit_newton, NewtonOptions};

/// Critical value for the 95% Wald interval.
pub const WALD_Z: f64 = 1.96;

#[derive(Debug, Clone)]
pub struct GlmCoefficient {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    /// Odds ratio exp(beta).
    pub exp_b: f64,
    /// exp(beta - 1.96 se)
    pub ci_low: f64,
    /// exp(beta + 1.96 se)
    pub ci_high: f64,
    pub p_value: f64,
}

/// Intercept shift for one fixed-effect level, under the documented
/// normalization (all period dummies, sum-to-zero disciplines).
#[derive(Debug, Clone)]
pub struct FixedEffectEstimate {
    pub level: String,
    pub shift: f64,
}

#[derive(Debug, Clone)]
pub struct GlmFit {
    pub coefficients: Vec<GlmCoefficient>,
    pub period_effects: Vec<FixedEffectEstimate>,
    pub discipline_effects: Vec<FixedEffectEstimate>,
    pub loglik_full: f64,
    pub loglik_null: f64,
    pub mcfadden_r2: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Max |score component| at the accepted estimate.
    pub score_max: f64,
    /// Full coefficient vector in design-column order (for reference checks).
    pub full_beta: Vec<f64>,
    pub column_names: Vec<String>,
}

impl GlmFit {
    pub fn mcfadden(&self) -> f64 {
        self.mcfadden_r2
    }

    pub fn coefficient(&self, name: &str) -> Option<&GlmCoefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub fn mcfadden(loglik_full: f64, loglik_null: f64) -> f64 {
    1.0 - loglik_full / loglik_null
}

fn two_sided_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z.abs()))
}

/// Maximum-likelihood fit of the logit model described by the dataset.
pub fn fit(dataset: &GlmDataset, spec: &GlmSpec) -> Result<GlmFit> {
    let options = NewtonOptions {
        max_iterations: spec.max_iterations,
        gradient_tol: spec.gradient_tol,
        loglik_tol: spec.loglik_tol,
        beta_cap: spec.beta_cap,
    };
    let outcome = fit_newton(&dataset.x, &dataset.y, &dataset.column_names, &options)?;

    // Null model: intercept only, same rows.
    let n = dataset.n_obs();
    let ones = DMatrix::from_element(n, 1, 1.0);
    let null_names = vec!["intercept".to_string()];
    let null = fit_newton(&ones, &dataset.y, &null_names, &options)?;

    let beta = &outcome.beta;
    let covariance: &DMatrix<f64> = &outcome.covariance;

    let mut coefficients = Vec::with_capacity(dataset.covariates.len());
    for (offset, covariate) in dataset.covariates.iter().enumerate() {
        let j = dataset.covariate_start + offset;
        let b = beta[j];
        let se = covariance[(j, j)].sqrt();
        coefficients.push(GlmCoefficient {
            name: covariate.name().to_string(),
            beta: b,
            se,
            exp_b: b.exp(),
            ci_low: (b - WALD_Z * se).exp(),
            ci_high: (b + WALD_Z * se).exp(),
            p_value: two_sided_p(b / se),
        });
    }

    let mut period_effects = Vec::new();
    let mut col = 0usize;
    if dataset.has_intercept {
        period_effects.push(FixedEffectEstimate {
            level: "intercept".to_string(),
            shift: beta[0],
        });
        col += 1;
    }
    for level in &dataset.period_levels {
        period_effects.push(FixedEffectEstimate {
            level: level.clone(),
            shift: beta[col],
        });
        col += 1;
    }

    let discipline_effects = discipline_shifts(dataset, beta);

    let loglik_full = outcome.loglik;
    let loglik_null = null.loglik;

    Ok(GlmFit {
        coefficients,
        period_effects,
        discipline_effects,
        loglik_full,
        loglik_null,
        mcfadden_r2: mcfadden(loglik_full, loglik_null),
        n_obs: n,
        converged: true,
        iterations: outcome.iterations,
        score_max: outcome.score_max,
        full_beta: beta.iter().copied().collect(),
        column_names: dataset.column_names.clone(),
    })
}

fn discipline_shifts(dataset: &GlmDataset, beta: &DVector<f64>) -> Vec<FixedEffectEstimate> {
    let d = dataset.discipline_levels.len();
    if d == 0 {
        return Vec::new();
    }
    let n_cols = if d >= 2 { d - 1 } else { 0 };
    // columns between the intercept/period block and the covariates
    let start = usize::from(dataset.has_intercept) + dataset.period_levels.len();
    debug_assert_eq!(start + n_cols, dataset.covariate_start);
    let disc_cols = &beta.as_slice()[start..start + n_cols];
    match dataset.coding {
        DisciplineCoding::SumToZero => {
            let mut shifts: Vec<f64> = disc_cols.to_vec();
            let tail = -shifts.iter().sum::<f64>();
            shifts.push(tail);
            dataset
                .discipline_levels
                .iter()
                .zip(shifts)
                .map(|(level, shift)| FixedEffectEstimate {
                    level: level.clone(),
                    shift,
                })
                .collect()
        }
        DisciplineCoding::ReferenceCell => {
            let mut shifts = vec![0.0];
            shifts.extend_from_slice(disc_cols);
            dataset
                .discipline_levels
                .iter()
                .zip(shifts)
                .map(|(level, shift)| FixedEffectEstimate {
                    level: level.clone(),
                    shift,
                })
                .collect()
        }
    }
}
