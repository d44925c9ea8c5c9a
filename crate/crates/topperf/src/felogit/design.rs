//! Design-matrix construction for the fixed-effects logit.
//!
//! Identification: when period effects are on, every period dummy enters and
//! there is no global intercept (the period dummies absorb it). Discipline
//! dummies are sum-to-zero coded by default so the reported shifts straddle
//! zero; reference-cell coding is available and leaves covariate estimates
//! unchanged. Covariates enter unstandardized, in their natural units.

use nalgebra::{DMatrix, DVector};

use crate::classify::Assignments;
use crate::config::{GenderPolicy, GlmSection, Measure, Periods};
use crate::error::{Error, Result};
use crate::ingest::Gender;
use crate::productivity::UnitRecord;

/// Regression covariates, in the canonical reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    AcademicAge,
    AvgTeamSize,
    IntlCollaborationRate,
    CollaborationRate,
    GenderMale,
    ResearchIntensityRest,
    MedianJournalPercentile,
}

impl Covariate {
    pub const ALL: [Covariate; 7] = [
        Covariate::AcademicAge,
        Covariate::AvgTeamSize,
        Covariate::IntlCollaborationRate,
        Covariate::CollaborationRate,
        Covariate::GenderMale,
        Covariate::ResearchIntensityRest,
        Covariate::MedianJournalPercentile,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Covariate::AcademicAge => "academic_age",
            Covariate::AvgTeamSize => "avg_team_size",
            Covariate::IntlCollaborationRate => "intl_collaboration_rate",
            Covariate::CollaborationRate => "collaboration_rate",
            Covariate::GenderMale => "gender_male",
            Covariate::ResearchIntensityRest => "research_intensity_rest",
            Covariate::MedianJournalPercentile => "median_journal_percentile",
        }
    }

    pub fn value(&self, record: &UnitRecord) -> f64 {
        match self {
            Covariate::AcademicAge => record.unit.academic_age as f64,
            Covariate::AvgTeamSize => record.covariates.avg_team_size,
            Covariate::IntlCollaborationRate => record.covariates.intl_collaboration_rate,
            Covariate::CollaborationRate => record.covariates.collaboration_rate,
            Covariate::GenderMale => {
                if record.unit.gender == Gender::M {
                    1.0
                } else {
                    0.0
                }
            }
            Covariate::ResearchIntensityRest => {
                if record.unit.research_intensive {
                    0.0
                } else {
                    1.0
                }
            }
            Covariate::MedianJournalPercentile => record.covariates.median_journal_percentile,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisciplineCoding {
    /// Effects coding: shifts sum to zero across disciplines.
    SumToZero,
    /// Dummy coding against the first (lexicographic) discipline.
    ReferenceCell,
}

#[derive(Debug, Clone)]
pub struct GlmSpec {
    pub covariates: Vec<Covariate>,
    pub fe_period: bool,
    pub fe_discipline: bool,
    pub discipline_coding: DisciplineCoding,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub loglik_tol: f64,
    pub beta_cap: f64,
}

impl Default for GlmSpec {
    fn default() -> Self {
        GlmSpec {
            covariates: Covariate::ALL.to_vec(),
            fe_period: true,
            fe_discipline: true,
            discipline_coding: DisciplineCoding::SumToZero,
            max_iterations: 100,
            gradient_tol: 1e-8,
            loglik_tol: 1e-10,
            beta_cap: 30.0,
        }
    }
}

impl GlmSpec {
    pub fn from_config(glm: &GlmSection) -> Self {
        GlmSpec {
            max_iterations: glm.max_iterations,
            gradient_tol: glm.gradient_tol,
            loglik_tol: glm.loglik_tol,
            beta_cap: glm.beta_cap,
            ..GlmSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.covariates.iter().enumerate() {
            if self.covariates[i + 1..].contains(a) {
                return Err(Error::Config(format!(
                    "duplicate covariate '{}' in model spec",
                    a.name()
                )));
            }
        }
        Ok(())
    }
}

/// A fully materialized response vector and design matrix.
#[derive(Debug, Clone)]
pub struct GlmDataset {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub column_names: Vec<String>,
    pub period_levels: Vec<String>,
    pub discipline_levels: Vec<String>,
    pub coding: DisciplineCoding,
    pub has_intercept: bool,
    /// Index of the first covariate column.
    pub covariate_start: usize,
    pub covariates: Vec<Covariate>,
    /// Original record index per design row.
    pub row_indices: Vec<usize>,
}

impl GlmDataset {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }
}

/// Build the dataset with class membership as the response.
pub fn build_dataset(
    records: &[UnitRecord],
    assignments: &Assignments,
    measure: Measure,
    threshold_idx: usize,
    spec: &GlmSpec,
    periods: &Periods,
    gender_policy: GenderPolicy,
) -> Result<GlmDataset> {
    let per_unit = assignments.for_measure(measure);
    let response: Vec<bool> = per_unit
        .iter()
        .map(|a| a.memberships[threshold_idx])
        .collect();
    build_dataset_with_response(records, &response, spec, periods, gender_policy)
}

/// Build the dataset with an externally supplied response (one flag per
/// record). Used by generator-truth checks alongside the pipeline path.
pub fn build_dataset_with_response(
    records: &[UnitRecord],
    response: &[bool],
    spec: &GlmSpec,
    periods: &Periods,
    gender_policy: GenderPolicy,
) -> Result<GlmDataset> {
    spec.validate()?;
    if records.len() != response.len() {
        return Err(Error::Validation(
            "response length does not match unit count".into(),
        ));
    }

    let rows: Vec<usize> = (0..records.len())
        .filter(|&i| {
            gender_policy == GenderPolicy::Include || records[i].unit.gender != Gender::U
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::Validation("no usable rows for regression".into()));
    }

    let successes = rows.iter().filter(|&&i| response[i]).count();
    if successes == 0 || successes == rows.len() {
        return Err(Error::Validation(format!(
            "response needs both outcomes: {successes} successes in {} rows",
            rows.len()
        )));
    }

    let mut period_levels: Vec<usize> = rows.iter().map(|&i| records[i].unit.period_index).collect();
    period_levels.sort_unstable();
    period_levels.dedup();
    let mut discipline_levels: Vec<String> = rows
        .iter()
        .map(|&i| records[i].unit.discipline.clone())
        .collect();
    discipline_levels.sort();
    discipline_levels.dedup();

    let n_period_cols = if spec.fe_period { period_levels.len() } else { 0 };
    let has_intercept = !spec.fe_period;
    let n_disc = discipline_levels.len();
    let n_disc_cols = if spec.fe_discipline && n_disc >= 2 {
        n_disc - 1
    } else {
        0
    };
    let covariate_start = n_period_cols + usize::from(has_intercept) + n_disc_cols;
    let p = covariate_start + spec.covariates.len();

    let mut column_names: Vec<String> = Vec::with_capacity(p);
    if has_intercept {
        column_names.push("intercept".to_string());
    }
    if spec.fe_period {
        for &pi in &period_levels {
            column_names.push(format!("period:{}", periods.label(pi)));
        }
    }
    if n_disc_cols > 0 {
        match spec.discipline_coding {
            DisciplineCoding::SumToZero => {
                for d in &discipline_levels[..n_disc_cols] {
                    column_names.push(format!("discipline:{d}"));
                }
            }
            DisciplineCoding::ReferenceCell => {
                for d in &discipline_levels[1..] {
                    column_names.push(format!("discipline:{d}"));
                }
            }
        }
    }
    for c in &spec.covariates {
        column_names.push(c.name().to_string());
    }

    let n = rows.len();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for (r, &idx) in rows.iter().enumerate() {
        let record = &records[idx];
        y[r] = if response[idx] { 1.0 } else { 0.0 };
        let mut col = 0;
        if has_intercept {
            x[(r, col)] = 1.0;
            col += 1;
        }
        if spec.fe_period {
            let pos = period_levels
                .binary_search(&record.unit.period_index)
                .expect("level collected above");
            x[(r, col + pos)] = 1.0;
            col += n_period_cols;
        }
        if n_disc_cols > 0 {
            let pos = discipline_levels
                .binary_search(&record.unit.discipline)
                .expect("level collected above");
            match spec.discipline_coding {
                DisciplineCoding::SumToZero => {
                    if pos < n_disc_cols {
                        x[(r, col + pos)] = 1.0;
                    } else {
                        for j in 0..n_disc_cols {
                            x[(r, col + j)] = -1.0;
                        }
                    }
                }
                DisciplineCoding::ReferenceCell => {
                    if pos > 0 {
                        x[(r, col + pos - 1)] = 1.0;
                    }
                }
            }
            col += n_disc_cols;
        }
        for (j, c) in spec.covariates.iter().enumerate() {
            x[(r, col + j)] = c.value(record);
        }
    }

    // Levels are retained only when the corresponding effect block exists,
    // so downstream extraction can walk columns uniformly.
    let kept_period_levels = if spec.fe_period {
        period_levels.iter().map(|&i| periods.label(i)).collect()
    } else {
        Vec::new()
    };
    let kept_discipline_levels = if spec.fe_discipline {
        discipline_levels
    } else {
        Vec::new()
    };

    Ok(GlmDataset {
        y,
        x,
        column_names,
        period_levels: kept_period_levels,
        discipline_levels: kept_discipline_levels,
        coding: spec.discipline_coding,
        has_intercept,
        covariate_start,
        covariates: spec.covariates.clone(),
        row_indices: rows,
    })
}
