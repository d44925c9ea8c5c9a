//! Model diagnostics: inverse-correlation-matrix collinearity check and
//! confidence-interval overlap tables across fits.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::felogit::irls::dependent_columns;
use crate::felogit::GlmFit;
use crate::metrics::pearson;

/// Main diagonal of the inverted Pearson correlation matrix of the given
/// columns. A value of 1 means the column carries no multivariate
/// correlation with the others; for two columns the diagonal is exactly
/// 1 / (1 - r^2).
pub fn collinearity_diagnostic(columns: &[(String, Vec<f64>)]) -> Result<Vec<(String, f64)>> {
    if columns.len() < 2 {
        return Err(Error::Validation(
            "collinearity diagnostic needs at least 2 covariates".into(),
        ));
    }
    let n = columns[0].1.len();
    for (name, values) in columns {
        if values.len() != n {
            return Err(Error::Validation(format!(
                "column '{name}' has {} values, expected {n}",
                values.len()
            )));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if values.iter().all(|v| (v - mean).abs() < 1e-14 * (1.0 + mean.abs())) {
            return Err(Error::ZeroVariance(name.clone()));
        }
    }

    let p = columns.len();
    let mut corr = DMatrix::<f64>::identity(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let r = pearson(
                columns[i].1.iter().copied(),
                columns[j].1.iter().copied(),
            )
            .ok_or_else(|| Error::ZeroVariance(columns[j].0.clone()))?;
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
    }

    let names: Vec<String> = columns.iter().map(|(n, _)| n.clone()).collect();
    let Some(chol) = Cholesky::new(corr.clone()) else {
        return Err(Error::SingularCorrelation {
            columns: dependent_columns(&corr, &names),
        });
    };
    let inverse = chol.inverse();
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(i, name)| (name, inverse[(i, i)]))
        .collect())
}

/// One row of the CI-overlap table: for a covariate in one fit, the labels
/// of the other fits whose 95% interval intersects its own.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRow {
    pub covariate: String,
    pub fit: String,
    pub overlaps: Vec<String>,
}

/// Pairwise closed-interval intersection of odds-ratio confidence intervals
/// across fits sharing a covariate list. Touching endpoints count as
/// overlapping.
pub fn ci_overlap_report(fits: &[(String, &GlmFit)]) -> Result<Vec<OverlapRow>> {
    if fits.len() < 2 {
        return Err(Error::Validation(
            "CI overlap table needs at least 2 fits".into(),
        ));
    }
    let names: Vec<&str> = fits[0].1.coefficients.iter().map(|c| c.name.as_str()).collect();
    for (label, fit) in fits {
        let other: Vec<&str> = fit.coefficients.iter().map(|c| c.name.as_str()).collect();
        if other != names {
            return Err(Error::Validation(format!(
                "fit '{label}' has a different covariate list"
            )));
        }
    }

    let mut rows = Vec::new();
    for (ci, covariate) in names.iter().enumerate() {
        for (i, (label, fit)) in fits.iter().enumerate() {
            let a = &fit.coefficients[ci];
            let overlaps: Vec<String> = fits
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .filter(|(_, (_, other))| {
                    let b = &other.coefficients[ci];
                    a.ci_low <= b.ci_high && b.ci_low <= a.ci_high
                })
                .map(|(_, (other_label, _))| other_label.clone())
                .collect();
            rows.push(OverlapRow {
                covariate: covariate.to_string(),
                fit: label.clone(),
                overlaps,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn orthogonal_columns_have_unit_diagonal() {
        // exactly uncorrelated by construction
        let x1 = vec![1.0, -1.0, 1.0, -1.0];
        let x2 = vec![1.0, 1.0, -1.0, -1.0];
        let diag =
            collinearity_diagnostic(&[("a".into(), x1), ("b".into(), x2)]).unwrap();
        assert_abs_diff_eq!(diag[0].1, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(diag[1].1, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn identical_columns_are_singular() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0];
        let err = collinearity_diagnostic(&[("a".into(), x1.clone()), ("b".into(), x1)])
            .unwrap_err();
        match err {
            Error::SingularCorrelation { columns } => {
                assert_eq!(columns, vec!["b".to_string()])
            }
            other => panic!("expected singular correlation, got {other:?}"),
        }
    }

    #[test]
    fn exact_r_gives_closed_form_diagonal() {
        // Construct x2 with sample correlation exactly 0.6 via Gram-Schmidt.
        let n = 64;
        let x1: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let z: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 17) as f64).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let m1 = mean(&x1);
        let mz = mean(&z);
        let c1: Vec<f64> = x1.iter().map(|v| v - m1).collect();
        let cz: Vec<f64> = z.iter().map(|v| v - mz).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let proj = dot(&cz, &c1) / dot(&c1, &c1);
        let orth: Vec<f64> = cz.iter().zip(&c1).map(|(z, x)| z - proj * x).collect();
        let n1 = dot(&c1, &c1).sqrt();
        let no = dot(&orth, &orth).sqrt();
        let r = 0.6f64;
        let x2: Vec<f64> = c1
            .iter()
            .zip(&orth)
            .map(|(x, o)| r * x / n1 + (1.0 - r * r).sqrt() * o / no)
            .collect();
        let diag =
            collinearity_diagnostic(&[("a".into(), x1), ("b".into(), x2)]).unwrap();
        let expected = 1.0 / (1.0 - 0.36);
        assert_abs_diff_eq!(diag[0].1, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(diag[1].1, expected, epsilon = 1e-9);
    }

    #[test]
    fn zero_variance_column_is_rejected() {
        let x1 = vec![5.0, 5.0, 5.0];
        let x2 = vec![1.0, 2.0, 3.0];
        let err = collinearity_diagnostic(&[("a".into(), x1), ("b".into(), x2)]).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(name) if name == "a"));
    }
}
