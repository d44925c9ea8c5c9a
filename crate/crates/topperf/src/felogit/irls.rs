//! Guarded Newton iteration on the Bernoulli log-likelihood with logit link.
//! For the canonical link this is exactly iteratively reweighted least
//! squares, and the observed information equals the expected information.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

const MU_CLAMP: f64 = 1e-12;
const MAX_HALVINGS: u32 = 12;
/// Consecutive flat-likelihood iterations accepted as converged when the
/// score cannot reach the gradient tolerance (float-noise floor on huge
/// designs). The gradient criterion is always checked first.
const FLAT_LIMIT: usize = 5;

pub(crate) struct NewtonOptions {
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub loglik_tol: f64,
    pub beta_cap: f64,
}

#[derive(Debug)]
pub(crate) struct NewtonOutcome {
    pub beta: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub score_max: f64,
}

#[inline]
fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^eta), overflow-safe.
#[inline]
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

pub(crate) fn bernoulli_loglik(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &ei)| yi * ei - softplus(ei))
        .sum()
}

fn mean_vector(x: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
    (x * beta).map(sigmoid)
}

/// X^T W X with W = diag(mu (1 - mu)), mu clamped away from {0, 1}.
fn weighted_gram(x: &DMatrix<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let mut xtw = x.transpose();
    for (i, &m) in mu.iter().enumerate() {
        let m = m.clamp(MU_CLAMP, 1.0 - MU_CLAMP);
        let w = m * (1.0 - m);
        xtw.column_mut(i).scale_mut(w);
    }
    let mut gram = DMatrix::zeros(p, p);
    xtw.mul_to(x, &mut gram);
    gram
}

/// Name the columns that are linear combinations of earlier ones, via an
/// LDL sweep of the Gram matrix with a relative pivot tolerance.
pub(crate) fn dependent_columns(gram: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let p = gram.nrows();
    let scale = (0..p).map(|j| gram[(j, j)]).fold(0.0f64, f64::max).max(1.0);
    let tol = scale * 1e-10;
    let mut l = DMatrix::<f64>::zeros(p, p);
    let mut d = vec![0.0f64; p];
    let mut skip = vec![false; p];
    let mut flagged = Vec::new();
    for j in 0..p {
        let mut dj = gram[(j, j)];
        for k in 0..j {
            if !skip[k] {
                dj -= l[(j, k)] * l[(j, k)] * d[k];
            }
        }
        if dj.abs() < tol {
            skip[j] = true;
            flagged.push(names[j].clone());
            continue;
        }
        d[j] = dj;
        for i in (j + 1)..p {
            let mut v = gram[(i, j)];
            for k in 0..j {
                if !skip[k] {
                    v -= l[(i, k)] * l[(j, k)] * d[k];
                }
            }
            l[(i, j)] = v / dj;
        }
    }
    if flagged.is_empty() {
        // Cholesky refused but no pivot fell under the tolerance; report the
        // weakest pivot so the error still names a column.
        let weakest = (0..p)
            .min_by(|&a, &b| d[a].abs().partial_cmp(&d[b].abs()).unwrap())
            .unwrap_or(0);
        flagged.push(names[weakest].clone());
    }
    flagged
}

fn rank_error(gram: &DMatrix<f64>, names: &[String]) -> Error {
    Error::RankDeficient {
        columns: dependent_columns(gram, names),
    }
}

pub(crate) fn fit_newton(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    column_names: &[String],
    options: &NewtonOptions,
) -> Result<NewtonOutcome> {
    let p = x.ncols();
    let mut beta = DVector::<f64>::zeros(p);
    let mut loglik = bernoulli_loglik(y, &(x * &beta));
    let mut trace = vec![loglik];
    let mut flat_streak = 0usize;
    let mut score_max = f64::INFINITY;

    for iteration in 1..=options.max_iterations {
        let mu = mean_vector(x, &beta);
        let score = x.transpose() * (y - &mu);
        score_max = score.amax();

        if score_max < options.gradient_tol || flat_streak >= FLAT_LIMIT {
            return finalize(x, beta, loglik, iteration - 1, score_max, column_names);
        }

        let gram = weighted_gram(x, &mu);
        let Some(chol) = Cholesky::new(gram.clone()) else {
            return Err(rank_error(&gram, column_names));
        };
        let delta = chol.solve(&score);

        // Guarded step: halve until the likelihood stops decreasing. The
        // acceptance slack scales with |loglik| so float noise on a full
        // Newton step near the optimum is not mistaken for an overshoot.
        let slack = 1e-11 * (loglik.abs() + 1.0);
        let mut step = 1.0f64;
        let mut candidate;
        let mut candidate_ll;
        let mut halvings = 0;
        loop {
            candidate = &beta + &delta * step;
            candidate_ll = bernoulli_loglik(y, &(x * &candidate));
            if candidate_ll >= loglik - slack || halvings >= MAX_HALVINGS {
                break;
            }
            step *= 0.5;
            halvings += 1;
        }

        if (candidate_ll - loglik).abs() < options.loglik_tol * (loglik.abs() + 1.0) {
            flat_streak += 1;
        } else {
            flat_streak = 0;
        }

        beta = candidate;
        loglik = candidate_ll;
        trace.push(loglik);

        let runaway = beta
            .iter()
            .enumerate()
            .filter(|(_, b)| b.abs() > options.beta_cap)
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(j, _)| j);
        if let Some(j) = runaway {
            return Err(Error::Separation {
                column: column_names[j].clone(),
                cap: options.beta_cap,
            });
        }
    }

    // one last gradient check at the final iterate
    let mu = mean_vector(x, &beta);
    let score = x.transpose() * (y - &mu);
    let final_score_max = score.amax();
    if final_score_max < options.gradient_tol {
        return finalize(
            x,
            beta,
            loglik,
            options.max_iterations,
            final_score_max,
            column_names,
        );
    }

    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        score_max,
        trace,
    })
}

fn finalize(
    x: &DMatrix<f64>,
    beta: DVector<f64>,
    loglik: f64,
    iterations: usize,
    score_max: f64,
    column_names: &[String],
) -> Result<NewtonOutcome> {
    let mu = mean_vector(x, &beta);
    let gram = weighted_gram(x, &mu);
    let Some(chol) = Cholesky::new(gram.clone()) else {
        return Err(rank_error(&gram, column_names));
    };
    let covariance = chol.inverse();
    Ok(NewtonOutcome {
        beta,
        covariance,
        loglik,
        iterations,
        score_max,
    })
}
