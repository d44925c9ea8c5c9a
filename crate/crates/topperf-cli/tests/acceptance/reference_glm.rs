//! Naive dense reference logit solver used as the oracle for the production
//! fitter. Deliberately simple: explicit dummy construction, Vec-of-Vec
//! matrices, Gauss-Jordan solves. Shares no code with the production path.

pub struct RefRow {
    pub y: f64,
    pub period: usize,
    pub discipline: String,
    pub covariates: Vec<f64>,
}

pub struct RefFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub score_max: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn loglik(y: &[f64], eta: &[f64]) -> f64 {
    y.iter()
        .zip(eta)
        .map(|(&yi, &ei)| {
            let softplus = if ei > 0.0 {
                ei + (-ei).exp().ln_1p()
            } else {
                ei.exp().ln_1p()
            };
            yi * ei - softplus
        })
        .sum()
}

/// Gauss-Jordan with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        b[col] /= d;
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some(b)
}

/// Fit the logit model with all period dummies (no intercept) and
/// sum-to-zero discipline dummies, by plain Newton iteration.
pub fn fit_reference(rows: &[RefRow], covariate_names: &[&str]) -> Result<RefFit, String> {
    let mut period_levels: Vec<usize> = rows.iter().map(|r| r.period).collect();
    period_levels.sort_unstable();
    period_levels.dedup();
    let mut discipline_levels: Vec<String> = rows.iter().map(|r| r.discipline.clone()).collect();
    discipline_levels.sort();
    discipline_levels.dedup();

    let n_periods = period_levels.len();
    let d = discipline_levels.len();
    let n_disc = if d >= 2 { d - 1 } else { 0 };
    let n_cov = covariate_names.len();
    let p = n_periods + n_disc + n_cov;

    let mut names: Vec<String> = Vec::with_capacity(p);
    for &pi in &period_levels {
        names.push(format!("period#{pi}"));
    }
    for level in &discipline_levels[..n_disc] {
        names.push(format!("discipline#{level}"));
    }
    for &c in covariate_names {
        names.push(c.to_string());
    }

    let n = rows.len();
    let mut x = vec![vec![0.0f64; p]; n];
    let mut y = vec![0.0f64; n];
    for (i, row) in rows.iter().enumerate() {
        y[i] = row.y;
        let pp = period_levels.binary_search(&row.period).unwrap();
        x[i][pp] = 1.0;
        if n_disc > 0 {
            let dp = discipline_levels.binary_search(&row.discipline).unwrap();
            if dp < n_disc {
                x[i][n_periods + dp] = 1.0;
            } else {
                for j in 0..n_disc {
                    x[i][n_periods + j] = -1.0;
                }
            }
        }
        for (j, &v) in row.covariates.iter().enumerate() {
            x[i][n_periods + n_disc + j] = v;
        }
    }

    let mut beta = vec![0.0f64; p];
    let eta_of = |beta: &[f64]| -> Vec<f64> {
        x.iter()
            .map(|xi| xi.iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut ll = loglik(&y, &eta_of(&beta));
    let mut score_max = f64::INFINITY;

    for _ in 0..200 {
        let eta = eta_of(&beta);
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let mut score = vec![0.0f64; p];
        for i in 0..n {
            let r = y[i] - mu[i];
            for j in 0..p {
                score[j] += x[i][j] * r;
            }
        }
        score_max = score.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if score_max < 1e-9 {
            return Ok(RefFit {
                names,
                beta,
                score_max,
            });
        }
        let mut hess = vec![vec![0.0f64; p]; p];
        for i in 0..n {
            let w = mu[i] * (1.0 - mu[i]);
            for j in 0..p {
                let xw = x[i][j] * w;
                if xw != 0.0 {
                    for k in j..p {
                        hess[j][k] += xw * x[i][k];
                    }
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                hess[j][k] = hess[k][j];
            }
        }
        let delta = solve(hess, score).ok_or("singular hessian")?;
        let slack = 1e-11 * (ll.abs() + 1.0);
        let mut step = 1.0;
        for _ in 0..40 {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + step * d)
                .collect();
            let cll = loglik(&y, &eta_of(&candidate));
            if cll >= ll - slack || step < 1e-8 {
                beta = candidate;
                ll = cll;
                break;
            }
            step *= 0.5;
        }
        if beta.iter().any(|b| b.abs() > 50.0) {
            return Err("reference hit separation".to_string());
        }
    }
    Err(format!("reference did not converge (score {score_max:.3e})"))
}
