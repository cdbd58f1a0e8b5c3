//! Small numerical toolbox: Nelder-Mead, damped Gauss-Newton (Levenberg-
//! Marquardt), minimum-norm least squares and non-negative least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex search.
///
/// Stops once both the spread of function values and the simplex diameter
/// (max-norm distance to the best vertex) fall below `tolerance`.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Minimum {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= tolerance && diameter <= tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let f_r = sanitize(f(&reflected));
        if f_r < values[0] {
            let expanded = along(2.0);
            let f_e = sanitize(f(&expanded));
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
        } else {
            let (contracted, f_c) = if f_r < values[n] {
                let c = along(0.5);
                let fc = sanitize(f(&c));
                (c, fc)
            } else {
                let c = along(-0.5);
                let fc = sanitize(f(&c));
                (c, fc)
            };
            if f_c < values[n].min(f_r) {
                simplex[n] = contracted;
                values[n] = f_c;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
                    }
                    values[i] = sanitize(f(&simplex[i]));
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty simplex");
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Levenberg-Marquardt for `min 0.5 |r(x)|^2` with an analytic Jacobian.
///
/// `residuals` fills `r` (length m) and `jac` (row-major m x n).
pub fn levenberg_marquardt(
    residuals: impl Fn(&[f64], &mut [f64], &mut [f64]),
    start: &[f64],
    m: usize,
    tolerance: f64,
    max_iterations: usize,
) -> Minimum {
    let n = start.len();
    let mut x = start.to_vec();
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    residuals(&x, &mut r, &mut jac);
    let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    if !cost.is_finite() {
        return Minimum { x, value: f64::INFINITY, iterations: 0, converged: false };
    }
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut r_trial = vec![0.0; m];
    let mut jac_trial = vec![0.0; m * n];

    while iterations < max_iterations {
        iterations += 1;
        let j = DMatrix::from_row_slice(m, n, &jac);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * DVector::from_column_slice(&r);
        if g.amax() <= tolerance * tolerance {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += mu * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            residuals(&trial, &mut r_trial, &mut jac_trial);
            let trial_cost = 0.5 * r_trial.iter().map(|v| v * v).sum::<f64>();
            if trial_cost.is_finite() && trial_cost <= cost {
                let improvement = cost - trial_cost;
                let step_norm = step.amax();
                let scale = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
                x = trial;
                std::mem::swap(&mut r, &mut r_trial);
                std::mem::swap(&mut jac, &mut jac_trial);
                cost = trial_cost;
                mu = (mu * 0.3).max(1e-15);
                accepted = true;
                if improvement <= tolerance * cost.max(tolerance) || step_norm <= tolerance * scale {
                    converged = true;
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // no descent possible at any damping: stationary to machine precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Minimum { x, value: cost, iterations, converged }
}

/// Result of a minimum-norm least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// Right singular vectors spanning the numerical null space.
    pub null_directions: Vec<Vec<f64>>,
    pub rank: usize,
}

/// Minimum-norm solution of `min |A x - b|` through the SVD. Singular values
/// below `rel_tol * sigma_max` are treated as zero.
pub fn min_norm_least_squares(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rel_tol: f64,
) -> Result<LeastSquares> {
    let (rows, cols) = a.shape();
    if rows != b.len() {
        return Err(Error::input("least squares dimension mismatch"));
    }
    if cols == 0 {
        return Ok(LeastSquares { solution: vec![], null_directions: vec![], rank: 0 });
    }
    // pad to at least as many rows as columns so the thin SVD exposes every
    // right singular vector
    let (a, b) = if rows < cols {
        let mut pa = DMatrix::zeros(cols, cols);
        pa.view_mut((0, 0), (rows, cols)).copy_from(a);
        let mut pb = DVector::zeros(cols);
        pb.rows_mut(0, rows).copy_from(b);
        (pa, pb)
    } else {
        (a.clone(), b.clone())
    };
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("least squares system contains non-finite entries"));
    }
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = if sigma_max > 0.0 { rel_tol * sigma_max } else { f64::MIN_POSITIVE };
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let u = svd.u.as_ref().expect("requested U");
    let mut x = DVector::zeros(cols);
    let mut null_directions = Vec::new();
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let v = v_t.row(k).transpose();
        if s > cutoff {
            rank += 1;
            let coef = u.column(k).dot(&b) / s;
            x += v * coef;
        } else {
            null_directions.push(v.iter().copied().collect());
        }
    }
    Ok(LeastSquares { solution: x.iter().copied().collect(), null_directions, rank })
}

/// Non-negative solution of the normal equations `G w = h` for a symmetric
/// positive semi-definite `G` (Lawson-Hanson active set on the quadratic
/// `0.5 w'Gw - h'w`).
pub fn nonnegative_normal_equations(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<Vec<f64>> {
    let n = h.len();
    let mut w = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let scale = g.amax().max(h.amax()).max(1e-300);
    let tol = 1e-12 * scale * n as f64;

    for _outer in 0..(3 * n + 10) {
        let grad = h - g * &w;
        let candidate = (0..n)
            .filter(|&i| !passive[i] && grad[i] > tol)
            .max_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        let Some(enter) = candidate else {
            return Ok(w.iter().copied().collect());
        };
        passive[enter] = true;
        for _inner in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let sub_g = DMatrix::from_fn(idx.len(), idx.len(), |r, c| g[(idx[r], idx[c])]);
            let sub_h = DVector::from_fn(idx.len(), |r, _| h[idx[r]]);
            let sol = min_norm_least_squares(&sub_g, &sub_h, 1e-13)?.solution;
            if sol.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    w[i] = sol[k];
                }
                break;
            }
            // step toward the unconstrained subproblem until a weight hits zero
            let mut alpha = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                if sol[k] <= 0.0 {
                    let denom = w[i] - sol[k];
                    if denom > 0.0 {
                        alpha = alpha.min(w[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                w[i] += alpha * (sol[k] - w[i]);
                if w[i] <= 1e-15 * scale {
                    w[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !idx.iter().any(|&i| passive[i]) {
                break;
            }
        }
    }
    Err(Error::numerical("non-negative least squares did not terminate"))
}
