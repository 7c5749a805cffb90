//! Small dense Levenberg–Marquardt for the parameter fits in this crate
//! (2–8 unknowns, up to a few hundred residuals).
//!
//! The Jacobian is formed by forward differences on the residual closure;
//! box bounds are enforced by projecting trial parameters. Residual
//! evaluations may fail (e.g. the material model leaves its physical
//! regime); a failed trial is treated like an increase in cost and the
//! damping grows.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative decrease of the cost falls below this.
    pub cost_tol: f64,
    /// Stop when the step norm (relative to parameter norm) falls below this.
    pub step_tol: f64,
    /// Initial damping factor.
    pub lambda0: f64,
    /// Relative perturbation for the forward-difference Jacobian.
    pub fd_rel: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 200,
            cost_tol: 1e-14,
            step_tol: 1e-13,
            lambda0: 1e-3,
            fd_rel: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: DVector<f64>,
    /// Final cost: 0.5 * sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize 0.5·‖r(p)‖² over p, with optional box bounds.
///
/// `residuals` returns None when the parameters are outside the model's
/// admissible region.
pub fn levenberg_marquardt<F>(
    mut residuals: F,
    p0: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
    opts: &LmOptions,
) -> LmResult
where
    F: FnMut(&DVector<f64>) -> Option<DVector<f64>>,
{
    let n = p0.len();
    assert_eq!(lower.len(), n);
    assert_eq!(upper.len(), n);
    let project = |p: &mut DVector<f64>| {
        for i in 0..n {
            p[i] = p[i].clamp(lower[i], upper[i]);
        }
    };

    let mut p = p0.clone();
    project(&mut p);
    let mut r = match residuals(&p) {
        Some(r) => r,
        None => {
            return LmResult {
                params: p,
                cost: f64::INFINITY,
                iterations: 0,
                converged: false,
            }
        }
    };
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = opts.lambda0;
    let mut converged = false;
    let mut iter = 0;

    while iter < opts.max_iter {
        iter += 1;
        // Forward-difference Jacobian at p.
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        let mut ok = true;
        for j in 0..n {
            let h = opts.fd_rel * p[j].abs().max(1e-4);
            let mut pj = p.clone();
            // Step inward if the bound is in the way.
            let h = if pj[j] + h > upper[j] { -h } else { h };
            pj[j] += h;
            match residuals(&pj) {
                Some(rj) => {
                    for i in 0..m {
                        jac[(i, j)] = (rj[i] - r[i]) / h;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
            continue;
        }

        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let grad_norm = jtr.amax();
        if grad_norm < 1e-16 {
            converged = true;
            break;
        }

        // Try steps with increasing damping until one decreases the cost.
        let mut accepted = false;
        for _ in 0..25 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let step = match a.lu().solve(&(-&jtr)) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut p_new = &p + &step;
            project(&mut p_new);
            let actual_step = &p_new - &p;
            if let Some(r_new) = residuals(&p_new) {
                let cost_new = 0.5 * r_new.norm_squared();
                if cost_new < cost {
                    let rel_decrease = (cost - cost_new) / cost.max(1e-300);
                    let step_small = actual_step.norm() <= opts.step_tol * (p.norm() + 1.0);
                    p = p_new;
                    r = r_new;
                    cost = cost_new;
                    lambda = (lambda * 0.3).max(1e-12);
                    accepted = true;
                    if rel_decrease < opts.cost_tol || step_small || cost < 1e-300 {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !accepted || converged {
            if !accepted {
                // No further progress possible at any damping.
                converged = cost.is_finite() && grad_norm < 1e-6 * (1.0 + cost);
            }
            break;
        }
    }

    LmResult {
        params: p,
        cost,
        iterations: iter,
        converged,
    }
}
