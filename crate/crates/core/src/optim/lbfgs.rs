//! Limited-memory BFGS with backtracking Armijo line search.
//!
//! Built for the swelling solver: objective evaluations can fail (element
//! inversion, J ≤ 1), which the line search treats as an infinite energy
//! and backtracks out of. Accepted steps never increase the energy.

use std::collections::VecDeque;

/// Objective with combined energy/gradient evaluation.
pub trait Objective {
    /// Energy and gradient at `x`; `None` when the state is inadmissible.
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> Option<f64>;

    /// Norm used for the convergence test (default: max |component|).
    fn grad_norm(&self, grad: &[f64]) -> f64 {
        grad.iter().fold(0.0f64, |m, &g| m.max(g.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbfgsStatus {
    Converged,
    MaxIterations,
    LineSearchStalled,
}

#[derive(Debug, Clone)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Convergence threshold on `Objective::grad_norm`.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
    /// Cap on the first step's max component (sets the initial H0 scale).
    pub first_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 20,
            max_iter: 20_000,
            grad_tol: 1e-10,
            armijo_c1: 1e-4,
            shrink: 0.5,
            first_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsReport {
    pub status: LbfgsStatus,
    pub iterations: usize,
    pub evaluations: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize in place: `x` holds the starting point and receives the result.
pub fn minimize<O: Objective>(obj: &mut O, x: &mut [f64], opts: &LbfgsOptions) -> LbfgsReport {
    let n = x.len();
    let mut grad = vec![0.0; n];
    let mut evals = 0usize;

    let mut energy = match obj.eval(x, &mut grad) {
        Some(e) => {
            evals += 1;
            e
        }
        None => {
            return LbfgsReport {
                status: LbfgsStatus::LineSearchStalled,
                iterations: 0,
                evaluations: 1,
                energy: f64::INFINITY,
                grad_norm: f64::INFINITY,
            }
        }
    };

    // (s, y, 1/(s·y)) pairs, newest at the back.
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut dir = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];
    let mut gnorm = obj.grad_norm(&grad);
    let mut iter = 0usize;

    while iter < opts.max_iter {
        if gnorm <= opts.grad_tol {
            return LbfgsReport {
                status: LbfgsStatus::Converged,
                iterations: iter,
                evaluations: evals,
                energy,
                grad_norm: gnorm,
            };
        }
        iter += 1;

        // Two-loop recursion.
        dir.copy_from_slice(&grad);
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho_inv) in pairs.iter().rev() {
            let alpha = dot(s, &dir) / rho_inv;
            for i in 0..n {
                dir[i] -= alpha * y[i];
            }
            alphas.push(alpha);
        }
        let gamma = match pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y).max(1e-300),
            None => {
                let gmax = grad.iter().fold(0.0f64, |m, &g| m.max(g.abs()));
                opts.first_step / gmax.max(1e-300)
            }
        };
        for d in dir.iter_mut() {
            *d *= gamma;
        }
        for ((s, y, rho_inv), alpha) in pairs.iter().zip(alphas.iter().rev()) {
            let beta = dot(y, &dir) / rho_inv;
            for i in 0..n {
                dir[i] += (alpha - beta) * s[i];
            }
        }
        for d in dir.iter_mut() {
            *d = -*d;
        }

        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            // Not a descent direction: drop the memory, fall back to scaled
            // steepest descent.
            pairs.clear();
            let gmax = gnorm.max(1e-300);
            for i in 0..n {
                dir[i] = -grad[i] * (opts.first_step / gmax);
            }
            slope = dot(&grad, &dir);
        }

        // Backtracking Armijo search.
        let mut step = 1.0f64;
        let mut accepted = false;
        let mut energy_new = energy;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * dir[i];
            }
            if let Some(e) = obj.eval(&x_new, &mut grad_new) {
                evals += 1;
                if e <= energy + opts.armijo_c1 * step * slope {
                    energy_new = e;
                    accepted = true;
                    break;
                }
            } else {
                evals += 1;
            }
            step *= opts.shrink;
            if step < 1e-18 {
                break;
            }
        }
        if !accepted {
            return LbfgsReport {
                status: LbfgsStatus::LineSearchStalled,
                iterations: iter,
                evaluations: evals,
                energy,
                grad_norm: gnorm,
            };
        }

        let mut s_vec = vec![0.0; n];
        let mut y_vec = vec![0.0; n];
        for i in 0..n {
            s_vec[i] = x_new[i] - x[i];
            y_vec[i] = grad_new[i] - grad[i];
        }
        let sy = dot(&s_vec, &y_vec);
        if sy > 1e-300 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s_vec, y_vec, sy));
        }
        x.copy_from_slice(&x_new);
        grad.copy_from_slice(&grad_new);
        energy = energy_new;
        gnorm = obj.grad_norm(&grad);
    }

    LbfgsReport {
        status: LbfgsStatus::MaxIterations,
        iterations: iter,
        evaluations: evals,
        energy,
        grad_norm: gnorm,
    }
}
