//! Damped least squares (Levenberg–Marquardt with Nielsen's damping update).

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop once `‖r‖` drops below this.
    pub residual_target: f64,
    /// Stop once a step changes `x` by less than this relative amount.
    pub step_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 400,
            residual_target: 1e-15,
            step_tol: 1e-16,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmResult {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Minimize `½‖r(x)‖²` given `f(x) = (r(x), J(x))`.
pub fn minimize<F>(f: F, x0: DVector<f64>, opts: &LmOptions) -> LmResult
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = x0;
    let (mut r, mut jac) = f(&x);
    let mut cost = r.norm_squared();
    let mut jtj = jac.tr_mul(&jac);
    let mut grad = jac.tr_mul(&r);
    let mut lambda = 1e-3 * jtj.diagonal().max().max(1e-12);
    let mut nu = 2.0;
    let mut iterations = 0;

    while iterations < opts.max_iterations && cost.sqrt() > opts.residual_target {
        iterations += 1;
        let mut damped = jtj.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += lambda;
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= nu;
            nu *= 2.0;
            continue;
        };
        let step = -chol.solve(&grad);
        let candidate = &x + &step;
        let (r_new, jac_new) = f(&candidate);
        let cost_new = r_new.norm_squared();
        // predicted decrease of the quadratic model
        let predicted = step.dot(&(lambda * &step - &grad));
        let rho = if predicted > 0.0 {
            (cost - cost_new) / predicted
        } else {
            -1.0
        };
        if rho > 0.0 && cost_new.is_finite() {
            let small_step = step.norm() <= opts.step_tol * (x.norm() + opts.step_tol);
            x = candidate;
            r = r_new;
            jac = jac_new;
            cost = cost_new;
            jtj = jac.tr_mul(&jac);
            grad = jac.tr_mul(&r);
            lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
            if small_step {
                break;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() || lambda > 1e30 {
                break;
            }
        }
    }
    LmResult {
        x,
        residual_norm: cost.sqrt(),
        iterations,
    }
}
