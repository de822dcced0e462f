//! Levenberg–Marquardt on normal equations, with Huber-weighted residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Huber penalty applied to squared residuals:
/// `rho(s) = s` for `s <= delta^2`, else `2 delta sqrt(s) - delta^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustLoss {
    pub delta: f64,
}

impl Default for RobustLoss {
    fn default() -> Self {
        Self { delta: 1.0 }
    }
}

impl RobustLoss {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("Huber delta must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn rho(&self, s: f64) -> f64 {
        let d2 = self.delta * self.delta;
        if s <= d2 {
            s
        } else {
            2.0 * self.delta * s.sqrt() - d2
        }
    }

    /// IRLS weight `rho'(r^2)` for residual `r`.
    pub fn weight(&self, r: f64) -> f64 {
        let a = r.abs();
        if a <= self.delta {
            1.0
        } else {
            self.delta / a
        }
    }
}

/// Gauss–Newton normal equations `H = sum w J^T J`, `g = sum w r J^T`
/// at the current parameters, with the robust cost they came from.
#[derive(Clone, Debug)]
pub struct NormalEquations {
    pub cost: f64,
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
}

impl NormalEquations {
    pub fn zeros(dim: usize) -> Self {
        Self {
            cost: 0.0,
            h: DMatrix::zeros(dim, dim),
            g: DVector::zeros(dim),
        }
    }

    /// Adds one residual `r` with gradient row `j` under `loss`.
    pub fn add(&mut self, r: f64, j: &[f64], loss: &RobustLoss) {
        let w = loss.weight(r);
        self.cost += loss.rho(r * r);
        let n = j.len();
        for a in 0..n {
            let wja = w * j[a];
            self.g[a] += wja * r;
            for b in a..n {
                self.h[(a, b)] += wja * j[b];
            }
        }
    }

    /// Mirrors the upper triangle filled by [`add`](Self::add).
    pub fn symmetrize(&mut self) {
        let n = self.h.nrows();
        for a in 0..n {
            for b in 0..a {
                self.h[(a, b)] = self.h[(b, a)];
            }
        }
    }
}

pub trait Problem {
    type Param: Clone;

    fn linearize(&self, p: &Self::Param) -> Result<NormalEquations>;

    fn cost(&self, p: &Self::Param) -> Result<f64>;

    fn retract(&self, p: &Self::Param, delta: &DVector<f64>) -> Self::Param;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    /// Stop when the step norm drops below this.
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            initial_lambda: 1e-4,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome<P> {
    pub param: P,
    pub initial_cost: f64,
    pub cost: f64,
    /// Number of accepted steps.
    pub iterations: usize,
    pub converged: bool,
}

pub fn solve<P: Problem>(problem: &P, init: P::Param, opts: &LmOptions) -> Result<LmOutcome<P::Param>> {
    let mut param = init;
    let mut ne = problem.linearize(&param)?;
    let initial_cost = ne.cost;
    let mut lambda = opts.initial_lambda;
    let mut accepted = 0;
    let mut converged = false;
    let mut attempts = 0;
    let max_attempts = opts.max_iterations * 4;
    while accepted < opts.max_iterations && attempts < max_attempts {
        attempts += 1;
        if ne.g.amax() == 0.0 {
            converged = true;
            break;
        }
        let mut a = ne.h.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += lambda * ne.h[(i, i)].max(1e-9);
        }
        let Some(chol) = a.cholesky() else {
            lambda *= 10.0;
            continue;
        };
        let step = -chol.solve(&ne.g);
        let candidate = problem.retract(&param, &step);
        let cost = problem.cost(&candidate)?;
        if cost < ne.cost {
            let gain = (ne.cost - cost) / ne.cost.max(f64::MIN_POSITIVE);
            param = candidate;
            ne = problem.linearize(&param)?;
            accepted += 1;
            lambda = (lambda * 0.1).max(1e-12);
            if gain < opts.cost_tolerance || step.norm() < opts.step_tolerance {
                converged = true;
                break;
            }
        } else {
            if step.norm() < opts.step_tolerance {
                converged = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    Ok(LmOutcome {
        param,
        initial_cost,
        cost: ne.cost,
        iterations: accepted,
        converged,
    })
}
