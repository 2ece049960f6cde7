//! Iterative solvers for grossly corrupted data.
//!
//! * [`ipt_p5`] – iterative polynomial thresholding for `X = A + E + G`.
//! * [`admm_p5`] – augmented Lagrangian / ADMM for `X = A + E`.
//! * [`gl_admm`] – ADMM for the graph Laplacian regularized problem, with an
//!   auxiliary copy `J = A` carrying the smoothness term `gamma tr(J L J^T)`.
//!
//! Infinite `tau` in [`SolverConfig`] swaps polynomial thresholding for hard
//! thresholding, giving the exact-constraint variants (P6, GL-P6).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::closedform::{validate_data, Decomposition, RepresentationMatrix};
use crate::error::{LrscError, Result};
use crate::graph::GraphModel;
use crate::linalg::{max_abs, max_abs_diff, SvdTriple};
use crate::operators::{self, OperatorParams, Tau, ThresholdMode};

/// Scalar hyperparameters shared by all iterative solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Relaxation weight; `inf` selects the hard-thresholding variants.
    pub tau: Tau,
    /// Data fidelity weight, used by IPT only.
    pub alpha: f64,
    /// Sparsity weight on `E`.
    pub beta: f64,
    /// Graph smoothness weight; zero disables the graph term.
    pub gamma: f64,
    /// Initial penalty `mu` (both `mu1` and `mu2` for the graph solver).
    pub mu0: f64,
    /// Penalty growth factor.
    pub rho: f64,
    pub mu_max: f64,
    /// Max-norm convergence tolerance.
    pub eps1: f64,
    pub max_iters: usize,
    pub threshold_mode: ThresholdMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: Tau::Finite(0.2),
            alpha: 10.0,
            beta: 1e-6,
            gamma: 1e-3,
            mu0: 1e-6,
            rho: 1.1,
            mu_max: 1e6,
            eps1: 1e-8,
            max_iters: 500,
            threshold_mode: ThresholdMode::Branch,
        }
    }
}

impl SolverConfig {
    /// Face clustering settings: `tau = 0.2`, `beta = 1e-6`, `gamma = 1e-3`.
    pub fn faces() -> Self {
        SolverConfig::default()
    }

    /// Handwritten digit settings: as [`SolverConfig::faces`] with `gamma = 1e-2`.
    pub fn digits() -> Self {
        SolverConfig {
            gamma: 1e-2,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(LrscError::InvalidInput(format!("{what} = {v} is out of range")));
        if let Tau::Finite(t) = self.tau {
            if !(t.is_finite() && t > 0.0) {
                return bad("tau", t);
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad("alpha", self.alpha);
        }
        if !(self.beta >= 0.0) {
            return bad("beta", self.beta);
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("gamma", self.gamma);
        }
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return bad("mu0", self.mu0);
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return bad("rho", self.rho);
        }
        if !(self.mu_max.is_finite() && self.mu_max >= self.mu0) {
            return bad("mu_max", self.mu_max);
        }
        if !(self.eps1 > 0.0) {
            return bad("eps1", self.eps1);
        }
        if self.max_iters == 0 {
            return Err(LrscError::InvalidInput("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Penalty at iteration `k`: `min(mu0 rho^k, mu_max)`.
    pub fn mu_at(&self, k: usize) -> f64 {
        let exp = i32::try_from(k).unwrap_or(i32::MAX);
        (self.mu0 * self.rho.powi(exp)).min(self.mu_max)
    }

    fn poly(&self, alpha: f64) -> impl Fn(f64) -> f64 {
        let params = OperatorParams {
            tau: self.tau,
            alpha,
            beta: self.beta,
        };
        let mode = self.threshold_mode;
        move |s| operators::poly_threshold_with(s, &params, mode)
    }
}

/// Lagrange multipliers and penalties. `admm_p5` uses `y1`/`mu1` only.
#[derive(Clone, Debug)]
pub struct MultiplierState {
    pub y1: DMatrix<f64>,
    pub y2: DMatrix<f64>,
    pub mu1: f64,
    pub mu2: f64,
}

impl MultiplierState {
    fn zeros(p: usize, n: usize, mu0: f64) -> Self {
        MultiplierState {
            y1: DMatrix::zeros(p, n),
            y2: DMatrix::zeros(p, n),
            mu1: mu0,
            mu2: mu0,
        }
    }
}

/// Primal iterates. `j` is only used by the graph regularized solver.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub a: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub k: usize,
}

/// Convergence metrics of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iteration: usize,
    /// `||X - A - E||_max`.
    pub primal_residual: f64,
    /// `||X - A - E||_F`.
    pub primal_residual_fro: f64,
    /// `||J - A||_max`; zero for solvers without `J`.
    pub consensus_residual: f64,
    /// `||A_(k+1) - A_(k)||_max`.
    pub delta_a: f64,
    /// `||E_(k+1) - E_(k)||_max`.
    pub delta_e: f64,
    /// Penalty used in this iteration (`alpha` for IPT).
    pub mu1: f64,
    pub mu2: f64,
}

/// `U P(Sigma) V^T` for the SVD of `m`, returning the factorization as well.
fn threshold_spectrum(m: &DMatrix<f64>, rule: impl Fn(f64) -> f64) -> Result<(DMatrix<f64>, SvdTriple, DVector<f64>)> {
    let svd = SvdTriple::compute(m)?;
    let lambda = svd.s.map(rule);
    Ok((svd.reconstruct_with(&lambda), svd, lambda))
}

/// `V P_tau(P(Sigma)) V^T` for the SVD of `m`.
fn representation(m: &DMatrix<f64>, rule: impl Fn(f64) -> f64, tau: Tau) -> Result<RepresentationMatrix> {
    let (_, svd, lambda) = threshold_spectrum(m, rule)?;
    let weights = lambda.map(|l| operators::p_tau(l, tau));
    Ok(RepresentationMatrix::from_symmetric(svd.right_spectral(&weights)))
}

/// Sparse error update `S_{beta/mu}(X - A + Y/mu)`: the exact minimizer of
/// `beta ||E||_1 + <Y, X - A - E> + mu/2 ||X - A - E||_F^2`.
pub fn e_update(x: &DMatrix<f64>, a: &DMatrix<f64>, y: &DMatrix<f64>, beta: f64, mu: f64) -> DMatrix<f64> {
    let eps = beta / mu;
    let mut out = x - a + y / mu;
    out.apply(|v| *v = operators::shrink(*v, eps));
    out
}

/// Closed-form `J = (mu2 A - Y2)(2 gamma L + mu2 I)^{-1}`.
///
/// Solves `J M = B` through `M^T J^T = B^T`, with a Cholesky factorization
/// when `L` is symmetric and LU otherwise.
pub fn j_update(
    a: &DMatrix<f64>,
    y2: &DMatrix<f64>,
    laplacian: &DMatrix<f64>,
    gamma: f64,
    mu2: f64,
) -> Result<DMatrix<f64>> {
    let n = a.ncols();
    if laplacian.shape() != (n, n) {
        return Err(LrscError::DimensionMismatch {
            expected: format!("{n}x{n} Laplacian"),
            found: format!("{}x{}", laplacian.nrows(), laplacian.ncols()),
        });
    }
    let rhs = a * mu2 - y2;
    if gamma == 0.0 {
        return Ok(rhs / mu2);
    }
    let mut m = laplacian * (2.0 * gamma);
    for i in 0..n {
        m[(i, i)] += mu2;
    }
    let rhs_t = rhs.transpose();
    let symmetric = max_abs_diff(&m, &m.transpose()) == 0.0;
    let sol_t = if symmetric {
        let chol = m
            .cholesky()
            .ok_or_else(|| LrscError::Numeric("2 gamma L + mu2 I is not positive definite".into()))?;
        chol.solve(&rhs_t)
    } else {
        m.transpose()
            .lu()
            .solve(&rhs_t)
            .ok_or_else(|| LrscError::Numeric("2 gamma L + mu2 I is singular".into()))?
    };
    Ok(sol_t.transpose())
}

/// Iterative polynomial thresholding for `X = A + E + G`.
///
/// Alternates `A = U P_{alpha,tau}(Sigma) V^T` on `svd(X - E)` with
/// `E = S_{beta/alpha}(X - A)`, starting from `A = X`, `E = 0`, until both
/// updates move less than `eps1` in max-norm.
pub fn ipt_p5(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Decomposition> {
    validate_data(x)?;
    cfg.validate()?;
    let (p, n) = x.shape();
    let mut state = IterateState {
        a: x.clone(),
        e: DMatrix::zeros(p, n),
        j: DMatrix::zeros(0, 0),
        k: 0,
    };
    let rule = cfg.poly(cfg.alpha);
    let eps = cfg.beta / cfg.alpha;
    let mut records = Vec::new();
    let mut converged = false;

    while state.k < cfg.max_iters {
        let (a_next, _, _) = threshold_spectrum(&(x - &state.e), &rule)?;
        let mut e_next = x - &a_next;
        e_next.apply(|v| *v = operators::shrink(*v, eps));

        let delta_a = max_abs_diff(&a_next, &state.a);
        let delta_e = max_abs_diff(&e_next, &state.e);
        state.a = a_next;
        state.e = e_next;
        state.k += 1;
        let residual = x - &state.a - &state.e;
        records.push(IterationRecord {
            iteration: state.k,
            primal_residual: max_abs(&residual),
            primal_residual_fro: residual.norm(),
            consensus_residual: 0.0,
            delta_a,
            delta_e,
            mu1: cfg.alpha,
            mu2: 0.0,
        });
        if delta_a < cfg.eps1 && delta_e < cfg.eps1 {
            converged = true;
            break;
        }
    }

    let c = representation(&(x - &state.e), &rule, cfg.tau)?;
    Ok(Decomposition {
        a: state.a,
        e: state.e,
        c,
        iterations: state.k,
        converged,
        residuals: records,
    })
}

/// ADMM for `X = A + E` with multiplier `Y` and increasing penalty `mu`.
///
/// The `A` step thresholds `svd(X - E + Y/mu)` with `P_{mu,tau}`, so the
/// penalty plays the role of the data weight; `alpha` is unused. The final
/// representation uses the last multiplier and penalty.
pub fn admm_p5(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<Decomposition> {
    validate_data(x)?;
    cfg.validate()?;
    let (p, n) = x.shape();
    let mut state = IterateState {
        a: x.clone(),
        e: DMatrix::zeros(p, n),
        j: DMatrix::zeros(0, 0),
        k: 0,
    };
    let mut mult = MultiplierState::zeros(p, n, cfg.mu0);
    let mut records = Vec::new();
    let mut converged = false;

    while state.k < cfg.max_iters {
        let mu = mult.mu1;
        let shifted = &mult.y1 / mu;
        let (a_next, _, _) = threshold_spectrum(&(x - &state.e + &shifted), cfg.poly(mu))?;
        let e_next = e_update(x, &a_next, &mult.y1, cfg.beta, mu);
        let residual = x - &a_next - &e_next;
        mult.y1 += &residual * mu;

        let delta_a = max_abs_diff(&a_next, &state.a);
        let delta_e = max_abs_diff(&e_next, &state.e);
        state.a = a_next;
        state.e = e_next;
        state.k += 1;
        mult.mu1 = cfg.mu_at(state.k);

        let primal = max_abs(&residual);
        records.push(IterationRecord {
            iteration: state.k,
            primal_residual: primal,
            primal_residual_fro: residual.norm(),
            consensus_residual: 0.0,
            delta_a,
            delta_e,
            mu1: mu,
            mu2: 0.0,
        });
        if primal < cfg.eps1 {
            converged = true;
            break;
        }
    }

    let mu = mult.mu1;
    let c = representation(&(x - &state.e + &mult.y1 / mu), cfg.poly(mu), cfg.tau)?;
    Ok(Decomposition {
        a: state.a,
        e: state.e,
        c,
        iterations: state.k,
        converged,
        residuals: records,
    })
}

/// ADMM for the graph Laplacian regularized problem
/// `min ||C||_* + tau/2 ||A - AC||_F^2 + beta ||E||_1 + gamma tr(A L A^T)`
/// s.t. `X = A + E`, `C = C^T`.
///
/// Each iteration updates `J` in closed form, thresholds the penalty-weighted
/// average of `X - E + Y1/mu1` and `J + Y2/mu2` with `P_{mu1+mu2,tau}`,
/// shrinks `E`, then updates both multipliers and penalties. Stops when
/// `||X - A - E||_max` and `||J - A||_max` are both below `eps1`.
pub fn gl_admm(x: &DMatrix<f64>, graph: &GraphModel, cfg: &SolverConfig) -> Result<Decomposition> {
    validate_data(x)?;
    cfg.validate()?;
    let (p, n) = x.shape();
    let laplacian = &graph.laplacian;
    if laplacian.shape() != (n, n) {
        return Err(LrscError::DimensionMismatch {
            expected: format!("{n}x{n} Laplacian for {n} samples"),
            found: format!("{}x{}", laplacian.nrows(), laplacian.ncols()),
        });
    }
    let mut state = IterateState {
        a: DMatrix::zeros(p, n),
        e: DMatrix::zeros(p, n),
        j: DMatrix::zeros(p, n),
        k: 0,
    };
    let mut mult = MultiplierState::zeros(p, n, cfg.mu0);
    let mut records = Vec::new();
    let mut converged = false;

    while state.k < cfg.max_iters {
        let (mu1, mu2) = (mult.mu1, mult.mu2);

        let j_next = j_update(&state.a, &mult.y2, laplacian, cfg.gamma, mu2)?;

        let target = weighted_target(x, &state.e, &j_next, &mult);
        let (a_next, _, _) = threshold_spectrum(&target, cfg.poly(mu1 + mu2))?;

        let e_next = e_update(x, &a_next, &mult.y1, cfg.beta, mu1);

        let primal = x - &a_next - &e_next;
        let consensus = &j_next - &a_next;
        mult.y1 += &primal * mu1;
        mult.y2 += &consensus * mu2;

        let delta_a = max_abs_diff(&a_next, &state.a);
        let delta_e = max_abs_diff(&e_next, &state.e);
        state.a = a_next;
        state.e = e_next;
        state.j = j_next;
        state.k += 1;
        mult.mu1 = cfg.mu_at(state.k);
        mult.mu2 = cfg.mu_at(state.k);

        let primal_fro = primal.norm();
        let primal = max_abs(&primal);
        let consensus = max_abs(&consensus);
        records.push(IterationRecord {
            iteration: state.k,
            primal_residual: primal,
            primal_residual_fro: primal_fro,
            consensus_residual: consensus,
            delta_a,
            delta_e,
            mu1,
            mu2,
        });
        if primal < cfg.eps1 && consensus < cfg.eps1 {
            converged = true;
            break;
        }
    }

    let target = weighted_target(x, &state.e, &state.j, &mult);
    let c = representation(&target, cfg.poly(mult.mu1 + mult.mu2), cfg.tau)?;
    Ok(Decomposition {
        a: state.a,
        e: state.e,
        c,
        iterations: state.k,
        converged,
        residuals: records,
    })
}

/// `(mu1 (X - E + Y1/mu1) + mu2 (J + Y2/mu2)) / (mu1 + mu2)`.
fn weighted_target(x: &DMatrix<f64>, e: &DMatrix<f64>, j: &DMatrix<f64>, mult: &MultiplierState) -> DMatrix<f64> {
    let (mu1, mu2) = (mult.mu1, mult.mu2);
    ((x - e) * mu1 + &mult.y1 + j * mu2 + &mult.y2) / (mu1 + mu2)
}
