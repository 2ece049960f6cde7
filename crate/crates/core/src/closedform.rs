//! Closed-form solutions for uncorrupted (P1, P2) and noisy (P3, P4) data.
//!
//! Each solution is a spectral function of a single thin SVD, so the outputs
//! depend only on the invariant subspaces and are well defined even when
//! singular values repeat.

use nalgebra::{DMatrix, DVector};

use crate::error::{LrscError, Result};
use crate::linalg::{max_abs_diff, SvdTriple};
use crate::operators::{self, OperatorParams, Tau, ThresholdMode};
use crate::solvers::IterationRecord;

/// Symmetric `n × n` self-expressive coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationMatrix(DMatrix<f64>);

impl RepresentationMatrix {
    /// Wraps `c`, which must be square.
    pub fn new(c: DMatrix<f64>) -> Result<Self> {
        if !c.is_square() {
            return Err(LrscError::InvalidInput(format!(
                "representation matrix must be square, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(RepresentationMatrix(c))
    }

    pub(crate) fn from_symmetric(c: DMatrix<f64>) -> Self {
        debug_assert!(c.is_square());
        RepresentationMatrix(c)
    }

    pub fn zeros(n: usize) -> Self {
        RepresentationMatrix(DMatrix::zeros(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `max |C - C^T|`.
    pub fn asymmetry(&self) -> f64 {
        max_abs_diff(&self.0, &self.0.transpose())
    }
}

impl AsRef<DMatrix<f64>> for RepresentationMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Output of every solver: `X ≈ A + E` with `A ≈ A C`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Clean self-expressive dictionary.
    pub a: DMatrix<f64>,
    /// Sparse gross errors; zero for the closed-form problems.
    pub e: DMatrix<f64>,
    pub c: RepresentationMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// One record per iteration of an iterative solver.
    pub residuals: Vec<IterationRecord>,
}

impl Decomposition {
    fn closed_form(a: DMatrix<f64>, c: DMatrix<f64>) -> Self {
        let e = DMatrix::zeros(a.nrows(), a.ncols());
        Decomposition {
            a,
            e,
            c: RepresentationMatrix::from_symmetric(c),
            iterations: 0,
            converged: true,
            residuals: Vec::new(),
        }
    }
}

pub(crate) fn validate_data(x: &DMatrix<f64>) -> Result<()> {
    let (p, n) = x.shape();
    if p == 0 || n == 0 {
        return Err(LrscError::InvalidInput(format!("data matrix is {p}x{n}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LrscError::InvalidInput("data matrix has non-finite entries".into()));
    }
    Ok(())
}

fn require_finite_tau(tau: f64) -> Result<Tau> {
    if tau.is_finite() && tau > 0.0 {
        Ok(Tau::Finite(tau))
    } else {
        Err(LrscError::InvalidInput(format!("tau must be finite and positive, got {tau}")))
    }
}

/// Relaxed problem on clean data: `min ||C||_* + tau/2 ||A - AC||_F^2`,
/// `C = C^T`. Solution `C = V P_tau(Lambda) V^T`.
pub fn solve_p1(a: &DMatrix<f64>, tau: f64) -> Result<RepresentationMatrix> {
    validate_data(a)?;
    let tau = require_finite_tau(tau)?;
    let svd = SvdTriple::compute(a)?;
    let weights = svd.s.map(|l| operators::p_tau(l, tau));
    Ok(RepresentationMatrix::from_symmetric(svd.right_spectral(&weights)))
}

/// Exact problem on clean data: `min ||C||_*` s.t. `A = AC`, `C = C^T`.
/// Solution is the projector `V_1 V_1^T` onto the numerical row space of `A`.
pub fn solve_p2(a: &DMatrix<f64>) -> Result<RepresentationMatrix> {
    validate_data(a)?;
    let svd = SvdTriple::compute(a)?;
    let rank = svd.numerical_rank();
    let weights = DVector::from_fn(svd.rank(), |i, _| if i < rank { 1.0 } else { 0.0 });
    Ok(RepresentationMatrix::from_symmetric(svd.right_spectral(&weights)))
}

/// Relaxed problem on noisy data, using the closed-form thresholding branches.
pub fn solve_p3(x: &DMatrix<f64>, params: &OperatorParams) -> Result<Decomposition> {
    solve_p3_with(x, params, ThresholdMode::Branch)
}

/// Relaxed problem on noisy data:
/// `min ||C||_* + tau/2 ||A - AC||_F^2 + alpha/2 ||X - A||_F^2`.
///
/// `A = U P_{alpha,tau}(Sigma) V^T` and `C = V P_tau(P_{alpha,tau}(Sigma)) V^T`.
/// Infinite `tau` gives the hard-thresholding solution of P4.
pub fn solve_p3_with(
    x: &DMatrix<f64>,
    params: &OperatorParams,
    mode: ThresholdMode,
) -> Result<Decomposition> {
    validate_data(x)?;
    let svd = SvdTriple::compute(x)?;
    let lambda = svd.s.map(|s| operators::poly_threshold_with(s, params, mode));
    let weights = lambda.map(|l| operators::p_tau(l, params.tau));
    let a = svd.reconstruct_with(&lambda);
    let c = svd.right_spectral(&weights);
    Ok(Decomposition::closed_form(a, c))
}

/// Exact problem on noisy data: `min ||C||_* + alpha/2 ||X - A||_F^2` s.t.
/// `A = AC`, `C = C^T`. Keeps the singular triplets with `sigma > sqrt(2/alpha)`.
pub fn solve_p4(x: &DMatrix<f64>, alpha: f64) -> Result<Decomposition> {
    validate_data(x)?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(LrscError::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let svd = SvdTriple::compute(x)?;
    let lambda = svd.s.map(|s| operators::hard_threshold(s, alpha));
    let weights = lambda.map(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let a = svd.reconstruct_with(&lambda);
    let c = svd.right_spectral(&weights);
    Ok(Decomposition::closed_form(a, c))
}

/// `||C||_* + tau/2 ||A - AC||_F^2`; `tau = inf` drops the fidelity term.
pub fn p1_objective(a: &DMatrix<f64>, c: &DMatrix<f64>, tau: Tau) -> f64 {
    let nuc = crate::linalg::nuclear_norm(c);
    match tau {
        Tau::Finite(t) => nuc + 0.5 * t * (a - a * c).norm_squared(),
        Tau::Infinite => nuc,
    }
}

/// Objective of P3 (finite `tau`) or P4 (infinite `tau`, constraint assumed).
pub fn p3_objective(x: &DMatrix<f64>, a: &DMatrix<f64>, c: &DMatrix<f64>, params: &OperatorParams) -> f64 {
    p1_objective(a, c, params.tau) + 0.5 * params.alpha * (x - a).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn diag_rect(p: usize, n: usize, vals: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(p, n);
        for (i, &v) in vals.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[test]
    fn p1_zero_and_identity() {
        let c = solve_p1(&DMatrix::zeros(3, 5), 2.0).unwrap();
        assert_eq!(max_abs(c.matrix()), 0.0);
        let c = solve_p1(&DMatrix::identity(4, 4), 4.0).unwrap();
        assert!(max_abs_diff(c.matrix(), &(DMatrix::identity(4, 4) * 0.75)) < 1e-12);
    }

    #[test]
    fn p1_rejects_bad_input() {
        assert!(solve_p1(&DMatrix::zeros(0, 4), 1.0).is_err());
        assert!(solve_p1(&DMatrix::identity(2, 2), f64::INFINITY).is_err());
        assert!(solve_p1(&DMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn p2_identity_rank_one_and_zero() {
        let c = solve_p2(&DMatrix::identity(3, 3)).unwrap();
        assert!(max_abs_diff(c.matrix(), &DMatrix::identity(3, 3)) < 1e-12);

        let u = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let v = DVector::from_vec(vec![3.0, 0.0, 4.0, 0.0]).normalize();
        let a = &u * v.transpose();
        let c = solve_p2(&a).unwrap();
        let err = max_abs_diff(c.matrix(), &(&v * v.transpose()));
        assert!(err < 1e-12, "{err} {}", c.matrix());
        assert!(max_abs_diff(&(&a * c.matrix()), &a) < 1e-12);

        let c = solve_p2(&DMatrix::zeros(2, 3)).unwrap();
        assert_eq!(max_abs(c.matrix()), 0.0);
    }

    #[test]
    fn p3_two_singular_values() {
        let x = diag_rect(2, 3, &[3.0, 1.0]);
        let params = OperatorParams::new(Tau::Finite(1.0), 1.0, 0.0).unwrap();
        let d = solve_p3(&x, &params).unwrap();
        let expected_a = diag_rect(2, 3, &[3.0, 0.5]);
        assert!(max_abs_diff(&d.a, &expected_a) < 1e-12);
        let mut expected_c = DMatrix::zeros(3, 3);
        expected_c[(0, 0)] = 1.0 - 1.0 / 9.0;
        assert!(max_abs_diff(d.c.matrix(), &expected_c) < 1e-12);
        assert_eq!(max_abs(&d.e), 0.0);
    }

    #[test]
    fn p3_and_p4_zero_data() {
        let params = OperatorParams::new(Tau::Finite(1.0), 1.0, 0.0).unwrap();
        let d = solve_p3(&DMatrix::zeros(2, 4), &params).unwrap();
        assert_eq!(max_abs(&d.a), 0.0);
        assert_eq!(max_abs(d.c.matrix()), 0.0);
        let d = solve_p4(&DMatrix::zeros(2, 4), 1.0).unwrap();
        assert_eq!(max_abs(&d.a), 0.0);
        assert_eq!(max_abs(d.c.matrix()), 0.0);
    }

    #[test]
    fn p4_keeps_components_above_threshold() {
        let x = diag_rect(2, 3, &[3.0, 1.0]);
        let d = solve_p4(&x, 1.0).unwrap();
        assert!(max_abs_diff(&d.a, &diag_rect(2, 3, &[3.0])) < 1e-12);
        let mut c = DMatrix::zeros(3, 3);
        c[(0, 0)] = 1.0;
        assert!(max_abs_diff(d.c.matrix(), &c) < 1e-12);
        assert!(max_abs_diff(&(&d.a * d.c.matrix()), &d.a) < 1e-12);

        // large alpha keeps everything
        let d = solve_p4(&x, 1e12).unwrap();
        assert!(max_abs_diff(&d.a, &x) < 1e-12);
    }

    #[test]
    fn single_row_and_single_column() {
        let row = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, -1.0, 0.5]);
        let c = solve_p2(&row).unwrap();
        assert_eq!(c.dim(), 4);
        assert!(max_abs_diff(&(&row * c.matrix()), &row) < 1e-12);
        let col = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let c = solve_p1(&col, 1.0).unwrap();
        assert_eq!(c.dim(), 1);
    }
}
