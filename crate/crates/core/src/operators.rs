//! Scalar thresholding operators.
//!
//! Every solver in the crate reduces to applying one of these rules to the
//! singular values of some matrix (or elementwise, for [`shrink`]). All
//! functions are pure and operate on `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LrscError, Result};

/// Relaxation weight on the self-expressiveness term.
///
/// `Infinite` selects the exact-constraint problems (`A = AC`), where every
/// polynomial rule degenerates to hard thresholding. It is kept as its own
/// variant so the limit formulas are evaluated exactly instead of through a
/// large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Finite(f64),
    Infinite,
}

impl Tau {
    pub fn finite(value: f64) -> Result<Tau> {
        if value.is_finite() && value > 0.0 {
            Ok(Tau::Finite(value))
        } else if value == f64::INFINITY {
            Ok(Tau::Infinite)
        } else {
            Err(LrscError::InvalidInput(format!(
                "tau must be positive, got {value}"
            )))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Tau::Infinite)
    }

    /// Numeric value, `f64::INFINITY` for the sentinel.
    pub fn value(self) -> f64 {
        match self {
            Tau::Finite(t) => t,
            Tau::Infinite => f64::INFINITY,
        }
    }

    /// `1/sqrt(tau)`, the breakpoint of `P_tau`; zero when `tau` is infinite.
    pub fn breakpoint(self) -> f64 {
        match self {
            Tau::Finite(t) => 1.0 / t.sqrt(),
            Tau::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Finite(t) => write!(f, "{t}"),
            Tau::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Tau {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Tau> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Tau::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| LrscError::InvalidInput(format!("cannot parse tau from {s:?}")))?;
                Tau::finite(v)
            }
        }
    }
}

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tau::Finite(t) => serializer.serialize_f64(*t),
            Tau::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Tau, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let tau = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Tau::finite(v),
            Raw::Text(s) => s.parse(),
        };
        tau.map_err(serde::de::Error::custom)
    }
}

/// How the upper branch of the polynomial thresholding rule is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Keep `sigma` unchanged above `sigma*`, as in the closed-form rule.
    #[default]
    Branch,
    /// Pick the global minimizer of `phi` among its stationary points, solving
    /// the quartic `l^4 - sigma l^3 + 1/(alpha tau) = 0` on the upper branch.
    Exact,
}

impl ThresholdMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdMode::Branch => "branch",
            ThresholdMode::Exact => "exact",
        }
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThresholdMode {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "branch" => Ok(ThresholdMode::Branch),
            "exact" => Ok(ThresholdMode::Exact),
            _ => Err(LrscError::InvalidInput(format!(
                "unknown threshold mode {s:?} (expected branch|exact)"
            ))),
        }
    }
}

/// Scalar weights of the LRSC objectives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorParams {
    pub tau: Tau,
    pub alpha: f64,
    pub beta: f64,
}

impl OperatorParams {
    pub fn new(tau: Tau, alpha: f64, beta: f64) -> Result<Self> {
        if let Tau::Finite(t) = tau {
            if !(t.is_finite() && t > 0.0) {
                return Err(LrscError::InvalidInput(format!("tau must be positive, got {t}")));
            }
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(LrscError::InvalidInput(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(beta >= 0.0) {
            return Err(LrscError::InvalidInput(format!("beta must be nonnegative, got {beta}")));
        }
        Ok(OperatorParams { tau, alpha, beta })
    }

    pub fn sigma_star(&self) -> f64 {
        sigma_star(self.alpha, self.tau)
    }
}

/// Soft shrinkage `sign(x) max(|x| - eps, 0)`.
#[inline]
pub fn shrink(x: f64, eps: f64) -> f64 {
    if x > eps {
        x - eps
    } else if x < -eps {
        x + eps
    } else {
        0.0
    }
}

pub fn shrink_matrix(m: &nalgebra::DMatrix<f64>, eps: f64) -> nalgebra::DMatrix<f64> {
    m.map(|x| shrink(x, eps))
}

/// Spectral weight of the relaxed self-expressive problem:
/// `1 - 1/(tau x^2)` above `1/sqrt(tau)`, zero otherwise.
#[inline]
pub fn p_tau(x: f64, tau: Tau) -> f64 {
    match tau {
        Tau::Finite(t) => {
            if x > 1.0 / t.sqrt() {
                1.0 - 1.0 / (t * x * x)
            } else {
                0.0
            }
        }
        Tau::Infinite => {
            if x > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Stationarity map `sigma = psi(lambda)` of `phi(., sigma)`.
pub fn psi(lambda: f64, params: &OperatorParams) -> f64 {
    let alpha = params.alpha;
    match params.tau {
        Tau::Finite(tau) => {
            if lambda > 1.0 / tau.sqrt() {
                lambda + lambda.powi(-3) / (alpha * tau)
            } else {
                lambda + (tau / alpha) * lambda
            }
        }
        Tau::Infinite => lambda,
    }
}

/// Per-singular-value objective minimized by the polynomial thresholding rule.
pub fn phi(lambda: f64, sigma: f64, params: &OperatorParams) -> f64 {
    let fit = 0.5 * params.alpha * (sigma - lambda) * (sigma - lambda);
    let penalty = match params.tau {
        Tau::Finite(tau) => {
            if lambda > 1.0 / tau.sqrt() {
                1.0 - 1.0 / (2.0 * tau * lambda * lambda)
            } else {
                0.5 * tau * lambda * lambda
            }
        }
        Tau::Infinite => {
            if lambda > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    };
    fit + penalty
}

/// Switching point between the two branches of the polynomial thresholding
/// rule; `sqrt(2/alpha)` in the hard-thresholding limit.
pub fn sigma_star(alpha: f64, tau: Tau) -> f64 {
    match tau {
        Tau::Finite(tau) => {
            let a = (alpha + tau) / (alpha * tau);
            let b = ((alpha + tau) / (alpha * alpha * tau)).sqrt();
            (a + b).sqrt()
        }
        Tau::Infinite => (2.0 / alpha).sqrt(),
    }
}

/// Polynomial thresholding `P_{alpha,tau}` with the closed-form branches.
///
/// Returns `sigma` above `sigma*` and `alpha sigma/(alpha + tau)` at or below
/// it. For infinite `tau` this is hard thresholding at `sqrt(2/alpha)`.
pub fn poly_threshold(sigma: f64, params: &OperatorParams) -> f64 {
    let alpha = params.alpha;
    match params.tau {
        Tau::Finite(tau) => {
            if sigma > sigma_star(alpha, params.tau) {
                sigma
            } else {
                alpha * sigma / (alpha + tau)
            }
        }
        Tau::Infinite => hard_threshold(sigma, alpha),
    }
}

/// Hard thresholding at `sqrt(2/alpha)`; ties go to zero.
#[inline]
pub fn hard_threshold(sigma: f64, alpha: f64) -> f64 {
    if sigma > (2.0 / alpha).sqrt() {
        sigma
    } else {
        0.0
    }
}

/// Global minimizer of `phi(., sigma)` over `lambda >= 0`.
///
/// The candidates are the stationary points of the two branches: the linear
/// solution `alpha sigma/(alpha + tau)` when it lies at or below `1/sqrt(tau)`,
/// and the largest root of `l^4 - sigma l^3 + 1/(alpha tau)` when it lies
/// above. Ties go to the lower branch.
pub fn poly_threshold_exact(sigma: f64, params: &OperatorParams) -> f64 {
    let alpha = params.alpha;
    let tau = match params.tau {
        Tau::Finite(t) => t,
        Tau::Infinite => return hard_threshold(sigma, alpha),
    };
    if sigma <= 0.0 {
        return 0.0;
    }
    let knee = 1.0 / tau.sqrt();

    let lower = alpha * sigma / (alpha + tau);
    let lower = (lower <= knee).then_some(lower);
    let upper = quartic_upper_root(sigma, 1.0 / (alpha * tau)).filter(|&r| r > knee);

    match (lower, upper) {
        (Some(l), Some(u)) => {
            if phi(l, sigma, params) <= phi(u, sigma, params) {
                l
            } else {
                u
            }
        }
        (Some(l), None) => l,
        (None, Some(u)) => u,
        // phi is C^1 and coercive, so one of the branches always has a
        // stationary point; fall back to the knee if rounding loses both.
        (None, None) => knee,
    }
}

pub fn poly_threshold_with(sigma: f64, params: &OperatorParams, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::Branch => poly_threshold(sigma, params),
        ThresholdMode::Exact => poly_threshold_exact(sigma, params),
    }
}

/// Largest real root of `f(l) = l^4 - sigma l^3 + c` for `c > 0`, if any.
///
/// `f` is convex and increasing on `[3 sigma/4, sigma]` and `f(sigma) = c > 0`,
/// so a root exists iff `f(3 sigma/4) <= 0`. Newton from `sigma` is monotone on
/// that interval; bisection guards against rounding.
fn quartic_upper_root(sigma: f64, c: f64) -> Option<f64> {
    let f = |l: f64| l * l * l * (l - sigma) + c;
    let df = |l: f64| l * l * (4.0 * l - 3.0 * sigma);

    let mut lo = 0.75 * sigma;
    let mut hi = sigma;
    if f(lo) > 0.0 {
        return None;
    }
    let mut x = hi;
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let mut next = if d > 0.0 { x - fx / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * sigma {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}
