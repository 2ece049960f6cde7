#![allow(dead_code)]

use lrsc::DMatrix;
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, p: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random `p × n` matrix of rank `r` with unit-scale factors.
pub fn low_rank(rng: &mut ChaCha8Rng, p: usize, n: usize, r: usize) -> DMatrix<f64> {
    gaussian(rng, p, r) * gaussian(rng, r, n)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Nuclear norm of a symmetric matrix via nalgebra's eigensolver, kept
/// independent of the library's SVD.
pub fn symmetric_nuclear(c: &DMatrix<f64>) -> f64 {
    let sym = (c + c.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Global minimizer of `f` on `[lo, hi]` by a dense grid, refined by
/// golden-section search around the best grid point.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let steps = ((hi - lo) / step).ceil() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=steps {
        let x = (lo + i as f64 * step).min(hi);
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// F1 score of the nonzero supports of `found` against `truth`.
pub fn support_f1(found: &DMatrix<f64>, truth: &DMatrix<f64>) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (f, t) in found.iter().zip(truth.iter()) {
        match (*f != 0.0, *t != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Orthonormal basis (`n × rank`) of the row space of `a`, from a QR of
/// `a^T` with negligible columns dropped.
pub fn row_space_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.transpose().qr();
    let (q, r) = (qr.q(), qr.r());
    let scale = r.diagonal().amax().max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..r.nrows()).filter(|&i| r[(i, i)].abs() > 1e-10 * scale).collect();
    q.select_columns(keep.iter())
}

/// Accelerated proximal gradient on symmetric `C` for
/// `||C||_* + tau/2 ||A - AC||_F^2`.
///
/// Any component of `C` outside the row space of `A` adds to the nuclear
/// norm without changing the fit, so the iteration runs on `C = Q M Q^T`
/// with `Q` a QR basis of that row space. The prox of the nuclear norm on
/// symmetric matrices soft-thresholds the eigenvalues.
pub fn p1_oracle(a: &DMatrix<f64>, tau: f64, start: DMatrix<f64>, iters: usize) -> DMatrix<f64> {
    let q = row_space_basis(a);
    let aq = a * &q;
    let gram = aq.transpose() * &aq;
    let lip = tau * SymmetricEigen::new(gram.clone()).eigenvalues.amax();
    let step = 1.0 / lip.max(1e-12);
    let m0 = q.transpose() * &start * &q;
    let mut m = (&m0 + m0.transpose()) * 0.5;
    let mut prev = m.clone();
    for k in 0..iters {
        // Nesterov momentum
        let y = &m + (&m - &prev) * ((k as f64) / (k as f64 + 3.0));
        let grad = (&gram * &y - &gram) * tau;
        let z = &y - ((&grad + grad.transpose()) * 0.5) * step;
        let eig = SymmetricEigen::new((&z + z.transpose()) * 0.5);
        let vals = eig.eigenvalues.map(|l| l.signum() * (l.abs() - step).max(0.0));
        prev = m;
        m = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        if k > 50 && max_abs_diff(&m, &prev) < 1e-14 {
            break;
        }
    }
    &q * m * q.transpose()
}

pub fn p1_value(a: &DMatrix<f64>, c: &DMatrix<f64>, tau: f64) -> f64 {
    symmetric_nuclear(c) + 0.5 * tau * (a - a * c).norm_squared()
}

/// Minimizes `r + alpha/2 ||X - X C||_F^2` over rank-`r` projectors `C`.
/// For a fixed row space the best feasible `C` is its projector (nuclear
/// norm `r`), and the captured energy `||X C||_F^2` equals `tr(U^T X X^T U)`
/// for an orthonormal `p × r` frame `U`, which is maximized by projected
/// gradient ascent with QR retraction from random frames.
pub fn p4_oracle(x: &DMatrix<f64>, alpha: f64, restarts: usize, seed: u64) -> f64 {
    let p = x.nrows();
    let r_max = p.min(x.ncols());
    let gram = x * x.transpose();
    let total = x.norm_squared();
    let step = 100.0 / SymmetricEigen::new(gram.clone()).eigenvalues.amax().max(1e-12);
    let mut best = 0.5 * alpha * total;
    let mut rng = rng(seed);
    for r in 1..=r_max {
        for _ in 0..restarts {
            let mut u = gaussian(&mut rng, p, r).qr().q();
            let mut captured = 0.0;
            for _ in 0..5000 {
                u = (&u + &gram * &u * step).qr().q();
                let next = (u.transpose() * &gram * &u).trace();
                let done = (next - captured).abs() <= 1e-14 * next;
                captured = next;
                if done {
                    break;
                }
            }
            let value = r as f64 + 0.5 * alpha * (total - captured).max(0.0);
            best = best.min(value);
        }
    }
    best
}
