//! Union-of-subspaces data with Gaussian noise and sparse gross errors.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LrscError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub ambient_dim: usize,
    pub subspace_dims: Vec<usize>,
    pub points_per_subspace: Vec<usize>,
    /// Standard deviation of the dense Gaussian noise.
    pub noise_sigma: f64,
    /// Fraction of entries hit by a gross error.
    pub corruption_fraction: f64,
    /// Each gross error is `+magnitude` or `-magnitude`.
    pub corruption_magnitude: f64,
    /// Draw all bases from one QR so the subspaces are mutually orthogonal.
    pub orthogonal: bool,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            ambient_dim: 50,
            subspace_dims: vec![4; 5],
            points_per_subspace: vec![40; 5],
            noise_sigma: 0.0,
            corruption_fraction: 0.0,
            corruption_magnitude: 0.0,
            orthogonal: false,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn sample_count(&self) -> usize {
        self.points_per_subspace.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LrscError::InvalidInput(m));
        if self.ambient_dim == 0 {
            return bad("ambient dimension must be positive".into());
        }
        if self.subspace_dims.is_empty() || self.subspace_dims.len() != self.points_per_subspace.len() {
            return bad(format!(
                "{} subspace dimensions but {} point counts",
                self.subspace_dims.len(),
                self.points_per_subspace.len()
            ));
        }
        if let Some(&d) = self.subspace_dims.iter().find(|&&d| d == 0 || d > self.ambient_dim) {
            return bad(format!("subspace dimension {d} outside 1..={}", self.ambient_dim));
        }
        if self.orthogonal && self.subspace_dims.iter().sum::<usize>() > self.ambient_dim {
            return bad("orthogonal subspaces need sum of dimensions <= ambient dimension".into());
        }
        if self.sample_count() == 0 {
            return bad("no points requested".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma {} must be nonnegative", self.noise_sigma));
        }
        if !(0.0..=1.0).contains(&self.corruption_fraction) {
            return bad(format!("corruption fraction {} outside [0, 1]", self.corruption_fraction));
        }
        if !self.corruption_magnitude.is_finite() {
            return bad("corruption magnitude must be finite".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    /// `X = A0 + G + E0`.
    pub x: DMatrix<f64>,
    pub labels: Vec<usize>,
    /// Noise-free union-of-subspaces samples.
    pub clean: DMatrix<f64>,
    /// Sparse gross errors.
    pub errors: DMatrix<f64>,
    /// Orthonormal basis of each subspace.
    pub bases: Vec<DMatrix<f64>>,
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn orthonormal_basis(rng: &mut ChaCha8Rng, p: usize, d: usize) -> DMatrix<f64> {
    gaussian(rng, p, d).qr().q()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p = spec.ambient_dim;
    let n = spec.sample_count();

    let bases: Vec<DMatrix<f64>> = if spec.orthogonal {
        let total: usize = spec.subspace_dims.iter().sum();
        let joint = orthonormal_basis(&mut rng, p, total);
        let mut start = 0;
        spec.subspace_dims
            .iter()
            .map(|&d| {
                let b = joint.columns(start, d).into_owned();
                start += d;
                b
            })
            .collect()
    } else {
        spec.subspace_dims
            .iter()
            .map(|&d| orthonormal_basis(&mut rng, p, d))
            .collect()
    };

    let mut clean = DMatrix::zeros(p, n);
    let mut labels = Vec::with_capacity(n);
    let mut col = 0;
    for (s, (basis, &count)) in bases.iter().zip(&spec.points_per_subspace).enumerate() {
        let coeffs = gaussian(&mut rng, basis.ncols(), count);
        clean.columns_mut(col, count).copy_from(&(basis * coeffs));
        labels.extend(std::iter::repeat(s).take(count));
        col += count;
    }

    let mut x = clean.clone();
    if spec.noise_sigma > 0.0 {
        x += gaussian(&mut rng, p, n) * spec.noise_sigma;
    }

    let mut errors = DMatrix::zeros(p, n);
    let count = (spec.corruption_fraction * (p * n) as f64).round() as usize;
    if count > 0 {
        for idx in index::sample(&mut rng, p * n, count) {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            errors[(idx % p, idx / p)] = sign * spec.corruption_magnitude;
        }
        x += &errors;
    }

    Ok(SyntheticData {
        x,
        labels,
        clean,
        errors,
        bases,
    })
}
