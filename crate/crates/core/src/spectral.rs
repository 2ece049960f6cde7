//! Spectral clustering of representation matrices and clustering accuracy.
//!
//! Clustering follows the normalized-Laplacian recipe: the `k` eigenvectors
//! of `I - D^{-1/2} W D^{-1/2}` with smallest eigenvalues form an embedding,
//! its rows are normalized to unit length, and seeded k-means with restarts
//! picks the labeling with lowest inertia.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use nalgebra::DMatrix;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closedform::RepresentationMatrix;
use crate::error::{LrscError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringResult {
    /// Cluster index in `[0, k)` per sample.
    pub labels: Vec<usize>,
    pub k: usize,
    /// Percentage in `[0, 100]`, once scored against ground truth.
    pub accuracy: Option<f64>,
    /// Best matching as `(predicted, truth)` label pairs.
    pub assignment: Vec<(usize, usize)>,
    /// Set when the affinity had no edges at all.
    pub degenerate: bool,
}

impl ClusteringResult {
    /// Scores the labels against `truth`, filling `accuracy` and `assignment`.
    pub fn score(&mut self, truth: &[usize]) -> Result<f64> {
        let (matched, pairs) = best_matching(&self.labels, truth)?;
        let acc = 100.0 * matched as f64 / truth.len().max(1) as f64;
        self.accuracy = Some(acc);
        self.assignment = pairs;
        Ok(acc)
    }

    /// `sample,label` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "sample,label")?;
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(out, "{i},{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SpectralOptions {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            restarts: 20,
            max_iters: 300,
        }
    }
}

/// `|C| + |C|^T` with a zero diagonal.
pub fn affinity_from_c(c: &RepresentationMatrix) -> DMatrix<f64> {
    let abs = c.matrix().abs();
    let mut w = &abs + abs.transpose();
    w.fill_diagonal(0.0);
    w
}

pub fn spectral_cluster(w: &DMatrix<f64>, k: usize, seed: u64) -> Result<ClusteringResult> {
    spectral_cluster_with(w, k, seed, &SpectralOptions::default())
}

pub fn spectral_cluster_with(
    w: &DMatrix<f64>,
    k: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<ClusteringResult> {
    let n = w.nrows();
    if !w.is_square() {
        return Err(LrscError::InvalidInput(format!(
            "affinity must be square, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if k == 0 || k > n {
        return Err(LrscError::InvalidInput(format!(
            "cluster count k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(LrscError::InvalidInput("affinity must be finite and nonnegative".into()));
    }
    let degenerate = w.iter().all(|&v| v == 0.0);
    if k == 1 {
        return Ok(ClusteringResult {
            labels: vec![0; n],
            k,
            accuracy: None,
            assignment: Vec::new(),
            degenerate,
        });
    }

    let embedding = spectral_embedding(w, k)?;
    let labels = kmeans(&embedding, k, seed, opts);
    Ok(ClusteringResult {
        labels,
        k,
        accuracy: None,
        assignment: Vec::new(),
        degenerate,
    })
}

/// Row-normalized eigenvectors of the `k` smallest eigenvalues of `L_sym`,
/// as an `n × k` matrix. Isolated vertices get zero rows.
pub fn spectral_embedding(w: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d = w.row(i).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut lsym = DMatrix::from_fn(n, n, |i, j| -inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]);
    for i in 0..n {
        lsym[(i, i)] += 1.0;
    }
    // exact symmetry for the eigensolver
    crate::linalg::symmetrize_in_place(&mut lsym);
    let (_, vectors) = crate::linalg::symmetric_eigen(&lsym)?;
    let mut emb = vectors.columns(0, k).into_owned();
    for i in 0..n {
        if inv_sqrt[i] == 0.0 {
            emb.row_mut(i).fill(0.0);
            continue;
        }
        let norm = emb.row(i).norm();
        if norm > 0.0 {
            emb.row_mut(i).unscale_mut(norm);
        }
    }
    Ok(emb)
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centers.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64, opts: &SpectralOptions) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let (inertia, labels) = kmeans_once(points, k, &mut rng, opts.max_iters);
        if best.as_ref().map_or(true, |(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.map(|(_, l)| l).unwrap_or_default()
}

fn kmeans_once(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng, max_iters: usize) -> (f64, Vec<usize>) {
    let (n, dim) = points.shape();
    let mut centers = DMatrix::zeros(k, dim);

    // k-means++
    let first = rng.random_range(0..n);
    centers.set_row(0, &points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.set_row(c, &points.row(pick));
        for (i, slot) in closest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points, i, &centers, c));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iters {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = (f64::INFINITY, 0);
            for c in 0..k {
                let d = sq_dist(points, i, &centers, c);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if *label != best.1 {
                *label = best.1;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut sums = DMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            let mut row = sums.row_mut(l);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers.set_row(c, &(sums.row(c) / counts[c] as f64));
            } else {
                // reseed an empty cluster at the point farthest from its center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(points, a, &centers, labels[a])
                            .total_cmp(&sq_dist(points, b, &centers, labels[b]))
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                centers.set_row(c, &points.row(far));
            }
        }
    }
    let inertia = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points, i, &centers, l))
        .sum();
    (inertia, labels)
}

/// Largest number of samples matched by a one-to-one pairing of predicted and
/// true labels, with the pairing itself.
pub fn best_matching(labels: &[usize], truth: &[usize]) -> Result<(usize, Vec<(usize, usize)>)> {
    if labels.len() != truth.len() {
        return Err(LrscError::DimensionMismatch {
            expected: format!("{} labels", truth.len()),
            found: format!("{}", labels.len()),
        });
    }
    if labels.is_empty() {
        return Ok((0, Vec::new()));
    }
    let index = |values: &[usize]| -> BTreeMap<usize, usize> {
        let distinct: BTreeSet<usize> = values.iter().copied().collect();
        distinct.into_iter().enumerate().map(|(i, v)| (v, i)).collect()
    };
    let pred_ids = index(labels);
    let true_ids = index(truth);
    let size = pred_ids.len().max(true_ids.len());
    let mut counts = Matrix::new(size, size, 0i64);
    for (&l, &t) in labels.iter().zip(truth) {
        counts[(pred_ids[&l], true_ids[&t])] += 1;
    }
    let (total, cols) = kuhn_munkres(&counts);

    let pred_of: Vec<usize> = pred_ids.keys().copied().collect();
    let true_of: Vec<usize> = true_ids.keys().copied().collect();
    let pairs = cols
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < pred_of.len() && c < true_of.len())
        .map(|(r, &c)| (pred_of[r], true_of[c]))
        .collect();
    Ok((total as usize, pairs))
}

/// Percentage of samples correctly labeled under the best one-to-one matching.
pub fn clustering_accuracy(labels: &[usize], truth: &[usize]) -> Result<f64> {
    let (matched, _) = best_matching(labels, truth)?;
    Ok(100.0 * matched as f64 / truth.len().max(1) as f64)
}
