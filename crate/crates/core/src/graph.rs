//! K-nearest-neighbour similarity graphs and unnormalized Laplacians.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LrscError, Result};

/// How the (generally asymmetric) KNN similarity is made symmetric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrization {
    /// `max(W, W^T)`: keep an edge if either endpoint lists the other.
    #[default]
    MutualMax,
    /// `(W + W^T) / 2`.
    Average,
    /// Leave `W` as built.
    None,
}

impl Symmetrization {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetrization::MutualMax => "mutual-max",
            Symmetrization::Average => "average",
            Symmetrization::None => "none",
        }
    }
}

impl fmt::Display for Symmetrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Symmetrization {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mutual-max" | "max" => Ok(Symmetrization::MutualMax),
            "average" | "avg" => Ok(Symmetrization::Average),
            "none" => Ok(Symmetrization::None),
            _ => Err(LrscError::InvalidInput(format!(
                "unknown symmetrization {s:?} (expected mutual-max|average|none)"
            ))),
        }
    }
}

/// Similarity `W`, degrees `D_ii = sum_j W_ij` and Laplacian `L = D - W`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphModel {
    pub similarity: DMatrix<f64>,
    pub degrees: DVector<f64>,
    pub laplacian: DMatrix<f64>,
    pub k: usize,
    pub symmetrization: Symmetrization,
}

impl GraphModel {
    /// Builds `D` and `L` from an already symmetrized (or deliberately
    /// asymmetric) similarity matrix.
    pub fn from_similarity(similarity: DMatrix<f64>, k: usize, symmetrization: Symmetrization) -> Self {
        let (degrees, laplacian) = laplacian(&similarity);
        GraphModel {
            similarity,
            degrees,
            laplacian,
            k,
            symmetrization,
        }
    }

    pub fn len(&self) -> usize {
        self.similarity.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.degrees)
    }

    /// Writes `W` as `row col value` triplets under a `#` header line.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# n={} k={} symmetrization={}",
            self.len(),
            self.k,
            self.symmetrization
        )?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let w = self.similarity[(i, j)];
                if w != 0.0 {
                    writeln!(out, "{i} {j} {w}")?;
                }
            }
        }
        Ok(())
    }

    /// Inverse of [`GraphModel::write_triplets`].
    pub fn read_triplets<R: BufRead>(input: R) -> Result<GraphModel> {
        let src = std::path::PathBuf::from("<graph>");
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| LrscError::format(&src, "empty graph file"))?
            .map_err(|e| LrscError::io(&src, e))?;
        let mut n = None;
        let mut k = 0;
        let mut policy = Symmetrization::None;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse().ok(),
                Some(("k", v)) => k = v.parse().map_err(|_| LrscError::format(&src, "bad k"))?,
                Some(("symmetrization", v)) => policy = v.parse()?,
                _ => {}
            }
        }
        let n: usize = n.ok_or_else(|| LrscError::format(&src, "header is missing n="))?;
        let mut w = DMatrix::zeros(n, n);
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| LrscError::io(&src, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                [r, c, v] => r
                    .parse::<usize>()
                    .ok()
                    .zip(c.parse::<usize>().ok())
                    .zip(v.parse::<f64>().ok()),
                _ => None,
            };
            let ((r, c), v) = parsed
                .filter(|((r, c), _)| *r < n && *c < n)
                .ok_or_else(|| LrscError::format(&src, format!("bad triplet on line {}", lineno + 2)))?;
            w[(r, c)] = v;
        }
        Ok(GraphModel::from_similarity(w, k, policy))
    }
}

/// Binary KNN similarity over the columns of `x`: `W_ij = 1` iff `x_j` is one
/// of the `k` nearest neighbours of `x_i` (Euclidean, `i` excluded). Equal
/// distances go to the smaller column index.
pub fn knn_similarity(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = x.ncols();
    if k == 0 || k >= n {
        return Err(LrscError::InvalidInput(format!(
            "neighbour count k = {k} must satisfy 1 <= k < n = {n}"
        )));
    }
    let mut w = DMatrix::zeros(n, n);
    let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        dists.clear();
        let xi = x.column(i);
        for j in (0..n).filter(|&j| j != i) {
            let d: f64 = xi
                .iter()
                .zip(x.column(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push((d, j));
        }
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in dists.iter().take(k) {
            w[(i, j)] = 1.0;
        }
    }
    Ok(w)
}

pub fn symmetrize(w: &DMatrix<f64>, policy: Symmetrization) -> DMatrix<f64> {
    match policy {
        Symmetrization::MutualMax => w.zip_map(&w.transpose(), f64::max),
        Symmetrization::Average => (w + w.transpose()) * 0.5,
        Symmetrization::None => w.clone(),
    }
}

/// Row-sum degrees and `L = D - W`.
pub fn laplacian(w: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = w.nrows();
    let degrees = DVector::from_fn(n, |i, _| w.row(i).sum());
    let mut l = -w.clone();
    for i in 0..n {
        l[(i, i)] += degrees[i];
    }
    (degrees, l)
}

/// KNN similarity, symmetrized, with its Laplacian.
pub fn build_graph(x: &DMatrix<f64>, k: usize, policy: Symmetrization) -> Result<GraphModel> {
    let w = knn_similarity(x, k)?;
    Ok(GraphModel::from_similarity(symmetrize(&w, policy), k, policy))
}
