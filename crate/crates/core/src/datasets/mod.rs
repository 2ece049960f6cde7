//! Synthetic and real datasets.
//!
//! Real datasets are user supplied. The loaders look under a dataset root
//! (the `DATASET_ROOT` environment variable unless a path is given):
//!
//! ```text
//! $DATASET_ROOT/yaleb/yaleB01/*.pgm ...   cropped Extended Yale B, 192x168
//! $DATASET_ROOT/mnist/train-images-idx3-ubyte, train-labels-idx1-ubyte,
//!                     t10k-images-idx3-ubyte,  t10k-labels-idx1-ubyte
//! $DATASET_ROOT/usps/zip.train, zip.test
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LrscError, Result};

pub mod matrix_io;
pub mod mnist;
pub mod synthetic;
pub mod usps;
pub mod yaleb;

pub use matrix_io::{read_labels, read_matrix, write_labels, write_matrix};
pub use mnist::{load_mnist, load_mnist_subset};
pub use synthetic::{generate_synthetic, SyntheticData, SyntheticSpec};
pub use usps::{load_usps, load_usps_subset};
pub use yaleb::{downsample_box, load_yaleb};

pub const DATASET_ROOT_ENV: &str = "DATASET_ROOT";

/// `DATASET_ROOT` if set and non-empty.
pub fn dataset_root() -> Option<PathBuf> {
    std::env::var_os(DATASET_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Samples as columns with one ground-truth label per column.
#[derive(Clone, Debug)]
pub struct LabeledData {
    pub x: DMatrix<f64>,
    pub labels: Vec<usize>,
}

impl LabeledData {
    pub fn class_count(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = LrscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(LrscError::InvalidInput(format!("unknown split {s:?} (expected train|test)"))),
        }
    }
}

/// Static facts about a real dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetDescriptor {
    pub name: &'static str,
    pub train_samples: Option<usize>,
    pub test_samples: usize,
    /// Native image size as `(height, width)`.
    pub image_size: (usize, usize),
    pub class_count: usize,
    pub source_paths: Vec<&'static str>,
}

impl DatasetDescriptor {
    pub fn dimension(&self) -> usize {
        self.image_size.0 * self.image_size.1
    }

    pub fn yale_b() -> Self {
        DatasetDescriptor {
            name: "Extended Yale B",
            train_samples: None,
            test_samples: 2432,
            image_size: (192, 168),
            class_count: 38,
            source_paths: vec!["yaleb"],
        }
    }

    pub fn mnist() -> Self {
        DatasetDescriptor {
            name: "MNIST",
            train_samples: Some(60000),
            test_samples: 10000,
            image_size: (28, 28),
            class_count: 10,
            source_paths: vec![
                "mnist/train-images-idx3-ubyte",
                "mnist/train-labels-idx1-ubyte",
                "mnist/t10k-images-idx3-ubyte",
                "mnist/t10k-labels-idx1-ubyte",
            ],
        }
    }

    pub fn usps() -> Self {
        DatasetDescriptor {
            name: "USPS",
            train_samples: Some(7291),
            test_samples: 2007,
            image_size: (16, 16),
            class_count: 10,
            source_paths: vec!["usps/zip.train", "usps/zip.test"],
        }
    }
}

/// How many samples per class to keep, and how to pick them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Subsample {
    pub per_class: usize,
    /// `None` takes the first samples of each class in file order.
    pub seed: Option<u64>,
}

impl Default for Subsample {
    fn default() -> Self {
        Subsample {
            per_class: 10,
            seed: None,
        }
    }
}

/// Indices of the selected samples, grouped by ascending class.
pub fn select_per_class(labels: &[usize], sub: &Subsample) -> Result<Vec<usize>> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = sub.seed.map(ChaCha8Rng::seed_from_u64);
    let mut out = Vec::with_capacity(by_class.len() * sub.per_class);
    for (class, mut members) in by_class {
        if members.len() < sub.per_class {
            return Err(LrscError::InvalidInput(format!(
                "class {class} has {} samples, {} requested",
                members.len(),
                sub.per_class
            )));
        }
        if let Some(rng) = rng.as_mut() {
            members.shuffle(rng);
            let mut chosen = members[..sub.per_class].to_vec();
            chosen.sort_unstable();
            out.extend(chosen);
        } else {
            out.extend_from_slice(&members[..sub.per_class]);
        }
    }
    Ok(out)
}
