//! MNIST in its IDX binary format (uncompressed).

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{select_per_class, LabeledData, Split, Subsample};
use crate::error::{LrscError, Result};

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;

/// Raw pixels and labels of one split.
#[derive(Clone, Debug)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl IdxImages {
    pub fn dimension(&self) -> usize {
        self.rows * self.cols
    }

    /// Selected images as `[0, 1]`-scaled columns (row-major pixel order).
    pub fn columns(&self, indices: &[usize]) -> LabeledData {
        let dim = self.dimension();
        let x = DMatrix::from_fn(dim, indices.len(), |i, j| {
            self.pixels[indices[j] * dim + i] as f64 / 255.0
        });
        let labels = indices.iter().map(|&i| self.labels[i] as usize).collect();
        LabeledData { x, labels }
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| LrscError::format(path, "truncated IDX header"))
}

pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<(usize, usize, usize, Vec<u8>)> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != IMAGES_MAGIC {
        return Err(LrscError::format(path, format!("image magic {magic}, expected {IMAGES_MAGIC}")));
    }
    let count = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let need = count * rows * cols;
    let data = &bytes[16..];
    if data.len() < need {
        return Err(LrscError::format(
            path,
            format!("truncated image data: {} of {need} bytes", data.len()),
        ));
    }
    Ok((count, rows, cols, data[..need].to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != LABELS_MAGIC {
        return Err(LrscError::format(path, format!("label magic {magic}, expected {LABELS_MAGIC}")));
    }
    let count = be_u32(bytes, 4, path)? as usize;
    let data = &bytes[8..];
    if data.len() < count {
        return Err(LrscError::format(
            path,
            format!("truncated label data: {} of {count} bytes", data.len()),
        ));
    }
    let labels = data[..count].to_vec();
    if let Some(pos) = labels.iter().position(|&l| l > 9) {
        return Err(LrscError::format(path, format!("label {} at index {pos} outside 0-9", labels[pos])));
    }
    Ok(labels)
}

fn split_paths(dir: &Path, split: Split) -> (PathBuf, PathBuf) {
    let prefix = match split {
        Split::Train => "train",
        Split::Test => "t10k",
    };
    let pick = |kind: &str| {
        let dashed = dir.join(format!("{prefix}-{kind}"));
        let dotted = dir.join(format!("{prefix}-{}", kind.replacen("-idx", ".idx", 1)));
        if !dashed.exists() && dotted.exists() {
            dotted
        } else {
            dashed
        }
    };
    (pick("images-idx3-ubyte"), pick("labels-idx1-ubyte"))
}

pub fn read_idx_split(dir: impl AsRef<Path>, split: Split) -> Result<IdxImages> {
    let (img_path, lbl_path) = split_paths(dir.as_ref(), split);
    let img_bytes = fs::read(&img_path).map_err(|e| LrscError::io(&img_path, e))?;
    let lbl_bytes = fs::read(&lbl_path).map_err(|e| LrscError::io(&lbl_path, e))?;
    let (count, rows, cols, pixels) = parse_idx_images(&img_bytes, &img_path)?;
    let labels = parse_idx_labels(&lbl_bytes, &lbl_path)?;
    if labels.len() != count {
        return Err(LrscError::format(
            &lbl_path,
            format!("{} labels for {count} images", labels.len()),
        ));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
        labels,
    })
}

/// Whole split as a `784 × count` matrix.
pub fn load_mnist(dir: impl AsRef<Path>, split: Split) -> Result<LabeledData> {
    let raw = read_idx_split(dir, split)?;
    let all: Vec<usize> = (0..raw.count).collect();
    Ok(raw.columns(&all))
}

/// `per_class` samples of each digit, without materializing the whole split.
pub fn load_mnist_subset(dir: impl AsRef<Path>, split: Split, sub: &Subsample) -> Result<LabeledData> {
    let raw = read_idx_split(dir, split)?;
    let labels: Vec<usize> = raw.labels.iter().map(|&l| l as usize).collect();
    let picked = select_per_class(&labels, sub)?;
    Ok(raw.columns(&picked))
}
