//! USPS digits in the whitespace-delimited `label v1 ... v256` text format,
//! pixel values in `[-1, 1]`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{select_per_class, LabeledData, Split, Subsample};
use crate::error::{LrscError, Result};

pub const DIMENSION: usize = 256;

pub fn parse_usps(text: &str, path: &Path) -> Result<LabeledData> {
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(first) = fields.next() else { continue };
        let bad = |m: String| LrscError::format(path, format!("line {}: {m}", lineno + 1));
        let label: f64 = first.parse().map_err(|_| bad(format!("bad label {first:?}")))?;
        if label.fract() != 0.0 || !(0.0..=9.0).contains(&label) {
            return Err(bad(format!("label {label} outside 0-9")));
        }
        let pixels: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map(|v| (v + 1.0) / 2.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad pixel value".into()))?;
        if pixels.len() != DIMENSION {
            return Err(bad(format!("{} pixel values, expected {DIMENSION}", pixels.len())));
        }
        columns.push(pixels);
        labels.push(label as usize);
    }
    let x = DMatrix::from_fn(DIMENSION, columns.len(), |i, j| columns[j][i]);
    Ok(LabeledData { x, labels })
}

fn split_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(match split {
        Split::Train => "zip.train",
        Split::Test => "zip.test",
    })
}

pub fn load_usps(dir: impl AsRef<Path>, split: Split) -> Result<LabeledData> {
    let path = split_path(dir.as_ref(), split);
    let text = fs::read_to_string(&path).map_err(|e| LrscError::io(&path, e))?;
    parse_usps(&text, &path)
}

pub fn load_usps_subset(dir: impl AsRef<Path>, split: Split, sub: &Subsample) -> Result<LabeledData> {
    let all = load_usps(dir, split)?;
    let picked = select_per_class(&all.labels, sub)?;
    let x = all.x.select_columns(picked.iter());
    let labels = picked.iter().map(|&i| all.labels[i]).collect();
    Ok(LabeledData { x, labels })
}
