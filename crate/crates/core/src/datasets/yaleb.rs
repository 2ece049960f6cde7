//! Cropped Extended Yale B faces.
//!
//! Expects one directory per subject under the dataset directory, sorted by
//! name (`yaleB01`, `yaleB02`, ...), each holding the subject's 192×168
//! grayscale PGM images. Ambient-light frames are skipped. Images are box
//! filtered to 48×42 and flattened column-major into 2016-dimensional
//! columns scaled to `[0, 1]`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::LabeledData;
use crate::error::{LrscError, Result};

pub const NATIVE_HEIGHT: usize = 192;
pub const NATIVE_WIDTH: usize = 168;
pub const FACTOR: usize = 4;
pub const HEIGHT: usize = NATIVE_HEIGHT / FACTOR;
pub const WIDTH: usize = NATIVE_WIDTH / FACTOR;
pub const IMAGES_PER_SUBJECT: usize = 64;
pub const SUBJECTS: usize = 38;

/// Subject indices (0-based, in sorted directory order) of groups 1–4.
pub fn group_subjects(group: usize) -> Result<std::ops::Range<usize>> {
    match group {
        1 => Ok(0..10),
        2 => Ok(10..20),
        3 => Ok(20..30),
        4 => Ok(30..38),
        _ => Err(LrscError::InvalidInput(format!("Yale B group must be 1-4, got {group}"))),
    }
}

/// Averages non-overlapping `factor × factor` blocks of a row-major image.
pub fn downsample_box(pixels: &[f64], height: usize, width: usize, factor: usize) -> Vec<f64> {
    let (h, w) = (height / factor, width / factor);
    let scale = 1.0 / (factor * factor) as f64;
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for dr in 0..factor {
                let row = (r * factor + dr) * width;
                for dc in 0..factor {
                    acc += pixels[row + c * factor + dc];
                }
            }
            out[r * w + c] = acc * scale;
        }
    }
    out
}

fn subject_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| LrscError::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn subject_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| LrscError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let is_pgm = p
                .extension()
                .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"));
            let ambient = p
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.contains("Ambient"));
            is_pgm && !ambient
        })
        .collect();
    files.sort();
    files.truncate(IMAGES_PER_SUBJECT);
    if files.is_empty() {
        return Err(LrscError::format(dir, "no face images found"));
    }
    Ok(files)
}

/// Reads one face and returns its downsampled column (length 2016).
pub fn load_face(path: &Path) -> Result<Vec<f64>> {
    let img = image::open(path)
        .map_err(|e| LrscError::format(path, format!("cannot decode image: {e}")))?
        .to_luma8();
    let (w, h) = img.dimensions();
    if (h as usize, w as usize) != (NATIVE_HEIGHT, NATIVE_WIDTH) {
        return Err(LrscError::format(
            path,
            format!("expected {NATIVE_HEIGHT}x{NATIVE_WIDTH} image, found {h}x{w}"),
        ));
    }
    let pixels: Vec<f64> = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    let small = downsample_box(&pixels, NATIVE_HEIGHT, NATIVE_WIDTH, FACTOR);
    // row-major small image -> column-major vector
    let mut col = vec![0.0; HEIGHT * WIDTH];
    for r in 0..HEIGHT {
        for c in 0..WIDTH {
            col[c * HEIGHT + r] = small[r * WIDTH + c];
        }
    }
    Ok(col)
}

/// Loads one of the four subject groups. Labels are the subject's position
/// within the group.
pub fn load_yaleb(root: impl AsRef<Path>, group: usize) -> Result<LabeledData> {
    let root = root.as_ref();
    let range = group_subjects(group)?;
    let dirs = subject_dirs(root)?;
    if dirs.len() < range.end {
        return Err(LrscError::format(
            root,
            format!("group {group} needs {} subject directories, found {}", range.end, dirs.len()),
        ));
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for (label, dir) in dirs[range].iter().enumerate() {
        for file in subject_images(dir)? {
            columns.push(load_face(&file)?);
            labels.push(label);
        }
    }
    let dim = HEIGHT * WIDTH;
    let x = DMatrix::from_fn(dim, columns.len(), |i, j| columns[j][i]);
    Ok(LabeledData { x, labels })
}
