mod common;

use std::fs;
use std::path::Path;

use lrsc::datasets::mnist::{parse_idx_images, parse_idx_labels};
use lrsc::datasets::usps::parse_usps;
use lrsc::datasets::yaleb::{self, load_face};
use lrsc::datasets::{
    dataset_root, generate_synthetic, load_mnist, load_mnist_subset, load_usps, load_usps_subset, load_yaleb,
    read_labels, read_matrix, write_labels, write_matrix, Split, Subsample, SyntheticSpec,
};
use lrsc::LrscError;
use proptest::prelude::*;

fn pgm(height: usize, width: usize, value: impl Fn(usize, usize) -> u8) -> Vec<u8> {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    for r in 0..height {
        for c in 0..width {
            bytes.push(value(r, c));
        }
    }
    bytes
}

fn face_value(subject: usize, image: usize) -> impl Fn(usize, usize) -> u8 {
    move |r, c| ((subject * 31 + image * 7 + r * 3 + c) % 256) as u8
}

/// 38 subject directories; only the last eight (group 4) get images.
fn yale_fixture(root: &Path) {
    for s in 0..38 {
        let dir = root.join(format!("yaleB{:02}", s + 1));
        fs::create_dir_all(&dir).unwrap();
        if s < 30 {
            continue;
        }
        for i in 0..64 {
            let name = format!("yaleB{:02}_P00A{:03}.pgm", s + 1, i);
            fs::write(dir.join(name), pgm(192, 168, face_value(s, i))).unwrap();
        }
        fs::write(dir.join(format!("yaleB{:02}_P00_Ambient.pgm", s + 1)), pgm(192, 168, |_, _| 255)).unwrap();
    }
}

/// Box average of the fixture image at downsampled pixel `(r, c)`.
fn expected_pixel(subject: usize, image: usize, r: usize, c: usize) -> f64 {
    let f = face_value(subject, image);
    let mut acc = 0.0;
    for dr in 0..4 {
        for dc in 0..4 {
            acc += f(4 * r + dr, 4 * c + dc) as f64;
        }
    }
    acc / 16.0 / 255.0
}

#[test]
fn yale_group_four_shape_and_content() {
    let dir = tempfile::tempdir().unwrap();
    yale_fixture(dir.path());
    let data = load_yaleb(dir.path(), 4).unwrap();
    assert_eq!(data.x.shape(), (2016, 512));
    assert_eq!(data.labels.len(), 512);
    assert_eq!(data.class_count(), 8);
    for (j, &l) in data.labels.iter().enumerate() {
        assert_eq!(l, j / 64);
    }
    // column-major flattening of the 48x42 image
    for &(j, r, c) in &[(0, 0, 0), (5, 47, 41), (130, 10, 3), (511, 20, 40)] {
        let got = data.x[(c * 48 + r, j)];
        let want = expected_pixel(30 + j / 64, j % 64, r, c);
        assert!((got - want).abs() < 1e-12, "column {j} pixel ({r},{c}): {got} vs {want}");
    }
    assert!(data.x.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn yale_missing_images_and_groups_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    yale_fixture(dir.path());
    // groups 1-3 point at empty subject directories
    let err = load_yaleb(dir.path(), 1).unwrap_err();
    assert!(err.to_string().contains("yaleB01"), "{err}");
    assert!(load_yaleb(dir.path(), 5).is_err());
    assert!(load_yaleb(dir.path().join("absent"), 4).is_err());
}

#[test]
fn yale_rejects_wrong_image_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.pgm");
    fs::write(&path, pgm(96, 84, |_, _| 10)).unwrap();
    let err = load_face(&path).unwrap_err();
    assert!(matches!(err, LrscError::Format { .. }));
    assert!(err.to_string().contains("small.pgm"));
}

#[test]
fn constant_face_downsamples_to_constant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.pgm");
    fs::write(&path, pgm(192, 168, |_, _| 51)).unwrap();
    let col = load_face(&path).unwrap();
    assert_eq!(col.len(), yaleb::HEIGHT * yaleb::WIDTH);
    assert!(col.iter().all(|&v| (v - 0.2).abs() < 1e-12));
}

fn idx_images(count: usize, rows: usize, cols: usize) -> Vec<u8> {
    let mut b = 2051u32.to_be_bytes().to_vec();
    for d in [count, rows, cols] {
        b.extend((d as u32).to_be_bytes());
    }
    b.extend((0..count * rows * cols).map(|i| (i % 256) as u8));
    b
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut b = 2049u32.to_be_bytes().to_vec();
    b.extend((labels.len() as u32).to_be_bytes());
    b.extend_from_slice(labels);
    b
}

#[test]
fn mnist_fixture_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<u8> = (0..40).map(|i| (i % 10) as u8).collect();
    fs::write(dir.path().join("t10k-images-idx3-ubyte"), idx_images(40, 28, 28)).unwrap();
    fs::write(dir.path().join("t10k-labels-idx1-ubyte"), idx_labels(&labels)).unwrap();
    let data = load_mnist(dir.path(), Split::Test).unwrap();
    assert_eq!(data.x.shape(), (784, 40));
    assert_eq!(data.labels[13], 3);
    assert!(data.x.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(data.x.iter().any(|&v| v == 1.0));

    let sub = load_mnist_subset(dir.path(), Split::Test, &Subsample { per_class: 4, seed: None }).unwrap();
    assert_eq!(sub.x.ncols(), 40);
    let sub = load_mnist_subset(dir.path(), Split::Test, &Subsample { per_class: 2, seed: Some(3) }).unwrap();
    assert_eq!(sub.x.ncols(), 20);
    for c in 0..10 {
        assert_eq!(sub.labels.iter().filter(|&&l| l == c).count(), 2);
    }
    assert!(load_mnist_subset(dir.path(), Split::Test, &Subsample { per_class: 5, seed: None }).is_err());
    // the train split is absent
    assert!(matches!(load_mnist(dir.path(), Split::Train), Err(LrscError::Io { .. })));
}

#[test]
fn mnist_accepts_dotted_file_names() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train-images.idx3-ubyte"), idx_images(3, 2, 2)).unwrap();
    fs::write(dir.path().join("train-labels.idx1-ubyte"), idx_labels(&[1, 2, 3])).unwrap();
    let data = load_mnist(dir.path(), Split::Train).unwrap();
    assert_eq!(data.x.shape(), (4, 3));
}

#[test]
fn mnist_format_errors() {
    let p = Path::new("fixture");
    let mut bad_magic = idx_images(2, 2, 2);
    bad_magic[3] = 0x01;
    assert!(parse_idx_images(&bad_magic, p).is_err());
    let truncated = idx_images(2, 2, 2);
    assert!(parse_idx_images(&truncated[..truncated.len() - 1], p).is_err());
    assert!(parse_idx_images(&truncated[..10], p).is_err());
    assert!(parse_idx_labels(&idx_labels(&[1, 10]), p).is_err());
    assert!(parse_idx_labels(&idx_images(1, 1, 1), p).is_err());
    let short = idx_labels(&[1, 2, 3]);
    assert!(parse_idx_labels(&short[..short.len() - 1], p).is_err());

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train-images-idx3-ubyte"), idx_images(3, 2, 2)).unwrap();
    fs::write(dir.path().join("train-labels-idx1-ubyte"), idx_labels(&[1, 2])).unwrap();
    assert!(load_mnist(dir.path(), Split::Train).is_err());
}

fn usps_line(label: usize, value: f64) -> String {
    let mut line = format!("{label}.0000");
    for _ in 0..256 {
        line.push_str(&format!(" {value}"));
    }
    line
}

#[test]
fn usps_fixture_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let text: Vec<String> = (0..30).map(|i| usps_line(i % 10, if i % 2 == 0 { -1.0 } else { 1.0 })).collect();
    fs::write(dir.path().join("zip.test"), text.join("\n") + "\n").unwrap();
    let data = load_usps(dir.path(), Split::Test).unwrap();
    assert_eq!(data.x.shape(), (256, 30));
    assert_eq!(data.labels[17], 7);
    assert!(data.x.column(0).iter().all(|&v| v == 0.0));
    assert!(data.x.column(1).iter().all(|&v| v == 1.0));
    let sub = load_usps_subset(dir.path(), Split::Test, &Subsample { per_class: 3, seed: None }).unwrap();
    assert_eq!(sub.x.ncols(), 30);
    assert!(load_usps(dir.path(), Split::Train).is_err());
}

#[test]
fn usps_format_errors() {
    let p = Path::new("fixture");
    assert!(parse_usps(&usps_line(10, 0.0), p).is_err());
    assert!(parse_usps(&usps_line(3, 0.0).replacen("3.0000", "3.5", 1), p).is_err());
    assert!(parse_usps("1 0.5 0.5", p).is_err());
    assert!(parse_usps(&usps_line(3, 0.0).replace(" 0 ", " x "), p).is_err());
    assert_eq!(parse_usps("\n\n", p).unwrap().x.ncols(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthetic_matrix_round_trip_is_bit_identical(seed in 0u64..1000, p in 3usize..12, d in 1usize..3) {
        let spec = SyntheticSpec {
            ambient_dim: p,
            subspace_dims: vec![d, d],
            points_per_subspace: vec![5, 7],
            noise_sigma: 0.1,
            corruption_fraction: 0.1,
            corruption_magnitude: 2.0,
            seed,
            ..SyntheticSpec::default()
        };
        let data = generate_synthetic(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_matrix(dir.path().join("x.lrsm"), &data.x).unwrap();
        write_labels(dir.path().join("y.txt"), &data.labels).unwrap();
        let x = read_matrix(dir.path().join("x.lrsm")).unwrap();
        prop_assert_eq!(x.shape(), data.x.shape());
        prop_assert!(x.iter().zip(data.x.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(read_labels(dir.path().join("y.txt")).unwrap(), data.labels);
    }

    #[test]
    fn synthetic_is_deterministic_and_ordered(seed in 0u64..1000) {
        let spec = SyntheticSpec {
            ambient_dim: 10,
            subspace_dims: vec![2, 3, 1],
            points_per_subspace: vec![4, 6, 3],
            seed,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(&a.labels, &vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2]);
        // each column lies in its own subspace
        for (j, &l) in a.labels.iter().enumerate() {
            let basis = &a.bases[l];
            let col = a.clean.column(j);
            let resid = col - basis * (basis.transpose() * col);
            prop_assert!(resid.amax() < 1e-10);
        }
    }

    #[test]
    fn box_filter_preserves_mean(seed in 0u64..1000, scale in 1usize..4) {
        let (h, w) = (4 * scale * 3, 4 * scale * 2);
        let mut r = common::rng(seed);
        let pixels: Vec<f64> = (0..h * w).map(|_| rand::Rng::random_range(&mut r, 0.0..1.0)).collect();
        let small = lrsc::datasets::downsample_box(&pixels, h, w, 4);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!((mean(&pixels) - mean(&small)).abs() < 1e-6);
    }
}

#[test]
fn orthogonal_subspaces_have_right_principal_angles() {
    let spec = SyntheticSpec {
        ambient_dim: 20,
        subspace_dims: vec![3, 3],
        points_per_subspace: vec![20, 20],
        orthogonal: true,
        seed: 4,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec).unwrap();
    // principal angles from the SVD of Q1^T Q2 of the recovered column spaces
    let q = |cols: std::ops::Range<usize>| {
        let block = data.clean.columns(cols.start, cols.len()).into_owned();
        nalgebra::linalg::QR::new(block).q().columns(0, 3).into_owned()
    };
    let cos = nalgebra::linalg::SVD::new(q(0..20).transpose() * q(20..40), false, false).singular_values;
    assert!(cos.amax() < 1e-10, "{cos}");
}

#[test]
fn noiseless_synthetic_is_low_rank() {
    let spec = SyntheticSpec {
        ambient_dim: 30,
        subspace_dims: vec![2, 3],
        points_per_subspace: vec![10, 10],
        seed: 1,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic(&spec).unwrap();
    assert_eq!(data.x, data.clean);
    let sv = nalgebra::linalg::SVD::new(data.x.clone(), false, false).singular_values;
    assert!(sv.iter().filter(|&&s| s > 1e-9 * sv[0]).count() <= 5);
}

// Real data, only when DATASET_ROOT points at it.

fn real(sub: &str) -> Option<std::path::PathBuf> {
    let dir = dataset_root()?.join(sub);
    if dir.exists() {
        Some(dir)
    } else {
        eprintln!("skipping: {} not present", dir.display());
        None
    }
}

#[test]
fn real_yale_groups() {
    let Some(dir) = real("yaleb") else { return };
    assert_eq!(load_yaleb(&dir, 1).unwrap().x.shape(), (2016, 640));
    assert_eq!(load_yaleb(&dir, 4).unwrap().x.shape(), (2016, 512));
}

#[test]
fn real_mnist_and_usps_sizes() {
    if let Some(dir) = real("mnist") {
        assert_eq!(load_mnist(&dir, Split::Train).unwrap().x.ncols(), 60000);
        let sub = load_mnist_subset(&dir, Split::Test, &Subsample::default()).unwrap();
        assert_eq!(sub.x.shape(), (784, 100));
    }
    if let Some(dir) = real("usps") {
        assert_eq!(load_usps(&dir, Split::Test).unwrap().x.shape(), (256, 2007));
        assert_eq!(load_usps(&dir, Split::Train).unwrap().x.ncols(), 7291);
    }
}
