//! Dataset ingestion and generation: MNIST-style IDX files, the TTEN tensor
//! container, CSV label files, seeded splits, and synthetic Gaussian class
//! datasets.
//!
//! Everything here is pinned to `f64` — the TTEN container stores scalar
//! code 1 (little-endian float64) and the IDX pixel scaling is 1/255.
//! Random choices (splits, synthetic data) use ChaCha8 seeded from the
//! caller's `u64`, so they are reproducible across platforms and runs.

use crate::error::{Error, Result};
use crate::mda::LabeledDataset;
use crate::tensor::DenseTensor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::{Read, Write};
use std::path::Path;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const TTEN_MAGIC: &[u8; 4] = b"TTEN";
const TTEN_VERSION: u8 = 1;
const TTEN_SCALAR_F64_LE: u8 = 1;

fn read_be_u32(buf: &[u8], off: usize, what: &str) -> Result<u32> {
    let end = off + 4;
    if end > buf.len() {
        return Err(Error::Format(format!(
            "truncated file: expected {what} at byte {off}, file has {} bytes",
            buf.len()
        )));
    }
    Ok(u32::from_be_bytes(buf[off..end].try_into().unwrap()))
}

/// Load an IDX image/label pair (the de-facto MNIST format, big-endian
/// header). Pixels are scaled to `[0, 1]`; the result has shape
/// `rows × cols × n` with samples along the last mode.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset<f64>> {
    let img = std::fs::read(images_path)?;
    let lab = std::fs::read(labels_path)?;

    let magic = read_be_u32(&img, 0, "image magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let n = read_be_u32(&img, 4, "image count")? as usize;
    let rows = read_be_u32(&img, 8, "row count")? as usize;
    let cols = read_be_u32(&img, 12, "column count")? as usize;
    let expected = 16 + n * rows * cols;
    if img.len() != expected {
        return Err(Error::Format(format!(
            "truncated image payload: expected {expected} bytes, got {}",
            img.len()
        )));
    }

    let lmagic = read_be_u32(&lab, 0, "label magic")?;
    if lmagic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!(
            "bad label magic {lmagic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let ln = read_be_u32(&lab, 4, "label count")? as usize;
    if lab.len() != 8 + ln {
        return Err(Error::Format(format!(
            "truncated label payload: expected {} bytes, got {}",
            8 + ln,
            lab.len()
        )));
    }
    if ln != n {
        return Err(Error::Format(format!(
            "count mismatch: {n} images but {ln} labels"
        )));
    }

    // IDX stores [n][rows][cols]; the dataset wants samples last.
    let mut data = vec![0.0f64; rows * cols * n];
    let px = &img[16..];
    for j in 0..n {
        let base = j * rows * cols;
        for f in 0..rows * cols {
            data[f * n + j] = px[base + f] as f64 / 255.0;
        }
    }
    let x = DenseTensor::from_vec(vec![rows, cols, n], data)?;
    let labels: Vec<usize> = lab[8..].iter().map(|&b| b as usize).collect();
    LabeledDataset::new(x, labels)
}

/// Save a tensor in the TTEN container: magic `TTEN`, version 1, scalar
/// code 1 (float64 LE), order, little-endian u64 extents, then the payload.
pub fn save_container(path: &Path, tensor: &DenseTensor<f64>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let mut buf = Vec::with_capacity(7 + 8 * tensor.order() + 8 * tensor.len());
    buf.extend_from_slice(TTEN_MAGIC);
    buf.push(TTEN_VERSION);
    buf.push(TTEN_SCALAR_F64_LE);
    buf.push(
        u8::try_from(tensor.order())
            .map_err(|_| Error::Format(format!("order {} exceeds u8", tensor.order())))?,
    );
    for &e in tensor.shape() {
        buf.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for &v in tensor.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Load a TTEN container; byte-exact inverse of [`save_container`].
pub fn load_container(path: &Path) -> Result<DenseTensor<f64>> {
    let mut f = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    if buf.len() < 7 {
        return Err(Error::Format(format!(
            "truncated container: {} bytes is too short for a header",
            buf.len()
        )));
    }
    if &buf[0..4] != TTEN_MAGIC {
        return Err(Error::Format("bad container magic, expected TTEN".into()));
    }
    if buf[4] != TTEN_VERSION {
        return Err(Error::Format(format!(
            "unsupported container version {} (expected {TTEN_VERSION})",
            buf[4]
        )));
    }
    if buf[5] != TTEN_SCALAR_F64_LE {
        return Err(Error::Format(format!(
            "unsupported scalar code {} (expected {TTEN_SCALAR_F64_LE} = float64 LE)",
            buf[5]
        )));
    }
    let order = buf[6] as usize;
    let header = 7 + 8 * order;
    if buf.len() < header {
        return Err(Error::Format("truncated container: extents missing".into()));
    }
    let mut shape = Vec::with_capacity(order);
    for k in 0..order {
        let off = 7 + 8 * k;
        let e = u64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
        shape.push(usize::try_from(e).map_err(|_| Error::Format("extent overflow".into()))?);
    }
    let count: usize = shape.iter().product();
    let expected = header + 8 * count;
    if buf.len() != expected {
        return Err(Error::Format(format!(
            "payload length mismatch: expected {expected} bytes total, got {}",
            buf.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for k in 0..count {
        let off = header + 8 * k;
        data.push(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()));
    }
    DenseTensor::from_vec(shape, data)
}

/// Write labels as `index,label` CSV (header row, UTF-8, LF endings).
pub fn save_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::from("index,label\n");
    for (i, &l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read an `index,label` CSV; indices must cover `0..n` exactly.
pub fn load_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("index,label") => {}
        other => {
            return Err(Error::Format(format!(
                "label CSV must start with 'index,label', got {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (idx, lab) = line.split_once(',').ok_or_else(|| {
            Error::Format(format!("label CSV line {}: missing comma", lineno + 2))
        })?;
        let idx: usize = idx.trim().parse().map_err(|_| {
            Error::Format(format!("label CSV line {}: bad index {idx:?}", lineno + 2))
        })?;
        let lab: usize = lab.trim().parse().map_err(|_| {
            Error::Format(format!("label CSV line {}: bad label {lab:?}", lineno + 2))
        })?;
        rows.push((idx, lab));
    }
    let n = rows.len();
    let mut labels = vec![usize::MAX; n];
    for (idx, lab) in rows {
        if idx >= n || labels[idx] != usize::MAX {
            return Err(Error::Format(format!(
                "label CSV indices must cover 0..{n} exactly (index {idx})"
            )));
        }
        labels[idx] = lab;
    }
    Ok(labels)
}

/// Split rule: a fixed per-class train count (stratified) or a global
/// train fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    PerClass(usize),
    Fraction(f64),
}

/// Seeded, reproducible train/test split specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub rule: SplitRule,
    pub seed: u64,
}

/// Split a dataset into disjoint, exhaustive train/test parts. Per-class
/// counts give a stratified split; a fraction splits globally. Sample order
/// within each part is ascending by original index.
pub fn split(
    ds: &LabeledDataset<f64>,
    spec: &SplitSpec,
) -> Result<(LabeledDataset<f64>, LabeledDataset<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_idx: Vec<usize> = Vec::new();
    let mut test_idx: Vec<usize> = Vec::new();
    match spec.rule {
        SplitRule::PerClass(k) => {
            if k == 0 {
                return Err(Error::InvalidArgument("per-class train count must be ≥ 1".into()));
            }
            for class in 0..ds.n_classes() {
                let mut idx = ds.class_indices(class);
                if k > idx.len() {
                    return Err(Error::InvalidArgument(format!(
                        "class {class} has {} samples, cannot take {k} for training",
                        idx.len()
                    )));
                }
                idx.shuffle(&mut rng);
                train_idx.extend_from_slice(&idx[..k]);
                test_idx.extend_from_slice(&idx[k..]);
            }
        }
        SplitRule::Fraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "train fraction must lie in (0, 1), got {f}"
                )));
            }
            let n = ds.n();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let k = ((f * n as f64).round() as usize).clamp(1, n - 1);
            train_idx.extend_from_slice(&idx[..k]);
            test_idx.extend_from_slice(&idx[k..]);
        }
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    if test_idx.is_empty() {
        return Err(Error::InvalidArgument("split leaves no test samples".into()));
    }
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?))
}

/// Seeded stratified subsample: keep `per_class` samples of every class
/// (used to cap a large pool before splitting).
pub fn stratified_subsample(
    ds: &LabeledDataset<f64>,
    per_class: usize,
    seed: u64,
) -> Result<LabeledDataset<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = Vec::new();
    for class in 0..ds.n_classes() {
        let mut idx = ds.class_indices(class);
        if per_class > idx.len() {
            return Err(Error::InvalidArgument(format!(
                "class {class} has {} samples, cannot keep {per_class}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        keep.extend_from_slice(&idx[..per_class]);
    }
    keep.sort_unstable();
    ds.subset(&keep)
}

/// Synthetic Gaussian class dataset: class `j` is centered at
/// `separation · e_{j mod D}` in the flattened feature space with isotropic
/// noise of the given standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub per_class: usize,
    pub feature_shape: Vec<usize>,
    pub separation: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

pub fn synth_gaussian_classes(spec: &SynthSpec) -> Result<LabeledDataset<f64>> {
    if spec.classes < 2 {
        return Err(Error::InvalidArgument("need at least 2 classes".into()));
    }
    if spec.per_class == 0 {
        return Err(Error::InvalidArgument("need at least 1 sample per class".into()));
    }
    if spec.feature_shape.is_empty() || spec.feature_shape.iter().any(|&e| e == 0) {
        return Err(Error::InvalidArgument(format!(
            "bad feature shape {:?}",
            spec.feature_shape
        )));
    }
    if spec.separation < 0.0 || spec.noise_sd < 0.0 {
        return Err(Error::InvalidArgument(
            "separation and noise must be nonnegative".into(),
        ));
    }
    let dim: usize = spec.feature_shape.iter().product();
    let n = spec.classes * spec.per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = vec![0.0f64; dim * n];
    let mut labels = Vec::with_capacity(n);
    let mut j = 0usize;
    for class in 0..spec.classes {
        let hot = class % dim;
        for _ in 0..spec.per_class {
            for f in 0..dim {
                let mean = if f == hot { spec.separation } else { 0.0 };
                let noise: f64 = rng.sample(StandardNormal);
                data[f * n + j] = mean + spec.noise_sd * noise;
            }
            labels.push(class);
            j += 1;
        }
    }
    let mut shape = spec.feature_shape.clone();
    shape.push(n);
    LabeledDataset::new(DenseTensor::from_vec(shape, data)?, labels)
}
