//! MNIST domain types: raw splits, graded digit-pair tasks, and the two
//! input corruptors used by the robustness experiments.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::mat::Mat;
use crate::rng::{seeded, NormalSampler};

/// Flattened image width: 28 x 28 pixels.
pub const INPUT_DIM: usize = 784;
pub const IMAGE_SIDE: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => f.write_str("train"),
            Split::Test => f.write_str("test"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    BadDimensions { rows: usize, cols: usize },
    LengthMismatch { images: usize, labels: usize },
    BadLabel(u8),
    BadIntensity(f64),
    InvalidPair { lo: u8, hi: u8 },
    EmptyClass { digit: u8, split: Split },
    BadSigma(f64),
    BadPatch(usize),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::BadDimensions { rows, cols } => {
                write!(f, "expected Nx{INPUT_DIM} images, got {rows}x{cols}")
            }
            DataError::LengthMismatch { images, labels } => {
                write!(f, "{images} images but {labels} labels")
            }
            DataError::BadLabel(l) => write!(f, "label {l} outside 0-9"),
            DataError::BadIntensity(v) => write!(f, "pixel intensity {v} outside [0, 1]"),
            DataError::InvalidPair { lo, hi } => write!(f, "invalid digit pair ({lo}, {hi})"),
            DataError::EmptyClass { digit, split } => {
                write!(f, "digit {digit} absent from the {split} split")
            }
            DataError::BadSigma(s) => write!(f, "noise sigma {s} must be finite and >= 0"),
            DataError::BadPatch(p) => write!(f, "occlusion patch {p} outside 1-{IMAGE_SIDE}"),
        }
    }
}

impl core::error::Error for DataError {}

/// A full MNIST split: normalized images plus digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMnist {
    images: Mat,
    labels: Vec<u8>,
    split: Split,
}

impl RawMnist {
    /// Validates shapes, label range, and intensity range.
    pub fn new(images: Mat, labels: Vec<u8>, split: Split) -> Result<Self, DataError> {
        if images.cols() != INPUT_DIM {
            return Err(DataError::BadDimensions {
                rows: images.rows(),
                cols: images.cols(),
            });
        }
        if images.rows() != labels.len() {
            return Err(DataError::LengthMismatch {
                images: images.rows(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 9) {
            return Err(DataError::BadLabel(bad));
        }
        if let Some(&bad) = images
            .as_slice()
            .iter()
            .find(|&&v| !(0.0..=1.0).contains(&v))
        {
            return Err(DataError::BadIntensity(bad));
        }
        Ok(RawMnist {
            images,
            labels,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn images(&self) -> &Mat {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn split(&self) -> Split {
        self.split
    }
}

/// Ordered digit pair; `lo` maps to class 0 and `hi` to class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitPair {
    lo: u8,
    hi: u8,
}

impl DigitPair {
    /// The five pairs studied, ordered easiest to hardest.
    pub const CANONICAL: [DigitPair; 5] = [
        DigitPair { lo: 0, hi: 1 },
        DigitPair { lo: 1, hi: 7 },
        DigitPair { lo: 5, hi: 6 },
        DigitPair { lo: 3, hi: 8 },
        DigitPair { lo: 4, hi: 9 },
    ];

    pub fn new(lo: u8, hi: u8) -> Result<Self, DataError> {
        if lo > 9 || hi > 9 || lo == hi {
            return Err(DataError::InvalidPair { lo, hi });
        }
        Ok(DigitPair { lo, hi })
    }

    pub fn lo(&self) -> u8 {
        self.lo
    }

    pub fn hi(&self) -> u8 {
        self.hi
    }
}

impl fmt::Display for DigitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}v{}", self.lo, self.hi)
    }
}

/// A binary classification task drawn from one digit pair.
///
/// The validation split is the official MNIST test split filtered to the
/// pair. Original sample ordering is preserved in both splits.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTask {
    pair: DigitPair,
    train_x: Mat,
    train_y: Vec<u8>,
    val_x: Mat,
    val_y: Vec<u8>,
}

impl BinaryTask {
    /// Assembles a task from pre-filtered parts, validating the label
    /// contract: values in `{0, 1}` with both classes present in both
    /// splits, and feature rows matching label counts.
    pub fn from_parts(
        pair: DigitPair,
        train_x: Mat,
        train_y: Vec<u8>,
        val_x: Mat,
        val_y: Vec<u8>,
    ) -> Result<Self, DataError> {
        for (x, y, split) in [
            (&train_x, &train_y, Split::Train),
            (&val_x, &val_y, Split::Test),
        ] {
            if x.rows() != y.len() {
                return Err(DataError::LengthMismatch {
                    images: x.rows(),
                    labels: y.len(),
                });
            }
            if let Some(&bad) = y.iter().find(|&&l| l > 1) {
                return Err(DataError::BadLabel(bad));
            }
            for (digit, class) in [(pair.lo(), 0u8), (pair.hi(), 1u8)] {
                if !y.contains(&class) {
                    return Err(DataError::EmptyClass { digit, split });
                }
            }
        }
        Ok(BinaryTask {
            pair,
            train_x,
            train_y,
            val_x,
            val_y,
        })
    }

    pub fn pair(&self) -> DigitPair {
        self.pair
    }

    pub fn train_x(&self) -> &Mat {
        &self.train_x
    }

    pub fn train_y(&self) -> &[u8] {
        &self.train_y
    }

    pub fn val_x(&self) -> &Mat {
        &self.val_x
    }

    pub fn val_y(&self) -> &[u8] {
        &self.val_y
    }
}

fn filter_pair(raw: &RawMnist, pair: DigitPair) -> Result<(Mat, Vec<u8>), DataError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (img, &digit) in raw.images().iter_rows().zip(raw.labels()) {
        if digit == pair.lo() {
            rows.extend_from_slice(img);
            labels.push(0u8);
        } else if digit == pair.hi() {
            rows.extend_from_slice(img);
            labels.push(1u8);
        }
    }
    for (digit, class) in [(pair.lo(), 0u8), (pair.hi(), 1u8)] {
        if !labels.contains(&class) {
            return Err(DataError::EmptyClass {
                digit,
                split: raw.split(),
            });
        }
    }
    let count = labels.len();
    Ok((Mat::from_vec(count, INPUT_DIM, rows), labels))
}

/// Builds the binary task for `pair` from the two official splits.
pub fn build_binary_task(
    raw_train: &RawMnist,
    raw_test: &RawMnist,
    pair: DigitPair,
) -> Result<BinaryTask, DataError> {
    let (train_x, train_y) = filter_pair(raw_train, pair)?;
    let (val_x, val_y) = filter_pair(raw_test, pair)?;
    Ok(BinaryTask {
        pair,
        train_x,
        train_y,
        val_x,
        val_y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    Gaussian,
    Occlusion,
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorruptionKind::Gaussian => f.write_str("gaussian"),
            CorruptionKind::Occlusion => f.write_str("occlusion"),
        }
    }
}

pub const DEFAULT_OCCLUSION_PATCH: usize = 7;

/// One corruption setting: additive Gaussian noise or a zeroed patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// Noise standard deviation; meaningful for `Gaussian` only.
    pub sigma: f64,
    /// Patch side length in pixels; meaningful for `Occlusion` only.
    pub patch: usize,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        CorruptionSpec {
            kind: CorruptionKind::Gaussian,
            sigma,
            patch: DEFAULT_OCCLUSION_PATCH,
            seed,
        }
    }

    pub fn occlusion(patch: usize, seed: u64) -> Self {
        CorruptionSpec {
            kind: CorruptionKind::Occlusion,
            sigma: 0.0,
            patch,
            seed,
        }
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat, DataError> {
        match self.kind {
            CorruptionKind::Gaussian => corrupt_gaussian(x, self.sigma, self.seed),
            CorruptionKind::Occlusion => corrupt_occlusion(x, self.patch, self.seed),
        }
    }

    /// The sweep parameter this spec varies (sigma or patch side).
    pub fn param(&self) -> f64 {
        match self.kind {
            CorruptionKind::Gaussian => self.sigma,
            CorruptionKind::Occlusion => self.patch as f64,
        }
    }
}

/// Adds i.i.d. `N(0, sigma^2)` noise per pixel, then clips to `[0, 1]`.
///
/// The input is never modified; the result is a pure function of
/// `(x, sigma, seed)`.
pub fn corrupt_gaussian(x: &Mat, sigma: f64, seed: u64) -> Result<Mat, DataError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(DataError::BadSigma(sigma));
    }
    let mut sampler = NormalSampler::new(seed);
    let mut out = x.clone();
    for v in out.as_mut_slice() {
        *v = (*v + sigma * sampler.next()).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Zeroes one `patch x patch` block per row, with the top-left corner
/// drawn uniformly over all fully-contained positions.
pub fn corrupt_occlusion(x: &Mat, patch: usize, seed: u64) -> Result<Mat, DataError> {
    if patch == 0 || patch > IMAGE_SIDE {
        return Err(DataError::BadPatch(patch));
    }
    assert_eq!(x.cols(), INPUT_DIM, "occlusion expects 28x28 images");
    let max_corner = IMAGE_SIDE - patch;
    let mut rng = seeded(seed);
    let mut out = x.clone();
    for i in 0..out.rows() {
        let r0 = rng.gen_range(0..=max_corner);
        let c0 = rng.gen_range(0..=max_corner);
        let row = out.row_mut(i);
        for r in r0..r0 + patch {
            row[r * IMAGE_SIDE + c0..r * IMAGE_SIDE + c0 + patch].fill(0.0);
        }
    }
    Ok(out)
}
