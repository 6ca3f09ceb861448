//! Procedural stand-in for the nut-surface dataset: seeded renders of
//! hexagonal nut faces, four synthetic defect kinds, brightness/scale
//! augmentation, balanced dataset assembly and PNG export/import.

mod augment;
mod dataset;
mod defects;
mod io;
mod render;

pub use augment::{augment, resize_pixels, AugmentParams};
pub use dataset::{build_dataset, DatasetSpec, DefectMix, SplitDataset};
pub use defects::{apply_defect, DefectKind};
pub use io::{export_dataset, import_dataset};
pub use render::{generate_nut_face, FaceGeometry};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Class label; the defective class is the positive (+1) detection target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NonDefective,
    Defective,
}

impl Label {
    pub fn to_signed(self) -> f64 {
        match self {
            Label::Defective => 1.0,
            Label::NonDefective => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Defective => "defective",
            Label::NonDefective => "non_defective",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "defective" => Ok(Label::Defective),
            "non_defective" => Ok(Label::NonDefective),
            other => Err(SynthError::Parse(format!("unknown label '{other}'"))),
        }
    }
}

/// How a sample was produced; round-trips through the dataset manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub defect: Option<DefectKind>,
    pub augmentation: Option<AugmentParams>,
}

/// One H×W RGB image with pixels in [0, 1], its label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub size: usize,
    pub pixels: Vec<f64>,
    pub label: Label,
    pub provenance: Provenance,
}

impl ImageSample {
    /// Flat HWC pixel buffer (H = W = `size`, 3 channels).
    pub fn pixel_count(&self) -> usize {
        self.size * self.size * 3
    }
}

/// Errors from generation, augmentation and dataset I/O.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("image size {0} too small (minimum 32)")]
    SizeTooSmall(usize),
    #[error("defects apply to non-defective samples only")]
    AlreadyDefective,
    #[error("unknown defect kind '{0}'")]
    UnknownDefectKind(String),
    #[error("augmentation factor out of range: {0}")]
    FactorOutOfRange(String),
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("dataset parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image codec error: {0}")]
    Codec(String),
}

/// SplitMix64; used to derive independent per-sample seeds from a dataset
/// seed so generation order never matters.
pub(crate) fn mix_seed(seed: u64, tag: u64, index: u64) -> u64 {
    let mut z = seed ^ tag.rotate_left(17) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
