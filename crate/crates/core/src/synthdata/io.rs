//! PNG + manifest export, and the matching importer for user-supplied
//! images in the same layout.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use image::{ImageReader, RgbImage};

use super::augment::AugmentParams;
use super::dataset::SplitDataset;
use super::{ImageSample, Label, Provenance, SynthError};

const MANIFEST: &str = "manifest.csv";
const MANIFEST_HEADER: &str = "filename,split,label,seed,defect,brightness,scale,aug_seed";

fn to_rgb8(sample: &ImageSample) -> RgbImage {
    let size = sample.size as u32;
    let bytes: Vec<u8> =
        sample.pixels.iter().map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    RgbImage::from_raw(size, size, bytes).expect("pixel buffer matches dimensions")
}

fn from_rgb8(img: &RgbImage) -> Vec<f64> {
    img.as_raw().iter().map(|&b| b as f64 / 255.0).collect()
}

/// Writes `train/` and `test/` PNG directories plus `manifest.csv` with
/// label and provenance columns. Output bytes are deterministic for a given
/// dataset.
pub fn export_dataset(split: &SplitDataset, dir: &Path) -> Result<(), SynthError> {
    fs::create_dir_all(dir.join("train"))?;
    fs::create_dir_all(dir.join("test"))?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');

    for (split_name, samples) in [("train", &split.train), ("test", &split.test)] {
        for (i, sample) in samples.iter().enumerate() {
            let filename = format!("{split_name}/{split_name}_{i:04}.png");
            to_rgb8(sample)
                .save(dir.join(&filename))
                .map_err(|e| SynthError::Codec(e.to_string()))?;
            let (brightness, scale, aug_seed) = match sample.provenance.augmentation {
                Some(a) => (a.brightness.to_string(), a.scale.to_string(), a.seed.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            let _ = writeln!(
                manifest,
                "{filename},{split_name},{},{},{},{brightness},{scale},{aug_seed}",
                sample.label.as_str(),
                sample.provenance.seed,
                sample.provenance.defect.map(|d| d.as_str()).unwrap_or(""),
            );
        }
    }
    fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

/// Reads a dataset directory written by [`export_dataset`] (or arranged the
/// same way by hand: PNGs plus a manifest). Provenance columns are optional
/// for hand-made rows; filename, split and label are not.
pub fn import_dataset(dir: &Path) -> Result<SplitDataset, SynthError> {
    let manifest = fs::read_to_string(dir.join(MANIFEST))?;
    let mut lines = manifest.lines();
    match lines.next() {
        Some(header) if header.trim_end() == MANIFEST_HEADER => {}
        other => {
            return Err(SynthError::Parse(format!(
                "manifest header {:?} does not match '{MANIFEST_HEADER}'",
                other.unwrap_or("")
            )))
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(SynthError::Parse(format!(
                "manifest row {}: {} fields, expected 8",
                row + 1,
                fields.len()
            )));
        }
        let img = ImageReader::open(dir.join(fields[0]))?
            .decode()
            .map_err(|e| SynthError::Codec(e.to_string()))?
            .to_rgb8();
        if img.width() != img.height() {
            return Err(SynthError::Parse(format!(
                "{}: images must be square, got {}x{}",
                fields[0],
                img.width(),
                img.height()
            )));
        }
        let label: Label = fields[2].parse()?;
        let seed = fields[3].parse::<u64>().unwrap_or(0);
        let defect = if fields[4].is_empty() { None } else { Some(fields[4].parse()?) };
        let augmentation = match (fields[5], fields[6], fields[7]) {
            ("", "", "") => None,
            (b, s, a) => Some(AugmentParams {
                brightness: b.parse().map_err(|_| {
                    SynthError::Parse(format!("manifest row {}: bad brightness '{b}'", row + 1))
                })?,
                scale: s.parse().map_err(|_| {
                    SynthError::Parse(format!("manifest row {}: bad scale '{s}'", row + 1))
                })?,
                seed: a.parse().unwrap_or(0),
            }),
        };
        let sample = ImageSample {
            size: img.width() as usize,
            pixels: from_rgb8(&img),
            label,
            provenance: Provenance { seed, defect, augmentation },
        };
        match fields[1] {
            "train" => train.push(sample),
            "test" => test.push(sample),
            other => {
                return Err(SynthError::Parse(format!(
                    "manifest row {}: unknown split '{other}'",
                    row + 1
                )))
            }
        }
    }

    let total = train.len() + test.len();
    if total == 0 {
        return Err(SynthError::Parse("manifest lists no samples".into()));
    }
    let ratio = train.len() as f64 / total as f64;
    Ok(SplitDataset { train, test, ratio })
}
