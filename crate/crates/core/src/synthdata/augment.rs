//! Brightness and scale augmentation plus plain bilinear resizing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ImageSample, Provenance, SynthError};

/// Hard legality bounds for augmentation factors; per-dataset ranges in
/// `DatasetSpec` must sit inside these.
pub const BRIGHTNESS_BOUNDS: (f64, f64) = (0.2, 5.0);
pub const SCALE_BOUNDS: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub brightness: f64,
    pub scale: f64,
    pub seed: u64,
}

/// Multiplicative brightness followed by a zoom that crops (scale > 1) or
/// replicate-pads (scale < 1) back to the original dimensions. The seed
/// jitters the resample centre by up to half a pixel; a scale of exactly
/// 1.0 skips resampling entirely so (1.0, 1.0) is the identity.
pub fn augment(
    sample: &ImageSample,
    brightness: f64,
    scale: f64,
    seed: u64,
) -> Result<ImageSample, SynthError> {
    if !(BRIGHTNESS_BOUNDS.0..=BRIGHTNESS_BOUNDS.1).contains(&brightness) {
        return Err(SynthError::FactorOutOfRange(format!("brightness {brightness}")));
    }
    if !(SCALE_BOUNDS.0..=SCALE_BOUNDS.1).contains(&scale) {
        return Err(SynthError::FactorOutOfRange(format!("scale {scale}")));
    }

    let size = sample.size;
    let mut pixels: Vec<f64> =
        sample.pixels.iter().map(|p| (p * brightness).clamp(0.0, 1.0)).collect();

    if scale != 1.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jx = (rng.random::<f64>() - 0.5) * 0.5;
        let jy = (rng.random::<f64>() - 0.5) * 0.5;
        let c = (size as f64 - 1.0) / 2.0;
        let mut zoomed = vec![0.0; pixels.len()];
        for y in 0..size {
            for x in 0..size {
                let sx = (x as f64 - c) / scale + c + jx;
                let sy = (y as f64 - c) / scale + c + jy;
                let dst = (y * size + x) * 3;
                bilinear(&pixels, size, sx, sy, &mut zoomed[dst..dst + 3]);
            }
        }
        pixels = zoomed;
    }

    Ok(ImageSample {
        size,
        pixels,
        label: sample.label,
        provenance: Provenance {
            augmentation: Some(AugmentParams { brightness, scale, seed }),
            ..sample.provenance
        },
    })
}

/// Samples `src` at (x, y) with replicate-border bilinear interpolation.
fn bilinear(src: &[f64], size: usize, x: f64, y: f64, out: &mut [f64]) {
    let clamp_idx = |v: f64| -> (usize, usize, f64) {
        let v = v.clamp(0.0, size as f64 - 1.0);
        let lo = v.floor() as usize;
        let hi = (lo + 1).min(size - 1);
        (lo, hi, v - lo as f64)
    };
    let (x0, x1, fx) = clamp_idx(x);
    let (y0, y1, fy) = clamp_idx(y);
    for ch in 0..3 {
        let at = |yy: usize, xx: usize| src[(yy * size + xx) * 3 + ch];
        let top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
        let bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
        out[ch] = top * (1.0 - fy) + bottom * fy;
    }
}

/// Bilinear resize of a flat HWC buffer to `new_size` (square images).
pub fn resize_pixels(pixels: &[f64], size: usize, new_size: usize) -> Vec<f64> {
    assert_eq!(pixels.len(), size * size * 3, "not an HWC RGB buffer");
    if new_size == size {
        return pixels.to_vec();
    }
    let ratio = size as f64 / new_size as f64;
    let mut out = vec![0.0; new_size * new_size * 3];
    for y in 0..new_size {
        for x in 0..new_size {
            let sx = (x as f64 + 0.5) * ratio - 0.5;
            let sy = (y as f64 + 0.5) * ratio - 0.5;
            let dst = (y * new_size + x) * 3;
            bilinear(pixels, size, sx, sy, &mut out[dst..dst + 3]);
        }
    }
    out
}
