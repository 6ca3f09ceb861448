//! Synthetic surface defects, confined to the rendered face.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::render::FaceGeometry;
use super::{ImageSample, Label, Provenance, SynthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Scratch,
    Dent,
    Crack,
    Wrinkle,
}

impl DefectKind {
    pub const ALL: [DefectKind; 4] =
        [DefectKind::Scratch, DefectKind::Dent, DefectKind::Crack, DefectKind::Wrinkle];

    pub fn as_str(self) -> &'static str {
        match self {
            DefectKind::Scratch => "scratch",
            DefectKind::Dent => "dent",
            DefectKind::Crack => "crack",
            DefectKind::Wrinkle => "wrinkle",
        }
    }
}

impl std::str::FromStr for DefectKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scratch" => Ok(DefectKind::Scratch),
            "dent" => Ok(DefectKind::Dent),
            "crack" => Ok(DefectKind::Crack),
            "wrinkle" => Ok(DefectKind::Wrinkle),
            other => Err(SynthError::UnknownDefectKind(other.to_string())),
        }
    }
}

/// Pixel-coverage targets, as a fraction of face pixels changed by more
/// than 0.02. Candidate defects outside their band are redrawn (bounded
/// retries), which keeps the generator's visual statistics stable across
/// seeds: scratches and cracks stay thin (< 5%), dents cover 5–20%.
const SCRATCH_BAND: (f64, f64) = (0.004, 0.042);
const DENT_BAND: (f64, f64) = (0.058, 0.175);
const CRACK_BAND: (f64, f64) = (0.004, 0.042);
const WRINKLE_BAND: (f64, f64) = (0.02, 0.30);
const VISIBLE_DELTA: f64 = 0.02;
const MAX_ATTEMPTS: usize = 24;

/// Stamps one defect of `kind` onto a clean face, flipping the label. The
/// defect never alters pixels outside the hexagon face (hole excluded), and
/// all pixels stay clamped to [0, 1].
pub fn apply_defect(
    sample: &ImageSample,
    kind: DefectKind,
    seed: u64,
) -> Result<ImageSample, SynthError> {
    if sample.label != Label::NonDefective {
        return Err(SynthError::AlreadyDefective);
    }
    let geo = FaceGeometry::derive(sample.provenance.seed, sample.size);
    let mask = geo.face_mask();
    let face_pixels = mask.iter().filter(|&&m| m).count().max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = match kind {
        DefectKind::Scratch => SCRATCH_BAND,
        DefectKind::Dent => DENT_BAND,
        DefectKind::Crack => CRACK_BAND,
        DefectKind::Wrinkle => WRINKLE_BAND,
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..MAX_ATTEMPTS {
        let candidate = stamp(sample, &geo, &mask, kind, &mut rng);
        let affected = sample
            .pixels
            .chunks_exact(3)
            .zip(candidate.chunks_exact(3))
            .zip(&mask)
            .filter(|((old, new), &m)| {
                m && old.iter().zip(new.iter()).any(|(a, b)| (a - b).abs() > VISIBLE_DELTA)
            })
            .count() as f64
            / face_pixels as f64;
        let in_band = affected >= band.0 && affected <= band.1;
        let distance =
            if in_band { 0.0 } else { (affected - band.0).abs().min((affected - band.1).abs()) };
        if best.as_ref().map_or(true, |(_, d)| distance < *d) {
            best = Some((candidate, distance));
        }
        if in_band {
            break;
        }
    }
    let (pixels, _) = best.expect("at least one candidate was stamped");

    Ok(ImageSample {
        size: sample.size,
        pixels,
        label: Label::Defective,
        provenance: Provenance {
            seed: sample.provenance.seed,
            defect: Some(kind),
            augmentation: sample.provenance.augmentation,
        },
    })
}

fn stamp(
    sample: &ImageSample,
    geo: &FaceGeometry,
    mask: &[bool],
    kind: DefectKind,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut pixels = sample.pixels.clone();
    match kind {
        DefectKind::Scratch => {
            let dark = rng.random::<f64>() > 0.15;
            let magnitude = 0.34 + rng.random::<f64>() * 0.20;
            let delta = if dark { -magnitude } else { magnitude };
            let width = (geo.size as f64 / 64.0).max(1.1);
            let path = wobbly_path(geo, rng, 2, 0.45 * geo.radius, 0.25);
            stamp_polyline(&mut pixels, geo, mask, &path, width, delta);
        }
        DefectKind::Crack => {
            let delta = -(0.38 + rng.random::<f64>() * 0.18);
            let width = (geo.size as f64 / 80.0).max(1.0);
            let path = wobbly_path(geo, rng, 7, 0.16 * geo.radius, 0.9);
            stamp_polyline(&mut pixels, geo, mask, &path, width, delta);
        }
        DefectKind::Dent => {
            let (cx, cy) = point_in_face(geo, rng);
            let a = geo.radius * (0.20 + rng.random::<f64>() * 0.13);
            let b = geo.radius * (0.20 + rng.random::<f64>() * 0.13);
            let phi = rng.random::<f64>() * std::f64::consts::PI;
            let depth = 0.40 + rng.random::<f64>() * 0.18;
            let (sin_p, cos_p) = phi.sin_cos();
            for_each_face_pixel(geo, mask, &mut pixels, |x, y, px| {
                let dx = x - cx;
                let dy = y - cy;
                let ex = (dx * cos_p + dy * sin_p) / a;
                let ey = (-dx * sin_p + dy * cos_p) / b;
                let d2 = ex * ex + ey * ey;
                if d2 < 1.0 {
                    add_delta(px, -depth * (1.0 - d2));
                }
            });
        }
        DefectKind::Wrinkle => {
            let (cx, cy) = point_in_face(geo, rng);
            let region = geo.radius * (0.30 + rng.random::<f64>() * 0.14);
            let psi = rng.random::<f64>() * std::f64::consts::PI;
            let wavelength = geo.radius * (0.30 + rng.random::<f64>() * 0.20);
            let amp = 0.20 + rng.random::<f64>() * 0.10;
            let (sin_a, cos_a) = psi.sin_cos();
            for_each_face_pixel(geo, mask, &mut pixels, |x, y, px| {
                let dx = x - cx;
                let dy = y - cy;
                let d2 = (dx * dx + dy * dy) / (region * region);
                if d2 < 1.0 {
                    let proj = dx * cos_a + dy * sin_a;
                    let ridge = (proj / wavelength * std::f64::consts::TAU).sin();
                    // Forged wrinkles shadow more than they highlight.
                    add_delta(px, amp * (ridge - 0.45) * (1.0 - d2));
                }
            });
        }
    }
    pixels
}

fn add_delta(px: &mut [f64], delta: f64) {
    for ch in px {
        *ch = (*ch + delta).clamp(0.0, 1.0);
    }
}

fn point_in_face(geo: &FaceGeometry, rng: &mut ChaCha8Rng) -> (f64, f64) {
    for _ in 0..128 {
        let x = geo.center.0 + (rng.random::<f64>() * 2.0 - 1.0) * geo.radius;
        let y = geo.center.1 + (rng.random::<f64>() * 2.0 - 1.0) * geo.radius;
        if geo.in_face(x, y) {
            return (x, y);
        }
    }
    // Fallback inside the annulus midline.
    let mid = (geo.hole_radius + geo.radius * 0.87) / 2.0;
    (geo.center.0 + mid, geo.center.1)
}

fn wobbly_path(
    geo: &FaceGeometry,
    rng: &mut ChaCha8Rng,
    segments: usize,
    step: f64,
    wobble: f64,
) -> Vec<(f64, f64)> {
    let start = point_in_face(geo, rng);
    let mut dir = rng.random::<f64>() * std::f64::consts::TAU;
    let mut path = vec![start];
    let mut current = start;
    for _ in 0..segments {
        dir += (rng.random::<f64>() * 2.0 - 1.0) * wobble;
        current = (current.0 + step * dir.cos(), current.1 + step * dir.sin());
        path.push(current);
    }
    path
}

fn stamp_polyline(
    pixels: &mut [f64],
    geo: &FaceGeometry,
    mask: &[bool],
    path: &[(f64, f64)],
    width: f64,
    delta: f64,
) {
    for_each_face_pixel(geo, mask, pixels, |x, y, px| {
        let mut d = f64::INFINITY;
        for seg in path.windows(2) {
            d = d.min(segment_distance(x, y, seg[0], seg[1]));
        }
        if d < width + 1.0 {
            // Full delta inside the core width, soft 1 px falloff outside.
            let falloff = (1.0 - (d - width).max(0.0)).clamp(0.0, 1.0);
            add_delta(px, delta * falloff);
        }
    });
}

fn segment_distance(x: f64, y: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ax, ay) = a;
    let (bx, by) = b;
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (px, py) = (ax + t * dx - x, ay + t * dy - y);
    (px * px + py * py).sqrt()
}

fn for_each_face_pixel<F: FnMut(f64, f64, &mut [f64])>(
    geo: &FaceGeometry,
    mask: &[bool],
    pixels: &mut [f64],
    mut f: F,
) {
    for yi in 0..geo.size {
        for xi in 0..geo.size {
            let idx = yi * geo.size + xi;
            if mask[idx] {
                f(xi as f64 + 0.5, yi as f64 + 0.5, &mut pixels[idx * 3..idx * 3 + 3]);
            }
        }
    }
}
