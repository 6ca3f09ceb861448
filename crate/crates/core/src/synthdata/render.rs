//! Seeded rendering of clean hexagonal nut faces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ImageSample, Label, Provenance, SynthError};

/// Pose, lighting and texture parameters of one rendered face. Derived
/// deterministically from the sample seed so the defect pass can recover
/// the face mask without re-rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub size: usize,
    pub center: (f64, f64),
    pub rotation: f64,
    /// Hexagon circumradius in pixels.
    pub radius: f64,
    pub hole_radius: f64,
    pub illumination: f64,
    pub light_angle: f64,
    pub background: f64,
    pub tint: [f64; 3],
    pub noise_seed: u64,
}

impl FaceGeometry {
    /// The parameter draw order here is fixed; changing it would silently
    /// re-pose every shipped seed.
    pub fn derive(seed: u64, size: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = size as f64;
        let center = (
            s * 0.5 + (rng.random::<f64>() - 0.5) * s * 0.03,
            s * 0.5 + (rng.random::<f64>() - 0.5) * s * 0.03,
        );
        // In-plane pose wobble of a fixtured part, not full hex symmetry.
        let rotation = rng.random::<f64>() * 0.22;
        let radius = s * (0.37 + rng.random::<f64>() * 0.05);
        let hole_radius = radius * (0.30 + rng.random::<f64>() * 0.06);
        let illumination = 0.70 + rng.random::<f64>() * 0.20;
        let light_angle = rng.random::<f64>() * std::f64::consts::TAU;
        let background = 0.06 + rng.random::<f64>() * 0.08;
        let tint = [
            0.97 + rng.random::<f64>() * 0.05,
            0.97 + rng.random::<f64>() * 0.05,
            0.99 + rng.random::<f64>() * 0.05,
        ];
        let noise_seed = rng.random::<u64>();
        FaceGeometry {
            size,
            center,
            rotation,
            radius,
            hole_radius,
            illumination,
            light_angle,
            background,
            tint,
            noise_seed,
        }
    }

    /// Signed distance to the hexagon boundary, negative inside.
    pub fn hexagon_distance(&self, x: f64, y: f64) -> f64 {
        let px = x - self.center.0;
        let py = y - self.center.1;
        let apothem = self.radius * (std::f64::consts::FRAC_PI_6).cos();
        let mut d = f64::NEG_INFINITY;
        for k in 0..6 {
            let angle = self.rotation + k as f64 * std::f64::consts::FRAC_PI_3;
            let dot = px * angle.cos() + py * angle.sin();
            d = d.max(dot - apothem);
        }
        d
    }

    fn hole_distance(&self, x: f64, y: f64) -> f64 {
        let px = x - self.center.0;
        let py = y - self.center.1;
        (px * px + py * py).sqrt() - self.hole_radius
    }

    /// True on the visible metal face: inside the hexagon, outside the hole.
    pub fn in_face(&self, x: f64, y: f64) -> bool {
        self.hexagon_distance(x, y) < 0.0 && self.hole_distance(x, y) > 0.0
    }

    /// Per-pixel face membership, sampled at pixel centers.
    pub fn face_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.size * self.size);
        for y in 0..self.size {
            for x in 0..self.size {
                mask.push(self.in_face(x as f64 + 0.5, y as f64 + 0.5));
            }
        }
        mask
    }
}

fn hash01(seed: u64, ix: i64, iy: i64) -> f64 {
    let mut z = seed
        ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Bilinear value noise on an integer lattice, output in [0, 1].
fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let ix = x.floor();
    let iy = y.floor();
    let fx = smoothstep(x - ix);
    let fy = smoothstep(y - iy);
    let (ix, iy) = (ix as i64, iy as i64);
    let v00 = hash01(seed, ix, iy);
    let v10 = hash01(seed, ix + 1, iy);
    let v01 = hash01(seed, ix, iy + 1);
    let v11 = hash01(seed, ix + 1, iy + 1);
    (v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy
}

fn fbm(seed: u64, x: f64, y: f64) -> f64 {
    0.65 * value_noise(seed, x, y) + 0.35 * value_noise(seed ^ 0xA5A5_5A5A, x * 2.7, y * 2.7)
}

/// Renders a clean (non-defective) nut face: a rotated hexagonal silhouette
/// with metallic value-noise texture, concentric brushing, a centre hole
/// and a seeded illumination level over a dark background.
pub fn generate_nut_face(seed: u64, size: usize) -> Result<ImageSample, SynthError> {
    if size < 32 {
        return Err(SynthError::SizeTooSmall(size));
    }
    let geo = FaceGeometry::derive(seed, size);
    let s = size as f64;
    let mut pixels = Vec::with_capacity(size * size * 3);

    for yi in 0..size {
        for xi in 0..size {
            let x = xi as f64 + 0.5;
            let y = yi as f64 + 0.5;
            let u = x / s;
            let v = y / s;

            let background = geo.background
                + 0.03 * value_noise(geo.noise_seed ^ 0x0BAD_F00D, u * 6.0, v * 6.0)
                + 0.02 * (v - 0.5);

            let dx = x - geo.center.0;
            let dy = y - geo.center.1;
            let dist = (dx * dx + dy * dy).sqrt();
            let angle = dy.atan2(dx);

            let texture = 0.74
                + 0.06 * (fbm(geo.noise_seed, u * 9.0, v * 9.0) - 0.5)
                + 0.02 * ((dist / s * 26.0 + 2.1 * value_noise(geo.noise_seed ^ 0x51DE, u * 4.0, v * 4.0)).sin())
                + 0.06 * (angle - geo.light_angle).cos();
            let face = geo.illumination * texture;

            // Hole interior reads as a bright machined chamfer, so deep
            // shadow only ever comes from surface damage.
            let hole_d = dist - geo.hole_radius;
            let face = if hole_d < 0.0 {
                geo.illumination
                    * (0.52 + 0.25 * (1.0 + (dist / geo.hole_radius.max(1.0)).min(1.0)) * 0.5)
                    + 0.04 * value_noise(geo.noise_seed ^ 0x7071, u * 12.0, v * 12.0)
            } else {
                face + 0.16 * (1.0 - (hole_d / 2.0).min(1.0)).max(0.0) * geo.illumination
            };

            // Soft 1.5 px transition across the hexagon boundary.
            let hex_d = geo.hexagon_distance(x, y);
            let edge = smoothstep((-hex_d / 1.5 + 0.5).clamp(0.0, 1.0));
            let value = background * (1.0 - edge) + face * edge;

            for ch in 0..3 {
                pixels.push((value * geo.tint[ch]).clamp(0.0, 1.0));
            }
        }
    }

    Ok(ImageSample {
        size,
        pixels,
        label: Label::NonDefective,
        provenance: Provenance { seed, defect: None, augmentation: None },
    })
}
