//! Deterministic synthetic cases: one ellipsoidal cavity, scar patches on its
//! boundary band, a noisy intensity image and softened probability maps.
//!
//! Randomness comes from [`CounterRng`], a counter-based generator: the value
//! at position `i` of stream `s` under seed `k` is
//!
//! ```text
//! key(k, s) = mix(mix(k) ^ mix(s + GOLDEN))
//! u64(k, s, i) = mix(key(k, s) + (i + 1) * GOLDEN)
//! unit(k, s, i) = (u64(k, s, i) >> 11) * 2^-53
//! ```
//!
//! with `mix` the SplitMix64 finalizer and `GOLDEN = 0x9E3779B97F4A7C15`.
//! Values depend only on `(k, s, i)`, never on generation order.

use crate::boundary::boundary_mask;
use crate::volume::{CaseRecord, Dims, Kind, Mask, Spacing, Volume};
use crate::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix(seed) }
    }

    /// Independent sub-stream.
    pub fn stream(&self, s: u64) -> Self {
        CounterRng {
            key: mix(self.key ^ mix(s.wrapping_add(GOLDEN))),
        }
    }

    pub fn u64_at(&self, i: u64) -> u64 {
        mix(self
            .key
            .wrapping_add(i.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    pub fn unit_at(&self, i: u64) -> f64 {
        (self.u64_at(i) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn signed_at(&self, i: u64) -> f64 {
        2.0 * self.unit_at(i) - 1.0
    }
}

mod streams {
    pub const GEOMETRY: u64 = 1;
    pub const SCAR: u64 = 2;
    pub const IMAGE_NOISE: u64 = 3;
    pub const LA_CORRUPTION: u64 = 4;
    pub const SCAR_CORRUPTION: u64 = 5;
    pub const OUTLIER: u64 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub dims: Dims,
    pub spacing: Spacing,
    /// 0 gives predictions that threshold back to the labels exactly.
    pub corruption: f64,
}

impl SynthParams {
    pub fn new(dims: Dims, spacing: Spacing) -> Self {
        SynthParams {
            dims,
            spacing,
            corruption: 0.0,
        }
    }

    pub fn with_corruption(mut self, c: f64) -> Self {
        self.corruption = c;
        self
    }

    fn validate(&self) -> Result<()> {
        let d = self.dims;
        if d.nx < 16 || d.ny < 16 || d.nz < 4 {
            return Err(Error::InvalidArgument(format!(
                "synthetic cases need at least 16x16x4 voxels, got {d}"
            )));
        }
        if !(0.0..=1.0).contains(&self.corruption) {
            return Err(Error::InvalidArgument(format!(
                "corruption must lie in [0, 1], got {}",
                self.corruption
            )));
        }
        Ok(())
    }
}

/// Ellipsoid in voxel coordinates. `level > 0` inside, `= 0` on the surface.
#[derive(Debug, Clone, Copy)]
struct Ellipsoid {
    center: [f64; 3],
    radius: [f64; 3],
}

impl Ellipsoid {
    fn sample(rng: &CounterRng, d: Dims) -> Self {
        let n = [d.nx as f64, d.ny as f64, d.nz as f64];
        let center = [
            (n[0] - 1.0) / 2.0 + 0.05 * n[0] * rng.signed_at(0),
            (n[1] - 1.0) / 2.0 + 0.05 * n[1] * rng.signed_at(1),
            (n[2] - 1.0) / 2.0 + 0.05 * n[2] * rng.signed_at(2),
        ];
        let radius = [
            n[0] * (0.20 + 0.10 * rng.unit_at(3)),
            n[1] * (0.20 + 0.10 * rng.unit_at(4)),
            n[2] * (0.30 + 0.10 * rng.unit_at(5)),
        ];
        Ellipsoid { center, radius }
    }

    fn level(&self, x: usize, y: usize, z: usize) -> f64 {
        let p = [x as f64, y as f64, z as f64];
        let s: f64 = (0..3)
            .map(|a| ((p[a] - self.center[a]) / self.radius[a]).powi(2))
            .sum();
        1.0 - s
    }

    /// Rough signed distance in in-plane voxels, positive inside.
    fn signed_voxels(&self, x: usize, y: usize, z: usize) -> f64 {
        0.5 * self.level(x, y, z) * self.radius[0].min(self.radius[1])
    }

    fn angle(&self, x: usize, y: usize) -> f64 {
        (y as f64 - self.center[1]).atan2(x as f64 - self.center[0])
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// In-plane 3x3 box average, clamped at the slice border.
fn box_blur(data: &[f64], d: Dims) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for z in 0..d.nz {
        for y in 0..d.ny {
            for x in 0..d.nx {
                let mut acc = 0.0;
                let mut n = 0.0;
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (xx, yy) = (x as isize + dx, y as isize + dy);
                        if d.contains(xx, yy, z as isize) {
                            acc += data[d.idx(xx as usize, yy as usize, z)];
                            n += 1.0;
                        }
                    }
                }
                out[d.idx(x, y, z)] = acc / n;
            }
        }
    }
    out
}

/// Ceiling for background voxels of a clean prediction: just below the
/// outlier threshold 0.2, so either UAM threshold recovers the label.
const CLEAN_BACKGROUND_MAX: f32 = 0.199_999_98;

/// Clean foreground probability from a logit: at least 0.5 inside the
/// cavity and below 0.2 outside it, after rounding to f32.
fn prob_from_logit(logit: f64, inside: bool) -> f32 {
    let p = sigmoid(logit) as f32;
    if inside {
        p.max(0.5)
    } else {
        p.min(CLEAN_BACKGROUND_MAX)
    }
}

struct Geometry {
    cavity: Ellipsoid,
    cavity_mask: Mask,
    scar_mask: Mask,
}

fn geometry(seed: u64, p: &SynthParams) -> Geometry {
    let rng = CounterRng::new(seed);
    let d = p.dims;
    let cavity = Ellipsoid::sample(&rng.stream(streams::GEOMETRY), d);
    let cavity_mask = Mask::from_fn(d, p.spacing, |x, y, z| cavity.level(x, y, z) >= 0.0);
    let band = boundary_mask(&cavity_mask);

    let srng = rng.stream(streams::SCAR);
    let patches = 2 + (srng.u64_at(0) % 3) as usize;
    let sectors: Vec<(f64, f64)> = (0..patches)
        .map(|i| {
            let centre = std::f64::consts::PI * srng.signed_at(1 + 2 * i as u64);
            let half_width = 0.25 + 0.25 * srng.unit_at(2 + 2 * i as u64);
            (centre, half_width)
        })
        .collect();
    let scar_mask = Mask::from_fn(d, p.spacing, |x, y, z| {
        if !band.get(x, y, z) {
            return false;
        }
        let a = cavity.angle(x, y);
        let in_sector = sectors.iter().any(|&(c, w)| {
            let mut delta = (a - c).abs() % std::f64::consts::TAU;
            if delta > std::f64::consts::PI {
                delta = std::f64::consts::TAU - delta;
            }
            delta <= w
        });
        in_sector && srng.unit_at(100 + d.idx(x, y, z) as u64) < 0.85
    });
    Geometry {
        cavity,
        cavity_mask,
        scar_mask,
    }
}

fn make_image(seed: u64, p: &SynthParams, g: &Geometry) -> Result<Volume> {
    let d = p.dims;
    let base: Vec<f64> = (0..d.len())
        .map(|i| {
            if g.scar_mask.at(i) {
                0.9
            } else if g.cavity_mask.at(i) {
                0.15
            } else {
                0.35
            }
        })
        .collect();
    let smooth = box_blur(&base, d);
    let noise = CounterRng::new(seed).stream(streams::IMAGE_NOISE);
    let amp = 0.05 * (1.0 + p.corruption);
    let data = smooth
        .iter()
        .enumerate()
        .map(|(i, v)| (v + amp * noise.signed_at(i as u64)) as f32)
        .collect();
    Volume::new(d, p.spacing, Kind::Image, data)
}

fn scar_prob(seed: u64, p: &SynthParams, g: &Geometry) -> Result<Volume> {
    let d = p.dims;
    let scar: Vec<f64> = (0..d.len())
        .map(|i| if g.scar_mask.at(i) { 1.0 } else { 0.0 })
        .collect();
    let near = box_blur(&scar, d);
    let noise = CounterRng::new(seed).stream(streams::SCAR_CORRUPTION);
    let smooth_noise = box_blur(
        &(0..d.len())
            .map(|i| noise.signed_at(i as u64))
            .collect::<Vec<_>>(),
        d,
    );
    let data = (0..d.len())
        .map(|i| {
            let clean = if g.scar_mask.at(i) {
                0.9
            } else {
                0.02 + 0.12 * near[i]
            };
            let v = clean + 0.6 * p.corruption * smooth_noise[i];
            if p.corruption == 0.0 {
                clean as f32
            } else {
                v.clamp(0.0, 1.0) as f32
            }
        })
        .collect();
    Volume::new(d, p.spacing, Kind::Probability, data)
}

/// A regular case whose cavity prediction is a logistic-softened version of
/// the cavity label, perturbed by smooth noise scaled with `corruption`.
pub fn make_case(seed: u64, p: &SynthParams) -> Result<CaseRecord> {
    p.validate()?;
    let d = p.dims;
    let g = geometry(seed, p);
    let noise = CounterRng::new(seed).stream(streams::LA_CORRUPTION);
    let smooth_noise = box_blur(
        &(0..d.len())
            .map(|i| noise.signed_at(i as u64))
            .collect::<Vec<_>>(),
        d,
    );
    let mut la = Vec::with_capacity(d.len());
    for z in 0..d.nz {
        for y in 0..d.ny {
            for x in 0..d.nx {
                let i = d.idx(x, y, z);
                let logit = 2.5 * g.cavity.signed_voxels(x, y, z);
                if p.corruption == 0.0 {
                    la.push(prob_from_logit(logit, g.cavity_mask.at(i)));
                } else {
                    let noisy = logit + 8.0 * p.corruption * smooth_noise[i];
                    la.push(sigmoid(noisy) as f32);
                }
            }
        }
    }
    let case = CaseRecord {
        case_id: format!("case_{seed:04}"),
        image: make_image(seed, p, &g)?,
        la_prob: Some(Volume::new(d, p.spacing, Kind::Probability, la)?),
        scar_prob: Some(scar_prob(seed, p, &g)?),
        la_label: Some(g.cavity_mask),
        scar_label: Some(g.scar_mask),
    };
    case.validate()?;
    Ok(case)
}

/// A highly uncertain case: the outer shell of the cavity is predicted at
/// about 0.35 and the surroundings are diffusely uncertain. Thresholding at
/// 0.2 recovers the cavity, 0.5 keeps only its core.
pub fn make_outlier_case(seed: u64, p: &SynthParams) -> Result<CaseRecord> {
    p.validate()?;
    let d = p.dims;
    let g = geometry(seed, p);
    let rng = CounterRng::new(seed).stream(streams::OUTLIER);
    let la = Volume::from_fn(d, p.spacing, Kind::Probability, |x, y, z| {
        let u = rng.unit_at(d.idx(x, y, z) as u64);
        let level = g.cavity.level(x, y, z);
        let v = if level >= 0.5 {
            0.75 + 0.15 * u
        } else if level >= 0.0 {
            0.30 + 0.10 * u
        } else {
            0.02 + 0.12 * u
        };
        v as f32
    })?;
    let case = CaseRecord {
        case_id: format!("outlier_{seed:04}"),
        image: make_image(seed, p, &g)?,
        la_prob: Some(la),
        scar_prob: Some(scar_prob(seed, p, &g)?),
        la_label: Some(g.cavity_mask),
        scar_label: Some(g.scar_mask),
    };
    case.validate()?;
    Ok(case)
}
