//! Exact anisotropic Euclidean distance transform and the signed boundary
//! distance map used as the second-stage auxiliary channel.
//!
//! The transform runs the lower-envelope-of-parabolas algorithm
//! (Felzenszwalb & Huttenlocher) along x, y and z in turn on squared
//! distances, weighting each pass by the squared voxel spacing of its axis.
//! Each pass is linear in the line length.

use crate::volume::{Dims, Kind, Mask, Spacing, Volume};
use crate::{Error, Result};

/// How the constant offset on band voxels is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BandOffset {
    /// Band voxels carry `-(E(M) - 1)` with `E` and the 1 both in millimetres.
    #[default]
    Millimetre,
    /// The offset is one voxel step (the smallest spacing) instead of 1 mm,
    /// which puts the band's outermost voxels at zero.
    VoxelStep,
}

/// Squared distance (mm²) from every voxel to the nearest voxel where `seed`
/// is true. Voxels with no reachable seed stay at `f64::INFINITY`.
pub fn squared_distance_to_seeds(seed: &[bool], dims: Dims, spacing: Spacing) -> Vec<f64> {
    let mut d: Vec<f64> = seed
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();
    let shape = dims.as_array();
    let weights = spacing.as_array().map(|s| s * s);
    let strides = [1, dims.nx, dims.nx * dims.ny];
    let longest = *shape.iter().max().unwrap();
    let mut scratch = Envelope::with_capacity(longest);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];

    for axis in 0..3 {
        let n = shape[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for j in 0..shape[b] {
            for i in 0..shape[a] {
                let base = i * strides[a] + j * strides[b];
                for k in 0..n {
                    line[k] = d[base + k * strides[axis]];
                }
                scratch.transform(&line[..n], weights[axis], &mut out[..n]);
                for k in 0..n {
                    d[base + k * strides[axis]] = out[k];
                }
            }
        }
    }
    d
}

/// Reusable buffers for the 1D lower-envelope pass.
struct Envelope {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            v: Vec::with_capacity(n),
            z: Vec::with_capacity(n + 1),
        }
    }

    /// `out[q] = min_p w2 * (q - p)^2 + f[p]`, skipping infinite `f[p]`.
    fn transform(&mut self, f: &[f64], w2: f64, out: &mut [f64]) {
        self.v.clear();
        self.z.clear();
        for (q, &fq) in f.iter().enumerate() {
            if !fq.is_finite() {
                continue;
            }
            let mut s = f64::NEG_INFINITY;
            while let Some(&p) = self.v.last() {
                let (qf, pf) = (q as f64, p as f64);
                s = ((fq + w2 * qf * qf) - (f[p] + w2 * pf * pf)) / (2.0 * w2 * (qf - pf));
                if s <= *self.z.last().unwrap() {
                    self.v.pop();
                    self.z.pop();
                    s = f64::NEG_INFINITY;
                } else {
                    break;
                }
            }
            self.v.push(q);
            self.z.push(s);
        }
        if self.v.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut k = 0;
        for (q, slot) in out.iter_mut().enumerate() {
            let qf = q as f64;
            while k + 1 < self.v.len() && self.z[k + 1] < qf {
                k += 1;
            }
            let p = self.v[k];
            let dq = qf - p as f64;
            *slot = w2 * dq * dq + f[p];
        }
    }
}

/// Distance in millimetres from each foreground voxel to the nearest
/// background voxel; background voxels are 0.
pub fn edt(mask: &Mask, spacing: Spacing) -> Result<Volume> {
    let background: Vec<bool> = mask.to_bools().iter().map(|&b| !b).collect();
    if !background.iter().any(|&b| b) {
        return Err(Error::NoBackground);
    }
    let sq = squared_distance_to_seeds(&background, mask.dims(), spacing);
    Volume::new(
        mask.dims(),
        spacing,
        Kind::Distance,
        sq.into_iter().map(|d| d.sqrt() as f32).collect(),
    )
}

/// Signed distance map of a boundary band:
///
/// * off-band voxels get `+E(!M)`, the distance to the nearest band voxel;
/// * band voxels get `-(E(M) - offset)`, where `E(M)` is the distance to the
///   nearest off-band voxel and `offset` is 1 mm (or one voxel step).
///
/// With sub-millimetre spacing the literal offset makes band values near the
/// band edge slightly positive (e.g. `-(0.625 - 1) = 0.375`).
pub fn signed_boundary_distance(
    band: &Mask,
    spacing: Spacing,
    offset: BandOffset,
) -> Result<Volume> {
    if !band.any() {
        return Err(Error::Degenerate("boundary band is empty".into()));
    }
    let bits = band.to_bools();
    if bits.iter().all(|&b| b) {
        return Err(Error::Degenerate(
            "boundary band covers the whole volume".into(),
        ));
    }
    let off: Vec<bool> = bits.iter().map(|&b| !b).collect();
    let to_band = squared_distance_to_seeds(&bits, band.dims(), spacing);
    let to_off = squared_distance_to_seeds(&off, band.dims(), spacing);
    let shift = match offset {
        BandOffset::Millimetre => 1.0,
        BandOffset::VoxelStep => spacing.min(),
    };
    let data = bits
        .iter()
        .zip(to_band.iter().zip(&to_off))
        .map(|(&in_band, (&db, &doff))| {
            if in_band {
                // `+ 0.0` folds -0.0 into 0.0
                (shift - doff.sqrt()) as f32 + 0.0
            } else {
                db.sqrt() as f32
            }
        })
        .collect();
    Volume::new(band.dims(), spacing, Kind::Distance, data)
}
