//! Boundary band extraction with slice-wise 2D max pooling.
//!
//! The band is `maxpool5(V) + maxpool3(-V)` evaluated in signed arithmetic:
//! the 5x5 pool dilates the mask by two voxels, the 3x3 pool over the negated
//! mask is `-1` only where the whole 3x3 window is foreground (an erosion by
//! one voxel), so the sum is 1 on a ring two voxels outside and one voxel
//! inside the contour, and 0 elsewhere. Pooling never crosses z-slices.
//!
//! Padding uses the smallest value the pooled input can take (0 for masks,
//! -1 for negated masks), so the border never wins a max. In particular, a
//! foreground region that touches the image border is not eroded there.

use crate::volume::{Kind, Mask, Volume};
use crate::{Error, Result};

pub const DILATION_KERNEL: usize = 5;
pub const EROSION_KERNEL: usize = 3;

/// Stride-1, same-size 2D max pooling of every z-slice.
///
/// `signed` selects the pad value: `-1` for negated masks, `0` otherwise.
pub fn maxpool2d_slice(v: &Volume, kernel: usize, signed: bool) -> Result<Volume> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "pooling kernel must be odd and positive, got {kernel}"
        )));
    }
    let pad = if signed { -1.0 } else { 0.0 };
    let out = pool(v.data(), v.dims().as_array(), kernel / 2, pad);
    let kind = if v.kind() == Kind::Label {
        Kind::Label
    } else {
        Kind::Image
    };
    Volume::new(v.dims(), v.spacing(), kind, out)
}

/// Separable window maximum: rows first, then columns.
fn pool(data: &[f32], [nx, ny, nz]: [usize; 3], r: usize, pad: f32) -> Vec<f32> {
    let mut rows = vec![0.0f32; data.len()];
    let mut out = vec![0.0f32; data.len()];
    let ri = r as isize;
    for z in 0..nz {
        let s = z * nx * ny;
        for y in 0..ny {
            let row = &data[s + y * nx..s + (y + 1) * nx];
            for x in 0..nx {
                let mut m = f32::NEG_INFINITY;
                for dx in -ri..=ri {
                    let xx = x as isize + dx;
                    let v = if xx < 0 || xx >= nx as isize {
                        pad
                    } else {
                        row[xx as usize]
                    };
                    m = m.max(v);
                }
                rows[s + y * nx + x] = m;
            }
        }
        for y in 0..ny {
            for x in 0..nx {
                let mut m = f32::NEG_INFINITY;
                for dy in -ri..=ri {
                    let yy = y as isize + dy;
                    let v = if yy < 0 || yy >= ny as isize {
                        pad
                    } else {
                        rows[s + yy as usize * nx + x]
                    };
                    m = m.max(v);
                }
                out[s + y * nx + x] = m;
            }
        }
    }
    out
}

/// The 3-voxel boundary band of `mask`: two voxels outside the contour and
/// one inside, per z-slice.
pub fn boundary_mask(mask: &Mask) -> Mask {
    let dims = mask.dims().as_array();
    let v = mask.as_volume().data();
    let negated: Vec<f32> = v.iter().map(|&x| -x).collect();
    let dilated = pool(v, dims, DILATION_KERNEL / 2, 0.0);
    let eroded_neg = pool(&negated, dims, EROSION_KERNEL / 2, -1.0);
    let bits: Vec<bool> = dilated
        .iter()
        .zip(&eroded_neg)
        .map(|(&d, &e)| {
            let s = d + e;
            debug_assert!(s == 0.0 || s == 1.0);
            s == 1.0
        })
        .collect();
    Mask::from_bools(mask.dims(), mask.spacing(), &bits).expect("same dims")
}
