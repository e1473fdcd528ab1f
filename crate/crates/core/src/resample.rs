//! Separable resampling between voxel grids.
//!
//! Images use an interpolating cubic B-spline (coefficients obtained by the
//! usual recursive prefilter), labels and probability maps use linear
//! interpolation. Target voxel `i` samples the source at continuous
//! coordinate `i * s_dst / s_src` along each axis (corner aligned), clamped to
//! the source extent.
//!
//! Before prefiltering, each line is extended by point reflection about its
//! end samples (`f(-k) = 2 f(0) - f(k)`). That extension keeps linear ramps
//! linear all the way to the border, so the spline reproduces them exactly.

use crate::volume::{Dims, Kind, Mask, Spacing, Volume};
use crate::{Error, Result};

/// Padding samples on each side of a line before prefiltering. The prefilter
/// pole is about 0.268, so boundary effects of the padded signal are damped by
/// 0.268^24 < 1e-13 once they reach real samples.
const PAD: usize = 24;
const POLE: f64 = -0.267_949_192_431_122_7; // sqrt(3) - 2

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Linear = 1,
    Cubic = 3,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Order::Linear),
            3 => Ok(Order::Cubic),
            _ => Err(Error::InvalidArgument(format!(
                "interpolation order must be 1 or 3, got {v}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResamplePlan {
    pub src_dims: Dims,
    pub src_spacing: Spacing,
    pub dst_dims: Dims,
    pub dst_spacing: Spacing,
    pub order: Order,
    /// Linear-interpolant cut-off for labels; values `>=` it become foreground.
    pub label_threshold: f64,
}

impl ResamplePlan {
    pub fn new(
        src_dims: Dims,
        src_spacing: Spacing,
        dst_dims: Dims,
        dst_spacing: Spacing,
        order: Order,
    ) -> Self {
        ResamplePlan {
            src_dims,
            src_spacing,
            dst_dims,
            dst_spacing,
            order,
            label_threshold: 0.5,
        }
    }

    /// Plan onto a new spacing that keeps the physical extent, rounding the
    /// target voxel counts (at least one voxel per axis).
    pub fn to_spacing(
        src_dims: Dims,
        src_spacing: Spacing,
        dst_spacing: Spacing,
        order: Order,
    ) -> Self {
        let count = |n: usize, s: f64, t: f64| ((n as f64 * s / t).round() as usize).max(1);
        let dst_dims = Dims {
            nx: count(src_dims.nx, src_spacing.sx, dst_spacing.sx),
            ny: count(src_dims.ny, src_spacing.sy, dst_spacing.sy),
            nz: count(src_dims.nz, src_spacing.sz, dst_spacing.sz),
        };
        Self::new(src_dims, src_spacing, dst_dims, dst_spacing, order)
    }

    pub fn identity(dims: Dims, spacing: Spacing, order: Order) -> Self {
        Self::new(dims, spacing, dims, spacing, order)
    }

    pub fn with_label_threshold(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "label threshold must lie in (0, 1), got {t}"
            )));
        }
        self.label_threshold = t;
        Ok(self)
    }

    fn check_source(&self, v: &Volume) -> Result<()> {
        if v.dims() != self.src_dims {
            return Err(Error::DimsMismatch {
                left: v.dims(),
                right: self.src_dims,
            });
        }
        Ok(())
    }

    fn scales(&self) -> [f64; 3] {
        [
            self.dst_spacing.sx / self.src_spacing.sx,
            self.dst_spacing.sy / self.src_spacing.sy,
            self.dst_spacing.sz / self.src_spacing.sz,
        ]
    }
}

/// Resamples an image or distance volume with the plan's interpolation order.
pub fn resample_image(v: &Volume, plan: &ResamplePlan) -> Result<Volume> {
    if !matches!(v.kind(), Kind::Image | Kind::Distance) {
        return Err(Error::WrongKind {
            expected: "image or distance",
            actual: v.kind(),
        });
    }
    plan.check_source(v)?;
    let data = separable(v, plan, plan.order);
    Volume::new(
        plan.dst_dims,
        plan.dst_spacing,
        v.kind(),
        data.into_iter().map(|x| x as f32).collect(),
    )
}

/// Linear interpolation of the 0/1 field followed by `>= label_threshold`.
pub fn resample_label(m: &Mask, plan: &ResamplePlan) -> Result<Mask> {
    plan.check_source(m.as_volume())?;
    let data = separable(m.as_volume(), plan, Order::Linear);
    let bits: Vec<bool> = data.iter().map(|&x| x >= plan.label_threshold).collect();
    Mask::from_bools(plan.dst_dims, plan.dst_spacing, &bits)
}

/// Linear interpolation of a probability map, clamped to `[0, 1]`.
pub fn resample_prob(v: &Volume, plan: &ResamplePlan) -> Result<Volume> {
    v.require_kind(Kind::Probability)?;
    plan.check_source(v)?;
    let data = separable(v, plan, Order::Linear);
    Volume::new(
        plan.dst_dims,
        plan.dst_spacing,
        Kind::Probability,
        data.into_iter()
            .map(|x| (x as f32).clamp(0.0, 1.0))
            .collect(),
    )
}

/// Runs the 1D resampler along x, then y, then z.
fn separable(v: &Volume, plan: &ResamplePlan, order: Order) -> Vec<f64> {
    let scales = plan.scales();
    let mut cur: Vec<f64> = v.data().iter().map(|&x| f64::from(x)).collect();
    let mut shape = plan.src_dims.as_array();
    let target = plan.dst_dims.as_array();
    for axis in 0..3 {
        cur = resample_axis(&cur, shape, axis, target[axis], scales[axis], order);
        shape[axis] = target[axis];
    }
    cur
}

fn resample_axis(
    data: &[f64],
    shape: [usize; 3],
    axis: usize,
    n_out: usize,
    scale: f64,
    order: Order,
) -> Vec<f64> {
    let n_in = shape[axis];
    let mut out_shape = shape;
    out_shape[axis] = n_out;
    let strides_in = [1, shape[0], shape[0] * shape[1]];
    let strides_out = [1, out_shape[0], out_shape[0] * out_shape[1]];
    let mut out = vec![0.0; out_shape.iter().product()];

    // The two axes that are not resampled enumerate the lines.
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let positions: Vec<f64> = (0..n_out)
        .map(|i| (i as f64 * scale).clamp(0.0, (n_in - 1) as f64))
        .collect();

    let mut line = vec![0.0; n_in];
    let mut coeffs = Vec::new();
    for j in 0..shape[b] {
        for i in 0..shape[a] {
            let base_in = i * strides_in[a] + j * strides_in[b];
            let base_out = i * strides_out[a] + j * strides_out[b];
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = data[base_in + k * strides_in[axis]];
            }
            match order {
                Order::Linear => {
                    for (k, &x) in positions.iter().enumerate() {
                        out[base_out + k * strides_out[axis]] = linear_at(&line, x);
                    }
                }
                Order::Cubic => {
                    cubic_coefficients(&line, &mut coeffs);
                    for (k, &x) in positions.iter().enumerate() {
                        out[base_out + k * strides_out[axis]] = cubic_at(&coeffs, x);
                    }
                }
            }
        }
    }
    out
}

fn linear_at(line: &[f64], x: f64) -> f64 {
    let i0 = x.floor() as usize;
    let t = x - i0 as f64;
    let i1 = (i0 + 1).min(line.len() - 1);
    if t == 0.0 {
        line[i0]
    } else {
        line[i0] * (1.0 - t) + line[i1] * t
    }
}

/// Sample `i` (any integer) of the point-reflected extension of `line`.
fn reflected(line: &[f64], mut i: isize) -> f64 {
    let last = line.len() as isize - 1;
    if last == 0 {
        return line[0];
    }
    // Each reflection pulls `i` strictly closer to the valid range.
    let mut sign = 1.0;
    let mut offset = 0.0;
    loop {
        if i < 0 {
            offset += sign * 2.0 * line[0];
            sign = -sign;
            i = -i;
        } else if i > last {
            offset += sign * 2.0 * line[last as usize];
            sign = -sign;
            i = 2 * last - i;
        } else {
            return offset + sign * line[i as usize];
        }
    }
}

/// Interpolating cubic B-spline coefficients of the padded line.
fn cubic_coefficients(line: &[f64], c: &mut Vec<f64>) {
    let n = line.len();
    let m = n + 2 * PAD;
    c.clear();
    c.extend((0..m).map(|k| 6.0 * reflected(line, k as isize - PAD as isize)));

    // Causal pass, mirror-boundary initialisation.
    let horizon = m.min(64);
    let mut zk = 1.0;
    let mut init = 0.0;
    for v in c.iter().take(horizon) {
        init += zk * v;
        zk *= POLE;
    }
    c[0] = init;
    for k in 1..m {
        c[k] += POLE * c[k - 1];
    }
    // Anti-causal pass.
    c[m - 1] = (POLE / (POLE * POLE - 1.0)) * (POLE * c[m - 2] + c[m - 1]);
    for k in (0..m - 1).rev() {
        c[k] = POLE * (c[k + 1] - c[k]);
    }
}

fn bspline3(t: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        let b = 2.0 - a;
        b * b * b / 6.0
    } else {
        0.0
    }
}

fn cubic_at(c: &[f64], x: f64) -> f64 {
    let xp = x + PAD as f64;
    let i0 = xp.floor() as usize;
    (i0 - 1..=i0 + 2)
        .map(|j| c[j] * bspline3(xp - j as f64))
        .sum()
}
