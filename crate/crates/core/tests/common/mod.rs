//! Reference implementations used as test oracles. Everything here is written
//! straight from the definitions, with no shared code paths with the crate's
//! kernels (only the container types are reused).

#![allow(dead_code)]

use bfseg_core::synth::CounterRng;
use bfseg_core::{Dims, Kind, Mask, Spacing, Volume};

/// Deterministic test input generator.
pub struct Gen {
    rng: CounterRng,
    i: u64,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: CounterRng::new(seed).stream(0xC0FFEE),
            i: 0,
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.i += 1;
        self.rng.unit_at(self.i)
    }

    pub fn range(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.unit() * (hi_inclusive - lo + 1) as f64) as usize
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn dims(&mut self, max: [usize; 3]) -> Dims {
        Dims::new(
            self.range(1, max[0]),
            self.range(1, max[1]),
            self.range(1, max[2]),
        )
        .unwrap()
    }

    pub fn spacing(&mut self) -> Spacing {
        Spacing::new(
            self.uniform(0.3, 3.0),
            self.uniform(0.3, 3.0),
            self.uniform(0.3, 3.0),
        )
        .unwrap()
    }

    /// Random mask with foreground probability drawn per mask.
    pub fn mask(&mut self, dims: Dims, spacing: Spacing) -> Mask {
        let density = self.uniform(0.05, 0.95);
        let bits: Vec<bool> = (0..dims.len()).map(|_| self.unit() < density).collect();
        Mask::from_bools(dims, spacing, &bits).unwrap()
    }

    /// Blobby mask: union of a few random boxes, which exercises real contours.
    pub fn blob_mask(&mut self, dims: Dims, spacing: Spacing) -> Mask {
        let boxes: Vec<[usize; 6]> = (0..self.range(1, 3))
            .map(|_| {
                let x0 = self.range(0, dims.nx - 1);
                let y0 = self.range(0, dims.ny - 1);
                let z0 = self.range(0, dims.nz - 1);
                [
                    x0,
                    self.range(x0, dims.nx - 1),
                    y0,
                    self.range(y0, dims.ny - 1),
                    z0,
                    self.range(z0, dims.nz - 1),
                ]
            })
            .collect();
        Mask::from_fn(dims, spacing, |x, y, z| {
            boxes.iter().any(|b| {
                (b[0]..=b[1]).contains(&x)
                    && (b[2]..=b[3]).contains(&y)
                    && (b[4]..=b[5]).contains(&z)
            })
        })
    }

    pub fn probabilities(&mut self, dims: Dims, lo: f64, hi: f64) -> Volume {
        let data: Vec<f32> = (0..dims.len())
            .map(|_| self.uniform(lo, hi) as f32)
            .collect();
        Volume::new(dims, Spacing::unit(), Kind::Probability, data).unwrap()
    }
}

pub fn coords(d: Dims) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::with_capacity(d.len());
    for z in 0..d.nz {
        for y in 0..d.ny {
            for x in 0..d.nx {
                v.push((x, y, z));
            }
        }
    }
    v
}

pub fn phys(a: (usize, usize, usize), b: (usize, usize, usize), s: Spacing) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64) * s.sx;
    let dy = (a.1 as f64 - b.1 as f64) * s.sy;
    let dz = (a.2 as f64 - b.2 as f64) * s.sz;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// O(n^2) distance from each foreground voxel to the nearest background voxel.
pub fn brute_edt(m: &Mask, s: Spacing) -> Vec<f64> {
    let pts = coords(m.dims());
    let bg: Vec<_> = pts
        .iter()
        .copied()
        .filter(|&(x, y, z)| !m.get(x, y, z))
        .collect();
    pts.iter()
        .map(|&p| {
            if !m.get(p.0, p.1, p.2) {
                0.0
            } else {
                bg.iter()
                    .map(|&q| phys(p, q, s))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

/// Per-slice morphology: dilate by Chebyshev radius 2 (outside = background)
/// minus erode by radius 1 (out-of-grid neighbours ignored).
pub fn morph_band(m: &Mask) -> Vec<bool> {
    let d = m.dims();
    coords(d)
        .into_iter()
        .map(|(x, y, z)| {
            let mut dilated = false;
            for dy in -2isize..=2 {
                for dx in -2isize..=2 {
                    let (xx, yy) = (x as isize + dx, y as isize + dy);
                    if d.contains(xx, yy, z as isize) && m.get(xx as usize, yy as usize, z) {
                        dilated = true;
                    }
                }
            }
            let mut eroded = true;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let (xx, yy) = (x as isize + dx, y as isize + dy);
                    if d.contains(xx, yy, z as isize) && !m.get(xx as usize, yy as usize, z) {
                        eroded = false;
                    }
                }
            }
            dilated && !eroded
        })
        .collect()
}

pub fn brute_surface(m: &Mask) -> Vec<(usize, usize, usize)> {
    let d = m.dims();
    coords(d)
        .into_iter()
        .filter(|&(x, y, z)| {
            if !m.get(x, y, z) {
                return false;
            }
            let mut n_fg = 0;
            for (dx, dy, dz) in [
                (-1, 0, 0),
                (1, 0, 0),
                (0, -1, 0),
                (0, 1, 0),
                (0, 0, -1),
                (0, 0, 1),
            ] {
                let (xx, yy, zz) = (x as isize + dx, y as isize + dy, z as isize + dz);
                if d.contains(xx, yy, zz) && m.get(xx as usize, yy as usize, zz as usize) {
                    n_fg += 1;
                }
            }
            n_fg < 6
        })
        .collect()
}

fn directed(a: &[(usize, usize, usize)], b: &[(usize, usize, usize)], s: Spacing) -> Vec<f64> {
    a.iter()
        .map(|&p| {
            b.iter()
                .map(|&q| phys(p, q, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Pairwise Hausdorff distance between the surfaces of two masks.
pub fn brute_hd(a: &Mask, b: &Mask, s: Spacing) -> f64 {
    let (sa, sb) = (brute_surface(a), brute_surface(b));
    directed(&sa, &sb, s)
        .into_iter()
        .chain(directed(&sb, &sa, s))
        .fold(0.0, f64::max)
}

pub fn brute_asd(a: &Mask, b: &Mask, s: Spacing) -> f64 {
    let (sa, sb) = (brute_surface(a), brute_surface(b));
    let total: f64 =
        directed(&sa, &sb, s).iter().sum::<f64>() + directed(&sb, &sa, s).iter().sum::<f64>();
    total / (sa.len() + sb.len()) as f64
}

pub fn scalar_ce(s: f64, g: f64) -> f64 {
    let c = s.clamp(1e-7, 1.0 - 1e-7);
    -(g * c.ln() + (1.0 - g) * (1.0 - c).ln())
}

pub fn ce_oracle(s: &Volume, g: &Mask) -> f64 {
    let mut total = 0.0;
    for i in 0..s.len() {
        total += scalar_ce(f64::from(s.data()[i]), if g.at(i) { 1.0 } else { 0.0 });
    }
    total / s.len() as f64
}

/// Sorts every voxel's loss and averages the top `ceil(k% N)`.
pub fn topk_oracle(s: &Volume, g: &Mask, k: f64) -> f64 {
    let mut ce: Vec<f64> = (0..s.len())
        .map(|i| scalar_ce(f64::from(s.data()[i]), if g.at(i) { 1.0 } else { 0.0 }))
        .collect();
    ce.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = ((k / 100.0) * s.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    ce[..n].iter().sum::<f64>() / n as f64
}

pub fn dice_oracle(s: &Volume, g: &Mask) -> f64 {
    let (mut inter, mut ss, mut gg) = (0.0, 0.0, 0.0);
    for i in 0..s.len() {
        let si = f64::from(s.data()[i]);
        let gi = if g.at(i) { 1.0 } else { 0.0 };
        inter += si * gi;
        ss += si;
        gg += gi;
    }
    1.0 - (2.0 * inter + 1e-5) / (ss + gg + 1e-5)
}

pub fn entropy_oracle(p: &Volume) -> f64 {
    let mut total = 0.0;
    for &v in p.data() {
        let v = f64::from(v);
        if v > 0.0 && v < 1.0 {
            total += -v * v.ln() - (1.0 - v) * (1.0 - v).ln();
        }
    }
    total
}

/// Copy of `s` with voxel `i` moved by `delta` (rounded to f32). Returns the
/// perturbed volume and the step actually taken.
pub fn perturb(s: &Volume, i: usize, delta: f64) -> (Volume, f64) {
    let mut data = s.data().to_vec();
    let old = data[i];
    data[i] = (f64::from(old) + delta) as f32;
    let step = f64::from(data[i]) - f64::from(old);
    (
        Volume::new(s.dims(), s.spacing(), s.kind(), data).unwrap(),
        step,
    )
}

/// Central finite difference of `f` at voxel `i` with step `h`, using the
/// exact f32-rounded steps in the denominator.
pub fn central_difference(s: &Volume, i: usize, h: f64, f: impl Fn(&Volume) -> f64) -> f64 {
    let (plus, up) = perturb(s, i, h);
    let (minus, down) = perturb(s, i, -h);
    (f(&plus) - f(&minus)) / (up - down)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
