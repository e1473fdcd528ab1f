//! The volumetric container shared by every stage of the pipeline.
//!
//! Voxels are stored as `f32` in x-fastest order:
//! `idx(x, y, z) = x + nx * (y + ny * z)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sum::{mean_std, pairwise_sum};
use crate::{Error, Result};

/// Voxel counts along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidDims([nx, ny, nz]));
        }
        Ok(Dims { nx, ny, nz })
    }

    /// Total voxel count, or `None` if it overflows `usize`.
    pub fn checked_len(&self) -> Option<usize> {
        self.nx.checked_mul(self.ny)?.checked_mul(self.nz)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny && z < self.nz);
        x + self.nx * (y + self.ny * z)
    }

    #[inline]
    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        let x = i % self.nx;
        let r = i / self.nx;
        (x, r % self.ny, r / self.ny)
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn contains(&self, x: isize, y: isize, z: isize) -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < self.nx
            && (y as usize) < self.ny
            && (z as usize) < self.nz
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Millimetres per voxel along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl Spacing {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(sx) && ok(sy) && ok(sz) {
            Ok(Spacing { sx, sy, sz })
        } else {
            Err(Error::InvalidSpacing(sx, sy, sz))
        }
    }

    pub fn isotropic(s: f64) -> Result<Self> {
        Self::new(s, s, s)
    }

    pub fn unit() -> Self {
        Spacing {
            sx: 1.0,
            sy: 1.0,
            sz: 1.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }

    pub fn min(&self) -> f64 {
        self.sx.min(self.sy).min(self.sz)
    }
}

/// What the values of a volume mean. Probability and label volumes carry
/// range invariants; image and distance volumes only need finite values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Image,
    Probability,
    Distance,
    Label,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Image => "image",
            Kind::Probability => "probability",
            Kind::Distance => "distance",
            Kind::Label => "label",
        }
    }

    fn admits(&self, v: f32) -> bool {
        match self {
            Kind::Image | Kind::Distance => v.is_finite(),
            Kind::Probability => (0.0..=1.0).contains(&v),
            Kind::Label => v == 0.0 || v == 1.0,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dense 3D scalar field with physical spacing. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: Spacing,
    kind: Kind,
    data: Vec<f32>,
}

impl Volume {
    /// Builds a volume, checking the length and the kind's value range.
    pub fn new(dims: Dims, spacing: Spacing, kind: Kind, data: Vec<f32>) -> Result<Self> {
        let expected = dims
            .checked_len()
            .ok_or(Error::InvalidDims(dims.as_array()))?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !kind.admits(**v)) {
            return Err(Error::KindViolation { kind, index, value });
        }
        Ok(Volume {
            dims,
            spacing,
            kind,
            data,
        })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(dims: Dims, spacing: Spacing, kind: Kind, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        debug_assert!(data.iter().all(|v| kind.admits(*v)));
        Volume {
            dims,
            spacing,
            kind,
            data,
        }
    }

    pub fn filled(dims: Dims, spacing: Spacing, kind: Kind, value: f32) -> Result<Self> {
        Self::new(dims, spacing, kind, vec![value; dims.len()])
    }

    pub fn from_fn(
        dims: Dims,
        spacing: Spacing,
        kind: Kind,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for z in 0..dims.nz {
            for y in 0..dims.ny {
                for x in 0..dims.nx {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, kind, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.dims.idx(x, y, z)]
    }

    /// Re-tags the volume, re-checking the new kind's invariant.
    pub fn with_kind(self, kind: Kind) -> Result<Self> {
        Self::new(self.dims, self.spacing, kind, self.data)
    }

    pub fn with_spacing(mut self, spacing: Spacing) -> Self {
        self.spacing = spacing;
        self
    }

    /// Applies `f` voxelwise into a volume of kind `kind`.
    pub fn map(&self, kind: Kind, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(
            self.dims,
            self.spacing,
            kind,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn require_kind(&self, expected: Kind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.as_str(),
                actual: self.kind,
            })
        }
    }

    pub fn ensure_same_shape(&self, other: &Volume) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }

    pub fn ensure_same_grid(&self, other: &Volume) -> Result<()> {
        self.ensure_same_shape(other)?;
        if self.spacing != other.spacing {
            return Err(Error::SpacingMismatch);
        }
        Ok(())
    }
}

/// A label volume whose values are exactly 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(Volume);

impl Mask {
    pub fn from_volume(v: Volume) -> Result<Self> {
        v.require_kind(Kind::Label)?;
        Ok(Mask(v))
    }

    pub fn from_fn(
        dims: Dims,
        spacing: Spacing,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for z in 0..dims.nz {
            for y in 0..dims.ny {
                for x in 0..dims.nx {
                    data.push(if f(x, y, z) { 1.0 } else { 0.0 });
                }
            }
        }
        Mask(Volume::new_unchecked(dims, spacing, Kind::Label, data))
    }

    pub fn from_bools(dims: Dims, spacing: Spacing, bits: &[bool]) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: bits.len(),
            });
        }
        let data = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Ok(Mask(Volume::new_unchecked(
            dims,
            spacing,
            Kind::Label,
            data,
        )))
    }

    pub fn empty(dims: Dims, spacing: Spacing) -> Self {
        Mask(Volume::new_unchecked(
            dims,
            spacing,
            Kind::Label,
            vec![0.0; dims.len()],
        ))
    }

    pub fn as_volume(&self) -> &Volume {
        &self.0
    }

    pub fn into_volume(self) -> Volume {
        self.0
    }

    pub fn dims(&self) -> Dims {
        self.0.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.0.spacing
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.0.get(x, y, z) != 0.0
    }

    #[inline]
    pub fn at(&self, i: usize) -> bool {
        self.0.data[i] != 0.0
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.0.data.iter().map(|&v| v != 0.0).collect()
    }

    /// Number of foreground voxels.
    pub fn count(&self) -> usize {
        self.0.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn any(&self) -> bool {
        self.0.data.iter().any(|&v| v != 0.0)
    }

    pub fn not(&self) -> Mask {
        Mask(Volume::new_unchecked(
            self.0.dims,
            self.0.spacing,
            Kind::Label,
            self.0.data.iter().map(|&v| 1.0 - v).collect(),
        ))
    }

    pub fn and(&self, other: &Mask) -> Result<Mask> {
        self.zip(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Mask) -> Result<Mask> {
        self.zip(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &Mask) -> Result<Mask> {
        self.zip(other, |a, b| a && !b)
    }

    /// True if every foreground voxel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> Result<bool> {
        Ok(!self.and_not(other)?.any())
    }

    fn zip(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Result<Mask> {
        self.0.ensure_same_shape(&other.0)?;
        let data = self
            .0
            .data
            .iter()
            .zip(&other.0.data)
            .map(|(&a, &b)| if f(a != 0.0, b != 0.0) { 1.0 } else { 0.0 })
            .collect();
        Ok(Mask(Volume::new_unchecked(
            self.0.dims,
            self.0.spacing,
            Kind::Label,
            data,
        )))
    }
}

impl TryFrom<Volume> for Mask {
    type Error = Error;

    fn try_from(v: Volume) -> Result<Self> {
        Mask::from_volume(v)
    }
}

impl From<Mask> for Volume {
    fn from(m: Mask) -> Volume {
        m.0
    }
}

/// One subject: image plus optional labels and predicted probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub case_id: String,
    pub image: Volume,
    pub la_label: Option<Mask>,
    pub scar_label: Option<Mask>,
    pub la_prob: Option<Volume>,
    pub scar_prob: Option<Volume>,
}

impl CaseRecord {
    /// Checks that every present volume shares the image grid and that the
    /// probability maps are probability-kind.
    pub fn validate(&self) -> Result<()> {
        for m in [&self.la_label, &self.scar_label].into_iter().flatten() {
            self.image.ensure_same_grid(m.as_volume())?;
        }
        for p in [&self.la_prob, &self.scar_prob].into_iter().flatten() {
            self.image.ensure_same_grid(p)?;
            p.require_kind(Kind::Probability)?;
        }
        Ok(())
    }
}

/// Whole-volume z-score normalization with the population standard deviation.
pub fn zscore_normalize(v: &Volume) -> Result<Volume> {
    if v.len() < 2 {
        return Err(Error::Degenerate(
            "z-score normalization needs at least 2 voxels".into(),
        ));
    }
    let values: Vec<f64> = v.data().iter().map(|&x| f64::from(x)).collect();
    let (mean, std) = mean_std(&values);
    if !std.is_finite() || std <= 0.0 {
        return Err(Error::Degenerate(
            "zero standard deviation (constant volume)".into(),
        ));
    }
    v.map(Kind::Image, |x| ((f64::from(x) - mean) / std) as f32)
}

/// Mean of the voxel values, summed in a fixed order.
pub fn mean(v: &Volume) -> f64 {
    let values: Vec<f64> = v.data().iter().map(|&x| f64::from(x)).collect();
    pairwise_sum(&values) / values.len() as f64
}
