//! Numerical kernels for a boundary-focused, two-stage left-atrium (LA) and
//! scar segmentation pipeline on LGE-MRI volumes.
//!
//! The crate covers everything around the neural network itself:
//!
//! - [`volume`]: the dense 3D container with physical spacing, and z-score
//!   normalization.
//! - [`bvol`]: the `.bvol` header + raw payload file format.
//! - [`resample`]: cubic B-spline and linear resampling between voxel grids.
//! - [`boundary`]: the 3-voxel boundary band built from slice-wise max pooling.
//! - [`distance`]: exact anisotropic Euclidean distance transform and the
//!   signed boundary distance map fed to the scar network.
//! - [`losses`]: cross-entropy, soft Dice, TopK and combined losses with
//!   analytic gradients.
//! - [`uam`]: entropy-sum outlier detection and adaptive thresholding.
//! - [`metrics`]: Dice, Hausdorff and average surface distance, and reports.
//! - [`synth`]: deterministic synthetic cases with known ground truth.

pub mod boundary;
pub mod bundle;
pub mod bvol;
pub mod distance;
mod error;
pub mod losses;
pub mod metrics;
pub mod resample;
mod sum;
pub mod synth;
pub mod uam;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{CaseRecord, Dims, Kind, Mask, Spacing, Volume};
