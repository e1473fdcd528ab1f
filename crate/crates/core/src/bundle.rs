//! Two-channel input bundle for the second-stage network: the raw image and
//! the signed boundary distance map, stored as two `.bvol` pairs listed in
//! order by a `bundle.json` manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bvol::{read_volume, write_volume};
use crate::volume::{Kind, Volume};
use crate::{Error, Result};

pub const BUNDLE_MAGIC: &str = "BVOL-BUNDLE1";
pub const MANIFEST_NAME: &str = "bundle.json";

/// Channel names in the order the second-stage network expects them.
pub const CHANNEL_ORDER: [&str; 2] = ["image", "distance"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    pub name: String,
    /// Header file of the channel, relative to the manifest directory.
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub magic: String,
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub channels: Vec<Channel>,
}

impl BundleManifest {
    fn validate(&self) -> Result<()> {
        if self.magic != BUNDLE_MAGIC {
            return Err(Error::Parse(format!("bad bundle magic {:?}", self.magic)));
        }
        let names: Vec<&str> = self.channels.iter().map(|c| c.name.as_str()).collect();
        if names != CHANNEL_ORDER {
            return Err(Error::Parse(format!(
                "bundle channels must be {CHANNEL_ORDER:?}, found {names:?}"
            )));
        }
        for c in &self.channels {
            let p = Path::new(&c.file);
            if p.is_absolute() || p.components().any(|c| c.as_os_str() == "..") {
                return Err(Error::Parse(format!(
                    "channel file {:?} escapes the bundle directory",
                    c.file
                )));
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(bytes: &[u8]) -> Result<BundleManifest> {
    let m: BundleManifest =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    m.validate()?;
    Ok(m)
}

/// Writes `image` and `distance` into `dir` and returns the manifest path.
pub fn write_bundle(dir: &Path, image: &Volume, distance: &Volume) -> Result<PathBuf> {
    image.ensure_same_grid(distance)?;
    distance.require_kind(Kind::Distance)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_volume(image, &dir.join("image"))?;
    write_volume(distance, &dir.join("distance"))?;
    let manifest = BundleManifest {
        magic: BUNDLE_MAGIC.into(),
        dims: image.dims().as_array(),
        spacing_mm: image.spacing().as_array(),
        channels: CHANNEL_ORDER
            .iter()
            .map(|n| Channel {
                name: n.to_string(),
                file: format!("{n}.json"),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a bundle back as `(name, volume)` pairs in channel order.
pub fn read_bundle(manifest_path: &Path) -> Result<Vec<(String, Volume)>> {
    let bytes = fs::read(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest = parse_manifest(&bytes)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::with_capacity(manifest.channels.len());
    for c in &manifest.channels {
        let v = read_volume(&dir.join(&c.file))?;
        if v.dims().as_array() != manifest.dims || v.spacing().as_array() != manifest.spacing_mm {
            return Err(Error::Parse(format!(
                "channel {} does not match the bundle grid",
                c.name
            )));
        }
        out.push((c.name.clone(), v));
    }
    Ok(out)
}
