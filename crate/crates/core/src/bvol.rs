//! The `.bvol` volume format: a JSON header `<name>.json` next to a raw
//! payload `<name>.raw` of little-endian `f32` values in x-fastest order.
//!
//! ```json
//! {
//!   "magic": "BVOL1",
//!   "dims": [nx, ny, nz],
//!   "spacing_mm": [sx, sy, sz],
//!   "kind": "image",
//!   "byte_order": "LE",
//!   "dtype": "f32"
//! }
//! ```
//!
//! The payload has no padding and no compression, so a volume survives a
//! write/read cycle bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::volume::{CaseRecord, Dims, Kind, Mask, Spacing, Volume};
use crate::{Error, Result};

pub const MAGIC: &str = "BVOL1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub magic: String,
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub kind: Kind,
    pub byte_order: String,
    pub dtype: String,
}

impl Header {
    pub fn for_volume(v: &Volume) -> Self {
        Header {
            magic: MAGIC.to_string(),
            dims: v.dims().as_array(),
            spacing_mm: v.spacing().as_array(),
            kind: v.kind(),
            byte_order: "LE".to_string(),
            dtype: "f32".to_string(),
        }
    }

    /// Checks the fixed fields and returns the grid the header describes.
    pub fn grid(&self) -> Result<(Dims, Spacing)> {
        if self.magic != MAGIC {
            return Err(Error::Header(format!("bad magic {:?}", self.magic)));
        }
        if self.byte_order != "LE" {
            return Err(Error::Header(format!(
                "unsupported byte_order {:?}",
                self.byte_order
            )));
        }
        if self.dtype != "f32" {
            return Err(Error::Header(format!("unsupported dtype {:?}", self.dtype)));
        }
        let [nx, ny, nz] = self.dims;
        let dims = Dims::new(nx, ny, nz)?;
        if dims.checked_len().and_then(|n| n.checked_mul(4)).is_none() {
            return Err(Error::Header(format!("dims {:?} overflow", self.dims)));
        }
        let [sx, sy, sz] = self.spacing_mm;
        let spacing = Spacing::new(sx, sy, sz)?;
        Ok((dims, spacing))
    }

    /// Payload size in bytes implied by the header.
    pub fn payload_len(&self) -> Result<usize> {
        let (dims, _) = self.grid()?;
        Ok(dims.len() * 4)
    }
}

/// Parses a header from bytes without touching any payload.
pub fn parse_header(bytes: &[u8]) -> Result<Header> {
    let header: Header = serde_json::from_slice(bytes).map_err(|e| Error::Header(e.to_string()))?;
    header.grid()?;
    Ok(header)
}

/// Decodes a payload against an already parsed header.
pub fn decode(header: &Header, raw: &[u8]) -> Result<Volume> {
    let (dims, spacing) = header.grid()?;
    let expected = dims.len();
    if !raw.len().is_multiple_of(4) || raw.len() / 4 != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: raw.len() / 4,
        });
    }
    let data = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Volume::new(dims, spacing, header.kind, data)
}

/// Encodes a volume into header text and payload bytes.
pub fn encode(v: &Volume) -> (String, Vec<u8>) {
    let mut text = serde_json::to_string_pretty(&Header::for_volume(v))
        .expect("header serialization cannot fail");
    text.push('\n');
    let mut raw = Vec::with_capacity(v.len() * 4);
    for x in v.data() {
        raw.extend_from_slice(&x.to_le_bytes());
    }
    (text, raw)
}

/// Resolves the header and payload paths for a volume name. `path` may name
/// either file of the pair or the bare stem.
pub fn pair_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json" | "raw" | "bvol") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut header = stem.clone().into_os_string();
    header.push(".json");
    let mut raw = stem.into_os_string();
    raw.push(".raw");
    (header.into(), raw.into())
}

pub fn read_header(path: &Path) -> Result<Header> {
    let (header_path, _) = pair_paths(path);
    let bytes = fs::read(&header_path).map_err(|e| Error::io(&header_path, e))?;
    parse_header(&bytes)
}

pub fn read_volume(path: &Path) -> Result<Volume> {
    let (header_path, raw_path) = pair_paths(path);
    let header_bytes = fs::read(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header = parse_header(&header_bytes)?;
    let raw = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    decode(&header, &raw)
}

pub fn write_volume(v: &Volume, path: &Path) -> Result<()> {
    let (header_path, raw_path) = pair_paths(path);
    if let Some(dir) = header_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let (text, raw) = encode(v);
    fs::write(&raw_path, raw).map_err(|e| Error::io(&raw_path, e))?;
    fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;
    Ok(())
}

/// File stems used for the volumes of a case directory.
pub mod names {
    pub const IMAGE: &str = "image";
    pub const LA_LABEL: &str = "la_label";
    pub const SCAR_LABEL: &str = "scar_label";
    pub const LA_PROB: &str = "la_prob";
    pub const SCAR_PROB: &str = "scar_prob";
}

/// Writes every present volume of `case` into `dir` under [`names`].
pub fn write_case_dir(case: &CaseRecord, dir: &Path) -> Result<()> {
    case.validate()?;
    write_volume(&case.image, &dir.join(names::IMAGE))?;
    if let Some(m) = &case.la_label {
        write_volume(m.as_volume(), &dir.join(names::LA_LABEL))?;
    }
    if let Some(m) = &case.scar_label {
        write_volume(m.as_volume(), &dir.join(names::SCAR_LABEL))?;
    }
    if let Some(p) = &case.la_prob {
        write_volume(p, &dir.join(names::LA_PROB))?;
    }
    if let Some(p) = &case.scar_prob {
        write_volume(p, &dir.join(names::SCAR_PROB))?;
    }
    Ok(())
}

/// Reads a case directory; the case id is the directory name.
pub fn read_case_dir(dir: &Path) -> Result<CaseRecord> {
    let optional = |name: &str| -> Result<Option<Volume>> {
        let p = dir.join(name);
        if pair_paths(&p).0.exists() {
            read_volume(&p).map(Some)
        } else {
            Ok(None)
        }
    };
    let case = CaseRecord {
        case_id: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        image: read_volume(&dir.join(names::IMAGE))?,
        la_label: optional(names::LA_LABEL)?
            .map(Mask::from_volume)
            .transpose()?,
        scar_label: optional(names::SCAR_LABEL)?
            .map(Mask::from_volume)
            .transpose()?,
        la_prob: optional(names::LA_PROB)?,
        scar_prob: optional(names::SCAR_PROB)?,
    };
    case.validate()?;
    Ok(case)
}
