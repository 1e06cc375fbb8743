//! The SVOL on-disk volume format.
//!
//! A volume named `<name>` is a pair of files side by side:
//!
//! - `<name>.svol.json`, a UTF-8 JSON header:
//!   `{"svol_version":1,"dims":[nx,ny,nz],"spacing_mm":[sx,sy,sz],"dtype":"f32le","order":"x-fastest","data_file":"<name>.svol.raw"}`
//! - `<name>.svol.raw`, exactly `nx*ny*nz` little-endian `f32` values in x-fastest order.
//!
//! Values are narrowed to `f32` on store. Loading and re-storing a file reproduces it bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, ScalarVolume, Spacing};

pub const SVOL_VERSION: u32 = 1;
pub const DTYPE: &str = "f32le";
pub const ORDER: &str = "x-fastest";

const HEADER_SUFFIX: &str = ".svol.json";
const RAW_SUFFIX: &str = ".svol.raw";

/// The JSON sidecar describing a raw payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub svol_version: u32,
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub dtype: String,
    pub order: String,
    pub data_file: String,
}

impl VolumeHeader {
    pub fn for_volume(v: &ScalarVolume, data_file: impl Into<String>) -> Self {
        Self {
            svol_version: SVOL_VERSION,
            dims: v.dims().as_array(),
            spacing_mm: v.spacing().as_array(),
            dtype: DTYPE.to_string(),
            order: ORDER.to_string(),
            data_file: data_file.into(),
        }
    }

    /// Parses and checks a header. Missing or ill-typed fields are `MalformedHeader`;
    /// a version, dtype or order this loader does not understand is `UnsupportedVersion`.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedHeader(e.to_string()))?;
        // Check the version first so a future header with a different schema is reported as such.
        match raw.get("svol_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SVOL_VERSION) => {}
            Some(v) => return Err(Error::UnsupportedVersion(format!("svol_version {v}"))),
            None => {
                return Err(Error::MalformedHeader(
                    "missing or non-integer \"svol_version\"".into(),
                ))
            }
        }
        let header: VolumeHeader =
            serde_json::from_value(raw).map_err(|e| Error::MalformedHeader(e.to_string()))?;
        if header.dtype != DTYPE {
            return Err(Error::UnsupportedVersion(format!(
                "dtype {:?} (version 1 supports only {DTYPE:?})",
                header.dtype
            )));
        }
        if header.order != ORDER {
            return Err(Error::UnsupportedVersion(format!(
                "order {:?} (version 1 supports only {ORDER:?})",
                header.order
            )));
        }
        if header.data_file.is_empty() {
            return Err(Error::MalformedHeader("empty \"data_file\"".into()));
        }
        Ok(header)
    }

    pub fn checked_dims(&self) -> Result<Dims> {
        let [nx, ny, nz] = self.dims;
        Dims::new(nx, ny, nz).map_err(|e| Error::MalformedHeader(format!("dims: {e}")))
    }

    pub fn checked_spacing(&self) -> Result<Spacing> {
        let [sx, sy, sz] = self.spacing_mm;
        Spacing::new(sx, sy, sz).map_err(|e| Error::MalformedHeader(format!("spacing_mm: {e}")))
    }

    /// Payload size in bytes implied by the dims.
    pub fn payload_bytes(&self) -> Result<u64> {
        Ok(self.checked_dims()?.len() as u64 * 4)
    }
}

/// Resolves `path` to the header path: `foo.svol.json` stays as is, anything else gets the suffix appended.
pub fn header_path(path: &Path) -> PathBuf {
    let s = path.as_os_str().to_string_lossy();
    if s.ends_with(HEADER_SUFFIX) {
        path.to_path_buf()
    } else {
        PathBuf::from(format!("{s}{HEADER_SUFFIX}"))
    }
}

fn volume_name(header: &Path) -> String {
    let file = header
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    file.strip_suffix(HEADER_SUFFIX)
        .unwrap_or(&file)
        .to_string()
}

/// Writes `v` as `<name>.svol.json` plus `<name>.svol.raw`, returning the header path.
pub fn store_volume(v: &ScalarVolume, path: impl AsRef<Path>) -> Result<PathBuf> {
    let header_path = header_path(path.as_ref());
    let name = volume_name(&header_path);
    if name.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "cannot derive a volume name from {}",
            header_path.display()
        )));
    }
    let data_file = format!("{name}{RAW_SUFFIX}");
    let raw_path = header_path.with_file_name(&data_file);

    let mut bytes = Vec::with_capacity(v.data().len() * 4);
    for &x in v.data() {
        bytes.extend_from_slice(&(x as f32).to_le_bytes());
    }
    fs::write(&raw_path, &bytes).map_err(|e| Error::io(&raw_path, e))?;

    let header = VolumeHeader::for_volume(v, data_file);
    let mut json = serde_json::to_vec(&header).expect("header serializes");
    json.push(b'\n');
    fs::File::create(&header_path)
        .and_then(|mut f| f.write_all(&json))
        .map_err(|e| Error::io(&header_path, e))?;
    Ok(header_path)
}

/// Reads a volume from its header path (or the `<name>` stem).
pub fn load_volume(path: impl AsRef<Path>) -> Result<ScalarVolume> {
    let header_path = header_path(path.as_ref());
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header = VolumeHeader::parse(&text)?;
    let dims = header.checked_dims()?;
    let spacing = header.checked_spacing()?;

    let raw_path = header_path.with_file_name(&header.data_file);
    let bytes = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected_bytes = header.payload_bytes()?;
    if bytes.len() as u64 != expected_bytes {
        return Err(Error::HeaderMismatch {
            path: raw_path,
            expected_bytes,
            actual_bytes: bytes.len() as u64,
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    ScalarVolume::new(dims, spacing, data)
}
