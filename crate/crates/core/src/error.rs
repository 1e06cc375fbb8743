use std::path::PathBuf;

use crate::volume::Dims;

/// Errors produced by volume construction, validation, I/O, metrics and the simulation harness.
///
/// Every message starts with the variant name so command-line users can grep for it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(
        "InvalidDims: {nx}x{ny}x{nz} (each axis must be >= 1 and the voxel count addressable)"
    )]
    InvalidDims { nx: usize, ny: usize, nz: usize },

    #[error("InvalidSpacing: ({0}, {1}, {2}) (components must be finite and > 0)")]
    InvalidSpacing(f64, f64, f64),

    #[error("LengthMismatch: dims require {expected} voxels, data has {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("NonFinite: voxel {0} is not finite")]
    NonFinite(usize),

    #[error("NotBinary: voxel {index} has value {value}")]
    NotBinary { index: usize, value: f64 },

    #[error("OutOfRange: voxel {index} has value {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("InvalidThreshold: {0} is not in [0, 1]")]
    InvalidThreshold(f64),

    #[error("DimsMismatch: {0} vs {1}")]
    DimsMismatch(Dims, Dims),

    #[error("EmptyGrid: threshold grid has no entries")]
    EmptyGrid,

    #[error(
        "HeaderMismatch: header declares {expected_bytes} payload bytes, {path} has {actual_bytes}"
    )]
    HeaderMismatch {
        path: PathBuf,
        expected_bytes: u64,
        actual_bytes: u64,
    },

    #[error("MalformedHeader: {0}")]
    MalformedHeader(String),

    #[error("UnsupportedVersion: {0}")]
    UnsupportedVersion(String),

    #[error("IoFailure: {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("DegenerateSpec: {0}")]
    DegenerateSpec(String),

    #[error("EmptyMask: the mask has no foreground voxels")]
    EmptyMask,

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            context: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn io_context(context: &str, source: std::io::Error) -> Self {
        Error::Io {
            context: context.to_string(),
            source,
        }
    }
}
