//! Dense 3D scalar volumes and the two validated views used by the metrics:
//! [`BinaryMask`] (values exactly 0 or 1) and [`ProbMap`] (values in `[0, 1]`).
//!
//! Voxels are stored x-fastest: linear index `i = x + nx * (y + ny * z)`.
//! Values are held as `f64`; the on-disk format narrows them to `f32`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voxel counts per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    nx: usize,
    ny: usize,
    nz: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        let addressable = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(nz))
            // the in-memory f64 buffer must fit in the address space
            .and_then(|n| n.checked_mul(std::mem::size_of::<f64>()))
            .is_some();
        if nx == 0 || ny == 0 || nz == 0 || !addressable {
            return Err(Error::InvalidDims { nx, ny, nz });
        }
        Ok(Self { nx, ny, nz })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Total number of voxels.
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.nx;
        let yz = i / self.nx;
        [x, yz % self.ny, yz / self.ny]
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Voxel edge lengths in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpacingRepr")]
pub struct Spacing {
    sx: f64,
    sy: f64,
    sz: f64,
}

#[derive(Deserialize)]
struct SpacingRepr {
    sx: f64,
    sy: f64,
    sz: f64,
}

impl TryFrom<SpacingRepr> for Spacing {
    type Error = Error;

    fn try_from(r: SpacingRepr) -> Result<Self> {
        Spacing::new(r.sx, r.sy, r.sz)
    }
}

impl Spacing {
    pub fn new(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let ok = |s: f64| s.is_finite() && s > 0.0;
        if !(ok(sx) && ok(sy) && ok(sz)) {
            return Err(Error::InvalidSpacing(sx, sy, sz));
        }
        Ok(Self { sx, sy, sz })
    }

    pub fn isotropic(s: f64) -> Result<Self> {
        Self::new(s, s, s)
    }

    pub fn sx(&self) -> f64 {
        self.sx
    }

    pub fn sy(&self) -> f64 {
        self.sy
    }

    pub fn sz(&self) -> f64 {
        self.sz
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self {
            sx: 1.0,
            sy: 1.0,
            sz: 1.0,
        }
    }
}

/// A 3D grid of finite real values with physical spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVolume {
    dims: Dims,
    spacing: Spacing,
    data: Vec<f64>,
}

impl ScalarVolume {
    /// Wraps `data` (x-fastest) after checking its length and that every value is finite.
    pub fn new(dims: Dims, spacing: Spacing, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    pub fn zeros(dims: Dims, spacing: Spacing) -> Self {
        Self {
            dims,
            spacing,
            data: vec![0.0; dims.len()],
        }
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn(
        dims: Dims,
        spacing: Spacing,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for z in 0..dims.nz() {
            for y in 0..dims.ny() {
                for x in 0..dims.nx() {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.dims.index(x, y, z)]
    }

    /// `(min, max)` over all voxels.
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Sum of all voxel values, accumulated sequentially in `f64`.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// A volume whose values are exactly 0.0 or 1.0.
///
/// Obtained only through [`validate_binary`], [`threshold`] or [`sign_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask(ScalarVolume);

impl BinaryMask {
    pub fn volume(&self) -> &ScalarVolume {
        &self.0
    }

    pub fn into_volume(self) -> ScalarVolume {
        self.0
    }

    pub fn dims(&self) -> Dims {
        self.0.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    /// Number of foreground voxels.
    pub fn count(&self) -> u64 {
        self.0.data.iter().filter(|&&v| v == 1.0).count() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Every binary mask is also a probability map.
    pub fn to_probmap(&self) -> ProbMap {
        ProbMap(self.0.clone())
    }
}

/// A volume whose values lie in the closed interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap(ScalarVolume);

impl ProbMap {
    pub fn volume(&self) -> &ScalarVolume {
        &self.0
    }

    pub fn into_volume(self) -> ScalarVolume {
        self.0
    }

    pub fn dims(&self) -> Dims {
        self.0.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    /// Clamps every value into `[0, 1]`. Used after resampling, where the
    /// convex interpolation weights can overshoot by an ulp.
    pub(crate) fn clamped(mut v: ScalarVolume) -> Self {
        for x in &mut v.data {
            *x = x.clamp(0.0, 1.0);
        }
        ProbMap(v)
    }
}

impl From<BinaryMask> for ProbMap {
    fn from(m: BinaryMask) -> Self {
        ProbMap(m.0)
    }
}

/// Accepts `v` as a mask if every voxel is exactly 0.0 or 1.0, reporting the first offender otherwise.
pub fn validate_binary(v: ScalarVolume) -> Result<BinaryMask> {
    match v.data.iter().position(|&x| x != 0.0 && x != 1.0) {
        Some(index) => Err(Error::NotBinary {
            index,
            value: v.data[index],
        }),
        None => Ok(BinaryMask(v)),
    }
}

/// Accepts `v` as a probability map if every voxel is finite and in `[0, 1]`.
pub fn validate_probmap(v: ScalarVolume) -> Result<ProbMap> {
    for (index, &value) in v.data.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange { index, value });
        }
    }
    Ok(ProbMap(v))
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(t))
    }
}

/// Binarizes `p`: a voxel is foreground iff its value is strictly greater than `t`.
///
/// With `t = 0` this coincides with [`sign_map`].
pub fn threshold(p: &ProbMap, t: f64) -> Result<BinaryMask> {
    check_threshold(t)?;
    Ok(BinaryMask(map_values(
        &p.0,
        |x| if x > t { 1.0 } else { 0.0 },
    )))
}

/// Voxelwise `sign(x)`. The negative branch cannot occur on a probability map.
pub fn sign_map(p: &ProbMap) -> BinaryMask {
    BinaryMask(map_values(&p.0, |x| if x > 0.0 { 1.0 } else { 0.0 }))
}

fn map_values(v: &ScalarVolume, f: impl Fn(f64) -> f64) -> ScalarVolume {
    ScalarVolume {
        dims: v.dims,
        spacing: v.spacing,
        data: v.data.iter().map(|&x| f(x)).collect(),
    }
}
