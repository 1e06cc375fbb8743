//! Ellipsoid phantoms and Gaussian confidence maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{validate_binary, BinaryMask, Dims, ProbMap, ScalarVolume, Spacing};

/// Geometry of an ellipsoid centred in its volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    /// Semi-axes `(rx, ry, rz)` in millimetres.
    pub semi_axes_mm: [f64; 3],
    pub spacing: Spacing,
    /// Empty padding between the ellipsoid's bounding box and the volume edge.
    pub margin_mm: f64,
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let s = self.spacing.as_array();
        for (axis, (&r, &si)) in self.semi_axes_mm.iter().zip(&s).enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::DegenerateSpec(format!(
                    "semi-axis {axis} is {r}, must be finite and > 0"
                )));
            }
            if r < si / 2.0 {
                return Err(Error::DegenerateSpec(format!(
                    "semi-axis {axis} ({r} mm) is smaller than half a voxel ({si} mm spacing)"
                )));
            }
        }
        if !(self.margin_mm.is_finite() && self.margin_mm >= 0.0) {
            return Err(Error::DegenerateSpec(format!(
                "margin_mm is {}, must be finite and >= 0",
                self.margin_mm
            )));
        }
        Ok(())
    }

    /// Odd voxel count per axis so the centre falls on a voxel centre.
    pub fn dims(&self) -> Result<Dims> {
        self.validate()?;
        let s = self.spacing.as_array();
        let n: Vec<usize> = (0..3)
            .map(|k| {
                let half = ((self.semi_axes_mm[k] + self.margin_mm) / s[k]).ceil();
                2 * half as usize + 1
            })
            .collect();
        Dims::new(n[0], n[1], n[2])
    }
}

/// Named structure sizes for the partial-volume experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    /// Subthalamic nucleus, roughly 4 x 6 x 8 mm.
    Stn,
    /// Globus pallidus.
    Gp,
    Thalamus,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::Stn, Structure::Gp, Structure::Thalamus];

    pub fn semi_axes_mm(self) -> [f64; 3] {
        match self {
            Structure::Stn => [2.0, 3.0, 4.0],
            Structure::Gp => [6.0, 7.0, 10.0],
            Structure::Thalamus => [10.0, 12.0, 15.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Structure::Stn => "stn",
            Structure::Gp => "gp",
            Structure::Thalamus => "thalamus",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stn" => Ok(Structure::Stn),
            "gp" => Ok(Structure::Gp),
            "thalamus" => Ok(Structure::Thalamus),
            other => Err(format!(
                "unknown structure {other:?} (expected stn, gp or thalamus)"
            )),
        }
    }
}

/// Where the Gaussian confidence map is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianSupport {
    /// Only the mask's foreground voxels carry confidence.
    #[default]
    MaskOnly,
    /// The Gaussian is evaluated at every voxel.
    Everywhere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMapSpec {
    /// Per-axis sigma as a fraction of the structure's semi-axis.
    pub sigma_scale: f64,
    #[serde(default)]
    pub support: GaussianSupport,
}

impl Default for GaussianMapSpec {
    fn default() -> Self {
        Self {
            sigma_scale: 0.5,
            support: GaussianSupport::MaskOnly,
        }
    }
}

impl GaussianMapSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_scale.is_finite() && self.sigma_scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_scale is {}, must be finite and > 0",
                self.sigma_scale
            )));
        }
        Ok(())
    }
}

/// Offset of voxel index `i` from the volume centre, in voxels.
fn centred(i: usize, n: usize) -> f64 {
    i as f64 - (n - 1) as f64 / 2.0
}

/// Voxels whose centres satisfy `(x/rx)² + (y/ry)² + (z/rz)² <= 1`.
pub fn make_ellipsoid_mask(spec: &PhantomSpec) -> Result<BinaryMask> {
    let dims = spec.dims()?;
    let [sx, sy, sz] = spec.spacing.as_array();
    let [rx, ry, rz] = spec.semi_axes_mm;
    let vol = ScalarVolume::from_fn(dims, spec.spacing, |x, y, z| {
        let u = centred(x, dims.nx()) * sx / rx;
        let v = centred(y, dims.ny()) * sy / ry;
        let w = centred(z, dims.nz()) * sz / rz;
        if u * u + v * v + w * w <= 1.0 {
            1.0
        } else {
            0.0
        }
    })?;
    validate_binary(vol)
}

/// Replaces the mask with a Gaussian centred on its centroid.
///
/// The per-axis sigma is `sigma_scale` times the mask's half-extent on that
/// axis (bounding-box width in mm over two), so the same spec gives the same
/// relative falloff for every structure size.
pub fn gaussian_probmap(mask: &BinaryMask, spec: &GaussianMapSpec) -> Result<ProbMap> {
    spec.validate()?;
    let dims = mask.dims();
    let spacing = mask.volume().spacing().as_array();

    let mut n = 0usize;
    let mut sum = [0.0f64; 3];
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for (i, &v) in mask.data().iter().enumerate() {
        if v == 1.0 {
            let c = dims.coords(i);
            n += 1;
            for k in 0..3 {
                sum[k] += c[k] as f64;
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let centroid = sum.map(|s| s / n as f64);
    let mut sigma = [0.0; 3];
    for k in 0..3 {
        let half_extent = (hi[k] - lo[k] + 1) as f64 * spacing[k] / 2.0;
        sigma[k] = spec.sigma_scale * half_extent;
    }

    let mask_only = spec.support == GaussianSupport::MaskOnly;
    let data = mask
        .data()
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if mask_only && m != 1.0 {
                return 0.0;
            }
            let c = dims.coords(i);
            let q: f64 = (0..3)
                .map(|k| {
                    let d = (c[k] as f64 - centroid[k]) * spacing[k] / sigma[k];
                    d * d
                })
                .sum();
            (-0.5 * q).exp()
        })
        .collect();
    let vol = ScalarVolume::new(dims, mask.volume().spacing(), data)?;
    Ok(ProbMap::clamped(vol))
}
