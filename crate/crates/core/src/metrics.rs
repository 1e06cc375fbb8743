//! Overlap metrics: the classical Dice coefficient on binary masks and the
//! continuous Dice coefficient (cDC) of a probability map against a binary
//! ground truth.
//!
//! For ground truth `a` and prediction `b` the sums are
//!
//! ```text
//! |A∩B| = Σ aᵢbᵢ      |A| = Σ aᵢ      |B| = Σ bᵢ
//! c     = Σ aᵢbᵢ / Σ aᵢ·sign(bᵢ)      (c = 1 when the denominator is 0)
//! DC    = 2|A∩B| / (|A| + |B|)
//! cDC   = 2|A∩B| / (c|A| + |B|)
//! ```
//!
//! cDC is asymmetric: the first argument is always the ground truth.
//! When both operands are empty both metrics are 1 and the report's
//! `both_empty` flag is set.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{check_threshold, threshold, BinaryMask, ProbMap, ScalarVolume};

/// The value of one comparison plus the sums it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// DC or cDC depending on the operation that produced the report.
    pub value: f64,
    /// Normalizer applied to |A|; 1 for the binary Dice coefficient.
    pub c: f64,
    pub size_a: f64,
    pub size_b: f64,
    pub intersection: f64,
    /// Number of voxels with `aᵢ = 1` and `bᵢ > 0`.
    pub overlap_support: u64,
    /// Both operands were empty; `value` is 1 by convention.
    pub both_empty: bool,
}

/// Every `(t, dc)` pair of a threshold sweep and the maximizing entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult {
    pub entries: Vec<(f64, f64)>,
    pub best_t: f64,
    pub best_dc: f64,
}

fn check_pair(a: &ScalarVolume, b: &ScalarVolume) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimsMismatch(a.dims(), b.dims()));
    }
    if a.spacing() != b.spacing() {
        warn!(
            "spacing differs ({:?} vs {:?}); metrics use voxel sums only",
            a.spacing().as_array(),
            b.spacing().as_array()
        );
    }
    Ok(())
}

/// Σaᵢbᵢ, Σbᵢ and the integer count Σaᵢ·sign(bᵢ) in one pass.
fn overlap_sums(a: &[f64], b: &[f64]) -> (f64, f64, u64) {
    let mut intersection = 0.0;
    let mut size_b = 0.0;
    let mut support = 0u64;
    for (&ai, &bi) in a.iter().zip(b) {
        size_b += bi;
        if ai == 1.0 {
            intersection += bi;
            if bi > 0.0 {
                support += 1;
            }
        }
    }
    (intersection, size_b, support)
}

/// Classical Dice coefficient `2|A∩B| / (|A| + |B|)`.
pub fn dice_binary(a: &BinaryMask, b: &BinaryMask) -> Result<MetricReport> {
    check_pair(a.volume(), b.volume())?;
    let mut inter = 0u64;
    let mut size_a = 0u64;
    let mut size_b = 0u64;
    for (&ai, &bi) in a.data().iter().zip(b.data()) {
        let ai = (ai == 1.0) as u64;
        let bi = (bi == 1.0) as u64;
        size_a += ai;
        size_b += bi;
        inter += ai & bi;
    }
    let both_empty = size_a == 0 && size_b == 0;
    let value = if both_empty {
        1.0
    } else {
        2.0 * inter as f64 / (size_a + size_b) as f64
    };
    Ok(MetricReport {
        value,
        c: 1.0,
        size_a: size_a as f64,
        size_b: size_b as f64,
        intersection: inter as f64,
        overlap_support: inter,
        both_empty,
    })
}

/// Mean of `b` over the voxels where `a` is 1 and `b` is positive; 1 if there are none.
pub fn c_coefficient(a: &BinaryMask, b: &ProbMap) -> Result<f64> {
    check_pair(a.volume(), b.volume())?;
    let (intersection, _, support) = overlap_sums(a.data(), b.data());
    Ok(c_from_sums(intersection, support))
}

fn c_from_sums(intersection: f64, support: u64) -> f64 {
    if support == 0 {
        1.0
    } else {
        intersection / support as f64
    }
}

/// Continuous Dice coefficient of prediction `b` against ground truth `a`.
///
/// Argument order matters: `a` is the binary ground truth, `b` the probability map.
pub fn continuous_dice(a: &BinaryMask, b: &ProbMap) -> Result<MetricReport> {
    check_pair(a.volume(), b.volume())?;
    let (intersection, size_b, support) = overlap_sums(a.data(), b.data());
    let size_a = a.count();
    let c = c_from_sums(intersection, support);

    // When the support covers all of A, c|A| equals |A∩B| exactly; using the
    // sum directly keeps complete overlap at exactly 1.
    let weighted_a = if support == size_a {
        intersection
    } else {
        c * size_a as f64
    };
    let both_empty = size_a == 0 && size_b == 0.0;
    let value = if both_empty {
        1.0
    } else {
        2.0 * intersection / (weighted_a + size_b)
    };
    Ok(MetricReport {
        value,
        c,
        size_a: size_a as f64,
        size_b,
        intersection,
        overlap_support: support,
        both_empty,
    })
}

/// Classical Dice of `a` against `b` binarized at `t` (strict `>`).
pub fn thresholded_dice(a: &BinaryMask, b: &ProbMap, t: f64) -> Result<MetricReport> {
    if a.dims() != b.dims() {
        return Err(Error::DimsMismatch(a.dims(), b.dims()));
    }
    dice_binary(a, &threshold(b, t)?)
}

/// Evaluates [`thresholded_dice`] at every grid point and picks the maximum.
/// Ties go to the smallest threshold, wherever it sits in the grid.
pub fn best_threshold_dice(
    a: &BinaryMask,
    b: &ProbMap,
    grid: &[f64],
) -> Result<ThresholdSweepResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if a.dims() != b.dims() {
        return Err(Error::DimsMismatch(a.dims(), b.dims()));
    }
    for &t in grid {
        check_threshold(t)?;
    }
    let entries = grid
        .iter()
        .map(|&t| Ok((t, thresholded_dice(a, b, t)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let (best_t, best_dc) = entries
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && cur.0 < best.0) {
                cur
            } else {
                best
            }
        })
        .expect("grid is nonempty");
    Ok(ThresholdSweepResult {
        entries,
        best_t,
        best_dc,
    })
}
