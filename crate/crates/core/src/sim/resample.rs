//! Rigid sub-voxel translation with trilinear interpolation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::volume::{ProbMap, ScalarVolume};

/// Draws a direction uniformly on the unit sphere by normalizing a
/// standard-normal triple, redrawing when the triple is too close to zero.
pub fn random_unit_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-9 {
            return v.map(|c| c / norm);
        }
    }
}

/// Interpolation taps along one axis: up to two `(source index, weight)` pairs per output index.
fn axis_taps(n: usize, shift_voxels: f64) -> Vec<[(usize, f64); 2]> {
    // Output g samples the input at g - shift; the integer part and the
    // fraction are the same for every g.
    let src = -shift_voxels;
    let base = src.floor();
    let frac = src - base;
    let base = base as i64;
    (0..n as i64)
        .map(|g| {
            let i0 = g + base;
            let tap = |i: i64, w: f64| {
                if w != 0.0 && (0..n as i64).contains(&i) {
                    (i as usize, w)
                } else {
                    (0, 0.0)
                }
            };
            [tap(i0, 1.0 - frac), tap(i0 + 1, frac)]
        })
        .collect()
}

/// Translates `v` by `offset_mm`: each output voxel at grid point `g` is the
/// trilinear interpolation of `v` at `g - offset`. Samples outside the volume read as 0.
///
/// # Panics
///
/// If any offset component is not finite.
pub fn translate_resample(v: &ScalarVolume, offset_mm: [f64; 3]) -> ScalarVolume {
    assert!(
        offset_mm.iter().all(|o| o.is_finite()),
        "translation offset must be finite: {offset_mm:?}"
    );
    let dims = v.dims();
    let s = v.spacing().as_array();
    let tx = axis_taps(dims.nx(), offset_mm[0] / s[0]);
    let ty = axis_taps(dims.ny(), offset_mm[1] / s[1]);
    let tz = axis_taps(dims.nz(), offset_mm[2] / s[2]);
    let src = v.data();

    let mut out = Vec::with_capacity(dims.len());
    for taps_z in &tz {
        for taps_y in &ty {
            for taps_x in &tx {
                let mut acc = 0.0;
                for &(iz, wz) in taps_z {
                    if wz == 0.0 {
                        continue;
                    }
                    for &(iy, wy) in taps_y {
                        if wy == 0.0 {
                            continue;
                        }
                        let w_zy = wz * wy;
                        for &(ix, wx) in taps_x {
                            if wx == 0.0 {
                                continue;
                            }
                            acc += w_zy * wx * src[dims.index(ix, iy, iz)];
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    ScalarVolume::new(dims, v.spacing(), out).expect("interpolation of finite values is finite")
}

/// [`translate_resample`] for probability maps, clamping the result into `[0, 1]`.
pub fn translate_probmap(p: &ProbMap, offset_mm: [f64; 3]) -> ProbMap {
    ProbMap::clamped(translate_resample(p.volume(), offset_mm))
}
