//! Test-only helpers: an independent transliteration of the reference cDC
//! routine and random volume generators.

#![allow(dead_code)]

use contdice::{
    validate_binary, validate_probmap, BinaryMask, Dims, ProbMap, ScalarVolume, Spacing,
};
use rand::Rng;

/// `sign(x)`: 1, 0 or -1.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        -1.0
    }
}

/// Line-by-line port of the published MATLAB routine:
///
/// ```text
/// size_of_A_intersect_B = sum(A(:).*B(:));
/// size_of_A = sum(A(:));
/// size_of_B = sum(B(:));
/// if (size_of_A_intersect_B > 0)
///     c = sum(A(:).*B(:))/sum(A(:).*sign(B(:)));
/// else
///     c = 1;
/// end
/// cDC = (2*size_of_A_intersect_B) / (c*size_of_A + size_of_B);
/// ```
///
/// Returns NaN for two empty operands, as MATLAB would (0/0).
pub fn reference_cdc(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let size_of_a_intersect_b: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let size_of_a: f64 = a.iter().sum();
    let size_of_b: f64 = b.iter().sum();
    let c = if size_of_a_intersect_b > 0.0 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
            / a.iter().zip(b).map(|(x, y)| x * sign(*y)).sum::<f64>()
    } else {
        1.0
    };
    let cdc = (2.0 * size_of_a_intersect_b) / (c * size_of_a + size_of_b);
    (c, cdc)
}

/// Classical Dice by direct set counting.
pub fn reference_dc(a: &[f64], b: &[f64]) -> f64 {
    let inter = a
        .iter()
        .zip(b)
        .filter(|(x, y)| **x == 1.0 && **y == 1.0)
        .count();
    let na = a.iter().filter(|x| **x == 1.0).count();
    let nb = b.iter().filter(|x| **x == 1.0).count();
    2.0 * inter as f64 / (na + nb) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredKind {
    Binary,
    Uniform,
    Sparse,
}

pub fn random_dims<R: Rng>(rng: &mut R, max: usize) -> Dims {
    Dims::new(
        rng.random_range(1..=max),
        rng.random_range(1..=max),
        rng.random_range(1..=max),
    )
    .unwrap()
}

pub fn volume(dims: Dims, data: Vec<f64>) -> ScalarVolume {
    ScalarVolume::new(dims, Spacing::default(), data).unwrap()
}

pub fn random_binary_data<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let p: f64 = rng.random_range(0.05..0.95);
    (0..n)
        .map(|_| if rng.random_bool(p) { 1.0 } else { 0.0 })
        .collect()
}

pub fn random_mask<R: Rng>(rng: &mut R, dims: Dims) -> BinaryMask {
    validate_binary(volume(dims, random_binary_data(rng, dims.len()))).unwrap()
}

pub fn random_pred<R: Rng>(rng: &mut R, dims: Dims, kind: PredKind) -> ProbMap {
    let n = dims.len();
    let data = match kind {
        PredKind::Binary => random_binary_data(rng, n),
        PredKind::Uniform => (0..n).map(|_| rng.random_range(0.0..=1.0)).collect(),
        PredKind::Sparse => (0..n)
            .map(|_| {
                if rng.random_bool(0.1) {
                    rng.random_range(0.0..=1.0)
                } else {
                    0.0
                }
            })
            .collect(),
    };
    validate_probmap(volume(dims, data)).unwrap()
}

/// Ground truth with at least `min_in` foreground and `min_out` background voxels.
pub fn mask_with_room<R: Rng>(
    rng: &mut R,
    max: usize,
    min_in: usize,
    min_out: usize,
) -> BinaryMask {
    loop {
        let dims = random_dims(rng, max);
        let m = random_mask(rng, dims);
        let n_in = m.count() as usize;
        if n_in >= min_in && dims.len() - n_in >= min_out {
            return m;
        }
    }
}

pub fn indices_where(m: &BinaryMask, fg: bool) -> Vec<usize> {
    m.data()
        .iter()
        .enumerate()
        .filter(|(_, v)| (**v == 1.0) == fg)
        .map(|(i, _)| i)
        .collect()
}
