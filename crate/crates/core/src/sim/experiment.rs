//! Partial-volume experiment: shift a Gaussian confidence map and a copy of
//! its source mask by the same random sub-voxel translation, then score the
//! map with cDC and the re-binarized mask with DC against the unshifted mask.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{continuous_dice, dice_binary};
use crate::sim::phantom::{
    gaussian_probmap, make_ellipsoid_mask, GaussianMapSpec, PhantomSpec, Structure,
};
use crate::sim::resample::{random_unit_direction, translate_probmap};
use crate::volume::{check_threshold, threshold, BinaryMask, ProbMap, Spacing};

pub const DEFAULT_SPACING_MM: f64 = 0.5;
pub const DEFAULT_MARGIN_MM: f64 = 2.0;
pub const DEFAULT_SHIFT_MM: f64 = 0.25;
pub const DEFAULT_TRIALS: u32 = 20;

fn default_rebinarize_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub phantom: PhantomSpec,
    #[serde(default)]
    pub gmap: GaussianMapSpec,
    /// Translation length in millimetres.
    pub shift_mm: f64,
    pub n_trials: u32,
    pub seed: u64,
    /// Level at which the interpolated copy of the mask is re-binarized (strict `>`).
    #[serde(default = "default_rebinarize_threshold")]
    pub rebinarize_threshold: f64,
}

impl ExperimentConfig {
    /// Defaults for a named structure: 0.5 mm voxels, a 0.25 mm (half-voxel)
    /// shift, 20 trials, seed 0.
    pub fn preset(structure: Structure) -> Self {
        Self {
            phantom: PhantomSpec {
                semi_axes_mm: structure.semi_axes_mm(),
                spacing: Spacing::isotropic(DEFAULT_SPACING_MM).expect("positive spacing"),
                margin_mm: DEFAULT_MARGIN_MM,
            },
            gmap: GaussianMapSpec::default(),
            shift_mm: DEFAULT_SHIFT_MM,
            n_trials: DEFAULT_TRIALS,
            seed: 0,
            rebinarize_threshold: default_rebinarize_threshold(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phantom.validate()?;
        self.gmap.validate()?;
        if !(self.shift_mm.is_finite() && self.shift_mm >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "shift_mm is {}, must be finite and >= 0",
                self.shift_mm
            )));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be >= 1".into()));
        }
        check_threshold(self.rebinarize_threshold)
            .map_err(|e| Error::InvalidConfig(format!("rebinarize_threshold: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    /// Direction of the translation (unit vector).
    pub direction: [f64; 3],
    pub dc: f64,
    pub cdc: f64,
}

/// Per-trial values with their means and sample standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    pub trials: Vec<TrialRecord>,
    pub mean_dc: f64,
    pub sd_dc: f64,
    pub mean_cdc: f64,
    pub sd_cdc: f64,
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

impl TrialStatistics {
    /// Aggregates trial records, ordering them by trial index first.
    pub fn from_trials(mut trials: Vec<TrialRecord>) -> Self {
        trials.sort_by_key(|t| t.trial);
        let dc: Vec<f64> = trials.iter().map(|t| t.dc).collect();
        let cdc: Vec<f64> = trials.iter().map(|t| t.cdc).collect();
        let (mean_dc, sd_dc) = mean_sd(&dc);
        let (mean_cdc, sd_cdc) = mean_sd(&cdc);
        Self {
            trials,
            mean_dc,
            sd_dc,
            mean_cdc,
            sd_cdc,
        }
    }
}

/// RNG for trial `k`: the base seed selects the key, `k` selects the ChaCha
/// stream. Depends only on `(seed, k)`, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(trial));
    rng
}

struct Phantom {
    mask: BinaryMask,
    mask_as_map: ProbMap,
    confidence: ProbMap,
}

fn run_trial(cfg: &ExperimentConfig, ph: &Phantom, trial: u32) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, trial);
    let direction = random_unit_direction(&mut rng);
    let offset = direction.map(|c| c * cfg.shift_mm);

    let shifted_map = translate_probmap(&ph.confidence, offset);
    let shifted_mask = threshold(
        &translate_probmap(&ph.mask_as_map, offset),
        cfg.rebinarize_threshold,
    )?;
    Ok(TrialRecord {
        trial,
        direction,
        dc: dice_binary(&ph.mask, &shifted_mask)?.value,
        cdc: continuous_dice(&ph.mask, &shifted_map)?.value,
    })
}

fn build_phantom(cfg: &ExperimentConfig) -> Result<Phantom> {
    cfg.validate()?;
    let mask = make_ellipsoid_mask(&cfg.phantom)?;
    let confidence = gaussian_probmap(&mask, &cfg.gmap)?;
    Ok(Phantom {
        mask_as_map: mask.to_probmap(),
        mask,
        confidence,
    })
}

/// Runs every trial on rayon's global pool.
pub fn run_pve_experiment(cfg: &ExperimentConfig) -> Result<TrialStatistics> {
    let ph = build_phantom(cfg)?;
    let trials = (0..cfg.n_trials)
        .into_par_iter()
        .map(|k| run_trial(cfg, &ph, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialStatistics::from_trials(trials))
}

/// Same as [`run_pve_experiment`] on a dedicated pool of `workers` threads.
/// The result does not depend on `workers`.
pub fn run_pve_experiment_with_workers(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<TrialStatistics> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_pve_experiment(cfg))
}
