//! Synthetic partial-volume experiment: ellipsoid phantoms, Gaussian
//! confidence maps, random sub-voxel translations and DC/cDC trial statistics.

pub mod experiment;
pub mod phantom;
pub mod report;
pub mod resample;

pub use experiment::{
    mean_sd, run_pve_experiment, run_pve_experiment_with_workers, trial_rng, ExperimentConfig,
    TrialRecord, TrialStatistics,
};
pub use phantom::{
    gaussian_probmap, make_ellipsoid_mask, GaussianMapSpec, GaussianSupport, PhantomSpec, Structure,
};
pub use report::{emit_statistics_csv, published_reference, summary_row, ReferencePoint};
pub use resample::{random_unit_direction, translate_probmap, translate_resample};
