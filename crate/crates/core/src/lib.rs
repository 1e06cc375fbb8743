//! Overlap metrics for probabilistic segmentations.
//!
//! The central function is [`continuous_dice`], which scores a probability
//! map against a binary ground truth without thresholding it. The classical
//! [`dice_binary`] and the threshold protocols ([`thresholded_dice`],
//! [`best_threshold_dice`]) are provided alongside for comparison, together
//! with a small on-disk volume format ([`svol`]) and a partial-volume
//! simulation harness ([`sim`]).

pub mod cli;
pub mod error;
pub mod metrics;
pub mod numfmt;
pub mod sim;
pub mod svol;
pub mod volume;

pub use error::{Error, Result};
pub use metrics::{
    best_threshold_dice, c_coefficient, continuous_dice, dice_binary, thresholded_dice,
    MetricReport, ThresholdSweepResult,
};
pub use svol::{load_volume, store_volume, VolumeHeader};
pub use volume::{
    sign_map, threshold, validate_binary, validate_probmap, BinaryMask, Dims, ProbMap,
    ScalarVolume, Spacing,
};
