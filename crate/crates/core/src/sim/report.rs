//! CSV rendering of trial statistics, plus published reference values for
//! side-by-side comparison.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numfmt::fmt_full;
use crate::sim::experiment::TrialStatistics;
use crate::sim::phantom::Structure;

pub const CSV_HEADER: &str = "label,trial,dc,cdc";

/// Mean (SD) of DC and cDC as reported for the partial-volume simulation on
/// patient-derived segmentations. Not reproducible with synthetic phantoms;
/// printed only for comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub mean_dc: f64,
    pub sd_dc: f64,
    pub mean_cdc: f64,
    pub sd_cdc: f64,
}

pub fn published_reference(structure: Structure) -> Option<ReferencePoint> {
    match structure {
        Structure::Stn => Some(ReferencePoint {
            mean_dc: 0.86,
            sd_dc: 0.025,
            mean_cdc: 0.97,
            sd_cdc: 0.006,
        }),
        Structure::Thalamus => Some(ReferencePoint {
            mean_dc: 0.98,
            sd_dc: 0.006,
            mean_cdc: 0.99,
            sd_cdc: 0.001,
        }),
        Structure::Gp => None,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `label,summary,<mean_dc>,<sd_dc>,<mean_cdc>,<sd_cdc>`
pub fn summary_row(stats: &TrialStatistics, label: &str) -> String {
    format!(
        "{},summary,{},{},{},{}",
        csv_field(label),
        fmt_full(stats.mean_dc),
        fmt_full(stats.sd_dc),
        fmt_full(stats.mean_cdc),
        fmt_full(stats.sd_cdc)
    )
}

/// Writes the header, one row per trial in trial order, then the summary row.
pub fn emit_statistics_csv(
    stats: &TrialStatistics,
    label: &str,
    sink: &mut dyn Write,
) -> Result<()> {
    let io = |e| Error::io_context("statistics CSV", e);
    let label_field = csv_field(label);
    writeln!(sink, "{CSV_HEADER}").map_err(io)?;
    let mut trials: Vec<_> = stats.trials.iter().collect();
    trials.sort_by_key(|t| t.trial);
    for t in trials {
        writeln!(
            sink,
            "{},{},{},{}",
            label_field,
            t.trial,
            fmt_full(t.dc),
            fmt_full(t.cdc)
        )
        .map_err(io)?;
    }
    writeln!(sink, "{}", summary_row(stats, label)).map_err(io)?;
    sink.flush().map_err(io)
}
