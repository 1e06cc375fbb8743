//! The `contdice` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, malformed grid,
//! mixing `--config` with preset flags), 2 on data or validation errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::metrics::{
    best_threshold_dice, continuous_dice, dice_binary, thresholded_dice, MetricReport,
};
use crate::numfmt::{fmt_full, fmt_sig};
use crate::sim::{
    emit_statistics_csv, published_reference, run_pve_experiment, summary_row, ExperimentConfig,
    Structure,
};
use crate::svol::load_volume;
use crate::volume::{validate_binary, validate_probmap, BinaryMask, ProbMap, ScalarVolume};

const TEXT_DIGITS: usize = 6;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "contdice",
    version,
    about = "Dice and continuous Dice overlap metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare a binary ground truth with a (probabilistic) prediction.
    Metric(MetricArgs),
    /// Thresholded Dice over a grid of thresholds.
    Sweep(SweepArgs),
    /// Run the partial-volume simulation.
    Simulate(SimulateArgs),
    /// Load a volume and report which value classes it satisfies.
    ConvertCheck(ConvertCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Dc,
    Cdc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Binary ground-truth volume (.svol.json).
    #[arg(long)]
    truth: PathBuf,
    /// Prediction volume with values in [0, 1].
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Binarize the prediction at this level (strict >) before computing DC.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    grid_start: f64,
    #[arg(long, allow_negative_numbers = true)]
    grid_stop: f64,
    #[arg(long, allow_negative_numbers = true)]
    grid_step: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment configuration as JSON. Cannot be combined with the preset flags.
    #[arg(long, conflicts_with_all = ["structure", "shift_mm", "trials", "seed"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    structure: Option<Structure>,
    /// Translation length in mm [default: 0.25]
    #[arg(long)]
    shift_mm: Option<f64>,
    /// Number of random translations [default: 20]
    #[arg(long)]
    trials: Option<u32>,
    /// [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-trial CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertCheckArgs {
    #[arg(long)]
    volume: PathBuf,
}

/// A failed command: the exit code and the message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn data(context: &str, err: Error) -> Self {
        Self {
            code: 2,
            message: if context.is_empty() {
                err.to_string()
            } else {
                format!("{context}: {err}")
            },
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Entry point for the binary.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Metric(a) => cmd_metric(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::ConvertCheck(a) => cmd_convert_check(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::data("", Error::io_context("stdout", e)))
}

fn load(path: &Path, role: &str) -> std::result::Result<ScalarVolume, Failure> {
    load_volume(path).map_err(|e| Failure::data(role, e))
}

fn load_pair(
    truth: &Path,
    pred: &Path,
) -> std::result::Result<(BinaryMask, ScalarVolume, ProbMap), Failure> {
    let truth = validate_binary(load(truth, "truth")?).map_err(|e| Failure::data("truth", e))?;
    let pred_raw = load(pred, "pred")?;
    let pred = validate_probmap(pred_raw.clone()).map_err(|e| Failure::data("pred", e))?;
    if truth.dims() != pred.dims() {
        return Err(Failure::data(
            "",
            Error::DimsMismatch(truth.dims(), pred.dims()),
        ));
    }
    Ok((truth, pred_raw, pred))
}

fn warn_spacing(truth: &BinaryMask, pred: &ProbMap, err: &mut dyn Write) {
    let (a, b) = (truth.volume().spacing(), pred.volume().spacing());
    if a != b {
        let _ = writeln!(
            err,
            "warning: spacing differs (truth {:?} mm, pred {:?} mm); metrics use voxel sums only",
            a.as_array(),
            b.as_array()
        );
    }
}

#[derive(Serialize)]
struct JsonReport {
    dc: Option<f64>,
    cdc: Option<f64>,
    c: f64,
    size_a: f64,
    size_b: f64,
    intersection: f64,
    overlap_support: u64,
}

fn cmd_metric(a: &MetricArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (truth, pred_raw, pred) = load_pair(&a.truth, &a.pred)?;
    warn_spacing(&truth, &pred, err);

    let dc = if a.mode == Mode::Cdc {
        None
    } else if let Some(t) = a.threshold {
        Some(thresholded_dice(&truth, &pred, t).map_err(|e| Failure::data("threshold", e))?)
    } else {
        match validate_binary(pred_raw) {
            Ok(bin) => Some(dice_binary(&truth, &bin).map_err(|e| Failure::data("", e))?),
            // `both` still reports cDC for a probabilistic prediction; DC is left out.
            Err(_) if a.mode == Mode::Both => None,
            Err(e) => {
                return Err(Failure::data(
                    "pred (DC needs a binary prediction or --threshold)",
                    e,
                ))
            }
        }
    };
    let cdc = if a.mode == Mode::Dc {
        None
    } else {
        Some(continuous_dice(&truth, &pred).map_err(|e| Failure::data("", e))?)
    };
    // Operand sums come from the cDC report when there is one.
    let primary: MetricReport = cdc.or(dc).expect("at least one metric computed");

    let text = match a.report {
        ReportFormat::Json => {
            let report = JsonReport {
                dc: dc.map(|r| r.value),
                cdc: cdc.map(|r| r.value),
                c: primary.c,
                size_a: primary.size_a,
                size_b: primary.size_b,
                intersection: primary.intersection,
                overlap_support: primary.overlap_support,
            };
            let mut s = serde_json::to_string(&report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let g = |x: f64| fmt_sig(x, TEXT_DIGITS);
            let mut s = String::new();
            match dc {
                Some(r) => {
                    s += &format!("dc: {}\n", g(r.value));
                    if let Some(t) = a.threshold {
                        s += &format!("dc_threshold: {}\n", g(t));
                    }
                }
                None if a.mode == Mode::Both => {
                    s += "dc: n/a (prediction is not binary; pass --threshold)\n";
                }
                None => {}
            }
            if let Some(r) = cdc {
                s += &format!("cdc: {}\n", g(r.value));
            }
            s += &format!("c: {}\n", g(primary.c));
            s += &format!("size_a: {}\n", g(primary.size_a));
            s += &format!("size_b: {}\n", g(primary.size_b));
            s += &format!("intersection: {}\n", g(primary.intersection));
            s += &format!("overlap_support: {}\n", primary.overlap_support);
            if primary.both_empty {
                s += "both_empty: true\n";
            }
            s
        }
    };
    write_out(out, &text)
}

fn threshold_grid(start: f64, stop: f64, step: f64) -> std::result::Result<Vec<f64>, Failure> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Failure::usage("grid values must be finite"));
    }
    if step <= 0.0 {
        return Err(Failure::usage(format!(
            "--grid-step must be > 0, got {step}"
        )));
    }
    if start > stop {
        return Err(Failure::usage(format!(
            "--grid-start ({start}) must not exceed --grid-stop ({stop})"
        )));
    }
    if start < 0.0 || stop > 1.0 {
        return Err(Failure::usage(format!(
            "grid [{start}, {stop}] must lie within [0, 1]"
        )));
    }
    let steps = ((stop - start) / step + 1e-9).floor();
    if steps + 1.0 > MAX_GRID_POINTS as f64 {
        return Err(Failure::usage(format!(
            "grid would have more than {MAX_GRID_POINTS} points"
        )));
    }
    // Snap to 1e-12 so accumulated steps print as the decimal the user typed.
    Ok((0..=steps as usize)
        .map(|k| {
            let t = start + k as f64 * step;
            ((t * 1e12).round() / 1e12).clamp(start, stop)
        })
        .collect())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let grid = threshold_grid(a.grid_start, a.grid_stop, a.grid_step)?;
    let (truth, _, pred) = load_pair(&a.truth, &a.pred)?;
    let sweep = best_threshold_dice(&truth, &pred, &grid).map_err(|e| Failure::data("", e))?;
    let mut s = String::from("t,dc\n");
    for (t, dc) in &sweep.entries {
        s += &format!("{},{}\n", fmt_full(*t), fmt_full(*dc));
    }
    s += &format!(
        "best,{},{}\n",
        fmt_full(sweep.best_t),
        fmt_full(sweep.best_dc)
    );
    write_out(out, &s)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let (cfg, label, structure) = match (&a.config, a.structure) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::data("config", Error::io(path, e)))?;
            let cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure::data("config", e))?;
            (cfg, "custom".to_string(), None)
        }
        (None, Some(structure)) => {
            let mut cfg = ExperimentConfig::preset(structure);
            if let Some(v) = a.shift_mm {
                cfg.shift_mm = v;
            }
            if let Some(v) = a.trials {
                cfg.n_trials = v;
            }
            if let Some(v) = a.seed {
                cfg.seed = v;
            }
            cfg.validate().map_err(|e| Failure::data("config", e))?;
            (cfg, structure.name().to_string(), Some(structure))
        }
        (None, None) => return Err(Failure::usage("either --config or --structure is required")),
    };

    let stats = run_pve_experiment(&cfg).map_err(|e| Failure::data("simulate", e))?;
    if let Some(path) = &a.out {
        let mut buf = Vec::new();
        emit_statistics_csv(&stats, &label, &mut buf).map_err(|e| Failure::data("", e))?;
        fs::write(path, buf).map_err(|e| Failure::data("", Error::io(path, e)))?;
    }

    let mut s = format!("{}\n", summary_row(&stats, &label));
    if let Some(r) = structure.and_then(published_reference) {
        s += &format!(
            "{label},reference,{},{},{},{}\n",
            fmt_full(r.mean_dc),
            fmt_full(r.sd_dc),
            fmt_full(r.mean_cdc),
            fmt_full(r.sd_cdc)
        );
    }
    write_out(out, &s)
}

fn cmd_convert_check(a: &ConvertCheckArgs, out: &mut dyn Write) -> CmdResult {
    let v = load(&a.volume, "volume")?;
    let g = |x: f64| fmt_sig(x, TEXT_DIGITS);
    let verdict = |r: crate::error::Result<()>| match r {
        Ok(()) => "yes".to_string(),
        Err(Error::NotBinary { index, value }) | Err(Error::OutOfRange { index, value }) => {
            format!("no (index {index}, {})", g(value))
        }
        Err(e) => format!("no ({e})"),
    };
    let binary = verdict(validate_binary(v.clone()).map(|_| ()));
    let probmap = verdict(validate_probmap(v.clone()).map(|_| ()));
    let (lo, hi) = v.min_max();
    let sp = v.spacing();
    let s = format!(
        "dims: {}\nspacing_mm: {} {} {}\nmin: {}\nmax: {}\nscalar: yes\nbinary: {binary}, probmap: {probmap}\n",
        v.dims(),
        g(sp.sx()),
        g(sp.sy()),
        g(sp.sz()),
        g(lo),
        g(hi),
    );
    write_out(out, &s)
}
