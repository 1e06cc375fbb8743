use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use contdice::{store_volume, Dims, ScalarVolume, Spacing};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contdice"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn contdice")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_line_volume(dir: &Path, name: &str, values: &[f64]) -> String {
    let dims = Dims::new(values.len(), 1, 1).unwrap();
    let v = ScalarVolume::new(dims, Spacing::default(), values.to_vec()).unwrap();
    store_volume(&v, dir.join(name))
        .unwrap()
        .to_string_lossy()
        .into_owned()
}

fn json_field(text: &str, key: &str) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v[key].clone()
}

#[test]
fn identical_binary_files_score_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 0.0, 1.0, 1.0]);
    let o = run(&[
        "metric", "--truth", &a, "--pred", &a, "--mode", "both", "--report", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(json_field(&text, "dc"), 1.0);
    assert_eq!(json_field(&text, "cdc"), 1.0);
    let keys: Vec<String> = serde_json::from_str::<serde_json::Value>(&text)
        .unwrap()
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    let mut want = vec![
        "dc",
        "cdc",
        "c",
        "size_a",
        "size_b",
        "intersection",
        "overlap_support",
    ];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);

    let text = stdout(&run(&["metric", "--truth", &a, "--pred", &a]));
    assert!(
        text.contains("dc: 1\n") && text.contains("cdc: 1\n"),
        "{text}"
    );
}

#[test]
fn nonbinary_truth_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 0.5, 0.0, 0.0]);
    let b = write_line_volume(dir.path(), "b", &[1.0, 0.0, 0.0, 0.0]);
    let o = run(&["metric", "--truth", &a, "--pred", &b]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("NotBinary") && err.contains("voxel 1"),
        "{err}"
    );
}

#[test]
fn worked_pair_json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 1.0, 0.0, 0.0]);
    let b = write_line_volume(dir.path(), "b", &[0.5, 1.0, 0.25, 0.0]);
    let o = run(&[
        "metric", "--truth", &a, "--pred", &b, "--mode", "cdc", "--report", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let cdc = json_field(&text, "cdc").as_f64().unwrap();
    assert!((cdc - 3.0 / 3.25).abs() < 1e-12);
    assert!(json_field(&text, "dc").is_null());

    // recompute from the reported sums
    let f = |k| json_field(&text, k).as_f64().unwrap();
    let again = 2.0 * f("intersection") / (f("c") * f("size_a") + f("size_b"));
    assert!((again - cdc).abs() < 1e-12);
    assert_eq!(json_field(&text, "overlap_support"), 2);

    let text = stdout(&run(&[
        "metric", "--truth", &a, "--pred", &b, "--mode", "cdc",
    ]));
    assert!(text.contains("cdc: 0.923077\n"), "{text}");
}

#[test]
fn dc_mode_needs_binary_pred_or_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 1.0, 0.0, 0.0]);
    let b = write_line_volume(dir.path(), "b", &[0.5, 1.0, 0.25, 0.0]);
    let o = run(&["metric", "--truth", &a, "--pred", &b, "--mode", "dc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NotBinary"));

    let o = run(&[
        "metric",
        "--truth",
        &a,
        "--pred",
        &b,
        "--mode",
        "dc",
        "--threshold",
        "0.3",
        "--report",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_field(&stdout(&o), "dc"), 1.0);

    // both mode keeps going and leaves DC out
    let o = run(&["metric", "--truth", &a, "--pred", &b, "--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json_field(&stdout(&o), "dc").is_null());
}

#[test]
fn dims_mismatch_and_missing_file_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 1.0, 0.0]);
    let b = write_line_volume(dir.path(), "b", &[1.0, 1.0, 0.0, 0.0]);
    let o = run(&["metric", "--truth", &a, "--pred", &b]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DimsMismatch"));
    let missing = dir.path().join("nope.svol.json");
    let o = run(&["metric", "--truth", &a, "--pred", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("IoFailure"));
}

#[test]
fn spacing_mismatch_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 0.0]);
    let v = ScalarVolume::new(
        Dims::new(2, 1, 1).unwrap(),
        Spacing::isotropic(0.5).unwrap(),
        vec![1.0, 0.0],
    )
    .unwrap();
    let b = store_volume(&v, dir.path().join("b")).unwrap();
    let o = run(&["metric", "--truth", &a, "--pred", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning: spacing differs"));
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 1.0, 0.0, 0.0]);
    let b = write_line_volume(dir.path(), "b", &[0.5, 1.0, 0.25, 0.0]);
    let o = run(&[
        "sweep",
        "--truth",
        &a,
        "--pred",
        &b,
        "--grid-start",
        "0.1",
        "--grid-stop",
        "0.1",
        "--grid-step",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t,dc\n0.1,0.8\nbest,0.1,0.8\n");

    let bin = write_line_volume(dir.path(), "bin", &[1.0, 0.0, 1.0, 0.0]);
    let o = run(&[
        "sweep",
        "--truth",
        &a,
        "--pred",
        &bin,
        "--grid-start",
        "0.2",
        "--grid-stop",
        "0.9",
        "--grid-step",
        "0.1",
    ]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[..8].iter().all(|r| r.ends_with(",0.5")));
    assert_eq!(rows[8], "best,0.2,0.5");
}

#[test]
fn sweep_on_gaussian_phantom() {
    use contdice::sim::{
        gaussian_probmap, make_ellipsoid_mask, GaussianMapSpec, GaussianSupport, PhantomSpec,
    };
    let dir = tempfile::tempdir().unwrap();
    let mask = make_ellipsoid_mask(&PhantomSpec {
        semi_axes_mm: [2.0, 3.0, 4.0],
        spacing: Spacing::isotropic(0.5).unwrap(),
        margin_mm: 1.0,
    })
    .unwrap();
    let map = gaussian_probmap(
        &mask,
        &GaussianMapSpec {
            sigma_scale: 0.5,
            support: GaussianSupport::Everywhere,
        },
    )
    .unwrap();
    let a = store_volume(mask.volume(), dir.path().join("mask")).unwrap();
    let b = store_volume(map.volume(), dir.path().join("map")).unwrap();
    let o = run(&[
        "sweep",
        "--truth",
        a.to_str().unwrap(),
        "--pred",
        b.to_str().unwrap(),
        "--grid-start",
        "0.05",
        "--grid-stop",
        "0.95",
        "--grid-step",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 19 + 1);
    let best: f64 = lines[20].split(',').nth(2).unwrap().parse().unwrap();
    for row in &lines[1..20] {
        let dc: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(best >= dc);
    }
}

#[test]
fn malformed_grid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0]);
    for (s, e, st) in [
        ("0.5", "0.1", "0.1"),
        ("0.1", "0.5", "0"),
        ("0.1", "0.5", "-0.1"),
    ] {
        let o = run(&[
            "sweep",
            "--truth",
            &a,
            "--pred",
            &a,
            "--grid-start",
            s,
            "--grid-stop",
            e,
            "--grid-step",
            st,
        ]);
        assert_eq!(o.status.code(), Some(1), "{s} {e} {st}");
    }
}

#[test]
fn simulate_zero_shift_summary() {
    let o = run(&[
        "simulate",
        "--structure",
        "stn",
        "--shift-mm",
        "0",
        "--trials",
        "3",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let summary: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(summary[..2], ["stn", "summary"]);
    assert_eq!(summary[2].parse::<f64>().unwrap(), 1.0);
    assert!(text.contains("stn,reference,0.86,0.025,0.97,0.006"));
}

#[test]
fn simulate_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("one.csv");
    let p2 = dir.path().join("two.csv");
    for p in [&p1, &p2] {
        let o = run(&[
            "simulate",
            "--structure",
            "stn",
            "--shift-mm",
            "0.25",
            "--trials",
            "20",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read(&p1).unwrap();
    assert_eq!(a, fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 22);
    let summary: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .skip(2)
        .map(|x| x.parse().unwrap())
        .collect();
    // mean_cdc > mean_dc
    assert!(summary[2] > summary[0], "{summary:?}");
}

#[test]
fn simulate_config_file_and_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"phantom": {"semi_axes_mm": [2, 3, 4], "spacing": {"sx": 0.5, "sy": 0.5, "sz": 0.5}, "margin_mm": 2},
            "gmap": {"sigma_scale": 0.5, "support": "mask-only"},
            "shift_mm": 0.25, "n_trials": 4, "seed": 3, "rebinarize_threshold": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("custom,summary,"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 6);

    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--structure",
        "stn",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(o.status.code(), Some(1));

    fs::write(&cfg, r#"{"phantom": {}}"#).unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvalidConfig"));

    let o = run(&["simulate", "--structure", "stn", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--structure", "putamen"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn convert_check_reports_classes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 0.0, 1.0]);
    let o = run(&["convert-check", "--volume", &a]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("binary: yes, probmap: yes"), "{text}");
    assert!(text.contains("dims: 3x1x1"));

    let b = write_line_volume(dir.path(), "b", &[0.0, 0.25, 1.5, 0.0]);
    let text = stdout(&run(&["convert-check", "--volume", &b]));
    assert!(text.contains("probmap: no (index 2, 1.5)"), "{text}");
    assert!(text.contains("binary: no (index 1, 0.25)"), "{text}");
    assert!(text.contains("max: 1.5"));
}

#[test]
fn convert_check_truncated_payload_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_line_volume(dir.path(), "a", &[1.0, 0.0, 1.0]);
    let raw: PathBuf = dir.path().join("a.svol.raw");
    let bytes = fs::read(&raw).unwrap();
    fs::write(&raw, &bytes[..6]).unwrap();
    let o = run(&["convert-check", "--volume", &a]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("HeaderMismatch"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["metric"]).status.code(), Some(1));
    assert_eq!(
        run(&["metric", "--truth", "a", "--pred", "b", "--mode", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
