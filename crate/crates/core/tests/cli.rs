use std::path::Path;
use std::process::{Command, Output};

fn floatlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floatlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FLOATLAB_SEED")
        .output()
        .unwrap()
}

fn count(dir: &Path, prefix: &str) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with(prefix)
        })
        .count()
}

#[test]
fn simulate_then_clarity_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = floatlab(&["config-init", "--out", "c.json"], d);
    assert_eq!(out.status.code(), Some(0));
    let out = floatlab(
        &[
            "simulate",
            "--config",
            "c.json",
            "--seconds",
            "12",
            "--fps",
            "30",
            "--out",
            "frames/",
        ],
        d,
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
    assert_eq!(count(&d.join("frames"), "frame_"), 360);
    assert_eq!(count(&d.join("frames"), "occlusion_"), 360);

    let out = floatlab(
        &[
            "clarity",
            "--frames",
            "frames/",
            "--grid",
            "8x6",
            "--out",
            "clarity.csv",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.join("clarity.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("frame,box_col,box_row,clarity"));
    assert_eq!(csv.lines().count(), 360 * 48 + 1);

    let out = floatlab(
        &[
            "overlay",
            "--frames",
            "frames",
            "--mode",
            "mean",
            "--out",
            "overlay.png",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(d.join("overlay.png").exists() && d.join("overlay.shaded.png").exists());
}

#[test]
fn clarity_falls_back_to_shaded_frames() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(floatlab(
        &["simulate", "--seconds", "1", "--fps", "10", "--out", "f"],
        d
    )
    .status
    .success());
    for e in std::fs::read_dir(d.join("f")).unwrap() {
        let p = e.unwrap().path();
        if p.file_name()
            .unwrap()
            .to_string_lossy()
            .starts_with("occlusion_")
        {
            std::fs::remove_file(p).unwrap();
        }
    }
    let out = floatlab(
        &[
            "clarity", "--frames", "f", "--grid", "2x2", "--out", "c.csv",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(d.join("c.csv"))
            .unwrap()
            .lines()
            .count(),
        10 * 4 + 1
    );
}

#[test]
fn seed_flag_beats_environment_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |out: &str, flag: Option<&str>, env: Option<&str>| {
        let mut args = vec!["simulate", "--seconds", "0.2", "--fps", "10", "--out", out];
        if let Some(s) = flag {
            args.extend(["--seed", s]);
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_floatlab"));
        cmd.args(&args).current_dir(d).env_remove("FLOATLAB_SEED");
        if let Some(e) = env {
            cmd.env("FLOATLAB_SEED", e);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(d.join(out).join("frame_000001.png")).unwrap()
    };
    let config_default = run("a", None, None);
    let env_7 = run("b", None, Some("7"));
    let flag_7 = run("c", Some("7"), Some("9"));
    let flag_42 = run("d", Some("42"), Some("7"));
    assert_ne!(config_default, env_7);
    assert_eq!(env_7, flag_7);
    assert_eq!(config_default, flag_42);
}

#[test]
fn events_change_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(floatlab(
        &["simulate", "--seconds", "2", "--fps", "10", "--out", "a"],
        d
    )
    .status
    .success());
    let out = floatlab(
        &[
            "simulate",
            "--seconds",
            "2",
            "--fps",
            "10",
            "--out",
            "b",
            "--event",
            "0.55,-1,0",
        ],
        d,
    );
    assert!(out.status.success());
    let frame = |dir: &str, i: usize| {
        std::fs::read(d.join(dir).join(format!("occlusion_{i:06}.png"))).unwrap()
    };
    assert_eq!(frame("a", 5), frame("b", 5));
    assert_ne!(frame("a", 6), frame("b", 6));
}

#[test]
fn evaluate_writes_reports_and_maps_failures_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("spec.json"),
        r#"{"kind":"motion","trials":2,"words_per_page":30}"#,
    )
    .unwrap();
    let out = floatlab(&["evaluate", "--spec", "spec.json", "--out", "rep"], d);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(d.join("rep/report.json").exists());
    assert_eq!(
        std::fs::read_to_string(d.join("rep/report.csv"))
            .unwrap()
            .lines()
            .count(),
        5
    );

    let out = floatlab(
        &[
            "evaluate",
            "--spec",
            "spec.json",
            "--out",
            "bad",
            "--ocr",
            "exec:exit 1",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(d.join("bad/report.json").exists());

    let out = floatlab(&["evaluate", "--spec", "missing.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    std::fs::write(d.join("broken.json"), r#"{"trials":"many"}"#).unwrap();
    assert_eq!(
        floatlab(&["evaluate", "--spec", "broken.json"], d)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(floatlab(&["simulate"], d).status.code(), Some(1));
    assert_eq!(
        floatlab(
            &["clarity", "--frames", "x", "--grid", "8", "--out", "c.csv"],
            d
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        floatlab(
            &["overlay", "--frames", "x", "--mode", "max", "--out", "o.png"],
            d
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        floatlab(&["clarity", "--frames", "nowhere", "--out", "c.csv"], d)
            .status
            .code(),
        Some(2)
    );
    std::fs::write(
        d.join("c.json"),
        r#"{"canvas_width":640,"canvas_height":480}"#,
    )
    .unwrap();
    assert_eq!(
        floatlab(&["simulate", "--config", "c.json", "--out", "f"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(floatlab(&["--help"], d).status.code(), Some(0));
}

#[test]
fn textpage_writes_page_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = floatlab(&["textpage", "--seed", "3", "--out", "pages/p.png"], d);
    assert_eq!(out.status.code(), Some(0));
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("pages/p.json")).unwrap()).unwrap();
    assert_eq!(truth["words"].as_array().unwrap().len(), 120);
}
