//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use glam::DVec2;

use crate::error::{Error, Result};
use crate::pipeline::{
    generate_random_text, run_experiment_with, write_report, ExperimentSpec, RunOptions,
};
use crate::raster::{
    list_numbered, load_occlusion_png, occlusion_from_frame, render_frame, render_text_page,
    save_occlusion_png, ClarityGrid, ClaritySeries, FrameImage, FrameWriter, OcclusionMap,
    OverlayAccumulator, OverlayMode, RenderOptions, TextSpec,
};
use crate::sim::{init_simulation, SimConfig};

pub const SEED_ENV: &str = "FLOATLAB_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "floatlab",
    version,
    about = "Floater simulation and readability experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a default simulation config and/or experiment spec.
    ConfigInit {
        /// Simulation config destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Experiment spec destination.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate floaters and write numbered frames and occlusion maps.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 12.0)]
        seconds: f64,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Extra eye movement `t,dx,dy`; repeatable. One random saccade always fires at t = 0.
        #[arg(long = "event", value_name = "T,DX,DY", allow_hyphen_values = true)]
        events: Vec<Event>,
    },
    /// Accumulate a directory of occlusion maps into one overlay.
    Overlay {
        #[command(flatten)]
        frames: FramesArg,
        #[arg(long, default_value = "composite")]
        mode: OverlayMode,
        /// Per-frame opacity scale; defaults to 1 for mean and 1 / frame count for composite.
        #[arg(long)]
        scale: Option<f64>,
        /// 16-bit occlusion PNG; a shaded preview is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a page of random text and its ground truth.
    Textpage {
        /// Font, layout and page settings; defaults when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// PNG destination; ground truth goes to the same path with `.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-box clarity of every frame as CSV.
    Clarity {
        #[command(flatten)]
        frames: FramesArg,
        #[arg(long, default_value = "8x6")]
        grid: Grid,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a readability experiment and write report.json and report.csv.
    Evaluate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// `mock` or `exec:<command template>`; overrides the spec.
        #[arg(long)]
        ocr: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct FramesArg {
    /// Directory written by `simulate`.
    #[arg(long)]
    pub frames: PathBuf,
    /// Shadow level used to recover occlusion when only frame PNGs exist.
    #[arg(long, default_value_t = 0.25)]
    pub shadow_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub direction: DVec2,
}

impl FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::argument(format!("event '{s}' is not t,dx,dy")))?;
        match parts[..] {
            [t, dx, dy] if t.is_finite() && t >= 0.0 => Ok(Event {
                time: t,
                direction: DVec2::new(dx, dy),
            }),
            _ => Err(Error::argument(format!(
                "event '{s}' is not t,dx,dy with t >= 0"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub cols: u32,
    pub rows: u32,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::argument(format!("grid '{s}' is not WxH"));
        let (c, r) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let cols = c.parse().map_err(|_| bad())?;
        let rows = r.parse().map_err(|_| bad())?;
        if cols == 0 || rows == 0 {
            return Err(bad());
        }
        Ok(Grid { cols, rows })
    }
}

/// `--seed`, then `FLOATLAB_SEED`, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::argument(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        _ => Ok(fallback),
    }
}

fn load_sim_config(path: Option<&Path>) -> Result<SimConfig> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Resource {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    SimConfig::from_json(&text).map_err(|e| e.context(path.display().to_string()))
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn simulate(
    config: Option<&Path>,
    seconds: f64,
    fps: f64,
    out: &Path,
    seed: Option<u64>,
    mut events: Vec<Event>,
) -> Result<()> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::argument("--fps must be > 0"));
    }
    if !(seconds >= 0.0 && seconds.is_finite()) {
        return Err(Error::argument("--seconds must be >= 0"));
    }
    let mut config = load_sim_config(config)?;
    config.seed = resolve_seed(seed, config.seed)?;
    let frames = (seconds * fps).round() as usize;
    let frame_dt = 1.0 / fps;

    let mut state = init_simulation(&config)?;
    state.trigger_eye_movement(None)?;
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut pending = events.into_iter().peekable();
    let options = RenderOptions::default();
    let mut writer = FrameWriter::create(out)?;

    for i in 0..frames {
        let t_frame = i as f64 * frame_dt;
        // Advance to the frame time, stopping exactly at any event on the way.
        while let Some(ev) = pending.next_if(|e| e.time <= t_frame) {
            if ev.time > state.time {
                state.step(ev.time - state.time)?;
            }
            state.trigger_eye_movement(Some(ev.direction))?;
        }
        if t_frame > state.time {
            state.step(t_frame - state.time)?;
        }
        let (frame, occlusion) = render_frame(&state, &options);
        writer.write(&frame, Some(&occlusion))?;
    }
    println!(
        "wrote {} frames and {} occlusion maps ({}x{}, seed {}) to {}",
        writer.frames_written(),
        writer.frames_written(),
        config.canvas_width,
        config.canvas_height,
        config.seed,
        out.display()
    );
    Ok(())
}

/// Occlusion maps from a `simulate` directory: the 16-bit maps when present,
/// otherwise recovered from the shaded frames.
fn for_each_map(
    frames: &FramesArg,
    mut f: impl FnMut(OcclusionMap) -> Result<()>,
) -> Result<usize> {
    let dir = &frames.frames;
    let resource = |e: Error| match e {
        Error::Io(io) => Error::Resource {
            path: dir.clone(),
            reason: io.to_string(),
        },
        other => other,
    };
    let maps = list_numbered(dir, "occlusion_").map_err(resource)?;
    if !maps.is_empty() {
        for (_, path) in &maps {
            f(load_occlusion_png(path).map_err(|e| e.context(path.display().to_string()))?)?;
        }
        return Ok(maps.len());
    }
    let shaded = list_numbered(dir, "frame_").map_err(resource)?;
    if shaded.is_empty() {
        return Err(Error::Resource {
            path: dir.clone(),
            reason: "no frame_*.png or occlusion_*.png files".into(),
        });
    }
    for (_, path) in &shaded {
        let frame: FrameImage = image::open(path)
            .map_err(|e| Error::from(e).context(path.display().to_string()))?
            .into_luma8();
        f(occlusion_from_frame(&frame, frames.shadow_level)?)?;
    }
    Ok(shaded.len())
}

fn overlay(frames: &FramesArg, mode: OverlayMode, scale: Option<f64>, out: &Path) -> Result<()> {
    let scale = match scale {
        Some(s) => s,
        None if mode == OverlayMode::Mean => 1.0,
        None => {
            let maps = list_numbered(&frames.frames, "occlusion_")
                .unwrap_or_default()
                .len();
            let shaded = list_numbered(&frames.frames, "frame_")
                .unwrap_or_default()
                .len();
            1.0 / maps.max(shaded).max(1) as f64
        }
    };
    let mut acc = OverlayAccumulator::new(scale, mode)?;
    let n = for_each_map(frames, |m| acc.add(&m))?;
    let map = acc.finish()?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    save_occlusion_png(&map, out)?;
    let preview = out.with_extension("shaded.png");
    crate::raster::shade(&map, frames.shadow_level).save(&preview)?;
    println!(
        "wrote overlay of {n} frames ({mode:?}, scale {scale}, max {:.4}) to {} and {}",
        map.max(),
        out.display(),
        preview.display()
    );
    Ok(())
}

fn textpage(spec: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let spec = match spec {
        Some(p) => ExperimentSpec::load(p)?,
        None => ExperimentSpec::default(),
    };
    let seed = resolve_seed(seed, spec.seed)?;
    let text = generate_random_text(seed, spec.words_per_page)?;
    let text_spec = TextSpec {
        text,
        font: spec.fonts.first().cloned().unwrap_or_default(),
        font_size: spec.font_size,
        dpi: spec.dpi,
        layout: spec
            .layouts
            .first()
            .copied()
            .unwrap_or(crate::raster::Layout::SingleColumn),
        page_width: spec.sim.canvas_width,
        page_height: spec.sim.canvas_height,
        margin: spec.margin,
        line_spacing: spec.line_spacing,
    };
    let (page, truth) = render_text_page(&text_spec)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    page.save(out)?;
    let truth_path = out.with_extension("json");
    write_json(&truth, &truth_path)?;
    println!(
        "wrote {} ({} words, {} truncated) and {}",
        out.display(),
        truth.words.len(),
        truth.truncated,
        truth_path.display()
    );
    Ok(())
}

fn clarity(frames: &FramesArg, grid: Grid, out: &Path) -> Result<()> {
    let mut series: Option<ClaritySeries> = None;
    let n = for_each_map(frames, |m| {
        if series.is_none() {
            series = Some(ClaritySeries::new(ClarityGrid::new(
                grid.cols,
                grid.rows,
                m.width(),
                m.height(),
            )?));
        }
        series.as_mut().expect("initialized above").push(&m)
    })?;
    let series = series.expect("at least one frame");
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(out)?);
    series.write_csv(file)?;
    println!(
        "wrote clarity for {n} frames on a {}x{} grid to {}",
        grid.cols,
        grid.rows,
        out.display()
    );
    Ok(())
}

fn evaluate(
    spec_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    ocr: Option<String>,
) -> Result<bool> {
    let mut spec = ExperimentSpec::load(spec_path)?;
    spec.seed = resolve_seed(seed, spec.seed)?;
    if let Some(ocr) = ocr {
        spec.ocr = ocr;
    }
    spec.validate()?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("report"));
    let report = run_experiment_with(&spec, &RunOptions::default())?;
    let (json, csv) = write_report(&report, &out)?;
    for c in &report.conditions {
        let fmt = |s: Option<crate::pipeline::Summary>| {
            s.map_or("n/a".to_string(), |s| format!("{:.4}", s.mean))
        };
        println!(
            "{}: wer {} cer {} confidence {} ({} ok, {} failed)",
            c.condition,
            fmt(c.wer),
            fmt(c.cer),
            fmt(c.mean_confidence),
            c.succeeded,
            c.failed
        );
    }
    println!("wrote {} and {}", json.display(), csv.display());
    let failures = report.failures();
    if failures > 0 {
        eprintln!("error: {failures} trial(s) failed in the OCR engine");
    }
    Ok(failures == 0)
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::ConfigInit { out, spec, seed } => {
            if out.is_none() && spec.is_none() {
                return Err(Error::argument("config-init needs --out and/or --spec"));
            }
            if let Some(path) = out {
                let mut config = SimConfig::default();
                config.seed = resolve_seed(seed, config.seed)?;
                write_json(&config, &path)?;
                println!("wrote simulation config to {}", path.display());
            }
            if let Some(path) = spec {
                let mut spec = ExperimentSpec::default();
                spec.seed = resolve_seed(seed, spec.seed)?;
                write_json(&spec, &path)?;
                println!("wrote experiment spec to {}", path.display());
            }
        }
        Command::Simulate {
            config,
            seconds,
            fps,
            out,
            seed,
            events,
        } => simulate(config.as_deref(), seconds, fps, &out, seed, events)?,
        Command::Overlay {
            frames,
            mode,
            scale,
            out,
        } => overlay(&frames, mode, scale, &out)?,
        Command::Textpage { spec, seed, out } => textpage(spec.as_deref(), seed, &out)?,
        Command::Clarity { frames, grid, out } => clarity(&frames, grid, &out)?,
        Command::Evaluate {
            spec,
            out,
            seed,
            ocr,
        } => {
            if !evaluate(&spec, out.as_deref(), seed, ocr)? {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 success, 1 usage, 2 configuration or resource, 3 OCR engine.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
