use std::collections::HashSet;
use std::path::{Path, PathBuf};

use fontdue::Font;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::engine::{engine_from_selector, page_file, OcrEngine, PageSample};
use super::words::generate_random_text;
use crate::error::{Error, Result};
use crate::metrics::{paired_permutation_test, ErrorReport, SignificanceResult};
use crate::raster::text::{load_font, render_text_page_with, DEFAULT_FONT};
use crate::raster::{
    composite, render_occlusion, Layout, OcclusionMap, OverlayAccumulator, OverlayMode, TextSpec,
};
use crate::sim::{init_simulation, SimConfig};
use crate::stats::{mean, sample_stdev};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fonts,
    Layouts,
    Motion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionCondition {
    pub name: String,
    pub frame_count: usize,
    pub per_frame_opacity_scale: f64,
    pub speed_multiplier: f64,
}

impl MotionCondition {
    pub fn slow() -> Self {
        Self {
            name: "slow".into(),
            frame_count: 10,
            per_frame_opacity_scale: 0.1,
            speed_multiplier: 1.0,
        }
    }

    pub fn fast() -> Self {
        Self {
            name: "fast".into(),
            frame_count: 100,
            per_frame_opacity_scale: 0.01,
            speed_multiplier: 10.0,
        }
    }
}

/// Floater sampling for experiments where motion is held fixed: the whole
/// saccade and settling trace, evenly sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionProfile {
    pub frame_count: usize,
    pub seconds: f64,
    pub per_frame_opacity_scale: f64,
}

impl Default for MotionProfile {
    fn default() -> Self {
        Self {
            frame_count: 24,
            seconds: 12.0,
            per_frame_opacity_scale: 1.0 / 24.0,
        }
    }
}

/// Simulation defaults for experiments: a full page, no adaptation, and
/// enough large floaters to matter for recognition.
pub fn experiment_sim_config() -> SimConfig {
    let mut config = SimConfig {
        canvas_width: 768,
        canvas_height: 1024,
        floater_count: 80,
        chain_length_range: [4, 20],
        segment_length_range: [10.0, 24.0],
        radius_range: [6.0, 12.0],
        base_opacity_range: [0.5, 0.9],
        initial_alpha: 1.0,
        ..Default::default()
    };
    config.adaptation.enabled = false;
    config
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Font files or `bundled:` names. Layout and motion experiments use the first.
    pub fonts: Vec<String>,
    pub layouts: Vec<Layout>,
    pub motion: Vec<MotionCondition>,
    pub trials: usize,
    pub words_per_page: usize,
    pub seed: u64,
    /// `mock` or `exec:<command template>`.
    pub ocr: String,
    pub font_size: f32,
    pub dpi: f32,
    pub margin: u32,
    pub line_spacing: f32,
    pub accumulation: OverlayMode,
    /// Seconds over which every motion condition samples its frames.
    pub motion_window: f64,
    pub fixed_profile: MotionProfile,
    pub shadow_level: f64,
    pub edge_falloff: f64,
    /// Page size is the simulation canvas. Fields left out take the values
    /// of [`experiment_sim_config`], not the simulator's own defaults.
    #[serde(deserialize_with = "sim_over_experiment_defaults")]
    pub sim: SimConfig,
    pub permutations: u64,
    /// Parallel trials; 0 uses all cores.
    pub workers: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let text = TextSpec::default();
        Self {
            kind: ExperimentKind::Motion,
            fonts: vec![DEFAULT_FONT.into()],
            layouts: Layout::ALL.to_vec(),
            motion: vec![MotionCondition::slow(), MotionCondition::fast()],
            trials: 20,
            words_per_page: 120,
            seed: 2024,
            ocr: "mock".into(),
            font_size: text.font_size,
            dpi: text.dpi,
            margin: text.margin,
            line_spacing: text.line_spacing,
            accumulation: OverlayMode::Composite,
            motion_window: 0.2,
            fixed_profile: MotionProfile::default(),
            shadow_level: 0.25,
            edge_falloff: 2.0,
            sim: experiment_sim_config(),
            permutations: 10_000,
            workers: 0,
        }
    }
}

/// One arm of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub font: String,
    pub layout: Layout,
    /// `None` means the fixed motion profile.
    pub motion: Option<MotionCondition>,
}

fn merge_json(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn sim_over_experiment_defaults<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> Result<SimConfig, D::Error> {
    use serde::de::Error as _;
    let over = serde_json::Value::deserialize(d)?;
    let mut base = serde_json::to_value(experiment_sim_config()).map_err(D::Error::custom)?;
    merge_json(&mut base, over);
    serde_json::from_value(base).map_err(D::Error::custom)
}

fn font_label(source: &str) -> String {
    let name = source.strip_prefix("bundled:").unwrap_or(source);
    Path::new(name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Resource {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn conditions(&self) -> Result<Vec<Condition>> {
        let first_font = || {
            self.fonts
                .first()
                .cloned()
                .ok_or_else(|| Error::config("fonts must list at least one font"))
        };
        let conditions: Vec<Condition> = match self.kind {
            ExperimentKind::Fonts => self
                .fonts
                .iter()
                .map(|f| Condition {
                    name: font_label(f),
                    font: f.clone(),
                    layout: Layout::SingleColumn,
                    motion: None,
                })
                .collect(),
            ExperimentKind::Layouts => {
                let font = first_font()?;
                self.layouts
                    .iter()
                    .map(|&layout| Condition {
                        name: layout.name().into(),
                        font: font.clone(),
                        layout,
                        motion: None,
                    })
                    .collect()
            }
            ExperimentKind::Motion => {
                let font = first_font()?;
                self.motion
                    .iter()
                    .map(|m| Condition {
                        name: m.name.clone(),
                        font: font.clone(),
                        layout: Layout::SingleColumn,
                        motion: Some(m.clone()),
                    })
                    .collect()
            }
        };
        if conditions.is_empty() {
            return Err(Error::config("experiment has no conditions"));
        }
        let mut seen = HashSet::new();
        for c in &conditions {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::config(format!("duplicate condition '{}'", c.name)));
            }
        }
        Ok(conditions)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.words_per_page < 1 {
            return Err(Error::config("words_per_page must be >= 1"));
        }
        if self.permutations < 1 {
            return Err(Error::config("permutations must be >= 1"));
        }
        if !(self.motion_window > 0.0 && self.motion_window.is_finite()) {
            return Err(Error::config("motion_window must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.shadow_level) {
            return Err(Error::config("shadow_level must lie in [0, 1]"));
        }
        if !(self.edge_falloff >= 0.0 && self.edge_falloff.is_finite()) {
            return Err(Error::config("edge_falloff must be >= 0"));
        }
        let p = &self.fixed_profile;
        if p.frame_count < 1 || p.seconds.is_nan() || p.seconds <= 0.0 {
            return Err(Error::config(
                "fixed_profile needs >= 1 frame and seconds > 0",
            ));
        }
        check_scale(p.per_frame_opacity_scale)?;
        for m in &self.motion {
            if m.frame_count < 1 {
                return Err(Error::config(format!(
                    "motion '{}': frame_count must be >= 1",
                    m.name
                )));
            }
            check_scale(m.per_frame_opacity_scale)?;
            if !(m.speed_multiplier > 0.0 && m.speed_multiplier.is_finite()) {
                return Err(Error::config(format!(
                    "motion '{}': speed_multiplier must be > 0",
                    m.name
                )));
            }
        }
        if self.kind == ExperimentKind::Motion {
            // Conditions differ in how the shadow is spread, not in how much there is.
            if let Some(first) = self.motion.first() {
                let budget = first.per_frame_opacity_scale * first.frame_count as f64;
                for m in &self.motion[1..] {
                    let other = m.per_frame_opacity_scale * m.frame_count as f64;
                    if (other - budget).abs() > 1e-9 * budget.max(1.0) {
                        return Err(Error::config(format!(
                            "motion '{}' has opacity budget {other} (scale x frames), '{}' has {budget}",
                            m.name, first.name
                        )));
                    }
                }
            }
        }
        self.sim.validate().map_err(|e| e.context("sim"))?;
        engine_from_selector(&self.ocr).map_err(|e| Error::config(e.to_string()))?;
        self.conditions()?;
        Ok(())
    }

    /// SHA-256 of the spec's canonical JSON, defaults filled in.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::config(format!(
            "per_frame_opacity_scale {scale} outside (0, 1]"
        )));
    }
    Ok(())
}

const STREAM_TEXT: u64 = 1;
const STREAM_SIM: u64 = 2;
const STREAM_OCR: u64 = 3;
const STREAM_TESTS: u64 = 1 << 32;

/// Seed for stream `stream` of the generator seeded by `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Per-trial seed. Depends only on the master seed and the trial index, so
/// every condition of a trial sees the same text and floaters.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, trial as u64)
}

/// Samples `frames` occlusion maps `interval` seconds apart after a random
/// saccade at t = 0 and accumulates them.
#[allow(clippy::too_many_arguments)]
pub fn simulate_overlay(
    sim: &SimConfig,
    seed: u64,
    frames: usize,
    interval: f64,
    per_frame_scale: f64,
    mode: OverlayMode,
    edge_falloff: f64,
) -> Result<OcclusionMap> {
    let mut config = sim.clone();
    config.seed = seed;
    let mut state = init_simulation(&config)?;
    state.trigger_eye_movement(None)?;
    let mut acc = OverlayAccumulator::new(per_frame_scale, mode)?;
    for i in 0..frames {
        if i > 0 {
            state.step(interval)?;
        }
        acc.add(&render_occlusion(
            &state.floaters,
            config.canvas_width,
            config.canvas_height,
            edge_falloff,
        ))?;
    }
    acc.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub condition: String,
    pub trial: usize,
    pub seed: u64,
    /// Words that fit on the page; the reference for scoring.
    pub words_rendered: usize,
    pub report: Option<ErrorReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stdev: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Option<Self> {
        (!values.is_empty()).then(|| Summary {
            mean: mean(values),
            stdev: sample_stdev(values),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub succeeded: usize,
    pub failed: usize,
    pub wer: Option<Summary>,
    pub cer: Option<Summary>,
    pub mean_confidence: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    pub metric: String,
    pub n_pairs: usize,
    pub result: SignificanceResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub engine: String,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub provenance: Provenance,
    pub conditions: Vec<ConditionSummary>,
    pub pairwise: Vec<PairwiseComparison>,
    /// Condition-major, then trial.
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionSummary> {
        self.conditions.iter().find(|c| c.condition == name)
    }

    pub fn comparison(&self, a: &str, b: &str, metric: &str) -> Option<&PairwiseComparison> {
        self.pairwise
            .iter()
            .find(|p| p.a == a && p.b == b && p.metric == metric)
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.error.is_some()).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where composited pages are written. External engines need files; when
    /// unset they get a temporary directory.
    pub pages_dir: Option<PathBuf>,
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    conditions: &'a [Condition],
    fonts: &'a [(String, Font)],
    engine: &'a dyn OcrEngine,
    pages_dir: Option<&'a Path>,
}

impl Context<'_> {
    fn font(&self, source: &str) -> &Font {
        &self
            .fonts
            .iter()
            .find(|(s, _)| s == source)
            .expect("font preloaded")
            .1
    }

    fn overlay(&self, condition: &Condition, sim_seed: u64) -> Result<OcclusionMap> {
        let spec = self.spec;
        match &condition.motion {
            Some(m) => simulate_overlay(
                &spec.sim.clone().with_speed_multiplier(m.speed_multiplier),
                sim_seed,
                m.frame_count,
                spec.motion_window / m.frame_count as f64,
                m.per_frame_opacity_scale,
                spec.accumulation,
                spec.edge_falloff,
            ),
            None => {
                let p = &spec.fixed_profile;
                simulate_overlay(
                    &spec.sim,
                    sim_seed,
                    p.frame_count,
                    p.seconds / p.frame_count as f64,
                    p.per_frame_opacity_scale,
                    spec.accumulation,
                    spec.edge_falloff,
                )
            }
        }
    }

    fn run_trial(&self, trial: usize) -> Result<Vec<TrialRecord>> {
        let spec = self.spec;
        let seed = trial_seed(spec.seed, trial);
        let text = generate_random_text(derive_seed(seed, STREAM_TEXT), spec.words_per_page)?;
        let sim_seed = derive_seed(seed, STREAM_SIM);
        let ocr_seed = derive_seed(seed, STREAM_OCR);
        let mut fixed_overlay: Option<OcclusionMap> = None;

        let mut records = Vec::with_capacity(self.conditions.len());
        for condition in self.conditions {
            let at = || format!("condition '{}', trial {trial}", condition.name);
            let overlay = match (&condition.motion, &fixed_overlay) {
                (None, Some(o)) => o.clone(),
                _ => {
                    let o = self
                        .overlay(condition, sim_seed)
                        .map_err(|e| e.context(at()))?;
                    if condition.motion.is_none() {
                        fixed_overlay = Some(o.clone());
                    }
                    o
                }
            };
            let text_spec = TextSpec {
                text: text.clone(),
                font: condition.font.clone(),
                font_size: spec.font_size,
                dpi: spec.dpi,
                layout: condition.layout,
                page_width: spec.sim.canvas_width,
                page_height: spec.sim.canvas_height,
                margin: spec.margin,
                line_spacing: spec.line_spacing,
            };
            let (page, truth) = render_text_page_with(&text_spec, self.font(&condition.font))
                .map_err(|e| e.context(at()))?;
            let image =
                composite(&page, &overlay, spec.shadow_level).map_err(|e| e.context(at()))?;
            let image_path = match (self.engine.needs_image_file(), self.pages_dir) {
                (true, Some(dir)) | (false, Some(dir)) => {
                    let path = page_file(dir, &condition.name, trial);
                    image
                        .save(&path)
                        .map_err(|e| Error::from(e).context(at()))?;
                    Some(path)
                }
                (true, None) => {
                    return Err(Error::Ocr("external engine needs a page directory".into()))
                }
                (false, None) => None,
            };
            let sample = PageSample {
                image: &image,
                image_path: image_path.as_deref(),
                truth: &truth,
                overlay: &overlay,
                seed: ocr_seed,
            };
            let reference: Vec<&str> = truth.words.iter().map(|w| w.text.as_str()).collect();
            let (report, error) = match self.engine.recognize(&sample) {
                Ok(transcript) => (Some(ErrorReport::evaluate(&reference, &transcript)?), None),
                Err(e) if matches!(e.root(), Error::Ocr(_)) => {
                    log::warn!("{}: {e}", at());
                    (None, Some(e.to_string()))
                }
                Err(e) => return Err(e.context(at())),
            };
            records.push(TrialRecord {
                condition: condition.name.clone(),
                trial,
                seed,
                words_rendered: truth.words.len(),
                report,
                error,
            });
        }
        Ok(records)
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_experiment_with(spec, &RunOptions::default())
}

pub fn run_experiment_with(
    spec: &ExperimentSpec,
    options: &RunOptions,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let conditions = spec.conditions()?;
    let engine = engine_from_selector(&spec.ocr)?;

    let mut fonts: Vec<(String, Font)> = Vec::new();
    for c in &conditions {
        if !fonts.iter().any(|(s, _)| *s == c.font) {
            fonts.push((c.font.clone(), load_font(&c.font)?));
        }
    }

    let temp;
    let pages_dir: Option<&Path> = match (&options.pages_dir, engine.needs_image_file()) {
        (Some(dir), _) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.as_path())
        }
        (None, true) => {
            temp = tempfile::tempdir()?;
            Some(temp.path())
        }
        (None, false) => None,
    };

    let ctx = Context {
        spec,
        conditions: &conditions,
        fonts: &fonts,
        engine: engine.as_ref(),
        pages_dir,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| ctx.run_trial(t))
            .collect::<Result<_>>()
    })?;

    let mut records = Vec::with_capacity(spec.trials * conditions.len());
    for (ci, _) in conditions.iter().enumerate() {
        for trial_records in &per_trial {
            records.push(trial_records[ci].clone());
        }
    }

    let summaries = conditions
        .iter()
        .map(|c| summarize(&c.name, &records))
        .collect();
    let pairwise = compare_all(spec, &conditions, &records)?;

    Ok(ExperimentReport {
        kind: spec.kind,
        provenance: Provenance {
            seed: spec.seed,
            engine: engine.label(),
            config_hash: spec.config_hash(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        conditions: summaries,
        pairwise,
        trials: records,
    })
}

type Metric = fn(&ErrorReport) -> f64;

const METRICS: [(&str, Metric); 3] = [
    ("wer", |r| r.wer),
    ("cer", |r| r.cer),
    ("mean_confidence", |r| r.mean_confidence),
];

fn summarize(name: &str, records: &[TrialRecord]) -> ConditionSummary {
    let mine: Vec<&TrialRecord> = records.iter().filter(|r| r.condition == name).collect();
    let ok: Vec<&ErrorReport> = mine.iter().filter_map(|r| r.report.as_ref()).collect();
    let pick = |f: Metric| Summary::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    ConditionSummary {
        condition: name.into(),
        succeeded: ok.len(),
        failed: mine.len() - ok.len(),
        wer: pick(METRICS[0].1),
        cer: pick(METRICS[1].1),
        mean_confidence: pick(METRICS[2].1),
    }
}

fn compare_all(
    spec: &ExperimentSpec,
    conditions: &[Condition],
    records: &[TrialRecord],
) -> Result<Vec<PairwiseComparison>> {
    let by_trial = |name: &str| -> Vec<Option<&ErrorReport>> {
        let mut v = vec![None; spec.trials];
        for r in records.iter().filter(|r| r.condition == name) {
            v[r.trial] = r.report.as_ref();
        }
        v
    };
    let mut out = Vec::new();
    let mut pair_index = 0u64;
    for (i, a) in conditions.iter().enumerate() {
        for b in &conditions[i + 1..] {
            let (ra, rb) = (by_trial(&a.name), by_trial(&b.name));
            let pairs: Vec<(&ErrorReport, &ErrorReport)> = ra
                .iter()
                .zip(&rb)
                .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                .collect();
            for (mi, (metric, f)) in METRICS.iter().enumerate() {
                let seed = derive_seed(
                    spec.seed,
                    STREAM_TESTS + pair_index * METRICS.len() as u64 + mi as u64,
                );
                if pairs.len() < 2 {
                    log::warn!(
                        "{} vs {}: {} paired trials, skipping {metric}",
                        a.name,
                        b.name,
                        pairs.len()
                    );
                    continue;
                }
                let xa: Vec<f64> = pairs.iter().map(|(x, _)| f(x)).collect();
                let xb: Vec<f64> = pairs.iter().map(|(_, y)| f(y)).collect();
                out.push(PairwiseComparison {
                    a: a.name.clone(),
                    b: b.name.clone(),
                    metric: (*metric).into(),
                    n_pairs: pairs.len(),
                    result: paired_permutation_test(&xa, &xb, spec.permutations, seed)?,
                });
            }
            pair_index += 1;
        }
    }
    Ok(out)
}
