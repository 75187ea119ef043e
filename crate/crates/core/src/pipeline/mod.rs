//! Readability experiments: random text pages under simulated floaters,
//! scored by an OCR engine.

mod engine;
mod experiment;
mod external;
mod mock;
mod report;
mod words;

pub use engine::{engine_from_selector, ExecEngine, MockEngine, OcrEngine, PageSample};
pub use experiment::{
    derive_seed, experiment_sim_config, run_experiment, run_experiment_with, simulate_overlay,
    trial_seed, Condition, ConditionSummary, ExperimentKind, ExperimentReport, ExperimentSpec,
    MotionCondition, MotionProfile, PairwiseComparison, Provenance, RunOptions, Summary,
    TrialRecord,
};
pub use external::{parse_transcript_json, recognize_external, IMAGE_PLACEHOLDER};
pub use mock::{mock_recognize, word_occlusion, DROP_THRESHOLD, SUBSTITUTION_GAIN};
pub use report::{report_csv, write_report, REPORT_CSV, REPORT_JSON};
pub use words::{generate_random_text, word_list};
