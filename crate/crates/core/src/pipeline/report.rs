use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::experiment::ExperimentReport;
use crate::error::Result;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

/// One row per condition and trial; metric cells are empty for failed trials.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("condition,trial,wer,cer,confidence\n");
    for t in &report.trials {
        let _ = match &t.report {
            Some(r) => writeln!(
                out,
                "{},{},{},{},{}",
                t.condition, t.trial, r.wer, r.cer, r.mean_confidence
            ),
            None => writeln!(out, "{},{},,,", t.condition, t.trial),
        };
    }
    out
}

/// Writes `report.json` and `report.csv` into `dir`, creating it if needed.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let json_path = dir.join(REPORT_JSON);
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(&json_path, json)?;
    let csv_path = dir.join(REPORT_CSV);
    std::fs::write(&csv_path, report_csv(report))?;
    Ok((json_path, csv_path))
}
