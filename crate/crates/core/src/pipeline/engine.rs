use std::path::{Path, PathBuf};

use super::external::recognize_external;
use super::mock::mock_recognize;
use crate::error::{Error, Result};
use crate::metrics::Transcript;
use crate::raster::{FrameImage, GroundTruth, OcclusionMap};

/// Everything an engine might need for one page. The mock engine reads the
/// ground truth and overlay; external engines only see the image file.
pub struct PageSample<'a> {
    pub image: &'a FrameImage,
    pub image_path: Option<&'a Path>,
    pub truth: &'a GroundTruth,
    pub overlay: &'a OcclusionMap,
    pub seed: u64,
}

pub trait OcrEngine: Send + Sync {
    fn label(&self) -> String;

    /// Whether `recognize` needs the page written to disk first.
    fn needs_image_file(&self) -> bool;

    fn recognize(&self, sample: &PageSample<'_>) -> Result<Transcript>;
}

pub struct MockEngine;

impl OcrEngine for MockEngine {
    fn label(&self) -> String {
        "mock".into()
    }

    fn needs_image_file(&self) -> bool {
        false
    }

    fn recognize(&self, sample: &PageSample<'_>) -> Result<Transcript> {
        mock_recognize(sample.image, sample.truth, sample.overlay, sample.seed)
    }
}

pub struct ExecEngine {
    pub template: String,
}

impl OcrEngine for ExecEngine {
    fn label(&self) -> String {
        format!("exec:{}", self.template)
    }

    fn needs_image_file(&self) -> bool {
        true
    }

    fn recognize(&self, sample: &PageSample<'_>) -> Result<Transcript> {
        let path = sample
            .image_path
            .ok_or_else(|| Error::Ocr("external engine needs an image file".into()))?;
        recognize_external(&self.template, path)
    }
}

/// Parses `mock` or `exec:<command template>`.
pub fn engine_from_selector(selector: &str) -> Result<Box<dyn OcrEngine>> {
    if selector == "mock" {
        return Ok(Box::new(MockEngine));
    }
    match selector.strip_prefix("exec:") {
        Some(template) if !template.trim().is_empty() => Ok(Box::new(ExecEngine {
            template: template.to_string(),
        })),
        _ => Err(Error::argument(format!(
            "unknown OCR engine '{selector}' (mock|exec:<command template>)"
        ))),
    }
}

pub(crate) fn page_file(dir: &Path, condition: &str, trial: usize) -> PathBuf {
    let safe: String = condition
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    dir.join(format!("{safe}_trial{trial:03}.png"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(engine_from_selector("mock").unwrap().label(), "mock");
        assert_eq!(
            engine_from_selector("exec:tess {image}").unwrap().label(),
            "exec:tess {image}"
        );
        assert!(engine_from_selector("exec:").is_err());
        assert!(engine_from_selector("tesseract").is_err());
    }

    #[test]
    fn page_file_names_are_sanitized() {
        let p = page_file(Path::new("/x"), "a b/c", 7);
        assert_eq!(p, Path::new("/x/a_b_c_trial007.png"));
    }
}
