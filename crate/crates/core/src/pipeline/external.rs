use std::path::Path;
use std::process::Command;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::metrics::{RecognizedWord, Transcript};

/// Placeholder replaced by the (shell-quoted) image path.
pub const IMAGE_PLACEHOLDER: &str = "{image}";

#[derive(Deserialize)]
struct WireTranscript {
    words: Vec<WireWord>,
}

#[derive(Deserialize)]
struct WireWord {
    text: String,
    conf: f64,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Parses `{"words":[{"text":...,"conf":...}]}`. Confidences outside
/// `[0, 1]` are clamped with a warning.
pub fn parse_transcript_json(stdout: &str) -> Result<Transcript> {
    let wire: WireTranscript = serde_json::from_str(stdout)
        .map_err(|e| Error::Ocr(format!("malformed engine output: {e}")))?;
    let words = wire
        .words
        .into_iter()
        .map(|w| {
            if !w.conf.is_finite() {
                return Err(Error::Ocr(format!(
                    "non-finite confidence for '{}'",
                    w.text
                )));
            }
            let confidence = w.conf.clamp(0.0, 1.0);
            if confidence != w.conf {
                log::warn!(
                    "clamped OCR confidence {} for '{}' to {confidence}",
                    w.conf,
                    w.text
                );
            }
            Ok(RecognizedWord {
                text: w.text,
                confidence,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Transcript::new(words)
}

/// Runs `template` through `sh -c` with `{image}` replaced by the image path
/// (appended when the template has no placeholder) and parses its stdout.
pub fn recognize_external(template: &str, image: &Path) -> Result<Transcript> {
    let quoted = shell_quote(&image.to_string_lossy());
    let command = if template.contains(IMAGE_PLACEHOLDER) {
        template.replace(IMAGE_PLACEHOLDER, &quoted)
    } else {
        format!("{template} {quoted}")
    };
    let output = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .output()
        .map_err(|e| Error::Ocr(format!("could not start `{command}`: {e}")))?;
    if !output.status.success() {
        return Err(Error::Ocr(format!(
            "`{command}` exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let stdout = String::from_utf8(output.stdout)
        .map_err(|e| Error::Ocr(format!("non-UTF-8 output: {e}")))?;
    parse_transcript_json(&stdout)
}
