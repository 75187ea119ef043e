use serde::{Deserialize, Serialize};

use super::edit::edit_distance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizedWord {
    pub text: String,
    pub confidence: f64,
}

/// Recognizer output in emission order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub words: Vec<RecognizedWord>,
}

impl Transcript {
    pub fn new(words: Vec<RecognizedWord>) -> Result<Self> {
        if let Some(w) = words.iter().find(|w| !(0.0..=1.0).contains(&w.confidence)) {
            return Err(Error::argument(format!(
                "confidence {} for '{}' outside [0, 1]",
                w.confidence, w.text
            )));
        }
        Ok(Self { words })
    }

    pub fn text(&self) -> String {
        self.words
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn mean_confidence(transcript: &Transcript) -> Result<f64> {
    if transcript.words.is_empty() {
        return Err(Error::argument("mean confidence of an empty transcript"));
    }
    let sum: f64 = transcript.words.iter().map(|w| w.confidence).sum();
    Ok(sum / transcript.words.len() as f64)
}

/// Per-page recognition quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub wer: f64,
    pub cer: f64,
    pub mean_confidence: f64,
    pub n_ref_words: usize,
    pub n_hyp_words: usize,
}

impl ErrorReport {
    /// Scores a transcript against reference words. Both sides go through
    /// the WER normalization. CER is taken over the normalized words with
    /// separators removed, so segmentation errors only show up in WER. An
    /// empty transcript has mean confidence 0.
    pub fn evaluate<S: AsRef<str>>(reference: &[S], transcript: &Transcript) -> Result<Self> {
        let reference: Vec<String> = reference
            .iter()
            .flat_map(|w| super::edit::normalize_words(w.as_ref()))
            .collect();
        if reference.is_empty() {
            return Err(Error::argument("cannot score against an empty reference"));
        }
        let hypothesis: Vec<String> = transcript
            .words
            .iter()
            .flat_map(|w| super::edit::normalize_words(&w.text))
            .collect();

        let wer = super::edit::wer_tokens(&reference, &hypothesis)?;
        let ref_chars: Vec<char> = reference.iter().flat_map(|w| w.chars()).collect();
        let hyp_chars: Vec<char> = hypothesis.iter().flat_map(|w| w.chars()).collect();
        let cer = edit_distance(&ref_chars, &hyp_chars) as f64 / ref_chars.len() as f64;
        let mean_confidence = if transcript.is_empty() {
            0.0
        } else {
            mean_confidence(transcript)?
        };
        Ok(Self {
            wer,
            cer,
            mean_confidence,
            n_ref_words: reference.len(),
            n_hyp_words: hypothesis.len(),
        })
    }
}
