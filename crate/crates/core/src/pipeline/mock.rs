use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{RecognizedWord, Transcript};
use crate::raster::{FrameImage, GroundTruth, OcclusionMap, TruthWord};

/// Words whose box is more than this occluded are not recognized at all.
pub const DROP_THRESHOLD: f64 = 0.6;
/// Per-character substitution probability per unit of box occlusion.
pub const SUBSTITUTION_GAIN: f64 = 0.8;

const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

fn substitute(c: char, rng: &mut ChaCha8Rng) -> char {
    let lower = c.to_ascii_lowercase();
    match LETTERS.iter().position(|&l| l as char == lower) {
        Some(i) => {
            let shift = rng.random_range(1..LETTERS.len());
            LETTERS[(i + shift) % LETTERS.len()] as char
        }
        None => LETTERS[rng.random_range(0..LETTERS.len())] as char,
    }
}

/// Mean overlay value over a word's box.
pub fn word_occlusion(word: &TruthWord, overlay: &OcclusionMap) -> f64 {
    let (x0, y0, x1, y1) = word.bbox.pixel_bounds();
    overlay.box_mean(x0, y0, x1, y1)
}

/// Deterministic stand-in for an OCR engine.
///
/// Each ground-truth word is scored by the mean overlay `occ` over its box:
/// dropped when `occ > 0.6`, otherwise each character is replaced with
/// probability `min(1, 0.8 * occ)` and the word gets confidence `1 - occ`.
/// Surviving words are emitted in raster order (top to bottom, then left to
/// right) the way a layout-unaware line reader would see them, so
/// side-by-side columns interleave.
pub fn mock_recognize(
    page: &FrameImage,
    truth: &GroundTruth,
    overlay: &OcclusionMap,
    seed: u64,
) -> Result<Transcript> {
    if (page.width(), page.height()) != overlay.dimensions() {
        return Err(Error::argument(format!(
            "page {}x{} and overlay {}x{} differ",
            page.width(),
            page.height(),
            overlay.width(),
            overlay.height()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<(&TruthWord, RecognizedWord)> = Vec::with_capacity(truth.words.len());
    for word in &truth.words {
        let occ = word_occlusion(word, overlay);
        let p = (SUBSTITUTION_GAIN * occ).min(1.0);
        // Two draws per character whatever happens, so a page's draws do not
        // depend on the overlay and heavier overlays only add errors.
        let text: String = word
            .text
            .chars()
            .map(|c| {
                let hit = rng.random::<f64>() < p;
                let replacement = substitute(c, &mut rng);
                if hit {
                    replacement
                } else {
                    c
                }
            })
            .collect();
        if occ > DROP_THRESHOLD {
            continue;
        }
        found.push((
            word,
            RecognizedWord {
                text,
                confidence: (1.0 - occ).clamp(0.0, 1.0),
            },
        ));
    }
    found.sort_by(|(a, _), (b, _)| {
        let ka = a.bbox.y0.round() as i64;
        let kb = b.bbox.y0.round() as i64;
        ka.cmp(&kb).then(a.bbox.x0.total_cmp(&b.bbox.x0))
    });
    Transcript::new(found.into_iter().map(|(_, w)| w).collect())
}
