//! Recognition error metrics and paired significance testing.

mod edit;
mod significance;
mod transcript;

pub use edit::{cer, edit_distance, normalize_words, wer, wer_tokens};
pub use significance::{paired_permutation_test, SignificanceResult, SIGN_FLIP_METHOD};
pub use transcript::{mean_confidence, ErrorReport, RecognizedWord, Transcript};
