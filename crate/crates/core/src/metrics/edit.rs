use crate::error::{Error, Result};

/// Levenshtein distance over arbitrary tokens (unit cost substitution,
/// insertion, deletion), two-row dynamic program.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Whitespace split, leading/trailing punctuation stripped, lowercased.
/// Tokens that are pure punctuation vanish.
pub fn normalize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Word error rate: word edit distance over the normalized reference length.
/// Not clamped, so insertions can push it above 1.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64> {
    let r = normalize_words(reference);
    let h = normalize_words(hypothesis);
    wer_tokens(&r, &h)
}

pub fn wer_tokens<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::argument("WER needs a non-empty reference"));
    }
    let r: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let h: Vec<&str> = hypothesis.iter().map(AsRef::as_ref).collect();
    Ok(edit_distance(&r, &h) as f64 / r.len() as f64)
}

/// Character error rate over Unicode scalar values, raw strings.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64> {
    let r: Vec<char> = reference.chars().collect();
    if r.is_empty() {
        return Err(Error::argument("CER needs a non-empty reference"));
    }
    let h: Vec<char> = hypothesis.chars().collect();
    Ok(edit_distance(&r, &h) as f64 / r.len() as f64)
}
