use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

static WORDS_TXT: &str = include_str!("../../assets/words.txt");

/// The bundled list of 1000 common English words.
pub fn word_list() -> &'static [&'static str] {
    static LIST: OnceLock<Vec<&'static str>> = OnceLock::new();
    LIST.get_or_init(|| {
        WORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

/// `n_words` words drawn uniformly with replacement, space separated.
pub fn generate_random_text(seed: u64, n_words: usize) -> Result<String> {
    if n_words < 1 {
        return Err(Error::argument("random text needs at least one word"));
    }
    let list = word_list();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<&str> = (0..n_words)
        .map(|_| list[rng.random_range(0..list.len())])
        .collect();
    Ok(words.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_size() {
        assert_eq!(word_list().len(), 1000);
    }

    #[test]
    fn deterministic_and_sized() {
        assert_eq!(
            generate_random_text(5, 40).unwrap(),
            generate_random_text(5, 40).unwrap()
        );
        assert_ne!(
            generate_random_text(5, 40).unwrap(),
            generate_random_text(6, 40).unwrap()
        );
        assert_eq!(
            generate_random_text(1, 5)
                .unwrap()
                .split_whitespace()
                .count(),
            5
        );
        assert!(generate_random_text(1, 0).is_err());
    }
}
