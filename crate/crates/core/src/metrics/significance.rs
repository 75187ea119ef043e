use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIGN_FLIP_METHOD: &str = "paired sign-flip permutation (two-sided, mean difference)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub p_value: f64,
    /// Observed mean of `a - b`.
    pub statistic: f64,
    pub method: String,
    /// Sign assignments evaluated (all `2^n` when exhaustive).
    pub permutations: u64,
    pub exhaustive: bool,
}

/// Two-sided paired sign-flip test on `a[i] - b[i]`.
///
/// When `2^n <= permutations` every sign assignment is enumerated and
/// `p = #{|T*| >= |T|} / 2^n`. Otherwise `permutations` random assignments
/// are drawn and `p = (#{|T*| >= |T|} + 1) / (permutations + 1)`.
pub fn paired_permutation_test(
    a: &[f64],
    b: &[f64],
    permutations: u64,
    seed: u64,
) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::argument(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::argument("paired test needs at least 2 pairs"));
    }
    if permutations == 0 {
        return Err(Error::argument("permutation count must be >= 1"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::argument("paired samples must be finite"));
    }
    let observed = diffs.iter().sum::<f64>() / n as f64;
    let threshold = observed.abs() - 1e-12 * observed.abs().max(1.0);

    let mean_with = |signs: &mut dyn FnMut(usize) -> bool| -> f64 {
        diffs
            .iter()
            .enumerate()
            .map(|(i, d)| if signs(i) { -d } else { *d })
            .sum::<f64>()
            / n as f64
    };

    if n < 63 && (1u64 << n) <= permutations {
        let total = 1u64 << n;
        let extreme = (0..total)
            .filter(|mask| mean_with(&mut |i| mask >> i & 1 == 1).abs() >= threshold)
            .count() as u64;
        return Ok(SignificanceResult {
            p_value: extreme as f64 / total as f64,
            statistic: observed,
            method: SIGN_FLIP_METHOD.into(),
            permutations: total,
            exhaustive: true,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0u64;
    for _ in 0..permutations {
        if mean_with(&mut |_| rng.random::<bool>()).abs() >= threshold {
            extreme += 1;
        }
    }
    Ok(SignificanceResult {
        p_value: (extreme + 1) as f64 / (permutations + 1) as f64,
        statistic: observed,
        method: SIGN_FLIP_METHOD.into(),
        permutations,
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_p_one() {
        let a = [0.3, 0.5, 0.1, 0.9];
        assert_eq!(paired_permutation_test(&a, &a, 16, 1).unwrap().p_value, 1.0);
        let many: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let r = paired_permutation_test(&many, &many, 1000, 1).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn exhaustive_constant_shift() {
        let r = paired_permutation_test(&[0.0; 4], &[1.0; 4], 16, 0).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.permutations, 16);
        assert_eq!(r.p_value, 2.0 / 16.0);
        assert_eq!(r.statistic, -1.0);
    }

    #[test]
    fn argument_errors() {
        assert!(paired_permutation_test(&[1.0, 2.0], &[1.0], 10, 0).is_err());
        assert!(paired_permutation_test(&[1.0], &[1.0], 10, 0).is_err());
        assert!(paired_permutation_test(&[1.0, 2.0], &[0.0, 0.0], 0, 0).is_err());
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let a: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..20).map(|i| (i as f64 * 0.91).cos()).collect();
        let x = paired_permutation_test(&a, &b, 2000, 9).unwrap();
        let y = paired_permutation_test(&a, &b, 2000, 9).unwrap();
        assert_eq!(x, y);
        assert!(x.p_value > 0.0 && x.p_value <= 1.0);
    }
}
