use rand::{Rng, RngCore};

use crate::error::{Error, Result};

pub enum SelectMode<'a> {
    /// Arg-max, lowest index on ties.
    Greedy,
    /// Sample from `softmax(logits / temperature)`.
    Softmax { temperature: f64, rng: &'a mut dyn RngCore },
}

/// Numerically stable softmax of `logits / temperature`.
pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| ((l - max) / temperature).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = i;
        }
    }
    best
}

pub fn select_action(logits: &[f64], mode: SelectMode<'_>) -> Result<usize> {
    if logits.is_empty() {
        return Err(Error::Config("no logits to choose from".into()));
    }
    if logits.iter().any(|l| l.is_nan()) {
        return Err(Error::Numeric("NaN logit".into()));
    }
    match mode {
        SelectMode::Greedy => Ok(argmax(logits)),
        SelectMode::Softmax { temperature, rng } => {
            if !(temperature > 0.0) {
                return Ok(argmax(logits));
            }
            let probs = softmax(logits, temperature);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return Ok(i);
                }
            }
            // u landed in the rounding gap above the cumulative sum
            Ok(probs.iter().rposition(|&p| p > 0.0).unwrap_or(0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_picks_strict_max() {
        assert_eq!(select_action(&[0.1, 2.0, -1.0, 1.9], SelectMode::Greedy).unwrap(), 1);
    }

    #[test]
    fn greedy_ties_go_to_lowest_index() {
        assert_eq!(select_action(&[0.5; 8], SelectMode::Greedy).unwrap(), 0);
        assert_eq!(select_action(&[0.0, 3.0, 1.0, 3.0], SelectMode::Greedy).unwrap(), 1);
    }

    #[test]
    fn nan_is_numeric_error() {
        assert!(matches!(select_action(&[0.0, f64::NAN], SelectMode::Greedy), Err(Error::Numeric(_))));
    }

    #[test]
    fn cold_softmax_converges_to_greedy() {
        let logits = [0.3, 1.2, 1.1, -0.5, 0.0, 0.9, 1.15, 0.2];
        let greedy = argmax(&logits);
        let hits = (0..1000u64)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                select_action(&logits, SelectMode::Softmax { temperature: 1e-3, rng: &mut rng }).unwrap() == greedy
            })
            .count();
        assert_eq!(hits, 1000);
    }

    #[test]
    fn softmax_sampling_is_reproducible() {
        let logits = [0.0, 0.5, 1.0];
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| select_action(&logits, SelectMode::Softmax { temperature: 1.0, rng: &mut rng }).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
        let p = softmax(&logits, 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
