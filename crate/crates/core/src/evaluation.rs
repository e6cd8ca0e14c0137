//! Comparison of synthetic against observed state sequences.

use crate::discretize::StateSequence;
use crate::error::{Result, SolarError};
use crate::scalar::Real;
use serde::Serialize;

/// Affinity summary between an observed and a generated trace.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    /// Population standard deviation of the observed state codes.
    pub sigma_real: f64,
    /// Population standard deviation of the generated state codes.
    pub sigma_synth: f64,
    /// Fraction of slots where both traces agree.
    pub match_fraction: f64,
    pub length: usize,
}

/// Population standard deviation of the integer state codes (1..=4).
pub fn state_sigma<F: Real>(seq: &StateSequence) -> Result<F> {
    if seq.is_empty() {
        return Err(SolarError::EmptySequence);
    }
    let n = F::of(seq.len() as f64);
    let codes: Vec<F> = seq.states.iter().map(|s| F::of(s.code() as f64)).collect();
    let mean = codes.iter().copied().sum::<F>() / n;
    let var = codes
        .iter()
        .map(|&c| (c - mean) * (c - mean))
        .sum::<F>()
        / n;
    Ok(var.sqrt())
}

/// Slot-by-slot comparison of two traces on the same grid.
pub fn compare(real: &StateSequence, synth: &StateSequence) -> Result<EvaluationReport> {
    if real.len() != synth.len() {
        return Err(SolarError::LengthMismatch {
            left: real.len(),
            right: synth.len(),
        });
    }
    let matches = real
        .states
        .iter()
        .zip(&synth.states)
        .filter(|(a, b)| a == b)
        .count();
    Ok(EvaluationReport {
        sigma_real: state_sigma(real)?,
        sigma_synth: state_sigma(synth)?,
        match_fraction: matches as f64 / real.len() as f64,
        length: real.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::SolarState::{self, *};
    use approx::assert_relative_eq;
    use chrono::NaiveTime;
    use proptest::prelude::*;

    fn seq(states: Vec<SolarState>) -> StateSequence {
        StateSequence {
            states,
            slot_minutes: 5,
            window_start: NaiveTime::from_hms_opt(4, 30, 0).unwrap(),
        }
    }

    #[test]
    fn sigma_hand_example() {
        let s: f64 = state_sigma(&seq(vec![Low, Low, High, High])).unwrap();
        assert_relative_eq!(s, 1.0);
    }

    #[test]
    fn sigma_of_constant_is_zero() {
        let s: f64 = state_sigma(&seq(vec![Medium; 9])).unwrap();
        assert_relative_eq!(s, 0.0);
    }

    #[test]
    fn sigma_of_empty_is_an_error() {
        assert!(state_sigma::<f64>(&seq(vec![])).is_err());
    }

    #[test]
    fn compare_identical() {
        let a = seq(vec![Low, Medium, High, VeryHigh]);
        let report = compare(&a, &a.clone()).unwrap();
        assert_relative_eq!(report.match_fraction, 1.0);
        assert_relative_eq!(report.sigma_real, report.sigma_synth);
    }

    #[test]
    fn compare_hand_count() {
        let real = seq(vec![Low, Medium, High, VeryHigh]);
        let synth = seq(vec![Low, Medium, Medium, VeryHigh]);
        let report = compare(&real, &synth).unwrap();
        assert_relative_eq!(report.match_fraction, 0.75);
    }

    #[test]
    fn compare_length_mismatch() {
        let err = compare(&seq(vec![Low, Low]), &seq(vec![Low])).unwrap_err();
        assert!(matches!(err, SolarError::LengthMismatch { left: 2, right: 1 }));
    }

    proptest! {
        #[test]
        fn sigma_invariant_under_permutation(codes in prop::collection::vec(0usize..4, 1..60), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let states: Vec<SolarState> =
                codes.iter().map(|&c| SolarState::from_index(c).unwrap()).collect();
            let mut shuffled = states.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut reversed = states.clone();
            reversed.reverse();
            let base: f64 = state_sigma(&seq(states)).unwrap();
            let s: f64 = state_sigma(&seq(shuffled)).unwrap();
            let r: f64 = state_sigma(&seq(reversed)).unwrap();
            prop_assert!((base - s).abs() < 1e-12);
            prop_assert!((base - r).abs() < 1e-12);
            // half-range bound for codes 1..=4
            prop_assert!((0.0..=1.5 + 1e-12).contains(&base));
        }
    }
}
