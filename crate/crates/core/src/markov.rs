//! Transition count/probability matrices and state-distribution propagation.
//!
//! A row of the probability matrix with no observed outgoing transitions is
//! kept all-zero (a "dead row") rather than smoothed; propagation through
//! dead rows can therefore drain a distribution to zero, which callers must
//! check via [`StateDistribution::is_degenerate`].

use crate::discretize::{SolarState, StateSequence, STATE_COUNT};
use crate::error::{Result, SolarError};
use crate::scalar::Real;

/// Row-sum drift beyond which a live row is renormalized after a product.
const ROW_SUM_TOL: f64 = 1e-9;

/// 4×4 matrix of observed transition counts, entry `[i][j]` = n_{i,j}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountMatrix {
    counts: [[u64; STATE_COUNT]; STATE_COUNT],
}

impl CountMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [[u64; STATE_COUNT]; STATE_COUNT]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[[u64; STATE_COUNT]; STATE_COUNT] {
        &self.counts
    }

    pub fn get(&self, from: SolarState, to: SolarState) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn record(&mut self, from: SolarState, to: SolarState) {
        self.counts[from.index()][to.index()] += 1;
    }

    pub fn merge(&mut self, other: &CountMatrix) {
        for i in 0..STATE_COUNT {
            for j in 0..STATE_COUNT {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> u64 {
        (0..STATE_COUNT).map(|i| self.counts[i][j]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Plain-text serialization: four rows of four integers, row-major.
    pub fn to_text(&self) -> String {
        self.counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != STATE_COUNT {
            return Err(SolarError::InvalidMatrixFile {
                reason: format!("expected {STATE_COUNT} rows, got {}", rows.len()),
            });
        }
        let mut counts = [[0u64; STATE_COUNT]; STATE_COUNT];
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split_whitespace().collect();
            if cells.len() != STATE_COUNT {
                return Err(SolarError::InvalidMatrixFile {
                    reason: format!("row {i} has {} columns, expected {STATE_COUNT}", cells.len()),
                });
            }
            for (j, cell) in cells.iter().enumerate() {
                counts[i][j] = cell.parse().map_err(|_| SolarError::InvalidMatrixFile {
                    reason: format!("unparseable count [{i}][{j}]: `{cell}`"),
                })?;
            }
        }
        Ok(Self { counts })
    }

    /// Row-normalizes to probabilities; a zero row stays all-zero.
    pub fn to_probabilities<F: Real>(&self) -> TransitionMatrix<F> {
        self.to_probabilities_smoothed(F::zero())
    }

    /// Row-normalization with an optional additive pseudo-count per cell.
    /// With `pseudo == 0` this is the plain dead-row-preserving estimate.
    pub fn to_probabilities_smoothed<F: Real>(&self, pseudo: F) -> TransitionMatrix<F> {
        let mut probs = [[F::zero(); STATE_COUNT]; STATE_COUNT];
        for i in 0..STATE_COUNT {
            let raw_total = self.row_total(i);
            if raw_total == 0 && pseudo <= F::zero() {
                continue;
            }
            let total = F::of(raw_total as f64) + pseudo * F::of(STATE_COUNT as f64);
            if total <= F::zero() {
                continue;
            }
            for j in 0..STATE_COUNT {
                probs[i][j] = (F::of(self.counts[i][j] as f64) + pseudo) / total;
            }
        }
        TransitionMatrix { probs }
    }
}

/// Counts adjacent-pair transitions of a state sequence.
pub fn count_transitions(seq: &StateSequence) -> Result<CountMatrix> {
    if seq.len() < 2 {
        return Err(SolarError::SequenceTooShort { len: seq.len() });
    }
    let mut m = CountMatrix::new();
    for pair in seq.states.windows(2) {
        m.record(pair[0], pair[1]);
    }
    Ok(m)
}

/// 4×4 row-stochastic transition probability matrix (dead rows allowed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix<F: Real> {
    probs: [[F; STATE_COUNT]; STATE_COUNT],
}

impl<F: Real> TransitionMatrix<F> {
    /// Builds a matrix from raw rows, validating that each row either sums
    /// to 1 (tolerance 1e-6) or is all-zero.
    pub fn from_rows(probs: [[F; STATE_COUNT]; STATE_COUNT]) -> Result<Self> {
        for (i, row) in probs.iter().enumerate() {
            let sum: F = row.iter().copied().sum();
            let zero_row = row.iter().all(|&p| p == F::zero());
            for (j, &p) in row.iter().enumerate() {
                if !(p >= F::zero() && p <= F::one()) {
                    return Err(SolarError::InvalidMatrixFile {
                        reason: format!("entry [{i}][{j}] = {p} outside [0, 1]"),
                    });
                }
            }
            if !zero_row && (sum - F::one()).abs() > F::of(1e-6) {
                return Err(SolarError::InvalidMatrixFile {
                    reason: format!("row {i} sums to {sum}, expected 1 or all-zero"),
                });
            }
        }
        Ok(Self { probs })
    }

    pub fn identity() -> Self {
        let mut probs = [[F::zero(); STATE_COUNT]; STATE_COUNT];
        for (i, row) in probs.iter_mut().enumerate() {
            row[i] = F::one();
        }
        Self { probs }
    }

    pub fn rows(&self) -> &[[F; STATE_COUNT]; STATE_COUNT] {
        &self.probs
    }

    pub fn row(&self, from: SolarState) -> &[F; STATE_COUNT] {
        &self.probs[from.index()]
    }

    pub fn get(&self, from: SolarState, to: SolarState) -> F {
        self.probs[from.index()][to.index()]
    }

    pub fn is_dead_row(&self, from: SolarState) -> bool {
        self.probs[from.index()].iter().all(|&p| p == F::zero())
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &TransitionMatrix<F>) -> TransitionMatrix<F> {
        let mut probs = [[F::zero(); STATE_COUNT]; STATE_COUNT];
        for i in 0..STATE_COUNT {
            for j in 0..STATE_COUNT {
                probs[i][j] = (0..STATE_COUNT)
                    .map(|k| self.probs[i][k] * other.probs[k][j])
                    .sum();
            }
        }
        TransitionMatrix { probs }
    }

    /// `self` raised to a non-negative integer power.
    pub fn pow(&self, n: u32) -> TransitionMatrix<F> {
        let mut acc = TransitionMatrix::identity();
        for _ in 0..n {
            acc = acc.matmul(self);
        }
        acc
    }

    /// Plain-text serialization: four rows of four floats, row-major.
    pub fn to_text(&self) -> String {
        self.probs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| format!("{:.10}", p.to_f64_lossy()))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut probs = [[F::zero(); STATE_COUNT]; STATE_COUNT];
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != STATE_COUNT {
            return Err(SolarError::InvalidMatrixFile {
                reason: format!("expected {STATE_COUNT} rows, got {}", rows.len()),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            let cells: Vec<&str> = row.split_whitespace().collect();
            if cells.len() != STATE_COUNT {
                return Err(SolarError::InvalidMatrixFile {
                    reason: format!("row {i} has {} columns, expected {STATE_COUNT}", cells.len()),
                });
            }
            for (j, cell) in cells.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| SolarError::InvalidMatrixFile {
                    reason: format!("unparseable entry [{i}][{j}]: `{cell}`"),
                })?;
                probs[i][j] = F::of(v);
            }
        }
        Self::from_rows(probs)
    }
}

/// Stochastic row vector over the four states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDistribution<F: Real> {
    weights: [F; STATE_COUNT],
}

impl<F: Real> StateDistribution<F> {
    pub fn new(weights: [F; STATE_COUNT]) -> Self {
        Self { weights }
    }

    pub fn one_hot(state: SolarState) -> Self {
        let mut weights = [F::zero(); STATE_COUNT];
        weights[state.index()] = F::one();
        Self { weights }
    }

    pub fn uniform() -> Self {
        Self {
            weights: [F::of(0.25); STATE_COUNT],
        }
    }

    pub fn weights(&self) -> &[F; STATE_COUNT] {
        &self.weights
    }

    pub fn sum(&self) -> F {
        self.weights.iter().copied().sum()
    }

    /// True when all mass has been lost to dead rows.
    pub fn is_degenerate(&self) -> bool {
        self.weights.iter().all(|&w| w == F::zero())
    }
}

/// One step of `dist × P`. A live result is renormalized only when its sum
/// drifts beyond 1e-9; an all-zero result is returned as-is (degenerate).
pub fn propagate<F: Real>(
    dist: &StateDistribution<F>,
    matrix: &TransitionMatrix<F>,
) -> StateDistribution<F> {
    let mut weights = [F::zero(); STATE_COUNT];
    for (j, w) in weights.iter_mut().enumerate() {
        *w = (0..STATE_COUNT)
            .map(|i| dist.weights[i] * matrix.rows()[i][j])
            .sum();
    }
    let mut out = StateDistribution { weights };
    let sum = out.sum();
    if sum > F::zero() && (sum - F::one()).abs() > F::of(ROW_SUM_TOL) {
        for w in out.weights.iter_mut() {
            *w = *w / sum;
        }
    }
    out
}

/// Most probable state; ties break toward the lowest state code.
pub fn argmax_state<F: Real>(dist: &StateDistribution<F>) -> Result<SolarState> {
    if dist.is_degenerate() {
        return Err(SolarError::DegenerateDistribution);
    }
    let mut best = SolarState::Low;
    let mut best_w = dist.weights[0];
    for state in SolarState::ALL.into_iter().skip(1) {
        let w = dist.weights[state.index()];
        if w > best_w {
            best = state;
            best_w = w;
        }
    }
    Ok(best)
}
