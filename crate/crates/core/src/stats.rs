//! State-dependency and temporal-stationarity tests.
//!
//! The dependency test is a likelihood-ratio statistic
//! `alpha = 2 Σ n_{i,j} ln(p_{i,j} / p_j)` compared against an upper-tail
//! chi-square quantile with `(k-1)^2` degrees of freedom. Terms with
//! `n_{i,j} = 0` contribute zero.

use crate::discretize::STATE_COUNT;
use crate::error::{Result, SolarError};
use crate::markov::{CountMatrix, TransitionMatrix};
use crate::scalar::Real;
use serde::Serialize;

/// Column-marginal probabilities of a count matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalVector<F: Real> {
    pub p: [F; STATE_COUNT],
}

/// Outcome of the chi-square state-dependency test.
#[derive(Debug, Clone, Serialize)]
pub struct DependencyTestReport {
    pub alpha: f64,
    pub k: u32,
    pub dof: u32,
    pub significance: f64,
    pub critical_value: f64,
    pub reject_independence: bool,
    /// Per-cell transition counts, for judging the asymptotic approximation.
    pub cell_counts: [[u64; STATE_COUNT]; STATE_COUNT],
    pub total_transitions: u64,
}

/// Pairwise max-abs distances between segment transition matrices.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    pub pairwise_distances: Vec<Vec<f64>>,
    pub threshold: f64,
    pub stationary: bool,
}

/// Column mass of each state divided by the grand total.
pub fn marginals<F: Real>(counts: &CountMatrix) -> Result<MarginalVector<F>> {
    let total = counts.total();
    if total == 0 {
        return Err(SolarError::EmptyCounts);
    }
    let total = F::of(total as f64);
    let mut p = [F::zero(); STATE_COUNT];
    for (j, pj) in p.iter_mut().enumerate() {
        *pj = F::of(counts.column_total(j) as f64) / total;
    }
    Ok(MarginalVector { p })
}

/// The likelihood-ratio statistic of the dependency test.
pub fn alpha_statistic<F: Real>(counts: &CountMatrix) -> Result<F> {
    let probs: TransitionMatrix<F> = counts.to_probabilities();
    let marg = marginals::<F>(counts)?;
    let mut alpha = F::zero();
    for i in 0..STATE_COUNT {
        for j in 0..STATE_COUNT {
            let n = counts.counts()[i][j];
            if n == 0 {
                continue;
            }
            // n > 0 implies both p_{i,j} > 0 and column mass p_j > 0
            let ratio = probs.rows()[i][j] / marg.p[j];
            alpha = alpha + F::of(n as f64) * ratio.ln();
        }
    }
    Ok(F::of(2.0) * alpha)
}

/// Natural log of the gamma function (Lanczos approximation).
fn ln_gamma(x: f64) -> f64 {
    // g = 7, n = 9 coefficients
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEFFS[0];
    let t = x + 7.5;
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma function P(a, x), via the series
/// expansion for `x < a + 1` and the continued fraction otherwise.
fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // series: P(a,x) = e^{ln_pre} Σ x^n / (a (a+1) ... (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = a;
        for _ in 0..500 {
            n += 1.0;
            term *= x / n;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (ln_pre.exp() * sum).min(1.0)
    } else {
        // Lentz continued fraction for Q(a,x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        1.0 - (ln_pre.exp() * h).min(1.0)
    }
}

/// CDF of the chi-square distribution with `dof` degrees of freedom.
pub fn chi2_cdf(dof: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    reg_lower_gamma(dof as f64 / 2.0, x / 2.0)
}

/// Upper-tail quantile: the x with P(X > x) = significance. Bracketed by
/// doubling, then bisected to width 1e-8.
pub fn chi2_critical<F: Real>(dof: u32, significance: F) -> Result<F> {
    if dof < 1 {
        return Err(SolarError::InvalidDof { dof });
    }
    let sig = significance.to_f64_lossy();
    if !(sig > 0.0 && sig < 1.0) {
        return Err(SolarError::InvalidSignificance { value: sig });
    }
    let target = 1.0 - sig;
    let mut hi = dof as f64;
    while chi2_cdf(dof, hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(dof, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(F::of(0.5 * (lo + hi)))
}

/// Runs the full dependency test with `k = 4` states.
pub fn dependency_test(counts: &CountMatrix, significance: f64) -> Result<DependencyTestReport> {
    let k = STATE_COUNT as u32;
    let dof = (k - 1) * (k - 1);
    let alpha: f64 = alpha_statistic(counts)?;
    let critical_value = chi2_critical(dof, significance)?;
    Ok(DependencyTestReport {
        alpha,
        k,
        dof,
        significance,
        critical_value,
        reject_independence: alpha > critical_value,
        cell_counts: *counts.counts(),
        total_transitions: counts.total(),
    })
}

/// Max-abs elementwise distance between two matrices.
fn matrix_distance<F: Real>(a: &TransitionMatrix<F>, b: &TransitionMatrix<F>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..STATE_COUNT {
        for j in 0..STATE_COUNT {
            let d = (a.rows()[i][j] - b.rows()[i][j]).abs().to_f64_lossy();
            worst = worst.max(d);
        }
    }
    worst
}

/// Pairwise comparison of segment matrices against a distance threshold.
pub fn stationarity_check<F: Real>(
    mats: &[TransitionMatrix<F>],
    threshold: f64,
) -> Result<StationarityReport> {
    if mats.len() < 2 {
        return Err(SolarError::TooFewMatrices { n: mats.len() });
    }
    let n = mats.len();
    let mut pairwise_distances = vec![vec![0.0; n]; n];
    let mut stationary = true;
    for a in 0..n {
        for b in (a + 1)..n {
            let d = matrix_distance(&mats[a], &mats[b]);
            pairwise_distances[a][b] = d;
            pairwise_distances[b][a] = d;
            if d > threshold {
                stationary = false;
            }
        }
    }
    Ok(StationarityReport {
        pairwise_distances,
        threshold,
        stationary,
    })
}
