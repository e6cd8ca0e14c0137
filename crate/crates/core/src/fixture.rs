//! Deterministic synthetic fixture month.
//!
//! A month of five-minute irradiance data sampled from known per-segment
//! transition matrices, with a sunrise-to-sunset profile: states ramp from
//! `Low` at dawn up to `VeryHigh` around midday and back down by evening.
//! Irradiance values are drawn strictly inside each state's threshold band,
//! so discretizing a fixture day recovers the sampled states exactly. The
//! fixture backs tests and demos where a real measurement archive is not
//! available.

use crate::discretize::{SolarState, StateSequence, STATE_COUNT};
use crate::generator::SegmentationPlan;
use crate::markov::TransitionMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed under which the fixture's row-support structure has been verified:
/// every live row of the truth matrices is visited, every dead row is not.
pub const DEFAULT_SEED: u64 = 4;

/// Days in the fixture month.
pub const DAYS: u32 = 30;

/// The known per-segment matrices the fixture month is sampled from
/// (summer plan, five segments). Rows never reachable in a segment are
/// dead, mirroring the zero-count convention of fitted matrices.
pub fn summer_truth() -> Vec<TransitionMatrix<f64>> {
    let z = [0.0; STATE_COUNT];
    vec![
        // dawn: Low warming up to Medium
        TransitionMatrix::from_rows([
            [0.92, 0.08, 0.0, 0.0],
            [0.04, 0.96, 0.0, 0.0],
            z,
            z,
        ])
        .unwrap(),
        // morning ramp through High into VeryHigh
        TransitionMatrix::from_rows([
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.85, 0.15, 0.0],
            [0.0, 0.0, 0.85, 0.15],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap(),
        // midday: near-absorbing VeryHigh with brief High dips
        TransitionMatrix::from_rows([
            z,
            z,
            [0.0, 0.0, 0.9, 0.1],
            [0.0, 0.0, 0.02, 0.98],
        ])
        .unwrap(),
        // afternoon descent toward Medium
        TransitionMatrix::from_rows([
            z,
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.25, 0.75, 0.0],
            [0.0, 0.0, 0.2, 0.8],
        ])
        .unwrap(),
        // evening: Medium draining into absorbing Low
        TransitionMatrix::from_rows([
            [1.0, 0.0, 0.0, 0.0],
            [0.1, 0.9, 0.0, 0.0],
            z,
            z,
        ])
        .unwrap(),
    ]
}

/// A generated fixture month: raw CSV text plus the sampled in-window
/// state sequence of each day.
#[derive(Debug, Clone)]
pub struct FixtureMonth {
    pub csv: String,
    pub state_days: Vec<StateSequence>,
    pub truth: Vec<TransitionMatrix<f64>>,
    pub plan: SegmentationPlan,
}

/// Irradiance value strictly inside the band of `state` for the default
/// thresholds 200/450/500.
fn band_value(state: SolarState, rng: &mut ChaCha8Rng) -> f64 {
    match state {
        SolarState::Low => rng.gen_range(40.0..190.0),
        SolarState::Medium => rng.gen_range(215.0..440.0),
        SolarState::High => rng.gen_range(455.0..495.0),
        SolarState::VeryHigh => rng.gen_range(510.0..780.0),
    }
}

/// Samples one day of in-window states from the truth matrices, starting
/// in `Low`. The transition out of slot `t` uses the matrix of the segment
/// containing `t`.
fn sample_day(
    plan: &SegmentationPlan,
    truth: &[TransitionMatrix<f64>],
    rng: &mut ChaCha8Rng,
) -> Vec<SolarState> {
    let total = plan.total_slots();
    let mut states = Vec::with_capacity(total);
    let mut current = SolarState::Low;
    states.push(current);
    for t in 0..total - 1 {
        let seg = plan.segment_of_slot(t).expect("slot within plan");
        let row = truth[seg].row(current);
        if row.iter().any(|&p| p > 0.0) {
            let pick = WeightedIndex::new(row).expect("live row");
            current = SolarState::from_index(pick.sample(rng)).expect("index in range");
        }
        states.push(current);
    }
    states
}

/// Builds the fixture month with `days` days starting 2013-07-01.
pub fn generate_month(seed: u64, days: u32) -> FixtureMonth {
    let plan = SegmentationPlan::summer_paper();
    let truth = summer_truth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window_start = plan.window_start();
    let window_end = plan.window_end();
    let mut csv = String::from("timestamp,irradiance_wm2\n");
    let mut state_days = Vec::with_capacity(days as usize);

    for day in 0..days {
        let date = chrono::NaiveDate::from_ymd_opt(2013, 7, 1)
            .unwrap()
            .checked_add_days(chrono::Days::new(day as u64))
            .unwrap();
        let states = sample_day(&plan, &truth, &mut rng);
        let mut slot_in_window = 0usize;
        // full 24 h coverage so the series stays gap-free across midnight
        let mut time = chrono::NaiveTime::from_hms_opt(0, 0, 0).unwrap();
        for _ in 0..(24 * 60 / plan.slot_minutes()) {
            let value = if time >= window_start && time < window_end {
                let v = band_value(states[slot_in_window], &mut rng);
                slot_in_window += 1;
                v
            } else {
                rng.gen_range(0.0..30.0)
            };
            csv.push_str(&format!(
                "{}T{},{:.3}\n",
                date.format("%Y-%m-%d"),
                time.format("%H:%M"),
                value
            ));
            time += chrono::Duration::minutes(plan.slot_minutes() as i64);
        }
        state_days.push(StateSequence {
            states,
            slot_minutes: plan.slot_minutes(),
            window_start,
        });
    }
    FixtureMonth {
        csv,
        state_days,
        truth,
        plan,
    }
}
