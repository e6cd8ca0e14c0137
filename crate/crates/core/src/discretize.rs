//! Discretization of irradiance values into the four solar states.
//!
//! States are `Low`, `Medium`, `High` and `VeryHigh`, separated by three
//! configurable thresholds. Boundary values belong to the lower state:
//! `Low` covers `I <= lr`, `Medium` covers `lr < I <= mr`, `High` covers
//! `mr < I <= max` and `VeryHigh` everything above.

use crate::error::{Result, SolarError};
use crate::ingest::RepresentativeDay;
use crate::scalar::Real;
use chrono::NaiveTime;
use serde::{Deserialize, Serialize};

/// Number of discrete solar states.
pub const STATE_COUNT: usize = 4;

/// One of the four discrete irradiance levels, with fixed codes 1..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolarState {
    Low,
    Medium,
    High,
    VeryHigh,
}

impl SolarState {
    pub const ALL: [SolarState; STATE_COUNT] = [
        SolarState::Low,
        SolarState::Medium,
        SolarState::High,
        SolarState::VeryHigh,
    ];

    /// Fixed integer code: Low = 1 .. VeryHigh = 4.
    pub fn code(self) -> u8 {
        match self {
            SolarState::Low => 1,
            SolarState::Medium => 2,
            SolarState::High => 3,
            SolarState::VeryHigh => 4,
        }
    }

    /// Zero-based matrix index.
    pub fn index(self) -> usize {
        self.code() as usize - 1
    }

    pub fn from_index(i: usize) -> Option<SolarState> {
        SolarState::ALL.get(i).copied()
    }

    pub fn from_code(code: u8) -> Option<SolarState> {
        SolarState::from_index(code.checked_sub(1)? as usize)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolarState::Low => "L",
            SolarState::Medium => "M",
            SolarState::High => "H",
            SolarState::VeryHigh => "VH",
        }
    }

    pub fn from_name(s: &str) -> Option<SolarState> {
        match s {
            "L" | "low" | "Low" => Some(SolarState::Low),
            "M" | "medium" | "Medium" => Some(SolarState::Medium),
            "H" | "high" | "High" => Some(SolarState::High),
            "VH" | "veryhigh" | "VeryHigh" | "very-high" => Some(SolarState::VeryHigh),
            _ => None,
        }
    }
}

/// The three irradiance thresholds (W/m²) separating the four states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig<F: Real> {
    lr: F,
    mr: F,
    max: F,
}

impl<F: Real> ThresholdConfig<F> {
    pub fn new(lr: F, mr: F, max: F) -> Result<Self> {
        if !(lr > F::zero() && lr < mr && mr < max) {
            return Err(SolarError::InvalidThresholds {
                lr: lr.to_f64_lossy(),
                mr: mr.to_f64_lossy(),
                max: max.to_f64_lossy(),
            });
        }
        Ok(Self { lr, mr, max })
    }

    /// The `paper` preset: 200 / 450 / 500 W/m².
    pub fn paper() -> Self {
        Self {
            lr: F::of(200.0),
            mr: F::of(450.0),
            max: F::of(500.0),
        }
    }

    pub fn lr(&self) -> F {
        self.lr
    }

    pub fn mr(&self) -> F {
        self.mr
    }

    pub fn max(&self) -> F {
        self.max
    }
}

/// An ordered run of solar states on a fixed time-of-day grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    pub states: Vec<SolarState>,
    pub slot_minutes: u32,
    pub window_start: NaiveTime,
}

impl StateSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Time of day of slot `k`.
    pub fn slot_time(&self, k: usize) -> NaiveTime {
        self.window_start + chrono::Duration::minutes(self.slot_minutes as i64 * k as i64)
    }

    /// Integer codes 1..=4 of the states.
    pub fn codes(&self) -> Vec<u8> {
        self.states.iter().map(|s| s.code()).collect()
    }
}

/// Maps a single irradiance value to its state.
pub fn to_state<F: Real>(irradiance: F, cfg: &ThresholdConfig<F>) -> SolarState {
    if irradiance <= cfg.lr {
        SolarState::Low
    } else if irradiance <= cfg.mr {
        SolarState::Medium
    } else if irradiance <= cfg.max {
        SolarState::High
    } else {
        SolarState::VeryHigh
    }
}

/// Element-wise discretization of a day profile.
pub fn discretize_day<F: Real>(
    day: &RepresentativeDay<F>,
    cfg: &ThresholdConfig<F>,
) -> StateSequence {
    StateSequence {
        states: day.values.iter().map(|&v| to_state(v, cfg)).collect(),
        slot_minutes: day.slot_minutes,
        window_start: day.window_start,
    }
}
