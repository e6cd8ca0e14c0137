//! CSV ingestion of irradiance time series and representative-day averaging.
//!
//! Input rows are `YYYY-MM-DDTHH:MM,<float>` on a fixed sampling grid. A
//! single missing sample is repaired by linear interpolation of its
//! neighbours; two or more consecutive missing samples are a hard error.

use crate::error::{Result, SolarError};
use crate::scalar::Real;
use chrono::{NaiveDateTime, NaiveTime, Timelike};
use std::collections::BTreeMap;
use std::path::Path;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// One timestamped irradiance measurement in W/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrradianceSample<F: Real> {
    pub timestamp: NaiveDateTime,
    pub irradiance: F,
}

/// A gap-free irradiance series on a fixed `step_minutes` grid.
#[derive(Debug, Clone)]
pub struct IrradianceSeries<F: Real> {
    samples: Vec<IrradianceSample<F>>,
    step_minutes: u32,
}

/// Per-time-of-day mean irradiance over one or more days.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeDay<F: Real> {
    pub slot_minutes: u32,
    pub window_start: NaiveTime,
    pub values: Vec<F>,
    pub day_count: u32,
}

impl<F: Real> IrradianceSeries<F> {
    pub fn samples(&self) -> &[IrradianceSample<F>] {
        &self.samples
    }

    pub fn step_minutes(&self) -> u32 {
        self.step_minutes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Parses a series from CSV at `path`. The header row is optional and is
/// detected by a non-numeric second field.
pub fn parse_csv<F: Real>(path: impl AsRef<Path>, step_minutes: u32) -> Result<IrradianceSeries<F>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SolarError::io(path.display().to_string(), e))?;
    parse_csv_text(&text, step_minutes)
}

/// Same as [`parse_csv`] but over in-memory text.
pub fn parse_csv_text<F: Real>(text: &str, step_minutes: u32) -> Result<IrradianceSeries<F>> {
    assert!(step_minutes > 0, "step_minutes must be positive");
    let mut samples: Vec<IrradianceSample<F>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let (ts_field, value_field) = row.split_once(',').ok_or(SolarError::MalformedRow {
            line,
            reason: format!("expected `timestamp,irradiance`, got `{row}`"),
        })?;
        let value_field = value_field.trim();
        let value: f64 = match value_field.parse() {
            Ok(v) => v,
            Err(_) if line == 1 => continue, // header row
            Err(_) => {
                return Err(SolarError::MalformedRow {
                    line,
                    reason: format!("unparseable irradiance `{value_field}`"),
                })
            }
        };
        let timestamp = NaiveDateTime::parse_from_str(ts_field.trim(), TIMESTAMP_FORMAT).map_err(
            |e| SolarError::MalformedRow {
                line,
                reason: format!("bad timestamp `{}`: {e}", ts_field.trim()),
            },
        )?;
        if !value.is_finite() {
            return Err(SolarError::MalformedRow {
                line,
                reason: format!("non-finite irradiance `{value_field}`"),
            });
        }
        if value < 0.0 {
            return Err(SolarError::NegativeIrradiance { line, value });
        }
        if let Some(prev) = samples.last() {
            if timestamp == prev.timestamp {
                return Err(SolarError::DuplicateTimestamp {
                    line,
                    timestamp: timestamp.format(TIMESTAMP_FORMAT).to_string(),
                });
            }
            if timestamp < prev.timestamp {
                return Err(SolarError::NonIncreasingTimestamp {
                    line,
                    timestamp: timestamp.format(TIMESTAMP_FORMAT).to_string(),
                });
            }
        }
        samples.push(IrradianceSample {
            timestamp,
            irradiance: F::of(value),
        });
    }
    if samples.len() < 2 {
        return Err(SolarError::SeriesTooShort { len: samples.len() });
    }
    let samples = fill_gaps(samples, step_minutes)?;
    Ok(IrradianceSeries {
        samples,
        step_minutes,
    })
}

/// Repairs single missing samples by linear interpolation. A gap of two or
/// more missing samples, or a gap that is not a whole number of steps,
/// is an error.
fn fill_gaps<F: Real>(
    samples: Vec<IrradianceSample<F>>,
    step_minutes: u32,
) -> Result<Vec<IrradianceSample<F>>> {
    let step = chrono::Duration::minutes(step_minutes as i64);
    let mut out: Vec<IrradianceSample<F>> = Vec::with_capacity(samples.len());
    for sample in samples {
        if let Some(prev) = out.last().copied() {
            let gap = sample.timestamp - prev.timestamp;
            if gap == step || sample.timestamp.date() != prev.timestamp.date() {
                // contiguous, or a new recording day starting at any time
            } else if gap == step * 2 {
                let mid = (prev.irradiance + sample.irradiance) / F::of(2.0);
                out.push(IrradianceSample {
                    timestamp: prev.timestamp + step,
                    irradiance: mid,
                });
            } else {
                return Err(SolarError::GapTooLong {
                    timestamp: prev.timestamp.format(TIMESTAMP_FORMAT).to_string(),
                    gap_minutes: gap.num_minutes(),
                });
            }
        }
        out.push(sample);
    }
    Ok(out)
}

/// Number of slots in `[start, end)` at `step_minutes` resolution.
fn window_slots(start: NaiveTime, end: NaiveTime, step_minutes: u32) -> Result<usize> {
    let minutes = (end - start).num_minutes();
    if minutes <= 0 {
        return Err(SolarError::EmptyWindow);
    }
    if minutes % step_minutes as i64 != 0 {
        return Err(SolarError::WindowNotAligned { step_minutes });
    }
    Ok((minutes / step_minutes as i64) as usize)
}

fn slot_of(time: NaiveTime, start: NaiveTime, end: NaiveTime, step_minutes: u32) -> Option<usize> {
    if time < start || time >= end {
        return None;
    }
    let offset = (time - start).num_minutes();
    if offset % step_minutes as i64 != 0 || time.second() != 0 {
        return None;
    }
    Some((offset / step_minutes as i64) as usize)
}

/// Extracts, per calendar day, the slots covering `[window_start, window_end)`.
/// Days that do not cover the whole window are skipped.
pub fn daily_profiles<F: Real>(
    series: &IrradianceSeries<F>,
    window_start: NaiveTime,
    window_end: NaiveTime,
) -> Result<Vec<RepresentativeDay<F>>> {
    let step = series.step_minutes;
    let slots = window_slots(window_start, window_end, step)?;
    let mut by_day: BTreeMap<chrono::NaiveDate, Vec<Option<F>>> = BTreeMap::new();
    for sample in &series.samples {
        if let Some(k) = slot_of(sample.timestamp.time(), window_start, window_end, step) {
            by_day
                .entry(sample.timestamp.date())
                .or_insert_with(|| vec![None; slots])
                [k] = Some(sample.irradiance);
        }
    }
    let mut days = Vec::new();
    for (_, cells) in by_day {
        if let Some(values) = cells.into_iter().collect::<Option<Vec<F>>>() {
            days.push(RepresentativeDay {
                slot_minutes: step,
                window_start,
                values,
                day_count: 1,
            });
        }
    }
    if days.is_empty() {
        return Err(SolarError::NoCompleteDay);
    }
    Ok(days)
}

/// Averages all complete days of the series into one per-slot mean profile.
pub fn representative_day<F: Real>(
    series: &IrradianceSeries<F>,
    window_start: NaiveTime,
    window_end: NaiveTime,
) -> Result<RepresentativeDay<F>> {
    let days = daily_profiles(series, window_start, window_end)?;
    Ok(average_profiles(&days, window_start))
}

fn average_profiles<F: Real>(
    days: &[RepresentativeDay<F>],
    window_start: NaiveTime,
) -> RepresentativeDay<F> {
    let slots = days[0].values.len();
    let n = F::of(days.len() as f64);
    let values = (0..slots)
        .map(|k| days.iter().map(|d| d.values[k]).sum::<F>() / n)
        .collect();
    RepresentativeDay {
        slot_minutes: days[0].slot_minutes,
        window_start,
        values,
        day_count: days.len() as u32,
    }
}
