//! Plain-text run configuration with dotted keys.
//!
//! Format: one `key = value` pair per line, `#` starts a comment. Every key
//! can also be set by a CLI flag; flags win over the file.

use crate::discretize::{SolarState, ThresholdConfig};
use crate::error::{Result, SolarError};
use crate::generator::{CarryMode, SegmentationPlan};
use chrono::NaiveTime;
use std::path::PathBuf;

/// Which sequences the transition counts are estimated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Fit on the averaged representative day.
    #[default]
    Repday,
    /// Pool per-day transitions across all complete days.
    Pooled,
}

impl FitMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "repday" => Some(FitMode::Repday),
            "pooled" => Some(FitMode::Pooled),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FitMode::Repday => "repday",
            FitMode::Pooled => "pooled",
        }
    }
}

/// Source of the segmentation plan: a named preset or inline boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanSource {
    Preset(String),
    Boundaries(Vec<NaiveTime>),
}

impl Default for PlanSource {
    fn default() -> Self {
        PlanSource::Preset("summer-paper".into())
    }
}

/// Everything a CLI run needs, merged from defaults, config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub model: Option<PathBuf>,
    pub synth: Option<PathBuf>,
    pub threshold_lr: f64,
    pub threshold_mr: f64,
    pub threshold_max: f64,
    pub plan: PlanSource,
    pub slot_minutes: u32,
    pub fit_on: FitMode,
    pub carry: CarryMode,
    pub strict_alg1: bool,
    pub significance: f64,
    pub stationarity_threshold: f64,
    pub smoothing: f64,
    pub seed: u64,
    pub initial: SolarState,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            out: PathBuf::from("out"),
            model: None,
            synth: None,
            threshold_lr: 200.0,
            threshold_mr: 450.0,
            threshold_max: 500.0,
            plan: PlanSource::default(),
            slot_minutes: 5,
            fit_on: FitMode::default(),
            carry: CarryMode::default(),
            strict_alg1: false,
            significance: 0.05,
            stationarity_threshold: 0.1,
            smoothing: 0.0,
            seed: 0,
            initial: SolarState::Low,
        }
    }
}

fn bad(reason: impl Into<String>) -> SolarError {
    SolarError::InvalidConfig {
        reason: reason.into(),
    }
}

fn parse_time(s: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(s.trim(), "%H:%M").map_err(|e| bad(format!("bad time `{s}`: {e}")))
}

impl RunConfig {
    /// Applies `key = value` pairs from config-file text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", idx + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "model" => self.model = Some(PathBuf::from(value)),
            "synth" => self.synth = Some(PathBuf::from(value)),
            "threshold.lr" => self.threshold_lr = parse_num(key, value)?,
            "threshold.mr" => self.threshold_mr = parse_num(key, value)?,
            "threshold.max" => self.threshold_max = parse_num(key, value)?,
            "plan.preset" => self.plan = PlanSource::Preset(value.to_string()),
            "plan.boundaries" => {
                let times = value
                    .split(',')
                    .map(parse_time)
                    .collect::<Result<Vec<_>>>()?;
                self.plan = PlanSource::Boundaries(times);
            }
            "plan.slot_minutes" => {
                self.slot_minutes = value
                    .parse()
                    .map_err(|_| bad(format!("bad plan.slot_minutes `{value}`")))?
            }
            "fit_on" => {
                self.fit_on =
                    FitMode::parse(value).ok_or_else(|| bad(format!("bad fit_on `{value}`")))?
            }
            "carry" => {
                self.carry =
                    CarryMode::parse(value).ok_or_else(|| bad(format!("bad carry `{value}`")))?
            }
            "strict_alg1" => self.strict_alg1 = parse_bool(key, value)?,
            "significance" => self.significance = parse_num(key, value)?,
            "stationarity.threshold" => self.stationarity_threshold = parse_num(key, value)?,
            "smoothing" => self.smoothing = parse_num(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(format!("bad seed `{value}`")))?
            }
            "initial" => {
                self.initial = SolarState::from_name(value)
                    .ok_or_else(|| bad(format!("bad initial state `{value}`")))?
            }
            other => return Err(bad(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Serializes the effective config in the same key-value format the
    /// parser accepts.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        if let Some(data) = &self.data {
            out.push_str(&format!("data = {}\n", data.display()));
        }
        out.push_str(&format!("out = {}\n", self.out.display()));
        if let Some(model) = &self.model {
            out.push_str(&format!("model = {}\n", model.display()));
        }
        if let Some(synth) = &self.synth {
            out.push_str(&format!("synth = {}\n", synth.display()));
        }
        out.push_str(&format!("threshold.lr = {}\n", self.threshold_lr));
        out.push_str(&format!("threshold.mr = {}\n", self.threshold_mr));
        out.push_str(&format!("threshold.max = {}\n", self.threshold_max));
        match &self.plan {
            PlanSource::Preset(name) => out.push_str(&format!("plan.preset = {name}\n")),
            PlanSource::Boundaries(times) => {
                let joined = times
                    .iter()
                    .map(|t| t.format("%H:%M").to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                out.push_str(&format!("plan.boundaries = {joined}\n"));
            }
        }
        out.push_str(&format!("plan.slot_minutes = {}\n", self.slot_minutes));
        out.push_str(&format!("fit_on = {}\n", self.fit_on.name()));
        out.push_str(&format!("carry = {}\n", self.carry.name()));
        out.push_str(&format!("strict_alg1 = {}\n", self.strict_alg1));
        out.push_str(&format!("significance = {}\n", self.significance));
        out.push_str(&format!(
            "stationarity.threshold = {}\n",
            self.stationarity_threshold
        ));
        out.push_str(&format!("smoothing = {}\n", self.smoothing));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("initial = {}\n", self.initial.name()));
        out
    }

    pub fn thresholds(&self) -> Result<ThresholdConfig<f64>> {
        ThresholdConfig::new(self.threshold_lr, self.threshold_mr, self.threshold_max)
    }

    pub fn segmentation_plan(&self) -> Result<SegmentationPlan> {
        match &self.plan {
            PlanSource::Preset(name) => match name.as_str() {
                "summer-paper" => Ok(SegmentationPlan::summer_paper()),
                "winter-paper" => Ok(SegmentationPlan::winter_paper()),
                other => Err(bad(format!(
                    "unknown plan preset `{other}` (expected summer-paper or winter-paper)"
                ))),
            },
            PlanSource::Boundaries(times) => {
                SegmentationPlan::from_boundaries(self.slot_minutes, times)
            }
        }
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| bad(format!("bad number for {key}: `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(format!("bad boolean for {key}: `{value}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.set("data", "solar.csv").unwrap();
        cfg.set("fit_on", "pooled").unwrap();
        cfg.set("carry", "state").unwrap();
        cfg.set("strict_alg1", "true").unwrap();
        cfg.set("plan.boundaries", "06:00,09:00,12:00").unwrap();
        cfg.set("seed", "99").unwrap();
        cfg.set("initial", "M").unwrap();

        let mut reparsed = RunConfig::default();
        reparsed.apply_text(&cfg.dump()).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("# a comment\n\nthreshold.lr = 150 # trailing\n")
            .unwrap();
        assert_eq!(cfg.threshold_lr, 150.0);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_text("nonsense = 1\n").is_err());
    }

    #[test]
    fn presets_resolve() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.segmentation_plan().unwrap().segment_count(), 5);
        cfg.set("plan.preset", "winter-paper").unwrap();
        assert_eq!(cfg.segmentation_plan().unwrap().segment_count(), 4);
        cfg.set("plan.preset", "autumn").unwrap();
        assert!(cfg.segmentation_plan().is_err());
    }

    #[test]
    fn inline_boundaries_resolve() {
        let mut cfg = RunConfig::default();
        cfg.set("plan.boundaries", "06:00,09:00,12:00").unwrap();
        let plan = cfg.segmentation_plan().unwrap();
        assert_eq!(plan.segment_count(), 2);
        assert_eq!(plan.total_slots(), 72);
    }
}
