//! Command-line pipeline: `fit`, `test`, `generate`, `sample`, `evaluate`.
//!
//! Configuration is merged from built-in defaults, then an optional config
//! file, then flags. Statistical outcomes (non-rejection, non-stationarity)
//! are report fields, never nonzero exits.

use crate::config::{FitMode, PlanSource, RunConfig};
use crate::discretize::{discretize_day, SolarState, StateSequence, ThresholdConfig};
use crate::error::{Result, SolarError};
use crate::evaluation;
use crate::generator::{
    self, GenerateOptions, GenerationResult, SegmentationPlan, SegmentedModel,
};
use crate::ingest::{self, IrradianceSeries};
use crate::markov::{CountMatrix, StateDistribution, TransitionMatrix};
use crate::stats;
use chrono::NaiveTime;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "solarsynth",
    about = "Segmented Markov-chain modeling and synthetic generation of solar irradiance states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit per-segment transition matrices from an irradiance CSV
    Fit {
        #[command(flatten)]
        opts: CommonOpts,
        /// Also print the fitted matrices to stdout
        #[arg(long)]
        emit_matrices: bool,
        /// Irradiance CSV (`YYYY-MM-DDTHH:MM,<float>` rows)
        #[arg(value_name = "DATA")]
        data_path: Option<PathBuf>,
    },
    /// Run the state-dependency and temporal-stationarity tests
    Test {
        #[command(flatten)]
        opts: CommonOpts,
        #[arg(value_name = "DATA")]
        data_path: Option<PathBuf>,
    },
    /// Generate the deterministic argmax state trajectory from a fitted model
    Generate {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Sample a seeded Monte-Carlo state path from a fitted model
    Sample {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Compare a synthetic trace against the observed representative day
    Evaluate {
        #[command(flatten)]
        opts: CommonOpts,
        #[arg(value_name = "DATA")]
        data_path: Option<PathBuf>,
    },
}

/// Flags shared by all subcommands; every one overrides a config-file key.
#[derive(Debug, Args, Default)]
pub struct CommonOpts {
    /// Plain-text config file (`key = value` per line)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Irradiance CSV path (alternative to the positional argument)
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Directory holding a fitted model (defaults to the output directory)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Segmentation preset: summer-paper or winter-paper
    #[arg(long)]
    pub preset: Option<String>,
    /// Inline segment boundaries, e.g. 06:00,09:00,12:00
    #[arg(long)]
    pub boundaries: Option<String>,
    #[arg(long)]
    pub slot_minutes: Option<u32>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub mr: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    /// repday (fit on the averaged day) or pooled (sum per-day transitions)
    #[arg(long)]
    pub fit_on: Option<String>,
    /// Segment-boundary carry: distribution or state
    #[arg(long)]
    pub carry: Option<String>,
    /// Use the literal power-form update of the published algorithm
    #[arg(long)]
    pub strict_alg1: bool,
    #[arg(long)]
    pub significance: Option<f64>,
    #[arg(long)]
    pub stationarity_threshold: Option<f64>,
    /// Additive pseudo-count per transition cell (0 disables smoothing)
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial state for generation/sampling: L, M, H or VH
    #[arg(long)]
    pub initial: Option<String>,
    /// Synthetic trace CSV for `evaluate`
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// Print the effective config and exit
    #[arg(long)]
    pub dump_config: bool,
}

fn merged_config(opts: &CommonOpts, positional_data: Option<&PathBuf>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SolarError::io(path.display().to_string(), e))?;
        cfg.apply_text(&text)?;
    }
    if let Some(v) = positional_data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = &opts.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = &opts.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &opts.model {
        cfg.model = Some(v.clone());
    }
    if let Some(v) = &opts.synth {
        cfg.synth = Some(v.clone());
    }
    if let Some(v) = &opts.preset {
        cfg.plan = PlanSource::Preset(v.clone());
    }
    if let Some(v) = &opts.boundaries {
        cfg.set("plan.boundaries", v)?;
    }
    if let Some(v) = opts.slot_minutes {
        cfg.slot_minutes = v;
    }
    if let Some(v) = opts.lr {
        cfg.threshold_lr = v;
    }
    if let Some(v) = opts.mr {
        cfg.threshold_mr = v;
    }
    if let Some(v) = opts.max {
        cfg.threshold_max = v;
    }
    if let Some(v) = &opts.fit_on {
        cfg.set("fit_on", v)?;
    }
    if let Some(v) = &opts.carry {
        cfg.set("carry", v)?;
    }
    if opts.strict_alg1 {
        cfg.strict_alg1 = true;
    }
    if let Some(v) = opts.significance {
        cfg.significance = v;
    }
    if let Some(v) = opts.stationarity_threshold {
        cfg.stationarity_threshold = v;
    }
    if let Some(v) = opts.smoothing {
        cfg.smoothing = v;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = &opts.initial {
        cfg.set("initial", v)?;
    }
    Ok(cfg)
}

/// Entry point used by `main` and by integration tests.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            opts,
            emit_matrices,
            data_path,
        } => {
            let cfg = merged_config(&opts, data_path.as_ref())?;
            if opts.dump_config {
                print!("{}", cfg.dump());
                return Ok(());
            }
            cmd_fit(&cfg, emit_matrices)
        }
        Command::Test { opts, data_path } => {
            let cfg = merged_config(&opts, data_path.as_ref())?;
            if opts.dump_config {
                print!("{}", cfg.dump());
                return Ok(());
            }
            cmd_test(&cfg)
        }
        Command::Generate { opts } => {
            let cfg = merged_config(&opts, None)?;
            if opts.dump_config {
                print!("{}", cfg.dump());
                return Ok(());
            }
            cmd_generate(&cfg)
        }
        Command::Sample { opts } => {
            let cfg = merged_config(&opts, None)?;
            if opts.dump_config {
                print!("{}", cfg.dump());
                return Ok(());
            }
            cmd_sample(&cfg)
        }
        Command::Evaluate { opts, data_path } => {
            let cfg = merged_config(&opts, data_path.as_ref())?;
            if opts.dump_config {
                print!("{}", cfg.dump());
                return Ok(());
            }
            cmd_evaluate(&cfg)
        }
    }
}

fn load_series(cfg: &RunConfig) -> Result<IrradianceSeries<f64>> {
    let path = cfg.data.as_ref().ok_or(SolarError::InvalidConfig {
        reason: "no data path given (flag, positional argument or `data =` key)".into(),
    })?;
    ingest::parse_csv(path, cfg.slot_minutes)
}

/// Day sequences to fit on, per the configured fit mode.
fn fit_days(
    cfg: &RunConfig,
    series: &IrradianceSeries<f64>,
    plan: &SegmentationPlan,
    thresholds: &ThresholdConfig<f64>,
) -> Result<Vec<StateSequence>> {
    let (start, end) = (plan.window_start(), plan.window_end());
    let profiles = match cfg.fit_on {
        FitMode::Repday => vec![ingest::representative_day(series, start, end)?],
        FitMode::Pooled => ingest::daily_profiles(series, start, end)?,
    };
    Ok(profiles
        .iter()
        .map(|p| discretize_day(p, thresholds))
        .collect())
}

fn fit_from_config(
    cfg: &RunConfig,
) -> Result<(SegmentedModel<f64>, Vec<CountMatrix>)> {
    let series = load_series(cfg)?;
    let plan = cfg.segmentation_plan()?;
    let thresholds = cfg.thresholds()?;
    let days = fit_days(cfg, &series, &plan, &thresholds)?;
    let counts = generator::count_segmented(&days, &plan)?;
    let model = generator::fit_segmented(&days, &plan, thresholds, cfg.smoothing)?;
    Ok((model, counts))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SolarError::io(path.display().to_string(), e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| SolarError::io(path.display().to_string(), e))
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SolarError::io(dir.display().to_string(), e))
}

/// Writes matrices, counts and the model manifest into `dir`.
fn write_model(
    dir: &Path,
    cfg: &RunConfig,
    model: &SegmentedModel<f64>,
    counts: &[CountMatrix],
) -> Result<()> {
    ensure_out(dir)?;
    let mut manifest = String::new();
    manifest.push_str(&format!("slot_minutes = {}\n", model.plan.slot_minutes()));
    let boundaries = model
        .plan
        .boundaries()
        .iter()
        .map(|t| t.format("%H:%M").to_string())
        .collect::<Vec<_>>()
        .join(",");
    manifest.push_str(&format!("boundaries = {boundaries}\n"));
    manifest.push_str(&format!("threshold.lr = {}\n", cfg.threshold_lr));
    manifest.push_str(&format!("threshold.mr = {}\n", cfg.threshold_mr));
    manifest.push_str(&format!("threshold.max = {}\n", cfg.threshold_max));
    manifest.push_str(&format!("fit_on = {}\n", cfg.fit_on.name()));
    manifest.push_str(&format!("segments = {}\n", model.plan.segment_count()));
    let empties = model
        .empty_segments
        .iter()
        .map(|k| (k + 1).to_string())
        .collect::<Vec<_>>()
        .join(",");
    manifest.push_str(&format!("empty_segments = {empties}\n"));
    for (k, (matrix, count)) in model.matrices.iter().zip(counts).enumerate() {
        let p_name = format!("p_seg{}.txt", k + 1);
        let n_name = format!("n_seg{}.txt", k + 1);
        write_file(&dir.join(&p_name), &matrix.to_text())?;
        write_file(&dir.join(&n_name), &count.to_text())?;
        manifest.push_str(&format!("matrix.{} = {p_name}\n", k + 1));
        manifest.push_str(&format!("counts.{} = {n_name}\n", k + 1));
    }
    write_file(&dir.join("manifest.txt"), &manifest)
}

/// Reads a fitted model back from a manifest directory.
pub fn load_model(dir: &Path) -> Result<(SegmentedModel<f64>, Vec<CountMatrix>)> {
    let manifest = read_file(&dir.join("manifest.txt"))?;
    let mut slot_minutes = 5u32;
    let mut boundaries: Vec<NaiveTime> = Vec::new();
    let mut thresholds = (200.0, 450.0, 500.0);
    let mut matrix_files: Vec<(usize, String)> = Vec::new();
    let mut count_files: Vec<(usize, String)> = Vec::new();
    let mut empty_segments: Vec<usize> = Vec::new();
    for raw in manifest.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(SolarError::InvalidConfig {
            reason: format!("manifest line without `=`: {line}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let parse_err = |what: &str| SolarError::InvalidConfig {
            reason: format!("bad manifest value for {what}: `{value}`"),
        };
        match key {
            "slot_minutes" => slot_minutes = value.parse().map_err(|_| parse_err(key))?,
            "boundaries" => {
                boundaries = value
                    .split(',')
                    .map(|t| {
                        NaiveTime::parse_from_str(t.trim(), "%H:%M").map_err(|_| parse_err("boundaries"))
                    })
                    .collect::<Result<_>>()?;
            }
            "threshold.lr" => thresholds.0 = value.parse().map_err(|_| parse_err(key))?,
            "threshold.mr" => thresholds.1 = value.parse().map_err(|_| parse_err(key))?,
            "threshold.max" => thresholds.2 = value.parse().map_err(|_| parse_err(key))?,
            "empty_segments" if !value.is_empty() => {
                empty_segments = value
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map(|k| k - 1)
                            .map_err(|_| parse_err("empty_segments"))
                    })
                    .collect::<Result<_>>()?;
            }
            _ if key.starts_with("matrix.") => {
                let idx: usize = key["matrix.".len()..].parse().map_err(|_| parse_err(key))?;
                matrix_files.push((idx, value.to_string()));
            }
            _ if key.starts_with("counts.") => {
                let idx: usize = key["counts.".len()..].parse().map_err(|_| parse_err(key))?;
                count_files.push((idx, value.to_string()));
            }
            _ => {}
        }
    }
    let plan = SegmentationPlan::from_boundaries(slot_minutes, &boundaries)?;
    matrix_files.sort();
    count_files.sort();
    let mut matrices = Vec::new();
    for (_, name) in &matrix_files {
        matrices.push(TransitionMatrix::from_text(&read_file(&dir.join(name))?)?);
    }
    let mut counts = Vec::new();
    for (_, name) in &count_files {
        counts.push(CountMatrix::from_text(&read_file(&dir.join(name))?)?);
    }
    if matrices.len() != plan.segment_count() {
        return Err(SolarError::InvalidConfig {
            reason: format!(
                "manifest lists {} matrices for {} segments",
                matrices.len(),
                plan.segment_count()
            ),
        });
    }
    let thresholds = ThresholdConfig::new(thresholds.0, thresholds.1, thresholds.2)?;
    Ok((
        SegmentedModel {
            plan,
            matrices,
            thresholds,
            empty_segments,
        },
        counts,
    ))
}

pub fn cmd_fit(cfg: &RunConfig, emit_matrices: bool) -> Result<()> {
    let (model, counts) = fit_from_config(cfg)?;
    write_model(&cfg.out, cfg, &model, &counts)?;
    for k in &model.empty_segments {
        eprintln!("warning: segment {} saw no transitions (all-zero matrix)", k + 1);
    }
    if emit_matrices {
        for (k, matrix) in model.matrices.iter().enumerate() {
            println!("# segment {}", k + 1);
            print!("{}", matrix.to_text());
        }
    }
    println!(
        "fit: {} segments written to {}",
        model.plan.segment_count(),
        cfg.out.display()
    );
    Ok(())
}

/// Model source for test/generate/sample: an explicit `--model` directory
/// (or the output directory, when it already holds a manifest), otherwise a
/// fresh in-memory fit from the data path.
fn model_or_fit(cfg: &RunConfig) -> Result<(SegmentedModel<f64>, Vec<CountMatrix>)> {
    if let Some(dir) = &cfg.model {
        return load_model(dir);
    }
    if cfg.out.join("manifest.txt").exists() && cfg.data.is_none() {
        return load_model(&cfg.out);
    }
    fit_from_config(cfg)
}

pub fn cmd_test(cfg: &RunConfig) -> Result<()> {
    let (model, counts) = model_or_fit(cfg)?;
    let mut pooled = CountMatrix::new();
    for c in &counts {
        pooled.merge(c);
    }
    let dependency = stats::dependency_test(&pooled, cfg.significance)?;
    let stationarity = stats::stationarity_check(&model.matrices, cfg.stationarity_threshold)?;
    ensure_out(&cfg.out)?;
    write_file(
        &cfg.out.join("dependency.json"),
        &serde_json::to_string_pretty(&dependency).expect("serializable report"),
    )?;
    write_file(
        &cfg.out.join("stationarity.json"),
        &serde_json::to_string_pretty(&stationarity).expect("serializable report"),
    )?;
    println!(
        "dependency: alpha = {:.4}, chi2({}) critical = {:.4} at {} -> {}",
        dependency.alpha,
        dependency.dof,
        dependency.critical_value,
        dependency.significance,
        if dependency.reject_independence {
            "reject independence"
        } else {
            "no rejection"
        }
    );
    println!(
        "stationarity: max pairwise distance threshold {} -> {}",
        stationarity.threshold,
        if stationarity.stationary {
            "stationary"
        } else {
            "non-stationary"
        }
    );
    Ok(())
}

fn trace_csv(result: &GenerationResult<f64>) -> String {
    let mut out = String::from("time_of_day,state_code,state_name,w_L,w_M,w_H,w_VH,fallback\n");
    let fallback: std::collections::HashSet<usize> =
        result.fallback_slots.iter().copied().collect();
    for (k, (state, dist)) in result
        .states
        .states
        .iter()
        .zip(&result.distributions)
        .enumerate()
    {
        let w = dist.weights();
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{}\n",
            result.states.slot_time(k).format("%H:%M"),
            state.code(),
            state.name(),
            w[0],
            w[1],
            w[2],
            w[3],
            u8::from(fallback.contains(&k))
        ));
    }
    out
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<()> {
    let (model, _) = model_or_fit(cfg)?;
    let initial = StateDistribution::one_hot(cfg.initial);
    let opts = GenerateOptions {
        carry: cfg.carry,
        strict_alg1: cfg.strict_alg1,
    };
    let result = generator::generate(&model, &initial, opts)?;
    ensure_out(&cfg.out)?;
    write_file(&cfg.out.join("trace.csv"), &trace_csv(&result))?;
    let summary = serde_json::json!({
        "slots": result.states.len(),
        "fallback_count": result.fallback_slots.len(),
        "fallback_slots": result.fallback_slots,
        "carry": cfg.carry.name(),
        "strict_alg1": cfg.strict_alg1,
    });
    write_file(
        &cfg.out.join("fallback.json"),
        &serde_json::to_string_pretty(&summary).expect("serializable summary"),
    )?;
    println!(
        "generate: {} slots, {} fallbacks -> {}",
        result.states.len(),
        result.fallback_slots.len(),
        cfg.out.join("trace.csv").display()
    );
    Ok(())
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<()> {
    let (model, _) = model_or_fit(cfg)?;
    let seq = generator::sample(&model, cfg.initial, cfg.seed);
    ensure_out(&cfg.out)?;
    let mut out = String::from("time_of_day,state_code,state_name\n");
    for (k, state) in seq.states.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            seq.slot_time(k).format("%H:%M"),
            state.code(),
            state.name()
        ));
    }
    write_file(&cfg.out.join("sample.csv"), &out)?;
    println!(
        "sample: {} slots (seed {}) -> {}",
        seq.len(),
        cfg.seed,
        cfg.out.join("sample.csv").display()
    );
    Ok(())
}

/// Reads a state trace back from a `trace.csv` / `sample.csv` file.
pub fn read_trace(path: &Path) -> Result<StateSequence> {
    let text = read_file(path)?;
    let mut times: Vec<NaiveTime> = Vec::new();
    let mut states: Vec<SolarState> = Vec::new();
    for (idx, raw) in text.lines().enumerate().skip(1) {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (time, code) = (fields.next(), fields.next());
        let (time, code) = match (time, code) {
            (Some(t), Some(c)) => (t, c),
            _ => {
                return Err(SolarError::MalformedRow {
                    line: idx + 1,
                    reason: "expected `time_of_day,state_code,...`".into(),
                })
            }
        };
        let time = NaiveTime::parse_from_str(time, "%H:%M").map_err(|e| SolarError::MalformedRow {
            line: idx + 1,
            reason: format!("bad time `{time}`: {e}"),
        })?;
        let code: u8 = code.parse().map_err(|_| SolarError::MalformedRow {
            line: idx + 1,
            reason: format!("bad state code `{code}`"),
        })?;
        let state = SolarState::from_code(code).ok_or(SolarError::MalformedRow {
            line: idx + 1,
            reason: format!("state code {code} out of range 1..=4"),
        })?;
        times.push(time);
        states.push(state);
    }
    if states.is_empty() {
        return Err(SolarError::EmptySequence);
    }
    let slot_minutes = if times.len() >= 2 {
        (times[1] - times[0]).num_minutes() as u32
    } else {
        5
    };
    Ok(StateSequence {
        states,
        slot_minutes,
        window_start: times[0],
    })
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let synth_path = cfg.synth.as_ref().ok_or(SolarError::InvalidConfig {
        reason: "no synthetic trace given (`--synth` or `synth =` key)".into(),
    })?;
    let synth = read_trace(synth_path)?;
    let series = load_series(cfg)?;
    let plan = cfg.segmentation_plan()?;
    let thresholds = cfg.thresholds()?;
    let repday = ingest::representative_day(&series, plan.window_start(), plan.window_end())?;
    let real = discretize_day(&repday, &thresholds);
    let report = evaluation::compare(&real, &synth)?;
    ensure_out(&cfg.out)?;
    write_file(
        &cfg.out.join("evaluation.json"),
        &serde_json::to_string_pretty(&report).expect("serializable report"),
    )?;
    let mut overlay = String::from("time_of_day,real_code,synth_code\n");
    for k in 0..real.len() {
        overlay.push_str(&format!(
            "{},{},{}\n",
            real.slot_time(k).format("%H:%M"),
            real.states[k].code(),
            synth.states[k].code()
        ));
    }
    write_file(&cfg.out.join("overlay.csv"), &overlay)?;
    println!(
        "evaluate: match {:.3}, sigma real {:.4} vs synth {:.4} over {} slots",
        report.match_fraction, report.sigma_real, report.sigma_synth, report.length
    );
    Ok(())
}
