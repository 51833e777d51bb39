//! Command-line front end. Every command prints one JSON document on
//! stdout; diagnostics go to stderr. Exit codes: 0 success, 2 bad input,
//! 3 pipeline failure.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::eval::{compose_throughput, fleet_impact, CompositionMode, ConfusionMatrix, StageProfile};
use crate::model::{validate_config, PipelineConfig};
use crate::replay::{generate, run_with_events, BackendSpec, Manifest, NoiseSpec, RunReport, ScenarioScript};

pub const CONFIG_ENV: &str = "SMART_HANDS_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "smart-hands", version, about = "Driver hand-activity pipeline: replay, evaluation and reference arithmetic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a scenario script into a replay manifest.
    Generate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the script's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay a manifest through the pipeline with a mock backend.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = CONFIG_ENV)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = BackendKind::Scripted)]
        backend: BackendKind,
        /// Label-noise rate for both stages of the noisy backend.
        #[arg(long, default_value_t = 0.0)]
        error_rate: f64,
        #[arg(long)]
        object_error_rate: Option<f64>,
        #[arg(long)]
        location_error_rate: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Alert events, one JSON object per line, written as they fire.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Accuracy and per-class metrics of a confusion-matrix CSV.
    EvalMatrix {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Compose per-stage frame rates.
    Throughput {
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        #[arg(long, default_value = "sequential")]
        mode: String,
    },
    /// Fleet penetration and prevented accidents.
    Impact {
        #[arg(long)]
        equipped: u64,
        #[arg(long)]
        fleet: u64,
        #[arg(long)]
        accidents: u64,
        #[arg(long)]
        fraction: f64,
    },
    /// Summarize a run report.
    Report {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Scripted,
    Noisy,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Runtime(m) => m,
        }
    }
}

fn input(context: impl std::fmt::Display) -> impl FnOnce(String) -> CliError {
    move |e| CliError::Input(format!("{context}: {e}"))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let cfg = match path {
        Some(p) => PipelineConfig::from_toml_str(&read_text(p)?).map_err(|e| input(p.display())(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    validate_config(cfg).map_err(|e| CliError::Input(e.to_string()))
}

/// Run one parsed command and return its stdout document.
pub fn execute(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Generate { script, out, seed } => {
            let text = read_text(&script)?;
            let mut parsed =
                ScenarioScript::from_toml_str(&text).map_err(|e| input(script.display())(e.to_string()))?;
            if let Some(seed) = seed {
                parsed.seed = seed;
            }
            let manifest = generate(&parsed).map_err(|e| CliError::Input(e.to_string()))?;
            let mut w = create(&out)?;
            manifest.write_jsonl(&mut w).map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(json!({ "ticks": manifest.ticks.len(), "seed": parsed.seed, "out": out }))
        }

        Command::Run {
            manifest,
            config,
            backend,
            error_rate,
            object_error_rate,
            location_error_rate,
            seed,
            events,
            report,
        } => {
            let cfg = load_config(config.as_deref())?;
            let file = File::open(&manifest).map_err(|e| input(manifest.display())(e.to_string()))?;
            let parsed =
                Manifest::read_jsonl(BufReader::new(file)).map_err(|e| input(manifest.display())(e.to_string()))?;
            let spec = match backend {
                BackendKind::Scripted => BackendSpec::Scripted,
                BackendKind::Noisy => {
                    let mut noise = NoiseSpec::symmetric(error_rate, seed);
                    noise.object_error_rate = object_error_rate.unwrap_or(error_rate);
                    noise.location_error_rate = location_error_rate.unwrap_or(error_rate);
                    for rate in [noise.object_error_rate, noise.location_error_rate] {
                        if !(0.0..=1.0).contains(&rate) {
                            return Err(CliError::Input(format!("error rate {rate} outside [0, 1]")));
                        }
                    }
                    BackendSpec::Noisy(noise)
                }
            };

            let mut sink = events.as_deref().map(create).transpose()?;
            let result = run_with_events(&parsed, &cfg, spec, |event| match sink.as_mut() {
                Some(w) => {
                    serde_json::to_writer(&mut *w, event)?;
                    w.write_all(b"\n")?;
                    w.flush()
                }
                None => Ok(()),
            })
            .map_err(|e| if e.is_input_error() { CliError::Input(e.to_string()) } else { CliError::Runtime(e.to_string()) })?;

            if let Some(path) = &report {
                let mut w = create(path)?;
                serde_json::to_writer_pretty(&mut w, &result)
                    .map_err(io::Error::from)
                    .and_then(|_| w.flush())
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            Ok(summarize(&result))
        }

        Command::EvalMatrix { csv } => {
            let file = File::open(&csv).map_err(|e| input(csv.display())(e.to_string()))?;
            let matrix = ConfusionMatrix::from_csv(file).map_err(|e| input(csv.display())(e.to_string()))?;
            let accuracy = matrix.accuracy().map_err(|e| CliError::Input(e.to_string()))?;
            let per_class = matrix.per_class_metrics().map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({
                "labels": matrix.labels(),
                "total": matrix.total(),
                "correct": matrix.trace(),
                "accuracy": accuracy,
                "per_class": per_class,
            }))
        }

        Command::Throughput { rates, mode } => {
            let mode: CompositionMode = mode.parse().map_err(|e: crate::eval::EvalError| CliError::Input(e.to_string()))?;
            let profile = StageProfile::from_rates(&rates).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "rates": rates, "mode": mode, "fps": compose_throughput(&profile, mode) }))
        }

        Command::Impact { equipped, fleet, accidents, fraction } => {
            let impact = fleet_impact(equipped, fleet, fraction, accidents).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "penetration": impact.penetration, "prevented": impact.prevented }))
        }

        Command::Report { report } => {
            let text = read_text(&report)?;
            let parsed: RunReport =
                serde_json::from_str(&text).map_err(|e| input(report.display())(e.to_string()))?;
            Ok(summarize(&parsed))
        }
    }
}

/// The headline numbers of a run report.
pub fn summarize(report: &RunReport) -> Value {
    let hand = |s: &crate::replay::HandScores| {
        json!({
            "object_accuracy": s.object_accuracy,
            "location_accuracy": s.location_accuracy,
            "label_accuracy": s.label_accuracy,
            "evaluated": s.evaluated,
            "unknown": s.unknown,
        })
    };
    json!({
        "schema_version": report.schema_version,
        "manifest_ticks": report.manifest_ticks,
        "ticks_with_truth": report.ticks_with_truth,
        "unmatched_truth_ticks": report.unmatched_truth_ticks,
        "raw": { "left": hand(&report.raw.left), "right": hand(&report.raw.right) },
        "smoothed": { "left": hand(&report.smoothed.left), "right": hand(&report.smoothed.right) },
        "alerts": report.alerts.len(),
        "alert_onsets": report.alerts.iter().map(|a| a.onset_tick).collect::<Vec<_>>(),
        "sets_emitted": report.stream_stats.sets_emitted,
        "sets_with_missing": report.stream_stats.sets_with_missing,
        "ticks_per_second": report.timing.map(|t| t.ticks_per_second),
    })
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(doc) => {
            println!("{doc}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_command() {
        let cli = Cli::try_parse_from(["smart-hands", "throughput", "--rates", "28.8,22.7", "--mode", "sequential"]).unwrap();
        let out = execute(cli.command).unwrap();
        assert!((out["fps"].as_f64().unwrap() - 12.69).abs() < 0.01);
    }

    #[test]
    fn unknown_mode_is_input_error() {
        let cli = Cli::try_parse_from(["smart-hands", "throughput", "--rates", "10", "--mode", "parallel"]).unwrap();
        assert_eq!(execute(cli.command).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn impact_command() {
        let cli = Cli::try_parse_from([
            "smart-hands", "impact", "--equipped", "4300000", "--fleet", "287000000", "--accidents", "680000",
            "--fraction", "0.027",
        ])
        .unwrap();
        let out = execute(cli.command).unwrap();
        assert_eq!(out["prevented"], 18360);
    }
}
