//! `gasleak` command-line front end.

mod range;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gasleak::detect::{run_detection, DetectionConfig};
use gasleak::fd::{compare_fields, solve_fd, FdConfig};
use gasleak::field::{tabulate_field, FieldSource, PressureField};
use gasleak::localize::{bias_sweep, estimate, fixation_time, sweep_to_csv, DropPair, Method};
use gasleak::model::{LeakScenario, PipelineSpec};
use gasleak::stream::{generate_stream, read_samples, write_events, write_samples, StreamParams};
use gasleak::tables::{graph_series, reproduce_table};
use gasleak::RunConfig;

use range::parse_range;

#[derive(Debug, Parser)]
#[command(name = "gasleak", version, about = "Transient pressure modelling and leak localization for gas pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pipeline preset, overriding the configuration.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LeakArgs {
    /// Leak position, m.
    #[arg(long)]
    leak_at: Option<f64>,
    /// Leak mass flux, Pa·s/m.
    #[arg(long)]
    leak_flux: Option<f64>,
    /// Leak onset, s.
    #[arg(long)]
    onset: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Positions as start:end:step, m.
    #[arg(long, default_value = "0:100000:12500")]
    xs: String,
    /// Times as start:end:step, s.
    #[arg(long, default_value = "100:900:100")]
    ts: String,
}

#[derive(Debug, Args)]
struct DropArgs {
    /// Measured inlet pressure, Pa.
    #[arg(long, conflicts_with = "inlet_drop")]
    inlet: Option<f64>,
    /// Measured outlet pressure, Pa.
    #[arg(long, conflicts_with = "outlet_drop")]
    outlet: Option<f64>,
    /// Inlet drop below steady, Pa.
    #[arg(long)]
    inlet_drop: Option<f64>,
    /// Outlet drop below steady, Pa.
    #[arg(long)]
    outlet_drop: Option<f64>,
    /// Elapsed time since onset at which the drops were read, s.
    #[arg(long)]
    t1: f64,
    /// True position, m, to report the relative error.
    #[arg(long)]
    truth: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate the closed-form field as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        leak: LeakArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Tabulate the finite-difference oracle on the same grid as `simulate`.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        leak: LeakArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Reproduce reference table 1 to 4 as CSV.
    Table {
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Plot-ready CSV for graph 1 to 5.
    Graph {
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the leak position from end drops.
    Localize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        drops: DropArgs,
        /// eq10 (closed form) or invert (numeric inversion).
        #[arg(long, default_value = "eq10")]
        method: Method,
    },
    /// Estimate the leak position by numeric inversion of the forward model.
    Invert {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        drops: DropArgs,
    },
    /// Run the streaming detector over a JSON-lines sample file.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Sample stream; standard input when absent.
        input: Option<PathBuf>,
        /// Fixation time override, s.
        #[arg(long)]
        t1: Option<f64>,
        /// Restrict localization to one method.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        cadence: Option<f64>,
    },
    /// Generate a synthetic two-sensor stream as JSON lines.
    Gen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        leak: LeakArgs,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        quantize: f64,
        #[arg(long, default_value_t = 10.0)]
        cadence: f64,
        #[arg(long, default_value_t = 900.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form versus inversion bias over true leak positions.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Fixation time, s; derived from the pipeline when absent.
        #[arg(long)]
        t1: Option<f64>,
        /// True positions as start:end:step, m.
        #[arg(long, default_value = "5000:95000:5000")]
        xs: String,
        /// Cadence used to derive t1, s.
        #[arg(long, default_value_t = 100.0)]
        cadence: f64,
    },
    /// Compare two pressure-field CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<(RunConfig, PipelineSpec)> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &common.preset {
        cfg.pipeline = gasleak::PipelineConfig::Preset(name.clone());
    }
    let spec = cfg.validate()?;
    Ok((cfg, spec))
}

fn resolve_leak(cfg: &RunConfig, spec: &PipelineSpec, args: &LeakArgs) -> Result<LeakScenario> {
    let base = cfg.leak;
    let position = match (args.leak_at, base) {
        (Some(p), _) => p,
        (None, Some(l)) => l.position,
        (None, None) => bail!(gasleak::Error::Config("no leak given: pass --leak-at or a config leak".into())),
    };
    let flux = args.leak_flux.or(base.map(|l| l.flux)).unwrap_or(30.0);
    let onset = args.onset.or(base.map(|l| l.onset)).unwrap_or(0.0);
    Ok(LeakScenario::new(spec, position, flux, onset)?)
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) => text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn drop_pair(spec: &PipelineSpec, d: &DropArgs) -> Result<DropPair> {
    let inlet = match (d.inlet, d.inlet_drop) {
        (Some(p), _) => spec.inlet_pressure() - p,
        (None, Some(v)) => v,
        (None, None) => bail!(gasleak::Error::Config("pass --inlet or --inlet-drop".into())),
    };
    let outlet = match (d.outlet, d.outlet_drop) {
        (Some(p), _) => spec.outlet_pressure() - p,
        (None, Some(v)) => v,
        (None, None) => bail!(gasleak::Error::Config("pass --outlet or --outlet-drop".into())),
    };
    Ok(DropPair::new(inlet, outlet, d.t1)?)
}

fn localize(common: &Common, d: &DropArgs, method: Method) -> Result<()> {
    let (cfg, spec) = load_config(common)?;
    let pair = drop_pair(&spec, d)?;
    let mut report = estimate(&spec, &pair, method, &cfg.series)?;
    if let Some(truth) = d.truth {
        report = report.with_truth(truth);
    }
    emit(common, &(report.to_json() + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, leak, grid } => {
            let (cfg, spec) = load_config(&common)?;
            let leak = resolve_leak(&cfg, &spec, &leak)?;
            let (xs, ts) = (parse_range(&grid.xs)?, parse_range(&grid.ts)?);
            let field = tabulate_field(&spec, &FieldSource::Leak(leak), &xs, &ts, &cfg.series)?;
            emit(&common, &field.to_csv())
        }
        Command::Oracle {
            common,
            leak,
            grid,
            dx,
            dt,
            theta,
        } => {
            let (cfg, spec) = load_config(&common)?;
            let leak = resolve_leak(&cfg, &spec, &leak)?;
            let base = cfg.fd.unwrap_or_default();
            let fd = FdConfig {
                dx: dx.unwrap_or(base.dx),
                dt: dt.unwrap_or(base.dt),
                theta: theta.unwrap_or(base.theta),
            };
            let (xs, ts) = (parse_range(&grid.xs)?, parse_range(&grid.ts)?);
            let t_end = ts.last().copied().unwrap_or(0.0);
            let field = solve_fd(&spec, &leak, &fd, t_end, &xs, &ts)?;
            emit(&common, &field.to_csv())
        }
        Command::Table { n, common } => emit(&common, &reproduce_table(n)?),
        Command::Graph { n, common } => emit(&common, &graph_series(n)?),
        Command::Localize { common, drops, method } => localize(&common, &drops, method),
        Command::Invert { common, drops } => localize(&common, &drops, Method::NumericInversion),
        Command::Detect {
            common,
            input,
            t1,
            method,
            threshold,
            cadence,
        } => {
            let (cfg, spec) = load_config(&common)?;
            let mut det = cfg.detection.clone().unwrap_or_else(DetectionConfig::default);
            if let Some(t1) = t1 {
                det.fixation = Some(t1);
            }
            if let Some(m) = method {
                det.methods = vec![m];
            }
            if let Some(v) = threshold {
                det.threshold = v;
            }
            if let Some(v) = cadence {
                det.cadence = v;
            }
            let samples = read_samples(&read_input(input.as_deref())?)?;
            let events = run_detection(&spec, &det, &cfg.series, &samples)?;
            emit(&common, &write_events(&events))
        }
        Command::Gen {
            common,
            leak,
            sigma,
            quantize,
            cadence,
            duration,
            seed,
        } => {
            let (cfg, spec) = load_config(&common)?;
            let leak = resolve_leak(&cfg, &spec, &leak)?;
            let params = StreamParams {
                noise_sigma: sigma,
                quantize,
                cadence,
                duration,
                seed,
            };
            let samples = generate_stream(&spec, &leak, &params, &cfg.series)?;
            emit(&common, &write_samples(&samples))
        }
        Command::Sweep { common, t1, xs, cadence } => {
            let (cfg, spec) = load_config(&common)?;
            let t1 = match t1 {
                Some(t) => t,
                None => fixation_time(&spec, cadence)?,
            };
            let rows = bias_sweep(&spec, t1, &parse_range(&xs)?, &cfg.series)?;
            emit(&common, &sweep_to_csv(&rows))
        }
        Command::Compare { a, b, common } => {
            let load = |p: &Path| -> Result<PressureField> {
                Ok(PressureField::from_csv(&read_input(Some(p))?)?)
            };
            let report = compare_fields(&load(&a)?, &load(&b)?)?;
            emit(&common, &report.to_kv_text())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<gasleak::Error>() {
        Some(e) => e.exit_code() as u8,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("gasleak: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        let accuracy = anyhow::Error::from(gasleak::Error::Accuracy {
            achieved: 1.0,
            requested: 0.1,
            terms: 1,
        });
        assert_eq!(exit_code(&accuracy), 3);
        let ratio = anyhow::Error::from(gasleak::Error::UndefinedRatio { outlet_drop: 0.0 }).context("while localizing");
        assert_eq!(exit_code(&ratio), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 2);
    }
}
