//! Command-line front end: builds experiment configs from flags or a config
//! file, runs them, and writes JSON or CSV reports.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 validation failure,
//! 3 config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qaddlab::dual::DualOptions;
use qaddlab::harness::{
    qubit_grid_lower_bound, run_experiment, ChannelSource, ConfigFile, ExperimentConfig,
    ExperimentKind, GadgetParams, GridBound, Report, StateSource,
};
use qaddlab::msw::{channel_from_state, dilate_state, msw_identity_check, MswIdentityReport};
use qaddlab::quantities::{
    entanglement_of_formation, holevo_capacity, min_output_entropy_seeded, Estimate,
    OptimizerOptions,
};
use qaddlab::Error;

#[derive(Parser)]
#[command(
    name = "qaddlab",
    version,
    about = "Numerical laboratory for quantum channel additivity quantities"
)]
struct Cli {
    /// Master random seed for every search and sample in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Optimizer restarts per search.
    #[arg(long, global = true)]
    restarts: Option<usize>,

    /// Gap tolerance for the candidate-violation protocol.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Run a batch of experiments from a JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// CP/TP validation of one or more channels.
    Validate {
        #[arg(long = "channel", required = true)]
        channels: Vec<String>,
    },
    /// Minimum output entropy of a channel.
    Minent {
        #[arg(long)]
        channel: String,
        /// Polar resolution of the qubit grid scan (qubit inputs only).
        #[arg(long)]
        grid_resolution: Option<usize>,
    },
    /// Holevo capacity, optionally constrained to an average input.
    Chi {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        input: Option<String>,
    },
    /// Entanglement of formation of a bipartite state.
    Eof {
        #[arg(long)]
        state: String,
    },
    /// Channel↔state identity check from a (channel, input) pair or a state.
    Msw {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        state: Option<String>,
    },
    /// Certificate functional for a channel at a fixed input.
    Dual {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        input: String,
    },
    /// Verify the gadget constructions built from a base channel.
    Gadget {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
    },
    /// Two-sided additivity comparison for a quantity.
    Additivity {
        #[arg(long, value_enum)]
        kind: AdditivityKind,
        #[arg(long = "channel")]
        channels: Vec<String>,
        #[arg(long = "state")]
        states: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AdditivityKind {
    Minent,
    Chi,
    Eof,
    Strong,
}

/// Payload for single-quantity commands.
#[derive(Serialize)]
struct SingleQuantity {
    quantity: String,
    seed: u64,
    estimate: Estimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridBound>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Output {
    Batch(Vec<Report>),
    Single(SingleQuantity),
    Msw(Box<MswIdentityReport>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_)
                | Error::UnknownChannelKind(_)
                | Error::BadParameter { .. }
                | Error::Io(_)
                | Error::Json(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn optimizer_from(cli: &Cli) -> OptimizerOptions {
    let mut opts = OptimizerOptions::default().with_seed(cli.seed);
    if let Some(restarts) = cli.restarts {
        opts = opts.with_restarts(restarts);
    }
    opts
}

fn base_config(cli: &Cli, kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        channels: vec![],
        states: vec![],
        optimizer: optimizer_from(cli),
        dual: None,
        gadget: None,
        grid_resolution: None,
        violation_tol: cli.tol,
        output: None,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        let configs: ConfigFile = serde_json::from_str(&text)?;
        let mut reports = Vec::new();
        let mut all_pass = true;
        for mut config in configs.into_experiments() {
            if config.optimizer.seed == 0 {
                config.optimizer.seed = cli.seed;
            }
            let report = run_experiment(&config)?;
            all_pass &= report.all_pass();
            if let Some(out) = &config.output {
                std::fs::write(out, render_report(cli, &report)?)?;
            }
            reports.push(report);
        }
        let rendered = match cli.format {
            Format::Json => serde_json::to_string_pretty(&Output::Batch(reports))?,
            Format::Csv => reports.iter().map(|r| r.to_csv()).collect::<String>(),
        };
        emit(cli, rendered)?;
        return Ok(if all_pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        });
    }

    let Some(command) = &cli.command else {
        return Err(Error::Config(
            "no subcommand given and no --config file; see --help".into(),
        ));
    };

    match command {
        Command::Validate { channels } => {
            let mut config = base_config(cli, ExperimentKind::Validate);
            config.channels = channels
                .iter()
                .map(|s| ChannelSource::parse_cli(s))
                .collect::<Result<_, _>>()?;
            let report = run_experiment(&config)?;
            let pass = report.all_pass();
            emit(cli, render_report(cli, &report)?)?;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Minent {
            channel,
            grid_resolution,
        } => {
            let n = ChannelSource::parse_cli(channel)?.build()?;
            let opts = optimizer_from(cli);
            let mut grid = None;
            let mut seeds = Vec::new();
            if n.d_in == 2 {
                let bound = qubit_grid_lower_bound(&n, grid_resolution.unwrap_or(90))?;
                seeds.push(bound.argmin.clone());
                grid = Some(bound);
            }
            let estimate = min_output_entropy_seeded(&n, &opts, &seeds)?;
            emit_single(
                cli,
                SingleQuantity {
                    quantity: "min-output-entropy".into(),
                    seed: cli.seed,
                    estimate,
                    grid,
                },
            )
        }
        Command::Chi { channel, input } => {
            let n = ChannelSource::parse_cli(channel)?.build()?;
            let opts = optimizer_from(cli);
            let rho = input
                .as_deref()
                .map(|s| StateSource::parse_cli(s)?.build())
                .transpose()?
                .map(|r| r.with_factors(vec![r.dim]))
                .transpose()?;
            let estimate = holevo_capacity(&n, rho.as_ref(), &opts)?;
            emit_single(
                cli,
                SingleQuantity {
                    quantity: if rho.is_some() {
                        "constrained-holevo".into()
                    } else {
                        "holevo-capacity".into()
                    },
                    seed: cli.seed,
                    estimate,
                    grid: None,
                },
            )
        }
        Command::Eof { state } => {
            let sigma = StateSource::parse_cli(state)?.build()?;
            let estimate = entanglement_of_formation(&sigma, &optimizer_from(cli))?;
            emit_single(
                cli,
                SingleQuantity {
                    quantity: "entanglement-of-formation".into(),
                    seed: cli.seed,
                    estimate,
                    grid: None,
                },
            )
        }
        Command::Msw {
            channel,
            input,
            state,
        } => {
            let pair = match (channel, input, state) {
                (Some(c), Some(i), None) => {
                    let n = ChannelSource::parse_cli(c)?.build()?;
                    let rho = StateSource::parse_cli(i)?.build()?;
                    let rho = rho.with_factors(vec![rho.dim])?;
                    dilate_state(&n, &rho)?
                }
                (None, None, Some(s)) => channel_from_state(&StateSource::parse_cli(s)?.build()?)?,
                _ => {
                    return Err(Error::Config(
                        "msw needs either --channel with --input, or --state".into(),
                    ))
                }
            };
            let report = msw_identity_check(&pair, &optimizer_from(cli))?;
            let rendered = match cli.format {
                Format::Json => serde_json::to_string_pretty(&Output::Msw(Box::new(report)))?,
                Format::Csv => format!(
                    "kind,name,lhs,rhs,gap,direction\nmsw-check,chi-vs-h-minus-ef,{:.12e},{:.12e},{:.12e},identity-residual\n",
                    report.constrained_chi.value,
                    report.output_entropy - report.eof.value,
                    report.residual,
                ),
            };
            emit(cli, rendered)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dual { channel, input } => {
            let mut config = base_config(cli, ExperimentKind::DualCertificate);
            config.channels = vec![ChannelSource::parse_cli(channel)?];
            config.states = vec![StateSource::parse_cli(input)?];
            config.dual = Some(DualOptions {
                seed: cli.seed,
                optimizer: optimizer_from(cli),
                ..Default::default()
            });
            let report = run_experiment(&config)?;
            emit(cli, render_report(cli, &report)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gadget { channel, q, k_min } => {
            let mut config = base_config(cli, ExperimentKind::GadgetVerify);
            config.channels = vec![ChannelSource::parse_cli(channel)?];
            config.gadget = Some(GadgetParams {
                q: *q,
                k_min: *k_min,
            });
            let report = run_experiment(&config)?;
            let pass = report.all_pass();
            emit(cli, render_report(cli, &report)?)?;
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Additivity {
            kind,
            channels,
            states,
        } => {
            let experiment = match kind {
                AdditivityKind::Minent => ExperimentKind::MinentAdditivity,
                AdditivityKind::Chi => ExperimentKind::ChiAdditivity,
                AdditivityKind::Eof => ExperimentKind::EofAdditivity,
                AdditivityKind::Strong => ExperimentKind::StrongSuperadd,
            };
            let mut config = base_config(cli, experiment);
            config.channels = channels
                .iter()
                .map(|s| ChannelSource::parse_cli(s))
                .collect::<Result<_, _>>()?;
            config.states = states
                .iter()
                .map(|s| StateSource::parse_cli(s))
                .collect::<Result<_, _>>()?;
            let report = run_experiment(&config)?;
            emit(cli, render_report(cli, &report)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn render_report(cli: &Cli, report: &Report) -> Result<String, Error> {
    Ok(match cli.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    })
}

fn emit(cli: &Cli, rendered: String) -> Result<(), Error> {
    match &cli.report {
        Some(path) => std::fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    Ok(())
}

fn emit_single(cli: &Cli, single: SingleQuantity) -> Result<ExitCode, Error> {
    let rendered = match cli.format {
        Format::Json => serde_json::to_string_pretty(&Output::Single(single))?,
        Format::Csv => format!(
            "quantity,value,converged,iterations\n{},{:.12e},{},{}\n",
            single.quantity,
            single.estimate.value,
            single.estimate.converged,
            single.estimate.iterations
        ),
    };
    emit(cli, rendered)?;
    Ok(ExitCode::SUCCESS)
}
