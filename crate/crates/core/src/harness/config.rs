//! Experiment configuration: channel/state sources and experiment kinds,
//! all JSON-serializable so runs replay from files.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{random_channel, KrausChannel, NamedChannel};
use crate::dual::DualOptions;
use crate::error::{Error, Result};
use crate::qmat::matrix::ComplexMatrix;
use crate::qmat::random::random_density;
use crate::qmat::state::{DensityMatrix, PureState};
use crate::quantities::OptimizerOptions;

/// Where a channel comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSource {
    /// Named family spec, e.g. "depolarizing:p=0.5".
    Named(String),
    /// JSON file holding a channel in the crate schema.
    File(String),
    Inline(KrausChannel),
    Random {
        d_in: usize,
        d_out: usize,
        d_env: usize,
        seed: u64,
    },
}

impl ChannelSource {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            ChannelSource::Named(spec) => NamedChannel::parse(spec)?.build(),
            ChannelSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(serde_json::from_str(&text)?)
            }
            ChannelSource::Inline(channel) => Ok(channel.clone()),
            ChannelSource::Random {
                d_in,
                d_out,
                d_env,
                seed,
            } => random_channel(*d_in, *d_out, *d_env, *seed),
        }
    }

    /// Parse the CLI shorthand: a path to an existing file, a
    /// "random:d_in=2,d_out=2,d_env=2,seed=7" spec, or a named channel.
    pub fn parse_cli(spec: &str) -> Result<Self> {
        if std::path::Path::new(spec).exists() {
            return Ok(ChannelSource::File(spec.to_string()));
        }
        if let Some(rest) = spec.strip_prefix("random:") {
            let mut d_in = 2;
            let mut d_out = 2;
            let mut d_env = 2;
            let mut seed = 0;
            for part in rest.split(',') {
                let Some((key, value)) = part.split_once('=') else {
                    return Err(Error::Config(format!("bad random channel spec `{spec}`")));
                };
                let v: u64 = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad integer in `{spec}`")))?;
                match key.trim() {
                    "d_in" => d_in = v as usize,
                    "d_out" => d_out = v as usize,
                    "d_env" => d_env = v as usize,
                    "seed" => seed = v,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown random channel parameter `{other}`"
                        )))
                    }
                }
            }
            return Ok(ChannelSource::Random {
                d_in,
                d_out,
                d_env,
                seed,
            });
        }
        Ok(ChannelSource::Named(spec.to_string()))
    }
}

/// Where a state comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSource {
    /// Named state spec: "maxmixed:d=2", "epr", "werner:p=0.8",
    /// "diag:0.75,0.25".
    Named(String),
    File(String),
    Inline(DensityMatrix),
    Random {
        dims: Vec<usize>,
        rank: usize,
        seed: u64,
    },
}

impl StateSource {
    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSource::Named(spec) => build_named_state(spec),
            StateSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(serde_json::from_str(&text)?)
            }
            StateSource::Inline(rho) => Ok(rho.clone()),
            StateSource::Random { dims, rank, seed } => random_density(dims, *rank, *seed),
        }
    }

    pub fn parse_cli(spec: &str) -> Result<Self> {
        if std::path::Path::new(spec).exists() {
            return Ok(StateSource::File(spec.to_string()));
        }
        if let Some(rest) = spec.strip_prefix("random:") {
            let mut dims = vec![2, 2];
            let mut rank = 2;
            let mut seed = 0;
            for part in rest.split(',') {
                let Some((key, value)) = part.split_once('=') else {
                    return Err(Error::Config(format!("bad random state spec `{spec}`")));
                };
                match key.trim() {
                    "dims" => {
                        dims = value
                            .split('x')
                            .map(|d| {
                                d.trim()
                                    .parse::<usize>()
                                    .map_err(|_| Error::Config(format!("bad dims in `{spec}`")))
                            })
                            .collect::<Result<Vec<_>>>()?;
                    }
                    "rank" => {
                        rank = value
                            .trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("bad rank in `{spec}`")))?;
                    }
                    "seed" => {
                        seed = value
                            .trim()
                            .parse()
                            .map_err(|_| Error::Config(format!("bad seed in `{spec}`")))?;
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "unknown random state parameter `{other}`"
                        )))
                    }
                }
            }
            return Ok(StateSource::Random { dims, rank, seed });
        }
        Ok(StateSource::Named(spec.to_string()))
    }
}

pub fn epr_state() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
    ];
    DensityMatrix::from_pure(&PureState::new(amp, vec![2, 2]).expect("unit vector"))
}

/// p·EPR + (1−p)·I/4 on two qubits.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParameter {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let mixed = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    let m = epr_state().matrix.scale_real(p).add(&mixed);
    DensityMatrix::new(m, vec![2, 2])
}

fn build_named_state(spec: &str) -> Result<DensityMatrix> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.trim(), r.trim()),
        None => (spec.trim(), ""),
    };
    match kind {
        "epr" => Ok(epr_state()),
        "werner" => {
            let p = rest
                .strip_prefix("p=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("werner needs p=…, got `{spec}`")))?;
            werner_state(p)
        }
        "maxmixed" => {
            let d = if rest.is_empty() {
                2
            } else {
                rest.strip_prefix("d=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("maxmixed needs d=…, got `{spec}`")))?
            };
            Ok(DensityMatrix::maximally_mixed(d))
        }
        "diag" => {
            let entries: Vec<f64> = rest
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad diag entry in `{spec}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            DensityMatrix::new(ComplexMatrix::diagonal_real(&entries), vec![entries.len()])
        }
        other => Err(Error::Config(format!("unknown named state `{other}`"))),
    }
}

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "minent-additivity")]
    MinentAdditivity,
    #[serde(rename = "chi-additivity")]
    ChiAdditivity,
    #[serde(rename = "eof-additivity")]
    EofAdditivity,
    #[serde(rename = "strong-superadd")]
    StrongSuperadd,
    #[serde(rename = "msw-check")]
    MswCheck,
    #[serde(rename = "dual-certificate")]
    DualCertificate,
    #[serde(rename = "gadget-verify")]
    GadgetVerify,
    /// CPT validation only.
    #[serde(rename = "validate")]
    Validate,
}

/// Gadget construction knobs for gadget-verify.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GadgetParams {
    pub q: f64,
    pub k_min: usize,
}

impl Default for GadgetParams {
    fn default() -> Self {
        GadgetParams { q: 0.5, k_min: 1 }
    }
}

/// A single experiment: sources, optimizer knobs, outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub channels: Vec<ChannelSource>,
    #[serde(default)]
    pub states: Vec<StateSource>,
    #[serde(default)]
    pub optimizer: OptimizerOptions,
    #[serde(default)]
    pub dual: Option<DualOptions>,
    #[serde(default)]
    pub gadget: Option<GadgetParams>,
    /// Polar resolution of the qubit grid scan in minent experiments.
    #[serde(default)]
    pub grid_resolution: Option<usize>,
    /// Gap magnitude that triggers the budget-escalation protocol.
    #[serde(default = "default_violation_tol")]
    pub violation_tol: f64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_violation_tol() -> f64 {
    1e-6
}

/// One config or a batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigFile {
    Batch { experiments: Vec<ExperimentConfig> },
    Single(Box<ExperimentConfig>),
}

impl ConfigFile {
    pub fn into_experiments(self) -> Vec<ExperimentConfig> {
        match self {
            ConfigFile::Batch { experiments } => experiments,
            ConfigFile::Single(config) => vec![*config],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_sources_build() {
        let n = ChannelSource::Named("depolarizing:p=0.5".into())
            .build()
            .unwrap();
        assert_eq!(n.d_in, 2);
        let rho = StateSource::Named("werner:p=0.8".into()).build().unwrap();
        assert_eq!(rho.factors, vec![2, 2]);
        let mm = StateSource::Named("maxmixed:d=3".into()).build().unwrap();
        assert_eq!(mm.dim, 3);
        let diag = StateSource::Named("diag:0.75,0.25".into()).build().unwrap();
        assert!((diag.matrix.get(0, 0).re - 0.75).abs() < 1e-15);
        assert!(StateSource::Named("ghz".into()).build().is_err());
    }

    #[test]
    fn cli_shorthand_parses() {
        let src = ChannelSource::parse_cli("random:d_in=3,d_out=2,d_env=4,seed=9").unwrap();
        let n = src.build().unwrap();
        assert_eq!((n.d_in, n.d_out, n.kraus.len()), (3, 2, 4));
        let s = StateSource::parse_cli("random:dims=2x2,rank=3,seed=4").unwrap();
        let rho = s.build().unwrap();
        assert_eq!(rho.factors, vec![2, 2]);
    }

    #[test]
    fn config_roundtrip() {
        let config = ExperimentConfig {
            experiment: ExperimentKind::ChiAdditivity,
            channels: vec![
                ChannelSource::Named("depolarizing:p=0.5".into()),
                ChannelSource::Random {
                    d_in: 2,
                    d_out: 2,
                    d_env: 2,
                    seed: 3,
                },
            ],
            states: vec![],
            optimizer: OptimizerOptions::default(),
            dual: None,
            gadget: None,
            grid_resolution: None,
            violation_tol: 1e-6,
            output: None,
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.experiment, ExperimentKind::ChiAdditivity);
        assert_eq!(back.channels.len(), 2);
    }
}
