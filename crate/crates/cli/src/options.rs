use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Deserialize;
use thiserror::Error;

/// A flag that is neither on the command line nor in the config file, or an
/// argument that clap cannot check on its own.
#[derive(Debug, Error)]
#[error("{message}")]
pub struct UsageError {
    pub command: &'static str,
    pub message: String,
}

pub fn usage(command: &'static str, message: impl Into<String>) -> anyhow::Error {
    UsageError {
        command,
        message: message.into(),
    }
    .into()
}

/// Every option is optional on the command line so that `--config` can supply
/// it; `resolve` keeps flags and falls back to the file.
macro_rules! options {
    ($(#[$meta:meta])* $name:ident, $cmd:literal { $( $(#[$fmeta:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Default, Clone, clap::Args, Deserialize)]
        #[command(allow_negative_numbers = true)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            /// JSON file with default values; flags take precedence.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            $( $(#[$fmeta])* #[arg(long)] pub $field: Option<$ty>, )*
        }

        impl $name {
            #[allow(dead_code)]
            pub const COMMAND: &'static str = $cmd;

            /// Fills unset flags from the `--config` file.
            pub fn resolve(self) -> Result<Self> {
                let Some(path) = self.config.clone() else {
                    return Ok(self);
                };
                let file: Self = read_config(&path)?;
                Ok(Self {
                    config: self.config,
                    $( $field: self.$field.or(file.$field), )*
                })
            }

            #[allow(dead_code)]
            fn need<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
                value
                    .clone()
                    .ok_or_else(|| usage($cmd, format!("missing required option --{flag}")))
            }
        }
    };
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Orthogonal,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// n-reduction for the orthogonal scheme, angular for the parallel one.
    #[default]
    Auto,
    Angular,
    Parity,
    NReduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    #[default]
    Splitting,
    Height,
}

options!(
    /// Dressed energies, weights and vectors of the driven V system.
    EigenOptions, "eigen" {
        /// C₁ Rabi frequency (MHz).
        omega1: f64,
        /// C₂ Rabi frequency (MHz).
        omega2: f64,
        /// C₁ detuning (MHz) [default: 0].
        delta1: f64,
        /// C₂ detuning (MHz) [default: 0].
        delta2: f64,
        /// Output file [default: standard output].
        output: PathBuf,
        /// Output format [default: csv].
        format: Format,
    }
);

options!(
    /// Model probe absorption spectrum.
    SpectrumOptions, "spectrum" {
        /// C₁ Rabi frequency (MHz).
        omega1: f64,
        /// C₂ Rabi frequency (MHz).
        omega2: f64,
        /// C₁ detuning (MHz) [default: 0].
        delta1: f64,
        /// C₂ detuning (MHz) [default: 0].
        delta2: f64,
        /// First probe detuning (MHz) [default: -100].
        start: f64,
        /// Last probe detuning (MHz) [default: 100].
        stop: f64,
        /// Probe detuning step (MHz) [default: 0.1].
        step: f64,
        /// Natural line width (MHz) [default: 6].
        fwhm: f64,
        /// Width multiplier, at least 1 [default: 1].
        broadening_factor: f64,
        /// Height of the uncoupled line [default: 0].
        uncoupled_height: f64,
        /// Position of the uncoupled line (MHz) [default: 0].
        uncoupled_center: f64,
        /// Shift of every line (MHz) [default: 0].
        global_shift: f64,
        /// Scale of the dressed lines [default: 1].
        coupled_scale: f64,
        /// Output file [default: standard output].
        output: PathBuf,
        /// Output format [default: csv].
        format: Format,
    }
);

options!(
    /// Dressed energies as the C₂ detuning is swept.
    TrajectoryOptions, "trajectory" {
        /// C₁ Rabi frequency (MHz).
        omega1: f64,
        /// C₂ Rabi frequency (MHz).
        omega2: f64,
        /// C₁ detuning (MHz) [default: 0].
        delta1: f64,
        /// First C₂ detuning (MHz) [default: -80].
        start: f64,
        /// Last C₂ detuning (MHz) [default: 80].
        stop: f64,
        /// C₂ detuning step (MHz) [default: 0.5].
        step: f64,
        /// Output file [default: standard output].
        output: PathBuf,
        /// Output format [default: csv].
        format: Format,
    }
);

options!(
    /// Resonant energies (in units of Ω₁) and weights against Ω₂/Ω₁.
    WeightsOptions, "weights" {
        /// First ratio [default: 0].
        start: f64,
        /// Last ratio [default: 3].
        stop: f64,
        /// Ratio step [default: 0.01].
        step: f64,
        /// Output file [default: standard output].
        output: PathBuf,
        /// Output format [default: csv].
        format: Format,
    }
);

options!(
    /// Fit splitting or central-height data against C₂ power.
    FitOptions, "fit" {
        /// CSV with header p2_mw,value[,sigma].
        input: PathBuf,
        /// Model to fit [default: splitting].
        model: FitModel,
        /// Fixed Ω₁ (MHz) for the height model.
        omega1: f64,
        /// Fixed k (MHz/√mW) for the height model.
        k: f64,
        /// Number of confidence-band samples [default: 100].
        band_grid: usize,
        /// First band power (mW) [default: 0].
        band_start: f64,
        /// Last band power (mW) [default: largest input power].
        band_stop: f64,
        /// C₁ detuning assumed for the splitting bias bound (MHz) [default: 7].
        detuning: f64,
        /// Output file [default: standard output].
        output: PathBuf,
    }
);

options!(
    /// Zeeman-sublevel coupling graph and its decomposition.
    ZeemanOptions, "zeeman" {
        /// Polarization scheme [default: orthogonal].
        scheme: Scheme,
        /// Basis for the decomposition [default: auto].
        basis: Basis,
        /// Base C₁ Rabi frequency (MHz); with --omega2, adds per-subsystem drives.
        omega1: f64,
        /// Base C₂ Rabi frequency (MHz).
        omega2: f64,
        /// C₁ detuning for the subsystems (MHz) [default: 0].
        delta1: f64,
        /// C₂ detuning for the subsystems (MHz) [default: 0].
        delta2: f64,
        /// Output file [default: standard output].
        output: PathBuf,
    }
);

options!(
    /// Steady-state optical Bloch probe spectrum of the N system.
    ObeOptions, "obe" {
        /// C₁ Rabi frequency (MHz).
        omega1: f64,
        /// C₂ Rabi frequency (MHz).
        omega2: f64,
        /// C₁ detuning (MHz) [default: 0].
        delta1: f64,
        /// C₂ detuning (MHz) [default: 0].
        delta2: f64,
        /// Probe Rabi frequency (MHz) [default: gamma_d/20].
        omega_p: f64,
        /// Decay rate of |d⟩ (MHz) [default: 6].
        gamma_d: f64,
        /// Decay rate of |c⟩ (MHz) [default: 5.7].
        gamma_c: f64,
        /// Branching of |d⟩ into (a, b) [default: 0.5,0.5].
        #[arg(value_delimiter = ',', num_args = 2)]
        branching_d: Vec<f64>,
        /// Branching of |c⟩ into (a, b) [default: 1,0].
        #[arg(value_delimiter = ',', num_args = 2)]
        branching_c: Vec<f64>,
        /// Dephasing rate of the a-b coherence (MHz) [default: 0].
        ground_dephasing: f64,
        /// First probe detuning (MHz) [default: -80].
        start: f64,
        /// Last probe detuning (MHz) [default: 80].
        stop: f64,
        /// Probe detuning step (MHz) [default: 0.25].
        step: f64,
        /// Output file [default: standard output].
        output: PathBuf,
        /// Output format [default: csv].
        format: Format,
    }
);

pub fn pair(
    command: &'static str,
    flag: &str,
    v: Option<Vec<f64>>,
    default: [f64; 2],
) -> Result<[f64; 2]> {
    match v {
        None => Ok(default),
        Some(v) => <[f64; 2]>::try_from(v.as_slice()).map_err(|_| {
            usage(
                command,
                format!("--{flag} takes exactly two values, got {}", v.len()),
            )
        }),
    }
}

impl EigenOptions {
    pub fn drive(&self) -> Result<[f64; 4]> {
        Ok([
            Self::need(&self.omega1, "omega1")?,
            Self::need(&self.omega2, "omega2")?,
            self.delta1.unwrap_or(0.0),
            self.delta2.unwrap_or(0.0),
        ])
    }
}

impl SpectrumOptions {
    pub fn drive(&self) -> Result<[f64; 4]> {
        Ok([
            Self::need(&self.omega1, "omega1")?,
            Self::need(&self.omega2, "omega2")?,
            self.delta1.unwrap_or(0.0),
            self.delta2.unwrap_or(0.0),
        ])
    }
}

impl TrajectoryOptions {
    pub fn rabi(&self) -> Result<[f64; 2]> {
        Ok([
            Self::need(&self.omega1, "omega1")?,
            Self::need(&self.omega2, "omega2")?,
        ])
    }
}

impl ObeOptions {
    pub fn drive(&self) -> Result<[f64; 4]> {
        Ok([
            Self::need(&self.omega1, "omega1")?,
            Self::need(&self.omega2, "omega2")?,
            self.delta1.unwrap_or(0.0),
            self.delta2.unwrap_or(0.0),
        ])
    }
}

impl FitOptions {
    pub fn input_path(&self) -> Result<PathBuf> {
        Self::need(&self.input, "input")
    }

    pub fn height_drive(&self) -> Result<[f64; 2]> {
        Ok([
            Self::need(&self.omega1, "omega1")?,
            Self::need(&self.k, "k")?,
        ])
    }
}
