//! Command-line surface.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use speclab::dissociated::ImprovedVariant;
use speclab::setspec::parse_rational;
use speclab::{Error, Result, SetSpec};

use crate::alpha::AlphaExpr;
use crate::run::{budget_from, parse_list, parse_moduli, Command, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "speclab", version, about = "Check Fourier-spectrum inequalities on subsets of Z_N")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Large spectrum R_alpha, its size bound and dyadic levels.
    Spectrum(SweepArgs),
    /// Additive energy T_k, checked against enumeration.
    Energy(SweepArgs),
    /// Solution counts S_kd of the sign system.
    Systems(SweepArgs),
    /// Gowers norms of the indicator and their monotonicity.
    Gowers(SweepArgs),
    /// Dissociated decomposition of R_alpha and the Rudin identity.
    Chang(SweepArgs),
    /// Decomposition through a Lambda(k,s) family.
    Improved(SweepArgs),
    /// Bohr sets inside 2A - 2A.
    Bohr(SweepArgs),
    /// Energy lower bound for R_alpha and the level lemma.
    VerifyMain(SweepArgs),
    /// Solution-count lower bound for the sign system.
    VerifyMatrix(SweepArgs),
    /// Every check above plus the Fourier identities.
    VerifyAll(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Star,
    Tilde,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Explicit set, e.g. `N=10,list:0,1,5` (repeatable).
    #[arg(long = "set")]
    pub sets: Vec<String>,
    /// Moduli to sweep: `5..11` (inclusive), `5..=11` or `25,35`.
    #[arg(long = "N")]
    pub moduli: Option<String>,
    /// Every nonempty subset of each modulus (N <= 20).
    #[arg(long)]
    pub exhaustive: bool,
    /// Random sets per modulus.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Density of random sets; uniform size when omitted.
    #[arg(long)]
    pub density: Option<String>,
    /// Single threshold; overrides --alpha-grid.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Comma-separated thresholds in terms of `delta`, or `prop`.
    #[arg(long, default_value = "delta,delta/2,delta/4")]
    pub alpha_grid: String,
    #[arg(long = "k", default_value = "2,3")]
    pub ks: String,
    #[arg(long = "d", default_value = "1")]
    pub ds: String,
    /// Even k for the level lemma.
    #[arg(long = "level-k", default_value = "2,4")]
    pub level_ks: String,
    #[arg(long, value_enum, default_value = "star")]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Largest tuple count enumerated by brute-force oracles.
    #[arg(long, default_value_t = 1e7)]
    pub budget_tuples: f64,
    /// Per-instance wall-clock budget.
    #[arg(long, default_value_t = 60.0)]
    pub timeout_secs: f64,
}

impl Sub {
    pub fn parts(&self) -> (Command, &SweepArgs) {
        match self {
            Sub::Spectrum(a) => (Command::Spectrum, a),
            Sub::Energy(a) => (Command::Energy, a),
            Sub::Systems(a) => (Command::Systems, a),
            Sub::Gowers(a) => (Command::Gowers, a),
            Sub::Chang(a) => (Command::Chang, a),
            Sub::Improved(a) => (Command::Improved, a),
            Sub::Bohr(a) => (Command::Bohr, a),
            Sub::VerifyMain(a) => (Command::VerifyMain, a),
            Sub::VerifyMatrix(a) => (Command::VerifyMatrix, a),
            Sub::VerifyAll(a) => (Command::VerifyAll, a),
        }
    }
}

impl SweepArgs {
    pub fn config(&self, command: Command) -> Result<ExperimentConfig> {
        let alphas = match &self.alpha {
            Some(a) => vec![a.parse::<AlphaExpr>()?],
            None => self.alpha_grid.split(',').map(str::parse).collect::<Result<Vec<_>>>()?,
        };
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(Error::Input(format!("timeout {} must be positive", self.timeout_secs)));
        }
        Ok(ExperimentConfig {
            command,
            sets: self.sets.iter().map(|s| s.parse::<SetSpec>()).collect::<Result<_>>()?,
            moduli: self.moduli.as_deref().map(parse_moduli).transpose()?.unwrap_or_default(),
            exhaustive: self.exhaustive,
            samples: self.samples,
            density: self.density.as_deref().map(parse_rational).transpose()?,
            alphas,
            ks: parse_list("k", &self.ks)?,
            ds: parse_list("d", &self.ds)?,
            level_ks: parse_list("level-k", &self.level_ks)?,
            variant: match self.variant {
                VariantArg::Star => ImprovedVariant::Star,
                VariantArg::Tilde => ImprovedVariant::Tilde,
            },
            seed: self.seed,
            budget_tuples: budget_from(self.budget_tuples)?,
            timeout: Duration::from_secs_f64(self.timeout_secs),
        })
    }
}
