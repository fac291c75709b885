//! Pipelines behind the `mcens` binary: train encoders on synthetic data,
//! export their features, score and evaluate OOD detection, measure
//! representation similarity and loss barriers, select ensembles, and run
//! the rectified-activation grid.

pub mod commands;
pub mod config;
pub mod error;
pub mod layout;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "mcens", version, about = "Feature-level ensembles and representation diversity at desk scale")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config's `out` directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model per criterion and seed and export features.
    Train,
    /// Write per-sample OOD scores.
    Score,
    /// Write AUROC and FPR at the target TPR per model, ensemble and split.
    Eval,
    /// Pairwise Self-Coupling Index between all models.
    Sci,
    /// Loss barriers before and after weight matching.
    Barrier {
        /// Restrict to the given `A,B` pairs (repeatable).
        #[arg(long = "pair", value_name = "A,B")]
        pairs: Vec<String>,
    },
    /// Pick the ensemble minimising mean loss plus λ·mean pairwise SCI.
    Select,
    /// Closed-form vs Monte-Carlo activation movement grid.
    Esn,
    /// Merge every produced artifact into report.json.
    Report,
}

impl Cli {
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

/// Runs one subcommand and returns a one-line summary.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = cli.resolve_config()?;
    let out = cfg.out.display();
    Ok(match &cli.command {
        Command::Train => {
            let reports = commands::train::run(&cfg)?;
            format!("trained {} models into {out}", reports.len())
        }
        Command::Score => format!("wrote {} score files under {out}/scores", commands::score::run_score(&cfg)?),
        Command::Eval => {
            let r = commands::score::run_eval(&cfg)?;
            let n = r.models.len() + usize::from(r.ensemble.is_some());
            format!("evaluated {n} entries into {out}/eval.json")
        }
        Command::Sci => {
            let r = commands::sci::run(&cfg)?;
            format!("computed {} SCI pairs into {out}/sci.json", r.pairs.len())
        }
        Command::Barrier { pairs } => {
            let r = commands::barrier::run(&cfg, pairs)?;
            format!("computed {} barriers into {out}/barrier.json", r.pairs.len())
        }
        Command::Select => {
            let r = commands::select::run(&cfg)?;
            format!("selected {:?} (objective {:.6})", r.selection.spec.member_ids, r.selection.objective)
        }
        Command::Esn => {
            let r = commands::esn::run(&cfg)?;
            format!("wrote {} grid rows into {out}/esn.json (gap negative: {})", r.rows.len(), r.gap_negative)
        }
        Command::Report => {
            commands::report::run(&cfg)?;
            format!("wrote {out}/report.json")
        }
    })
}
