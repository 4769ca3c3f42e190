//! `sgn-sim` command line.
//!
//! Exit status: 0 on success, 1 on configuration or I/O errors, 2 when at
//! least one cell has more failed replications than its threshold allows.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::engine::{run_curves, run_experiment, run_normality, run_table, ExperimentReport};
use super::output::{render_text, write_manifest, write_report, OutputFormat};
use super::{ExperimentConfig, HarnessError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sgn-sim",
    version,
    about = "Monte Carlo experiments for streaming Gauss-Newton estimators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed; every replication stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of replications.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Observations per replication.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads (0 uses every core). Does not change any output.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ASGN over the (c_alpha, alpha) grid.
    Table1,
    /// ASGD over the (c_alpha, alpha) grid.
    Table2,
    /// ASGN and SGN over the (c_beta, beta) grid.
    Table3,
    /// MSE against n for SGN, ASGN and ASGD.
    Curves {
        /// Initial radius; repeat to run several. Defaults to 1, 5 and 12.
        #[arg(long = "r0")]
        r0: Vec<f64>,
        /// Number of log-spaced checkpoints in [100, n].
        #[arg(long, default_value_t = 30)]
        points: usize,
    },
    /// C_n and C_bar_n pivot samples with KS distances to chi-squared(2).
    Normality,
    /// Any experiment described by a JSON config file.
    Custom {
        #[arg(long)]
        config: PathBuf,
    },
}

enum Runner {
    Table,
    Curves,
    Normality,
    Custom,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::Table3 => "table3",
            Command::Curves { .. } => "curves",
            Command::Normality => "normality",
            Command::Custom { .. } => "custom",
        }
    }

    fn configs(&self) -> Result<(Runner, Vec<ExperimentConfig>), HarnessError> {
        Ok(match self {
            Command::Table1 => (Runner::Table, vec![ExperimentConfig::table1()]),
            Command::Table2 => (Runner::Table, vec![ExperimentConfig::table2()]),
            Command::Table3 => (Runner::Table, vec![ExperimentConfig::table3()]),
            Command::Curves { r0, .. } => {
                let radii = if r0.is_empty() {
                    vec![1.0, 5.0, 12.0]
                } else {
                    r0.clone()
                };
                (
                    Runner::Curves,
                    radii.into_iter().map(ExperimentConfig::curves).collect(),
                )
            }
            Command::Normality => (Runner::Normality, vec![ExperimentConfig::normality()]),
            Command::Custom { config } => (
                Runner::Custom,
                vec![ExperimentConfig::from_json_file(config)?],
            ),
        })
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, common: &CommonArgs, command: &Command) {
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(reps) = common.reps {
        cfg.replications = reps;
    }
    if let Some(n) = common.n {
        cfg.n = n;
    }
    if let Command::Curves { points, .. } = command {
        cfg.checkpoints = Some(crate::stats::log_grid(100, cfg.n, *points));
    }
}

fn execute(cli: &Cli) -> Result<bool, HarnessError> {
    let (runner, mut configs) = cli.command.configs()?;
    for cfg in &mut configs {
        apply_overrides(cfg, &cli.common, &cli.command);
        cfg.validate()?;
    }
    let out = &cli.common.out;
    let mut files = Vec::new();
    let mut flagged = false;
    for cfg in &configs {
        let report: ExperimentReport = match runner {
            Runner::Table => run_table(cfg, cli.common.jobs)?,
            Runner::Curves => run_curves(cfg, cli.common.jobs)?,
            Runner::Normality => run_normality(cfg, cli.common.jobs)?,
            Runner::Custom => run_experiment(cfg, cli.common.jobs)?,
        };
        print!("{}", render_text(&report));
        eprintln!("{}: finished in {:.2} s", cfg.name, report.elapsed_secs);
        flagged |= !report.flagged().is_empty();
        files.extend(write_report(&report, out, cli.common.format)?);
    }
    let command = serde_json::json!({
        "subcommand": cli.command.name(),
        "format": cli.common.format,
        "configs": configs,
    });
    let seed = configs.first().map(|c| c.master_seed).unwrap_or_default();
    let manifest = write_manifest(out, command, seed, &files)?;
    eprintln!("wrote {} files and {}", files.len(), manifest.display());
    Ok(flagged)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli) {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("error: some cells exceeded the failure threshold");
            EXIT_FLAGGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
