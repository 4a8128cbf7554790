use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boe_core::harness::{
    emit_outputs, parse_grid, run_sweep_with, Condition, Execution, ExperimentConfig, SweepResult, UtilityGrid,
    UtilitySpec,
};
use boe_core::metrics::SessionOutcome;
use boe_core::social::UtilityParams;
use boe_core::{Error, Result};

#[derive(Parser)]
#[command(name = "boe", version, about = "Battle of the Exes with inequity-averse Q-learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all dyads for a single (alpha, beta) pair.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Sweep an (alpha, beta) grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Inclusive alpha range, start:stop:step.
        #[arg(long, value_name = "A:B:STEP")]
        alpha_grid: Option<String>,
        /// Inclusive beta range, start:stop:step.
        #[arg(long, value_name = "A:B:STEP")]
        beta_grid: Option<String>,
        /// Keep only cells with alpha >= beta.
        #[arg(long, conflicts_with = "all_pairs")]
        loss_averse_only: bool,
        /// Keep every cell of the grid.
        #[arg(long)]
        all_pairs: bool,
    },
    /// Re-run an experiment from its manifest.json.
    Replay {
        manifest: PathBuf,
        /// Output directory (default: <manifest dir>/replay).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        serial: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file (or a JSON manifest); flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    condition: Option<Condition>,
    #[arg(long, value_name = "N")]
    episodes: Option<u64>,
    #[arg(long, value_name = "N")]
    dyads: Option<u32>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Episode at which exploration reaches zero.
    #[arg(long, value_name = "N")]
    eps_end: Option<u64>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    y_bins: Option<usize>,
    #[arg(long, value_name = "N")]
    max_ticks: Option<u32>,
    #[arg(long)]
    chain_episodes: bool,
    #[arg(long, value_name = "K")]
    sample_every: Option<u64>,
    #[arg(long, value_name = "N")]
    late_window: Option<u64>,
    /// Write per-dyad episode logs.
    #[arg(long)]
    dyad_logs: bool,
    /// Write final Q-tables.
    #[arg(long)]
    dump_q: bool,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run dyads on the current thread only.
    #[arg(long)]
    serial: bool,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(self.condition => cfg.condition);
        set!(self.episodes => cfg.episodes);
        set!(self.dyads => cfg.dyads);
        set!(self.mu => cfg.learner.mu);
        set!(self.gamma => cfg.learner.gamma);
        set!(self.eps_end => cfg.learner.eps_end_episode);
        set!(self.seed => cfg.master_seed);
        set!(self.y_bins => cfg.y_bins);
        set!(self.max_ticks => cfg.game.max_ticks);
        set!(self.sample_every => cfg.sample_every);
        set!(self.late_window => cfg.late_window);
        set!(self.out => cfg.output_dir);
        cfg.chain_episodes |= self.chain_episodes;
        cfg.dyad_logs |= self.dyad_logs;
        cfg.dump_q |= self.dump_q;
        if self.episodes.is_some() && self.late_window.is_none() {
            cfg.late_window = cfg.late_window.min(cfg.episodes);
        }
        if self.episodes.is_some() {
            cfg.classify.window = cfg.classify.window.min(cfg.episodes as usize);
        }
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::Parallel
        }
    }
}

fn print_summary(result: &SweepResult) {
    println!("alpha\tbeta\tfinal_fairness\tlate_fairness\tdominant\tturn_taking\tunconverged");
    for cell in &result.cells {
        let row = cell.heatmap_row();
        let count = |f: fn(&SessionOutcome) -> bool| cell.dyads.iter().filter(|d| f(&d.session)).count();
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{}\t{}\t{}",
            row.alpha,
            row.beta,
            row.final_fairness_mean,
            row.late_window_fairness_mean,
            count(|s| matches!(s, SessionOutcome::DominantA | SessionOutcome::DominantB)),
            count(|s| *s == SessionOutcome::TurnTaking),
            count(|s| *s == SessionOutcome::Unconverged),
        );
    }
}

fn execute(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    let result = run_sweep_with(cfg, exec)?;
    emit_outputs(&result, &cfg.output_dir)?;
    print_summary(&result);
    eprintln!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, alpha, beta } => {
            let mut cfg = common.resolve()?;
            let base = match (&cfg.utility, &common.config) {
                (UtilitySpec::Single(p), Some(_)) => *p,
                _ => UtilityParams::default(),
            };
            cfg.utility = UtilitySpec::Single(UtilityParams {
                alpha: alpha.unwrap_or(base.alpha),
                beta: beta.unwrap_or(base.beta),
            });
            execute(&cfg, common.execution())
        }
        Command::Sweep {
            common,
            alpha_grid,
            beta_grid,
            loss_averse_only,
            all_pairs,
        } => {
            let mut cfg = common.resolve()?;
            let mut grid = match cfg.utility {
                UtilitySpec::Grid(g) => g,
                UtilitySpec::Single(p) => UtilityGrid {
                    alpha_values: vec![p.alpha],
                    beta_values: vec![p.beta],
                    loss_averse_only: false,
                },
            };
            if let Some(s) = alpha_grid {
                grid.alpha_values = parse_grid(&s)?;
            }
            if let Some(s) = beta_grid {
                grid.beta_values = parse_grid(&s)?;
            }
            if loss_averse_only {
                grid.loss_averse_only = true;
            }
            if all_pairs {
                grid.loss_averse_only = false;
            }
            cfg.utility = UtilitySpec::Grid(grid);
            execute(&cfg, common.execution())
        }
        Command::Replay { manifest, out, serial } => {
            let mut cfg = ExperimentConfig::load(&manifest)?;
            cfg.output_dir = match out {
                Some(dir) => dir,
                None => manifest
                    .parent()
                    .map(|p| p.join("replay"))
                    .ok_or_else(|| Error::InvalidConfig("manifest path has no parent".into()))?,
            };
            let exec = if serial { Execution::Serial } else { Execution::Parallel };
            execute(&cfg, exec)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
