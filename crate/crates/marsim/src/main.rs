use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use marsim::oracle_compare::compare;
use marsim::{load_scenario, run_all, write_csv, Algorithm, AllocationFile, RunOptions, ScenarioConfig, SeedCase};
use marsim_core::{validate, ListMode, McsLevel, OracleLimits, SearchMode};

#[derive(Parser)]
#[command(name = "marsim", version, about = "MCS-aware RAN slicing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListModeArg {
    LambdaGlobal,
    LiteralTwoStage,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Max,
    Avg,
    Low,
}

#[derive(clap::Args)]
struct Overrides {
    /// Run seeds 0..N instead of the scenario's seeds.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Comma-separated list of seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Comma-separated algorithms: mars, ub, exact, max, avg, low.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,
    /// Also run a static baseline.
    #[arg(long)]
    baseline: Option<BaselineArg>,
    #[arg(long)]
    list_mode: Option<ListModeArg>,
    #[arg(long)]
    trim_last_bundle: bool,
    #[arg(long)]
    mcs_floor: Option<u8>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(n) = self.seeds {
            cfg.seeds = (0..n).collect();
        }
        if let Some(list) = &self.seed_list {
            cfg.seeds = list.clone();
        }
        if let Some(algos) = &self.algos {
            cfg.algorithms = algos.clone();
        }
        if let Some(b) = self.baseline {
            cfg.algorithms.push(match b {
                BaselineArg::Max => Algorithm::MaxMcs,
                BaselineArg::Avg => Algorithm::AvgMcs,
                BaselineArg::Low => Algorithm::LowMcs,
            });
        }
        if let Some(mode) = self.list_mode {
            cfg.list_mode = match mode {
                ListModeArg::LambdaGlobal => ListMode::LambdaGlobal,
                ListModeArg::LiteralTwoStage => ListMode::LiteralTwoStage,
            };
        }
        if self.trim_last_bundle {
            cfg.mars.trim_last_bundle = true;
        }
        if let Some(f) = self.mcs_floor {
            cfg.mars.mcs_floor = McsLevel::new(f).with_context(|| format!("--mcs-floor {f} is not in 0..=28"))?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one CSV row per (scenario, seed, algorithm).
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write measured wall-clock times instead of 0 in `runtime_ms`.
        #[arg(long)]
        record_runtime: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the MaRS allocation of one seed as JSON.
    Allocate {
        #[arg(long)]
        scenario: PathBuf,
        /// Expanded scenario id; needed when the file expands to several.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check an allocation JSON against the slicing constraints.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
    },
    /// Compare MaRS, the exact optimum and the upper bound on random tiny instances.
    OracleCompare {
        #[arg(long, default_value_t = 8)]
        max_cells: usize,
        #[arg(long, default_value_t = 4)]
        max_users: usize,
        #[arg(long, default_value_t = 6)]
        max_levels: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plain exhaustive enumeration instead of the pruned search.
        #[arg(long)]
        no_prune: bool,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn pick(configs: Vec<ScenarioConfig>, id: Option<&str>) -> Result<ScenarioConfig> {
    match id {
        Some(id) => configs
            .into_iter()
            .find(|c| c.scenario_id == id)
            .with_context(|| format!("no expanded scenario named {id}")),
        None if configs.len() == 1 => Ok(configs.into_iter().next().expect("one config")),
        None => {
            let ids: Vec<_> = configs.iter().map(|c| c.scenario_id.as_str()).collect();
            bail!("scenario expands to several configurations, pick one with --id: {}", ids.join(", "))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            record_runtime,
            overrides,
        } => {
            let mut configs = load_scenario(&scenario)?;
            for c in &mut configs {
                overrides.apply(c)?;
            }
            let rows = run_all(&configs, &RunOptions { record_runtime })?;
            write_csv(&rows, output(out.as_deref())?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Allocate {
            scenario,
            id,
            seed,
            out,
            overrides,
        } => {
            let mut cfg = pick(load_scenario(&scenario)?, id.as_deref())?;
            overrides.apply(&mut cfg)?;
            let alloc = SeedCase::new(&cfg, seed).mars(&cfg)?;
            let file = AllocationFile::from_allocation(&cfg.scenario_id, seed, &alloc);
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &file)?;
            writeln!(w)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { scenario, allocation } => {
            let text = std::fs::read_to_string(&allocation)
                .with_context(|| format!("cannot read {}", allocation.display()))?;
            let file: AllocationFile = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse {}", allocation.display()))?;
            let cfg = pick(load_scenario(&scenario)?, Some(&file.scenario_id))?;
            let case = SeedCase::new(&cfg, file.seed);
            let alloc = file.to_allocation().map_err(anyhow::Error::msg)?;
            let violations = validate(&case.instance, &case.grid, &alloc)?;
            if violations.is_empty() {
                println!("ok: {} users served, {} RBs", alloc.users_served(), alloc.rbs_used());
                return Ok(ExitCode::SUCCESS);
            }
            for v in &violations {
                println!("constraint ({}): {v}", v.constraint());
            }
            Ok(ExitCode::from(2))
        }
        Command::OracleCompare {
            max_cells,
            max_users,
            max_levels,
            trials,
            seed,
            no_prune,
        } => {
            let limits = OracleLimits {
                max_cells,
                max_users,
                max_mcs_levels: max_levels,
            };
            let mode = if no_prune {
                SearchMode::BruteForce
            } else {
                SearchMode::Pruned
            };
            let report = compare(trials, seed, &limits, mode);
            let failures: Vec<_> = report.failures().collect();
            for t in &failures {
                println!(
                    "trial {}: mars {} exact {} ub {} {}",
                    t.trial,
                    t.mars,
                    t.exact,
                    t.upper_bound,
                    t.violations.join("; ")
                );
            }
            println!(
                "{} trials ({} skipped as too large), mars optimal in {}, bound tight in {}, {} failures",
                report.trials.len(),
                report.skipped.len(),
                report.mars_optimal(),
                report.bound_tight(),
                failures.len()
            );
            Ok(if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
