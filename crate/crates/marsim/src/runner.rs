//! Runs the allocators over every seed of a scenario.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use marsim_core::oracle::OracleError;
use marsim_core::{
    build_slicing_list, generate_grid, mars_allocate, solve_exact, static_baseline, upper_bound, validate,
    Allocation, ChannelGrid, McsCriterion, OracleLimits, Rate, SearchMode, SlicingInstance, SlicingList,
    StructuralError, Violation,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::results::ResultRow;
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mars,
    UpperBound,
    Exact,
    MaxMcs,
    AvgMcs,
    LowMcs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Mars,
        Algorithm::UpperBound,
        Algorithm::Exact,
        Algorithm::MaxMcs,
        Algorithm::AvgMcs,
        Algorithm::LowMcs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mars => "mars",
            Algorithm::UpperBound => "upper_bound",
            Algorithm::Exact => "exact",
            Algorithm::MaxMcs => "max_mcs",
            Algorithm::AvgMcs => "avg_mcs",
            Algorithm::LowMcs => "low_mcs",
        }
    }

    fn criterion(self) -> Option<McsCriterion> {
        match self {
            Algorithm::MaxMcs => Some(McsCriterion::MaximumMcs),
            Algorithm::AvgMcs => Some(McsCriterion::AverageMcs),
            Algorithm::LowMcs => Some(McsCriterion::LowestMcs),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    /// Accepts the full names plus the short forms `ub`, `max`, `avg`, `low`.
    fn from_str(s: &str) -> Result<Algorithm, String> {
        Ok(match s {
            "mars" => Algorithm::Mars,
            "upper_bound" | "ub" => Algorithm::UpperBound,
            "exact" => Algorithm::Exact,
            "max_mcs" | "max" => Algorithm::MaxMcs,
            "avg_mcs" | "avg" => Algorithm::AvgMcs,
            "low_mcs" | "low" => Algorithm::LowMcs,
            _ => return Err(format!("unknown algorithm {s:?}")),
        })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{scenario_id} seed {seed}: {algorithm} produced an infeasible allocation:\n  {}", .violations.join("\n  "))]
    Infeasible {
        scenario_id: String,
        seed: u64,
        algorithm: Algorithm,
        violations: Vec<String>,
    },
    #[error("{scenario_id} seed {seed}: {source}")]
    Structural {
        scenario_id: String,
        seed: u64,
        source: StructuralError,
    },
    #[error("{scenario_id} seed {seed}: {source}")]
    Oracle {
        scenario_id: String,
        seed: u64,
        source: OracleError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Measure wall-clock time per algorithm. Off by default so output files
    /// are byte-for-byte reproducible; `runtime_ms` is then written as 0.
    pub record_runtime: bool,
}

/// Everything derived from one `(scenario, seed)` pair.
#[derive(Debug, Clone)]
pub struct SeedCase {
    pub instance: SlicingInstance,
    pub grid: ChannelGrid,
    pub list: SlicingList,
}

impl SeedCase {
    pub fn new(config: &ScenarioConfig, seed: u64) -> SeedCase {
        let instance = config.instance(seed);
        let grid = generate_grid(&config.channel_model(seed), &instance);
        let list = build_slicing_list(&instance, config.list_mode);
        SeedCase { instance, grid, list }
    }

    /// MaRS allocation under the scenario's options.
    pub fn mars(&self, config: &ScenarioConfig) -> Result<Allocation, StructuralError> {
        mars_allocate(&self.instance, &self.grid, &self.list, &config.mars)
    }
}

struct Outcome {
    served: usize,
    rbs: u64,
    bits: Rate,
}

fn checked(
    case: &SeedCase,
    alloc: &Allocation,
    config: &ScenarioConfig,
    seed: u64,
    algorithm: Algorithm,
) -> Result<Outcome, RunError> {
    let structural = |source| RunError::Structural {
        scenario_id: config.scenario_id.clone(),
        seed,
        source,
    };
    let violations: Vec<Violation> = validate(&case.instance, &case.grid, alloc).map_err(structural)?;
    if !violations.is_empty() {
        return Err(RunError::Infeasible {
            scenario_id: config.scenario_id.clone(),
            seed,
            algorithm,
            violations: violations.iter().map(ToString::to_string).collect(),
        });
    }
    Ok(Outcome {
        served: alloc.users_served(),
        rbs: alloc.rbs_used() as u64,
        bits: alloc.bits_served(&case.grid, case.instance.mcs_table()).map_err(structural)?,
    })
}

fn run_one(
    config: &ScenarioConfig,
    case: &SeedCase,
    seed: u64,
    algorithm: Algorithm,
) -> Result<Outcome, RunError> {
    let structural = |source| RunError::Structural {
        scenario_id: config.scenario_id.clone(),
        seed,
        source,
    };
    match algorithm {
        Algorithm::Mars => {
            let alloc = case.mars(config).map_err(structural)?;
            checked(case, &alloc, config, seed, algorithm)
        }
        Algorithm::Exact => {
            let limits = OracleLimits::default();
            let sol = solve_exact(&case.instance, &case.grid, &limits, SearchMode::Pruned).map_err(|source| {
                RunError::Oracle {
                    scenario_id: config.scenario_id.clone(),
                    seed,
                    source,
                }
            })?;
            checked(case, &sol.witness, config, seed, algorithm)
        }
        Algorithm::UpperBound => {
            let ub = upper_bound(&case.instance, &case.grid).map_err(structural)?;
            let table = case.instance.mcs_table();
            let mut bits = Rate::ZERO;
            for (&user, &n) in &ub.rbs_per_user {
                let idx = case.grid.user_index(user).expect("bound users come from the grid");
                bits += table.bits(case.grid.user_max(idx)) * n;
            }
            Ok(Outcome {
                served: ub.served,
                rbs: ub.rbs_used(),
                bits,
            })
        }
        Algorithm::MaxMcs | Algorithm::AvgMcs | Algorithm::LowMcs => {
            let criterion = algorithm.criterion().expect("baseline algorithm");
            let rep = static_baseline(&case.instance, &case.grid, &case.list, criterion).map_err(structural)?;
            Ok(Outcome {
                served: rep.served(),
                rbs: rep.rbs_used,
                bits: rep.bits_served,
            })
        }
    }
}

/// Runs every configured algorithm on one seed.
pub fn run_seed(config: &ScenarioConfig, seed: u64, opts: &RunOptions) -> Result<Vec<ResultRow>, RunError> {
    let case = SeedCase::new(config, seed);
    let mut algorithms = config.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    algorithms
        .into_iter()
        .map(|algorithm| {
            let start = Instant::now();
            let out = run_one(config, &case, seed, algorithm)?;
            let runtime_ms = if opts.record_runtime {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            Ok(ResultRow {
                scenario_id: config.scenario_id.clone(),
                seed,
                algorithm,
                k: config.k_factor(),
                t: config.num_ttis,
                m: config.num_mvnos,
                users_total: config.users_total(),
                users_served: out.served,
                rbs_used: out.rbs,
                bits_served: out.bits,
                runtime_ms,
            })
        })
        .collect()
}

/// Runs a scenario over all its seeds in parallel. Rows come back ordered by
/// seed, then algorithm.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<ResultRow>, RunError> {
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let per_seed: Vec<Vec<ResultRow>> = seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed, opts))
        .collect::<Result<_, _>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Runs several configurations, ordering rows by scenario id, seed, algorithm.
pub fn run_all(configs: &[ScenarioConfig], opts: &RunOptions) -> Result<Vec<ResultRow>, RunError> {
    let mut rows = Vec::new();
    for c in configs {
        rows.extend(run_scenario(c, opts)?);
    }
    rows.sort_by(|a, b| {
        (a.scenario_id.as_str(), a.seed, a.algorithm).cmp(&(b.scenario_id.as_str(), b.seed, b.algorithm))
    });
    Ok(rows)
}
