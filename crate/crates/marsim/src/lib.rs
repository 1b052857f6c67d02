//! Simulation harness for `marsim-core`: scenario files, seeded runs of the
//! allocators, result CSVs and allocation JSON.

pub mod allocation_file;
pub mod oracle_compare;
pub mod results;
pub mod runner;
pub mod scenario;

pub use allocation_file::AllocationFile;
pub use results::{read_csv, write_csv, ResultRow, CSV_HEADER};
pub use runner::{run_all, run_scenario, run_seed, Algorithm, RunError, RunOptions, SeedCase};
pub use scenario::{load_scenario, parse_scenario, LambdaSpec, ScenarioConfig, ScenarioError};
