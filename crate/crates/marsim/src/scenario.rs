//! Scenario files.
//!
//! A scenario is a TOML document. Rates (`lambda_min`, `slice_cap`) are
//! integers in units of `rate_unit_bits` bits per slicing window; the default
//! unit is 10^6 bits ("Mb/slot"). `ttis` and `channel.k_factor` may be lists,
//! in which case the file expands into one configuration per combination.
//!
//! ```toml
//! scenario_id = "rician_k"
//! ttis = 5                      # or [20, 50, 100]
//! num_mvnos = 2
//! users_per_mvno = 10
//! lambda_min = 50               # or { low = 10, high = 150 }
//! slice_cap = 500
//! rate_unit_bits = 1000         # optional, default 1000000
//! num_rbs = 100                 # optional, default 100
//! slicing_list_mode = "lambda_global"   # or "literal_two_stage"
//! mcs_table_path = "table.txt"  # optional, relative to this file
//! seeds = [0, 1, 2]             # optional, default 0..=29
//! algorithms = ["mars", "upper_bound"]
//!
//! [channel]
//! model = "rician"              # or "iid_uniform_mcs"
//! k_factor = [0, 4, 8]          # linear K, default 0
//! time_correlation = "block_constant"   # or "per_tti"
//! mean_snr_db = [0.0, 25.0]
//! thresholds_path = "snr.txt"   # optional, 29 `index snr_db` lines
//!
//! [mars]
//! trim_last_bundle = false
//! mcs_floor = 1
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use marsim_core::channel::{ChannelError, ChannelModel, Fading, SnrThresholds, TimeCorrelation};
use marsim_core::mcs::{McsLevel, McsTable, Rate};
use marsim_core::model::SlicingInstance;
use marsim_core::slicing_list::ListMode;
use marsim_core::MarsOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::runner::Algorithm;

/// Environment variable naming an MCS efficiency file used when a scenario
/// does not set `mcs_table_path`.
pub const MCS_TABLE_ENV: &str = "MARSIM_MCS_TABLE";

pub const DEFAULT_RATE_UNIT_BITS: u64 = 1_000_000;
pub const DEFAULT_NUM_RBS: usize = 100;
pub const DEFAULT_SEED_COUNT: u64 = 30;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("{path}: invalid scenario:\n  {}", .problems.join("\n  "))]
    Invalid { path: PathBuf, problems: Vec<String> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(u64),
    Range { low: u64, high: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelName {
    Rician,
    IidUniformMcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CorrelationName {
    BlockConstant,
    PerTti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ListModeName {
    LambdaGlobal,
    LiteralTwoStage,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    model: ModelName,
    #[serde(default)]
    k_factor: Option<OneOrMany<f64>>,
    time_correlation: CorrelationName,
    #[serde(default)]
    mean_snr_db: Option<[f64; 2]>,
    #[serde(default)]
    thresholds_path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarsSection {
    #[serde(default)]
    trim_last_bundle: bool,
    #[serde(default)]
    mcs_floor: Option<u8>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario_id: String,
    ttis: OneOrMany<usize>,
    num_mvnos: usize,
    users_per_mvno: usize,
    lambda_min: LambdaSpec,
    slice_cap: u64,
    #[serde(default)]
    rate_unit_bits: Option<u64>,
    #[serde(default)]
    num_rbs: Option<usize>,
    #[serde(default)]
    slicing_list_mode: Option<ListModeName>,
    #[serde(default)]
    mcs_table_path: Option<PathBuf>,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    algorithms: Option<Vec<Algorithm>>,
    channel: ChannelSection,
    #[serde(default)]
    mars: MarsSection,
}

/// One fully expanded and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub num_ttis: usize,
    pub num_mvnos: usize,
    pub users_per_mvno: usize,
    pub lambda_min: LambdaSpec,
    pub slice_cap: u64,
    pub rate_unit_bits: u64,
    pub num_rbs: usize,
    pub fading: Fading,
    pub time_correlation: TimeCorrelation,
    pub mean_snr_db: (f64, f64),
    pub thresholds: SnrThresholds,
    pub mcs_table: McsTable,
    pub list_mode: ListMode,
    pub mars: MarsOptions,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
}

impl ScenarioConfig {
    pub fn k_factor(&self) -> Option<f64> {
        match self.fading {
            Fading::Rician { k } => Some(k),
            Fading::IidUniformMcs => None,
        }
    }

    pub fn users_total(&self) -> usize {
        self.num_mvnos * self.users_per_mvno
    }

    fn unit(&self, units: u64) -> Rate {
        Rate::from_bits(units * self.rate_unit_bits)
    }

    /// Builds the slicing instance for one seed. A random `lambda_min` range
    /// is drawn per user from a stream derived from the seed.
    pub fn instance(&self, seed: u64) -> SlicingInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c61_6d62_6461_5f6d);
        let schedules = (0..self.num_mvnos)
            .map(|_| {
                (0..self.users_per_mvno)
                    .map(|_| match self.lambda_min {
                        LambdaSpec::Fixed(x) => self.unit(x),
                        LambdaSpec::Range { low, high } => self.unit(rng.random_range(low..=high)),
                    })
                    .collect()
            })
            .collect();
        SlicingInstance::new(
            schedules,
            vec![self.unit(self.slice_cap); self.num_mvnos],
            self.num_rbs,
            self.num_ttis,
            self.mcs_table.clone(),
        )
        .expect("validated scenario yields a valid instance")
    }

    pub fn channel_model(&self, seed: u64) -> ChannelModel {
        ChannelModel::new(
            self.fading,
            self.time_correlation,
            self.thresholds.clone(),
            self.mean_snr_db,
            seed,
        )
        .expect("validated scenario yields a valid channel model")
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: T={} M={} users/MVNO={} rbs={} lambda={:?} cap={} unit={}b",
            self.scenario_id,
            self.num_ttis,
            self.num_mvnos,
            self.users_per_mvno,
            self.num_rbs,
            self.lambda_min,
            self.slice_cap,
            self.rate_unit_bits
        )
    }
}

/// Reads, validates and expands a scenario file.
pub fn load_scenario(path: &Path) -> Result<Vec<ScenarioConfig>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_scenario(&text, path)
}

/// Parses scenario text. `path` locates relative table paths and labels errors.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Vec<ScenarioConfig>, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.to_owned(),
        source: Box::new(e),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut problems = Vec::new();

    if file.scenario_id.trim().is_empty() {
        problems.push("scenario_id must not be empty".to_string());
    }
    let ttis = file.ttis.to_vec();
    if ttis.is_empty() || ttis.contains(&0) {
        problems.push("ttis must be positive".to_string());
    }
    if file.num_mvnos == 0 {
        problems.push("num_mvnos must be positive".to_string());
    }
    if file.users_per_mvno == 0 {
        problems.push("users_per_mvno must be positive".to_string());
    }
    match file.lambda_min {
        LambdaSpec::Fixed(0) => problems.push("lambda_min must be positive".to_string()),
        LambdaSpec::Range { low, high } if low == 0 || low > high => {
            problems.push(format!("lambda_min range needs 0 < low <= high, got {low}..{high}"))
        }
        _ => {}
    }
    if file.slice_cap == 0 {
        problems.push("slice_cap must be positive".to_string());
    }
    let rate_unit_bits = file.rate_unit_bits.unwrap_or(DEFAULT_RATE_UNIT_BITS);
    if rate_unit_bits == 0 {
        problems.push("rate_unit_bits must be positive".to_string());
    }
    let num_rbs = file.num_rbs.unwrap_or(DEFAULT_NUM_RBS);
    if num_rbs == 0 {
        problems.push("num_rbs must be positive".to_string());
    }
    let mcs_floor = file.mars.mcs_floor.unwrap_or(1);
    let mcs_floor = McsLevel::new(mcs_floor).unwrap_or_else(|| {
        problems.push(format!("mars.mcs_floor must be in 0..=28, got {mcs_floor}"));
        McsLevel::MIN
    });
    let seeds = file.seeds.clone().unwrap_or_else(|| (0..DEFAULT_SEED_COUNT).collect());
    if seeds.is_empty() {
        problems.push("seeds must not be empty".to_string());
    }
    let algorithms = file
        .algorithms
        .clone()
        .unwrap_or_else(|| vec![Algorithm::Mars, Algorithm::UpperBound]);
    if algorithms.is_empty() {
        problems.push("algorithms must not be empty".to_string());
    }

    let mean_snr = file.channel.mean_snr_db.unwrap_or([0.0, 25.0]);
    let k_values = match (&file.channel.model, &file.channel.k_factor) {
        (ModelName::Rician, k) => k.as_ref().map_or(vec![0.0], OneOrMany::to_vec),
        (ModelName::IidUniformMcs, Some(_)) => {
            problems.push("channel.k_factor only applies to the rician model".to_string());
            vec![]
        }
        (ModelName::IidUniformMcs, None) => vec![],
    };
    if k_values.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        problems.push("channel.k_factor values must be finite and >= 0".to_string());
    }
    if !(mean_snr[0].is_finite() && mean_snr[1].is_finite() && mean_snr[0] <= mean_snr[1]) {
        problems.push(format!(
            "channel.mean_snr_db needs low <= high, got [{}, {}]",
            mean_snr[0], mean_snr[1]
        ));
    }

    let thresholds = match &file.channel.thresholds_path {
        None => Some(SnrThresholds::default()),
        Some(p) => {
            let full = base.join(p);
            match fs::read_to_string(&full) {
                Ok(t) => SnrThresholds::parse(&t)
                    .map_err(|e: ChannelError| problems.push(format!("{}: {e}", full.display())))
                    .ok(),
                Err(e) => {
                    problems.push(format!("cannot read {}: {e}", full.display()));
                    None
                }
            }
        }
    };

    let table_path = file
        .mcs_table_path
        .as_ref()
        .map(|p| base.join(p))
        .or_else(|| std::env::var_os(MCS_TABLE_ENV).map(PathBuf::from));
    let mcs_table = match table_path {
        None => Some(McsTable::standard()),
        Some(full) => match fs::read_to_string(&full) {
            Ok(t) => McsTable::parse_efficiency(&t)
                .map_err(|e| problems.push(format!("{}: {e}", full.display())))
                .ok(),
            Err(e) => {
                problems.push(format!("cannot read {}: {e}", full.display()));
                None
            }
        },
    };

    if !problems.is_empty() {
        return Err(ScenarioError::Invalid {
            path: path.to_owned(),
            problems,
        });
    }
    let (thresholds, mcs_table) = (thresholds.expect("checked"), mcs_table.expect("checked"));

    let fadings: Vec<Fading> = match file.channel.model {
        ModelName::Rician => k_values.iter().map(|&k| Fading::Rician { k }).collect(),
        ModelName::IidUniformMcs => vec![Fading::IidUniformMcs],
    };
    let expand_t = ttis.len() > 1;
    let expand_k = fadings.len() > 1;
    let t_width = ttis.iter().map(|t| t.to_string().len()).max().unwrap_or(1);
    let mut configs = Vec::new();
    for &t in &ttis {
        for &fading in &fadings {
            let mut id = file.scenario_id.clone();
            if expand_t {
                id.push_str(&format!("-T{t:0t_width$}"));
            }
            if let (true, Fading::Rician { k }) = (expand_k, fading) {
                id.push_str(&format!("-K{k}"));
            }
            configs.push(ScenarioConfig {
                scenario_id: id,
                num_ttis: t,
                num_mvnos: file.num_mvnos,
                users_per_mvno: file.users_per_mvno,
                lambda_min: file.lambda_min,
                slice_cap: file.slice_cap,
                rate_unit_bits,
                num_rbs,
                fading,
                time_correlation: match file.channel.time_correlation {
                    CorrelationName::BlockConstant => TimeCorrelation::BlockConstant,
                    CorrelationName::PerTti => TimeCorrelation::PerTti,
                },
                mean_snr_db: (mean_snr[0], mean_snr[1]),
                thresholds: thresholds.clone(),
                mcs_table: mcs_table.clone(),
                list_mode: match file.slicing_list_mode {
                    None | Some(ListModeName::LambdaGlobal) => ListMode::LambdaGlobal,
                    Some(ListModeName::LiteralTwoStage) => ListMode::LiteralTwoStage,
                },
                mars: MarsOptions {
                    trim_last_bundle: file.mars.trim_last_bundle,
                    mcs_floor,
                },
                seeds: seeds.clone(),
                algorithms: algorithms.clone(),
            });
        }
    }
    configs.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
scenario_id = "t"
ttis = 5
num_mvnos = 2
users_per_mvno = 10
lambda_min = 50
slice_cap = 500
[channel]
model = "rician"
time_correlation = "block_constant"
"#;

    fn parse(text: &str) -> Result<Vec<ScenarioConfig>, ScenarioError> {
        parse_scenario(text, Path::new("inline.toml"))
    }

    #[test]
    fn defaults_applied() {
        let cfgs = parse(BASE).unwrap();
        assert_eq!(cfgs.len(), 1);
        let c = &cfgs[0];
        assert_eq!(c.num_rbs, 100);
        assert_eq!(c.rate_unit_bits, 1_000_000);
        assert_eq!(c.seeds, (0..30).collect::<Vec<_>>());
        assert_eq!(c.algorithms, vec![Algorithm::Mars, Algorithm::UpperBound]);
        assert_eq!(c.k_factor(), Some(0.0));
        assert_eq!(c.mars, MarsOptions::default());
        let inst = c.instance(0);
        assert_eq!(inst.num_users(), 20);
        assert_eq!(inst.slice_cap(1), Rate::from_bits(500_000_000));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse(&BASE.replace("num_mvnos = 2", "num_mvnos = 2\nbogus = 1")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn all_problems_reported_together() {
        let text = BASE
            .replace("users_per_mvno = 10", "users_per_mvno = 0")
            .replace("slice_cap = 500", "slice_cap = 0");
        match parse(&text).unwrap_err() {
            ScenarioError::Invalid { problems, .. } => assert_eq!(problems.len(), 2, "{problems:?}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn expansion_ids_sorted() {
        let text = BASE
            .replace("ttis = 5", "ttis = [100, 20, 50]")
            .replace("model = \"rician\"", "model = \"rician\"\nk_factor = [8, 0]");
        let ids: Vec<String> = parse(&text).unwrap().into_iter().map(|c| c.scenario_id).collect();
        assert_eq!(
            ids,
            ["t-T020-K0", "t-T020-K8", "t-T050-K0", "t-T050-K8", "t-T100-K0", "t-T100-K8"]
        );
    }

    #[test]
    fn random_lambda_is_seeded_and_in_range() {
        let text = BASE.replace("lambda_min = 50", "lambda_min = { low = 10, high = 150 }");
        let c = &parse(&text).unwrap()[0];
        let a = c.instance(3);
        assert_eq!(a, c.instance(3));
        for m in 0..2 {
            for l in a.schedule(m) {
                assert!((Rate::from_bits(10_000_000)..=Rate::from_bits(150_000_000)).contains(l));
            }
        }
        assert_ne!(a, c.instance(4));
    }
}
