//! Random tiny instances and the MaRS / exact / upper-bound comparison.

use marsim_core::{
    build_slicing_list, mars_allocate, solve_exact, upper_bound, validate, ChannelGrid, ListMode, MarsOptions,
    McsLevel, McsTable, OracleLimits, Rate, SearchMode, SlicingInstance,
};
use marsim_core::oracle::OracleError;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws an instance within `limits`: up to three MVNOs, a random subset of
/// levels on the grid, minimum rates up to about half of what a user could
/// get from the whole grid, and caps ranging from binding to slack.
pub fn random_tiny_instance<R: Rng + ?Sized>(rng: &mut R, limits: &OracleLimits) -> (SlicingInstance, ChannelGrid) {
    let num_rbs = rng.random_range(1..=limits.max_cells.max(1));
    let num_ttis = rng.random_range(1..=(limits.max_cells / num_rbs).max(1));
    let num_users = rng.random_range(1..=limits.max_users.max(1));
    let num_mvnos = rng.random_range(1..=num_users.min(3));
    let mut sizes = vec![1usize; num_mvnos];
    for _ in num_mvnos..num_users {
        sizes[rng.random_range(0..num_mvnos)] += 1;
    }
    let table = if rng.random_bool(0.5) {
        McsTable::toy()
    } else {
        McsTable::standard()
    };
    let num_levels = rng.random_range(1..=limits.max_mcs_levels.clamp(1, 29));
    let levels: Vec<McsLevel> = sample(rng, 29, num_levels)
        .into_iter()
        .map(|i| McsLevel::of(i as u8))
        .collect();
    let cells: Vec<Vec<McsLevel>> = sizes
        .iter()
        .flat_map(|&n| 0..n)
        .map(|_| {
            (0..num_rbs * num_ttis)
                .map(|_| levels[rng.random_range(0..levels.len())])
                .collect()
        })
        .collect();

    let mut next = 0;
    let mut schedules = Vec::with_capacity(num_mvnos);
    let mut caps = Vec::with_capacity(num_mvnos);
    for &n in &sizes {
        let mut schedule = Vec::with_capacity(n);
        for _ in 0..n {
            let potential: u64 = cells[next].iter().map(|&c| table.bits(c).raw()).sum();
            let hi = (potential / 2 / Rate::SCALE).max(1);
            schedule.push(Rate::from_bits(rng.random_range(1..=hi)));
            next += 1;
        }
        let demand: Rate = schedule.iter().copied().sum();
        let factor = [6u64, 10, 15, 30][rng.random_range(0..4)];
        caps.push(Rate::from_raw((demand.raw() * factor / 10).max(1)));
        schedules.push(schedule);
    }
    let instance = SlicingInstance::new(schedules, caps, num_rbs, num_ttis, table).expect("generated instance is valid");
    let users = instance.users().collect();
    let grid = ChannelGrid::new(users, num_rbs, num_ttis, cells.concat()).expect("one cell row per user");
    (instance, grid)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub trial: u64,
    pub mars: usize,
    pub exact: usize,
    pub upper_bound: usize,
    /// Constraint violations in the MaRS allocation or the oracle witness.
    pub violations: Vec<String>,
}

impl TrialResult {
    pub fn sandwich_holds(&self) -> bool {
        self.mars <= self.exact && self.exact <= self.upper_bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    pub trials: Vec<TrialResult>,
    /// Trials whose instance exceeded the search's state ceiling.
    pub skipped: Vec<u64>,
}

impl CompareReport {
    pub fn failures(&self) -> impl Iterator<Item = &TrialResult> {
        self.trials
            .iter()
            .filter(|t| !t.sandwich_holds() || !t.violations.is_empty())
    }

    pub fn mars_optimal(&self) -> usize {
        self.trials.iter().filter(|t| t.mars == t.exact).count()
    }

    pub fn bound_tight(&self) -> usize {
        self.trials.iter().filter(|t| t.upper_bound == t.exact).count()
    }
}

/// Runs `trials` random instances; trial `i` uses seed `seed + i`.
pub fn compare(trials: u64, seed: u64, limits: &OracleLimits, mode: SearchMode) -> CompareReport {
    let results: Vec<(u64, Option<TrialResult>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let (instance, grid) = random_tiny_instance(&mut rng, limits);
            let list = build_slicing_list(&instance, ListMode::LambdaGlobal);
            let mars = mars_allocate(&instance, &grid, &list, &MarsOptions::default()).expect("consistent inputs");
            let exact = match solve_exact(&instance, &grid, limits, mode) {
                Ok(sol) => sol,
                Err(OracleError::TooLarge { .. }) => return (i, None),
                Err(e) => panic!("trial {i}: {e}"),
            };
            let ub = upper_bound(&instance, &grid).expect("consistent inputs");
            let mut violations = Vec::new();
            for (who, alloc) in [("mars", &mars), ("exact", &exact.witness)] {
                for v in validate(&instance, &grid, alloc).expect("consistent inputs") {
                    violations.push(format!("{who}: {v}"));
                }
            }
            let result = TrialResult {
                trial: i,
                mars: mars.users_served(),
                exact: exact.optimum,
                upper_bound: ub.served,
                violations,
            };
            (i, Some(result))
        })
        .collect();
    let mut report = CompareReport {
        trials: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, r) in results {
        match r {
            Some(t) => report.trials.push(t),
            None => report.skipped.push(i),
        }
    }
    report
}
