#![allow(dead_code)]

use marsim_core::{
    generate_grid, ChannelGrid, ChannelModel, Fading, McsLevel, McsTable, Rate, SlicingInstance, SnrThresholds,
    TimeCorrelation, UserId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub max_rbs: usize,
    pub max_ttis: usize,
    pub max_mvnos: usize,
    pub max_users: usize,
}

pub const SMALL: Dims = Dims {
    max_rbs: 12,
    max_ttis: 6,
    max_mvnos: 3,
    max_users: 5,
};

/// Random instance and grid from `seed`. Minimum rates are scaled so the
/// grid is sometimes roomy and sometimes badly oversubscribed; caps range
/// from binding to slack.
pub fn random_case(seed: u64, dims: Dims) -> (SlicingInstance, ChannelGrid) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_rbs = rng.random_range(1..=dims.max_rbs);
    let num_ttis = rng.random_range(1..=dims.max_ttis);
    let num_mvnos = rng.random_range(1..=dims.max_mvnos);
    let table = if rng.random_bool(0.3) {
        McsTable::toy()
    } else {
        McsTable::standard()
    };
    let sizes: Vec<usize> = (0..num_mvnos).map(|_| rng.random_range(1..=dims.max_users)).collect();
    let users: usize = sizes.iter().sum();
    let mean_bits = (table.bits(McsLevel::of(14)).raw() / Rate::SCALE).max(1);
    let load = [0.2, 0.7, 1.5, 4.0][rng.random_range(0..4)];
    let share = ((num_rbs * num_ttis) as f64 * mean_bits as f64 * load / users as f64).max(2.0) as u64;
    let mut schedules = Vec::new();
    let mut caps = Vec::new();
    for &n in &sizes {
        let s: Vec<Rate> = (0..n)
            .map(|_| Rate::from_bits(rng.random_range(1..=share * 2)))
            .collect();
        let demand: Rate = s.iter().copied().sum();
        let factor = [5u64, 10, 20, 100][rng.random_range(0..4)];
        caps.push(Rate::from_raw((demand.raw() * factor / 10).max(1)));
        schedules.push(s);
    }
    let instance = SlicingInstance::new(schedules, caps, num_rbs, num_ttis, table).unwrap();
    let tc = if rng.random_bool(0.5) {
        TimeCorrelation::BlockConstant
    } else {
        TimeCorrelation::PerTti
    };
    let grid_seed = rng.random();
    let grid = match rng.random_range(0..3) {
        0 => generate_grid(&ChannelModel::iid_uniform(tc, grid_seed), &instance),
        1 => {
            // A narrow window of levels, so many cells share a level.
            let lo = rng.random_range(0..=26u8);
            let hi = rng.random_range(lo..=(lo + 3).min(28));
            let mut g = ChaCha8Rng::seed_from_u64(grid_seed);
            ChannelGrid::from_fn(&instance, |_, _, _| McsLevel::of(g.random_range(lo..=hi)))
        }
        _ => {
            let k = [0.0, 1.0, 4.0, 8.0][rng.random_range(0..4)];
            let model = ChannelModel::new(
                Fading::Rician { k },
                tc,
                SnrThresholds::default(),
                (0.0, 25.0),
                grid_seed,
            )
            .unwrap();
            generate_grid(&model, &instance)
        }
    };
    (instance, grid)
}

pub fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

pub fn served_prefix_ok(instance: &SlicingInstance, served: &std::collections::BTreeSet<UserId>) -> bool {
    (0..instance.num_mvnos() as u32).all(|m| {
        let n = instance.schedule(m).len() as u32;
        let count = (1..=n).filter(|&p| served.contains(&UserId::new(m, p))).count() as u32;
        (1..=count).all(|p| served.contains(&UserId::new(m, p)))
    })
}
