mod common;

use std::collections::BTreeSet;

use common::{random_case, served_prefix_ok, Dims, SMALL};
use marsim_core::{
    allocate_user, best_bundle_at_tti, build_slicing_list, mars_allocate, static_baseline, upper_bound, validate,
    Allocation, ChannelGrid, ListMode, MarsOptions, McsCriterion, McsLevel, McsTable, RbPool, Rate, SlicingInstance,
    UserId,
};
use proptest::prelude::*;

const TRIM: MarsOptions = MarsOptions {
    trim_last_bundle: true,
    mcs_floor: McsLevel::MIN,
};

fn trim() -> MarsOptions {
    MarsOptions {
        trim_last_bundle: true,
        ..MarsOptions::default()
    }
}

fn levels(q: &[u8]) -> Vec<McsLevel> {
    q.iter().map(|&c| McsLevel::of(c)).collect()
}

/// Nine RBs in one TTI; three support MCS 3 or better, two of those MCS 4.
fn nine_rb_case() -> (SlicingInstance, ChannelGrid) {
    let inst = SlicingInstance::new(vec![vec![Rate::from_bits(8)]], vec![Rate::from_bits(100)], 9, 1, McsTable::toy())
        .unwrap();
    let grid = ChannelGrid::new(vec![UserId::new(0, 1)], 9, 1, levels(&[4, 4, 3, 1, 1, 1, 1, 1, 1])).unwrap();
    (inst, grid)
}

#[test]
fn nine_rb_best_bundle_maximises_rate() {
    let (_, grid) = nine_rb_case();
    let b = best_bundle_at_tti(&grid, UserId::new(0, 1), 0, &RbPool::new(9, 1), McsLevel::of(1), &McsTable::toy())
        .unwrap();
    // 3 x 3 = 9 beats 2 x 4 = 8; 9 x 1 = 9 ties and goes to the higher level.
    assert_eq!(b.mcs, McsLevel::of(3));
    assert_eq!(b.rbs, vec![0, 1, 2]);
    assert_eq!(b.rate, Rate::from_bits(9));
}

#[test]
fn nine_rb_user_served_at_highest_sufficient_level() {
    let (_, grid) = nine_rb_case();
    for opts in [MarsOptions::default(), trim()] {
        let out = allocate_user(&grid, UserId::new(0, 1), Rate::from_bits(8), &RbPool::new(9, 1), &McsTable::toy(), &opts)
            .unwrap();
        assert!(out.served);
        // The outer loop starts at the user's top level, where 2 RBs x 4 already suffice.
        let mut cells: Vec<(usize, u8)> = out.assignments.iter().map(|a| (a.rb, a.mcs.index())).collect();
        cells.sort();
        assert_eq!(cells, vec![(0, 4), (1, 4)]);
        assert_eq!(out.rate, Rate::from_bits(8));
    }
}

#[test]
fn bound_single_user_ceil() {
    let inst = SlicingInstance::new(vec![vec![Rate::from_bits(10)]], vec![Rate::from_bits(100)], 5, 1, McsTable::toy())
        .unwrap();
    let grid = ChannelGrid::new(vec![UserId::new(0, 1)], 5, 1, levels(&[4, 1, 1, 1, 1])).unwrap();
    let ub = upper_bound(&inst, &grid).unwrap();
    assert_eq!(ub.served, 1);
    assert_eq!(ub.rbs_per_user[&UserId::new(0, 1)], 3);
}

#[test]
fn abundant_grid_serves_everyone() {
    let inst = SlicingInstance::new(vec![vec![Rate::from_bits(50); 10]; 2], vec![Rate::from_bits(1_000_000); 2], 100, 5, McsTable::standard())
        .unwrap();
    let grid = ChannelGrid::constant(&inst, McsLevel::of(15));
    let list = build_slicing_list(&inst, ListMode::LambdaGlobal);
    let alloc = mars_allocate(&inst, &grid, &list, &trim()).unwrap();
    assert_eq!(alloc.users_served(), 20);
    assert_eq!(alloc.rbs_used(), 20);
    // Untrimmed, each user swallows a whole TTI's bundle.
    let alloc = mars_allocate(&inst, &grid, &list, &MarsOptions::default()).unwrap();
    assert_eq!(alloc.users_served(), 5);
}

#[test]
fn cap_below_one_user_blocks_only_that_mvno() {
    let inst = SlicingInstance::new(
        vec![vec![Rate::from_bits(20); 3], vec![Rate::from_bits(20); 3]],
        vec![Rate::from_bits(19), Rate::from_bits(1000)],
        10,
        3,
        McsTable::toy(),
    )
    .unwrap();
    let grid = ChannelGrid::constant(&inst, McsLevel::of(8));
    let list = build_slicing_list(&inst, ListMode::LambdaGlobal);
    let alloc = mars_allocate(&inst, &grid, &list, &MarsOptions::default()).unwrap();
    assert!(alloc.served.iter().all(|u| u.mvno == 1));
    assert_eq!(alloc.users_served(), 3);
}

#[test]
fn criteria_pick_max_mean_min() {
    let cells = levels(&[2, 4, 6]);
    assert_eq!(McsCriterion::LowestMcs.level(&cells), McsLevel::of(2));
    assert_eq!(McsCriterion::AverageMcs.level(&cells), McsLevel::of(4));
    assert_eq!(McsCriterion::MaximumMcs.level(&cells), McsLevel::of(6));
}

fn mars(inst: &SlicingInstance, grid: &ChannelGrid, opts: &MarsOptions) -> Allocation {
    let list = build_slicing_list(inst, ListMode::LambdaGlobal);
    mars_allocate(inst, grid, &list, opts).unwrap()
}

const MEDIUM: Dims = Dims {
    max_rbs: 40,
    max_ttis: 20,
    max_mvnos: 3,
    max_users: 8,
};

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mars_output_is_feasible(seed in any::<u64>(), trim_last in any::<bool>(), literal in any::<bool>()) {
        let (inst, grid) = random_case(seed, MEDIUM);
        let mode = if literal { ListMode::LiteralTwoStage } else { ListMode::LambdaGlobal };
        let list = build_slicing_list(&inst, mode);
        let opts = MarsOptions { trim_last_bundle: trim_last, ..MarsOptions::default() };
        let alloc = mars_allocate(&inst, &grid, &list, &opts).unwrap();
        let v = validate(&inst, &grid, &alloc).unwrap();
        prop_assert!(v.is_empty(), "{:?}", v);
        prop_assert!(served_prefix_ok(&inst, &alloc.served));
        let assigned: BTreeSet<UserId> = alloc.assignments.iter().map(|a| a.user).collect();
        prop_assert!(assigned.is_subset(&alloc.served));
    }

    #[test]
    fn mars_is_deterministic(seed in any::<u64>()) {
        let (inst, grid) = random_case(seed, SMALL);
        prop_assert_eq!(mars(&inst, &grid, &MarsOptions::default()), mars(&inst, &grid, &MarsOptions::default()));
    }

    #[test]
    fn bound_dominates_mars(seed in any::<u64>(), trim_last in any::<bool>()) {
        let (inst, grid) = random_case(seed, MEDIUM);
        let opts = MarsOptions { trim_last_bundle: trim_last, ..MarsOptions::default() };
        let served = mars(&inst, &grid, &opts).users_served();
        let ub = upper_bound(&inst, &grid).unwrap();
        prop_assert!(ub.served >= served, "ub {} < mars {}", ub.served, served);
        prop_assert!(served_prefix_ok(&inst, &ub.served_users));
        prop_assert!(ub.rbs_used() <= inst.num_cells() as u64);
    }

    /// If the best bundles at the floor add up to the demand, the user is served.
    #[test]
    fn enough_bundle_rate_means_served(seed in any::<u64>(), taken_frac in 0.0f64..0.9, floor in 0u8..4) {
        let (inst, grid) = random_case(seed, SMALL);
        let table = inst.mcs_table();
        let mut pool = RbPool::new(inst.num_rbs(), inst.num_ttis());
        let step = ((1.0 - taken_frac) * 10.0).max(1.0) as usize;
        for cell in 0..inst.num_cells() {
            if cell % step != 0 {
                pool.take(cell % inst.num_rbs(), cell / inst.num_rbs());
            }
        }
        let opts = MarsOptions { mcs_floor: McsLevel::of(floor), ..MarsOptions::default() };
        for user in inst.users() {
            let lambda = inst.lambda_min(user).unwrap();
            let total: Rate = (0..inst.num_ttis())
                .map(|t| best_bundle_at_tti(&grid, user, t, &pool, opts.mcs_floor, table).unwrap().rate)
                .sum();
            let out = allocate_user(&grid, user, lambda, &pool, table, &opts).unwrap();
            prop_assert_eq!(out.served, total >= lambda, "user {} total {} lambda {}", user, total, lambda);
            if out.served {
                prop_assert!(out.rate >= lambda);
                prop_assert!(out.assignments.iter().all(|a| !pool.is_taken(a.rb, a.tti)));
            } else {
                prop_assert!(out.assignments.is_empty());
            }
        }
    }

    #[test]
    fn bundle_is_rate_maximal(seed in any::<u64>(), c_low in 0u8..29) {
        let (inst, grid) = random_case(seed, SMALL);
        let table = inst.mcs_table();
        let pool = RbPool::new(inst.num_rbs(), inst.num_ttis());
        let c_low = McsLevel::of(c_low);
        for (idx, user) in inst.users().enumerate() {
            for t in 0..inst.num_ttis() {
                let b = best_bundle_at_tti(&grid, user, t, &pool, c_low, table).unwrap();
                let row = grid.row(idx, t);
                let brute = (c_low.index()..=grid.user_max(idx).index().max(c_low.index()))
                    .map(|c| table.bits(McsLevel::of(c)) * row.iter().filter(|q| q.index() >= c).count() as u64)
                    .max()
                    .unwrap_or(Rate::ZERO);
                prop_assert_eq!(b.rate, brute);
                prop_assert!(b.rbs.iter().all(|&rb| row[rb] >= b.mcs));
                prop_assert_eq!(b.rate, table.bits(b.mcs) * b.rbs.len() as u64);
            }
        }
    }

    /// On a constant grid every static criterion picks the grid's level, so
    /// each needs exactly ceil(lambda / v) RBs per user, as does trimmed MaRS.
    #[test]
    fn constant_grid_baselines_match_mars(seed in any::<u64>(), level in 1u8..29) {
        let (inst, _) = random_case(seed, MEDIUM);
        let grid = ChannelGrid::constant(&inst, McsLevel::of(level));
        let alloc = mars(&inst, &grid, &trim());
        let list = build_slicing_list(&inst, ListMode::LambdaGlobal);
        for c in [McsCriterion::MaximumMcs, McsCriterion::AverageMcs, McsCriterion::LowestMcs] {
            let rep = static_baseline(&inst, &grid, &list, c).unwrap();
            prop_assert_eq!(&rep.served_users, &alloc.served);
            prop_assert_eq!(rep.rbs_used, alloc.rbs_used() as u64);
        }
    }

    /// With every cell at the top level, trimmed MaRS gives each user exactly
    /// the bound's RB count. The two agree whenever there is one MVNO whose cap
    /// also admits the bits those RBs carry.
    #[test]
    fn uniform_top_level_bound_matches_trimmed_mars(seed in any::<u64>()) {
        let (inst, _) = random_case(seed, MEDIUM);
        let grid = ChannelGrid::constant(&inst, McsLevel::MAX);
        let alloc = mars(&inst, &grid, &TRIM);
        let ub = upper_bound(&inst, &grid).unwrap();
        prop_assert!(ub.served >= alloc.users_served());
        let v = inst.mcs_table().bits(McsLevel::MAX);
        let carried: Rate = inst
            .schedule(0)
            .iter()
            .map(|l| v * l.units_needed(v).unwrap())
            .sum();
        if inst.num_mvnos() == 1 && carried <= inst.slice_cap(0) {
            prop_assert_eq!(ub.served, alloc.users_served());
            prop_assert_eq!(ub.rbs_used(), alloc.rbs_used() as u64);
        }
    }
}
