//! Greedy MCS-aware slicing.
//!
//! Users are served in slicing-list order. For a user, every TTI contributes
//! its best bundle: the MCS level and matching set of free RBs that maximise
//! `|RBs| * bits(MCS)`, searching levels from the user's best level down to
//! the current floor. Bundles are taken highest MCS first until the user's
//! minimum rate is reached. If even all TTIs together fall short, the floor
//! is lowered one level and the bundles are rebuilt. A user either gets
//! everything it needs or nothing.

use alloc::vec::Vec;

use crate::allocators::RbPool;
use crate::mcs::{McsLevel, McsTable, Rate, NUM_MCS_LEVELS};
use crate::model::{Allocation, Assignment, ChannelGrid, SlicingInstance, UserId};
use crate::slicing_list::SlicingList;
use crate::validate::StructuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarsOptions {
    /// Drop surplus RBs from the last bundle a user takes.
    pub trim_last_bundle: bool,
    /// Lowest MCS the outer loop falls back to.
    pub mcs_floor: McsLevel,
}

impl Default for MarsOptions {
    fn default() -> MarsOptions {
        MarsOptions {
            trim_last_bundle: false,
            mcs_floor: McsLevel::of(1),
        }
    }
}

/// The RBs a user would get in one TTI, all at one MCS level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtiBundle {
    pub tti: usize,
    pub mcs: McsLevel,
    pub rbs: Vec<usize>,
    pub rate: Rate,
}

impl TtiBundle {
    fn empty(tti: usize, mcs: McsLevel) -> TtiBundle {
        TtiBundle {
            tti,
            mcs,
            rbs: Vec::new(),
            rate: Rate::ZERO,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rbs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserOutcome {
    pub served: bool,
    pub assignments: Vec<Assignment>,
    pub rate: Rate,
}

impl UserOutcome {
    fn unserved() -> UserOutcome {
        UserOutcome {
            served: false,
            assignments: Vec::new(),
            rate: Rate::ZERO,
        }
    }
}

/// Best bundle for `user` at `tti`, trying levels from the user's maximum
/// level down to `c_low`. Rate ties go to the higher level.
pub fn best_bundle_at_tti(
    grid: &ChannelGrid,
    user: UserId,
    tti: usize,
    pool: &RbPool,
    c_low: McsLevel,
    table: &McsTable,
) -> Result<TtiBundle, StructuralError> {
    let idx = grid.user_index(user).ok_or(StructuralError::UnknownUser(user))?;
    if tti >= grid.num_ttis() {
        return Err(StructuralError::CellOutOfRange { rb: 0, tti });
    }
    Ok(bundle_at(grid.row(idx, tti), pool.tti_row(tti), tti, grid.user_max(idx), c_low, table))
}

fn bundle_at(
    row: &[McsLevel],
    taken: &[bool],
    tti: usize,
    c_max: McsLevel,
    c_low: McsLevel,
    table: &McsTable,
) -> TtiBundle {
    let mut hist = [0u64; NUM_MCS_LEVELS];
    for (q, &t) in row.iter().zip(taken) {
        if !t {
            hist[q.index() as usize] += 1;
        }
    }
    // Free RBs strictly above c_max; zero when c_max is the user's maximum.
    let mut count: u64 = hist[c_max.index() as usize + 1..].iter().sum();
    let mut best: Option<(McsLevel, Rate)> = None;
    for c in c_max.down_to(c_low) {
        count += hist[c.index() as usize];
        let rate = table.bits(c) * count;
        if best.is_none_or(|(_, r)| rate > r) {
            best = Some((c, rate));
        }
    }
    match best {
        Some((mcs, rate)) if !rate.is_zero() => TtiBundle {
            tti,
            mcs,
            rbs: row
                .iter()
                .zip(taken)
                .enumerate()
                .filter(|(_, (q, t))| !**t && **q >= mcs)
                .map(|(rb, _)| rb)
                .collect(),
            rate,
        },
        _ => TtiBundle::empty(tti, c_low),
    }
}

/// Tries to serve one user from the free cells of `pool`. The pool is not
/// modified; the caller commits the returned assignments.
pub fn allocate_user(
    grid: &ChannelGrid,
    user: UserId,
    lambda_min: Rate,
    pool: &RbPool,
    table: &McsTable,
    opts: &MarsOptions,
) -> Result<UserOutcome, StructuralError> {
    let idx = grid.user_index(user).ok_or(StructuralError::UnknownUser(user))?;
    Ok(allocate_user_at(grid, idx, user, lambda_min, pool, table, opts))
}

fn tti_bundles(
    grid: &ChannelGrid,
    idx: usize,
    pool: &RbPool,
    c_max: McsLevel,
    c_low: McsLevel,
    table: &McsTable,
) -> Vec<TtiBundle> {
    (0..grid.num_ttis())
        .map(|t| bundle_at(grid.row(idx, t), pool.tti_row(t), t, c_max, c_low, table))
        .filter(|b| !b.is_empty())
        .collect()
}

fn allocate_user_at(
    grid: &ChannelGrid,
    idx: usize,
    user: UserId,
    lambda_min: Rate,
    pool: &RbPool,
    table: &McsTable,
    opts: &MarsOptions,
) -> UserOutcome {
    if lambda_min.is_zero() {
        return UserOutcome {
            served: true,
            assignments: Vec::new(),
            rate: Rate::ZERO,
        };
    }
    let c_max = grid.user_max(idx);
    if c_max < opts.mcs_floor {
        return UserOutcome::unserved();
    }
    // Bundles only grow as the floor drops, so if the lowest floor cannot
    // reach the demand no level can.
    let at_floor: Rate = tti_bundles(grid, idx, pool, c_max, opts.mcs_floor, table)
        .iter()
        .map(|b| b.rate)
        .sum();
    if at_floor < lambda_min {
        return UserOutcome::unserved();
    }

    for c in c_max.down_to(opts.mcs_floor) {
        let mut bundles = tti_bundles(grid, idx, pool, c_max, c, table);
        bundles.sort_by(|a, b| {
            b.mcs
                .cmp(&a.mcs)
                .then(b.rate.cmp(&a.rate))
                .then(a.tti.cmp(&b.tti))
        });
        let mut acc = Rate::ZERO;
        let mut assignments = Vec::new();
        for b in &bundles {
            let v = table.bits(b.mcs);
            let take = if opts.trim_last_bundle && acc + b.rate >= lambda_min {
                let need = lambda_min - acc;
                need.units_needed(v).map_or(b.rbs.len(), |n| n as usize)
            } else {
                b.rbs.len()
            };
            assignments.extend(b.rbs[..take].iter().map(|&rb| Assignment {
                rb,
                tti: b.tti,
                user,
                mcs: b.mcs,
            }));
            acc += v * take as u64;
            if acc >= lambda_min {
                return UserOutcome {
                    served: true,
                    assignments,
                    rate: acc,
                };
            }
        }
    }
    UserOutcome::unserved()
}

/// Runs the greedy allocator over the whole slicing list.
///
/// A user is skipped when its MVNO's achieved bits plus its minimum rate
/// would exceed the slice cap, or when the bits it actually gets would. Once
/// a user of an MVNO goes unserved, the rest of that MVNO's users are skipped
/// too, so served users always form a prefix of each scheduling order.
/// Allocation stops when every cell is taken.
pub fn mars_allocate(
    instance: &SlicingInstance,
    grid: &ChannelGrid,
    list: &SlicingList,
    opts: &MarsOptions,
) -> Result<Allocation, StructuralError> {
    if !grid.matches(instance) {
        return Err(StructuralError::GridMismatch);
    }
    if !list.is_valid_for(instance) {
        return Err(StructuralError::ListMismatch);
    }
    let table = instance.mcs_table();
    let mut pool = RbPool::new(instance.num_rbs(), instance.num_ttis());
    let mut mvno_bits = alloc::vec![Rate::ZERO; instance.num_mvnos()];
    let mut blocked = alloc::vec![false; instance.num_mvnos()];
    let mut alloc = Allocation::default();

    for entry in &list.entries {
        if pool.is_exhausted() {
            break;
        }
        let m = entry.user.mvno as usize;
        if blocked[m] {
            continue;
        }
        let cap = instance.slice_cap(entry.user.mvno);
        if mvno_bits[m] + entry.lambda_min > cap {
            blocked[m] = true;
            continue;
        }
        let idx = grid.user_index(entry.user).ok_or(StructuralError::UnknownUser(entry.user))?;
        let outcome = allocate_user_at(grid, idx, entry.user, entry.lambda_min, &pool, table, opts);
        if !outcome.served || mvno_bits[m] + outcome.rate > cap {
            blocked[m] = true;
            continue;
        }
        for a in &outcome.assignments {
            pool.take(a.rb, a.tti);
        }
        mvno_bits[m] += outcome.rate;
        alloc.served.insert(entry.user);
        alloc.assignments.extend(outcome.assignments);
    }
    Ok(alloc)
}
