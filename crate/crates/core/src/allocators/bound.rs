//! Served-user upper bound and static single-MCS baselines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::mcs::{McsLevel, Rate};
use crate::model::{ChannelGrid, SlicingInstance, UserId};
use crate::slicing_list::SlicingList;
use crate::validate::StructuralError;

/// Result of [`upper_bound`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBound {
    pub served: usize,
    /// The users of one bound-achieving selection.
    pub served_users: BTreeSet<UserId>,
    /// RBs each selected user needs at its best level, `ceil(lambda / bits(q_max))`.
    pub rbs_per_user: BTreeMap<UserId, u64>,
}

impl UpperBound {
    pub fn rbs_used(&self) -> u64 {
        self.rbs_per_user.values().sum()
    }
}

/// Upper bound on the number of servable users.
///
/// Pretends every cell supports each user's best level `q_max` over the
/// whole grid, so user `i` needs exactly `n_i = ceil(lambda_i / bits(q_max_i))`
/// RBs; no real allocation can serve it with fewer. The bound is the largest
/// number of users whose selection
///
/// - is a prefix of each MVNO's scheduling order,
/// - fits `sum n_i <= num_rbs * num_ttis`, and
/// - fits `sum lambda_i <= cap` per MVNO (a served user gets at least lambda_i),
///
/// solved exactly by a per-MVNO prefix knapsack over the number of users.
/// Every feasible allocation satisfies the same three conditions, so the
/// result is never below the true optimum.
pub fn upper_bound(instance: &SlicingInstance, grid: &ChannelGrid) -> Result<UpperBound, StructuralError> {
    if !grid.matches(instance) {
        return Err(StructuralError::GridMismatch);
    }
    let table = instance.mcs_table();
    let pool = instance.num_cells() as u64;

    // Per MVNO, cumulative RB cost of serving its first k users.
    let mut prefix_costs: Vec<Vec<u64>> = Vec::with_capacity(instance.num_mvnos());
    let mut needs: BTreeMap<UserId, u64> = BTreeMap::new();
    for m in 0..instance.num_mvnos() as u32 {
        let cap = instance.slice_cap(m);
        let mut costs = vec![0u64];
        let mut demand = Rate::ZERO;
        for (i, &lambda) in instance.schedule(m).iter().enumerate() {
            let user = UserId::new(m, i as u32 + 1);
            let idx = grid.user_index(user).ok_or(StructuralError::UnknownUser(user))?;
            let Some(n) = lambda.units_needed(table.bits(grid.user_max(idx))) else {
                break;
            };
            demand += lambda;
            let total = costs[costs.len() - 1] + n;
            if demand > cap || total > pool {
                break;
            }
            needs.insert(user, n);
            costs.push(total);
        }
        prefix_costs.push(costs);
    }

    // best[s] = least RB cost of serving s users over the MVNOs seen so far;
    // picks[m][s] = prefix length chosen for MVNO m in that optimum.
    let mut best: Vec<Option<u64>> = vec![Some(0)];
    let mut picks: Vec<Vec<usize>> = Vec::with_capacity(prefix_costs.len());
    for costs in &prefix_costs {
        let k_max = costs.len() - 1;
        let mut next: Vec<Option<u64>> = vec![None; best.len() + k_max];
        let mut pick = vec![0usize; next.len()];
        for (s, prev) in best.iter().enumerate() {
            let Some(prev) = *prev else { continue };
            for (k, &c) in costs.iter().enumerate() {
                let total = prev + c;
                if total > pool {
                    break;
                }
                let slot = &mut next[s + k];
                if slot.is_none_or(|cur| total < cur) {
                    *slot = Some(total);
                    pick[s + k] = k;
                }
            }
        }
        best = next;
        picks.push(pick);
    }

    let served = best.iter().rposition(Option::is_some).unwrap_or(0);
    let mut served_users = BTreeSet::new();
    let mut rbs_per_user = BTreeMap::new();
    let mut s = served;
    for (m, pick) in picks.iter().enumerate().rev() {
        let k = pick[s];
        for pos in 1..=k as u32 {
            let u = UserId::new(m as u32, pos);
            served_users.insert(u);
            rbs_per_user.insert(u, needs[&u]);
        }
        s -= k;
    }
    Ok(UpperBound {
        served,
        served_users,
        rbs_per_user,
    })
}

/// How a static baseline picks its single MCS level per user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum McsCriterion {
    /// Highest level over the user's cells.
    MaximumMcs,
    /// Arithmetic mean of the user's cells, rounded down.
    AverageMcs,
    /// Lowest level over the user's cells.
    LowestMcs,
}

impl McsCriterion {
    pub fn level(self, cells: &[McsLevel]) -> McsLevel {
        match self {
            McsCriterion::MaximumMcs => cells.iter().copied().max().unwrap_or(McsLevel::MIN),
            McsCriterion::LowestMcs => cells.iter().copied().min().unwrap_or(McsLevel::MIN),
            McsCriterion::AverageMcs => {
                if cells.is_empty() {
                    return McsLevel::MIN;
                }
                let sum: u64 = cells.iter().map(|c| c.index() as u64).sum();
                McsLevel::of((sum / cells.len() as u64) as u8)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineReport {
    pub criterion: McsCriterion,
    pub served_users: BTreeSet<UserId>,
    pub rbs_used: u64,
    pub bits_served: Rate,
}

impl BaselineReport {
    pub fn served(&self) -> usize {
        self.served_users.len()
    }
}

/// Static allocation: each user is assumed to get the criterion's level on
/// every RB, so it takes `ceil(lambda / bits(level))` RBs from the shared
/// pool. Users go in list order; the slice cap is charged the bits actually
/// delivered, and once a user of an MVNO fails the rest of that MVNO is
/// skipped.
pub fn static_baseline(
    instance: &SlicingInstance,
    grid: &ChannelGrid,
    list: &SlicingList,
    criterion: McsCriterion,
) -> Result<BaselineReport, StructuralError> {
    if !grid.matches(instance) {
        return Err(StructuralError::GridMismatch);
    }
    if !list.is_valid_for(instance) {
        return Err(StructuralError::ListMismatch);
    }
    let table = instance.mcs_table();
    let mut pool = instance.num_cells() as u64;
    let mut mvno_bits = vec![Rate::ZERO; instance.num_mvnos()];
    let mut blocked = vec![false; instance.num_mvnos()];
    let mut report = BaselineReport {
        criterion,
        served_users: BTreeSet::new(),
        rbs_used: 0,
        bits_served: Rate::ZERO,
    };
    for entry in &list.entries {
        let m = entry.user.mvno as usize;
        if blocked[m] {
            continue;
        }
        let idx = grid.user_index(entry.user).ok_or(StructuralError::UnknownUser(entry.user))?;
        let v = table.bits(criterion.level(grid.user_cells(idx)));
        let fits = entry.lambda_min.units_needed(v).and_then(|n| {
            let bits = v * n;
            (n <= pool && mvno_bits[m] + bits <= instance.slice_cap(entry.user.mvno)).then_some((n, bits))
        });
        match fits {
            Some((n, bits)) => {
                pool -= n;
                mvno_bits[m] += bits;
                report.rbs_used += n;
                report.bits_served += bits;
                report.served_users.insert(entry.user);
            }
            None => blocked[m] = true,
        }
    }
    Ok(report)
}
