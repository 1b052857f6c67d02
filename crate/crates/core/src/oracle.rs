//! Exhaustive optimum for tiny instances.
//!
//! The slicing problem is NP-hard (max coverage reduces to it), so this is
//! only usable on a handful of cells and users. It serves as ground truth
//! for the greedy allocator and the upper bound.
//!
//! [`SearchMode::Pruned`] walks candidate served sets from largest to
//! smallest. Each MVNO contributes a prefix of its scheduling order. For a
//! candidate set it backtracks over every owner (nobody or a user of the set)
//! of every cell, pruning branches where some user can no longer reach its
//! minimum rate. At a complete assignment each user takes, per TTI, the MCS
//! levels that reach its minimum rate with the fewest bits, which is what
//! makes the slice caps easiest to meet. The first feasible candidate is
//! optimal.
//!
//! [`SearchMode::BruteForce`] enumerates every cell owner and every MCS per
//! `(user, tti)` with no pruning at all, for auditing the pruned search.
//!
//! MCS choices are not restricted to levels that appear in the grid. A level
//! between grid values can carry fewer bits while still meeting a user's
//! minimum rate, and that matters when a slice cap binds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::mcs::{McsLevel, McsTable, Rate};
use crate::model::{Allocation, Assignment, ChannelGrid, SlicingInstance, UserId};
use crate::validate::StructuralError;

/// Hard ceiling on the estimated number of search states.
pub const STATE_CEILING: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum `num_rbs * num_ttis`.
    pub max_cells: usize,
    pub max_users: usize,
    /// Maximum number of distinct levels present in the grid.
    pub max_mcs_levels: usize,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits {
            max_cells: 8,
            max_users: 4,
            max_mcs_levels: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Pruned,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: {cells} cells (max {max_cells}), {users} users (max {max_users}), \
         {levels} grid levels (max {max_levels}), ~{estimated_states} states (ceiling {STATE_CEILING})"
    )]
    TooLarge {
        cells: usize,
        max_cells: usize,
        users: usize,
        max_users: usize,
        levels: usize,
        max_levels: usize,
        estimated_states: u64,
    },
    #[error(transparent)]
    Structural(#[from] StructuralError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub optimum: usize,
    pub witness: Allocation,
    /// Complete cell assignments evaluated.
    pub leaves_visited: u64,
}

struct Problem<'a> {
    table: &'a McsTable,
    grid: &'a ChannelGrid,
    instance: &'a SlicingInstance,
    /// (rb, tti) in TTI-major order.
    cells: Vec<(usize, usize)>,
    users: Vec<UserId>,
}

impl Problem<'_> {
    fn q(&self, user: usize, cell: usize) -> McsLevel {
        let (rb, tti) = self.cells[cell];
        self.grid.q(user, rb, tti)
    }

    fn lambda(&self, user: usize) -> Rate {
        self.instance.lambda_min(self.users[user]).expect("user from instance")
    }
}

fn sat_pow(base: u64, exp: usize) -> u64 {
    (0..exp).fold(1u64, |acc, _| acc.saturating_mul(base))
}

/// Finds the maximum number of servable users and one allocation achieving it.
pub fn solve_exact(
    instance: &SlicingInstance,
    grid: &ChannelGrid,
    limits: &OracleLimits,
    mode: SearchMode,
) -> Result<OracleSolution, OracleError> {
    if !grid.matches(instance) {
        return Err(StructuralError::GridMismatch.into());
    }
    let users: Vec<UserId> = instance.users().collect();
    let cells: Vec<(usize, usize)> = (0..instance.num_ttis())
        .flat_map(|t| (0..instance.num_rbs()).map(move |r| (r, t)))
        .collect();
    let levels: BTreeSet<McsLevel> = (0..users.len())
        .flat_map(|u| grid.user_cells(u).iter().copied())
        .collect();
    let max_level = levels.iter().next_back().map_or(0, |c| c.index() as u64);

    let owner_states = sat_pow(users.len() as u64 + 1, cells.len());
    let estimated_states = match mode {
        SearchMode::Pruned => owner_states.saturating_mul(prefix_combinations(instance)),
        SearchMode::BruteForce => {
            owner_states.saturating_mul(sat_pow(max_level + 1, cells.len().min(users.len() * instance.num_ttis())))
        }
    };
    if cells.len() > limits.max_cells
        || users.len() > limits.max_users
        || levels.len() > limits.max_mcs_levels
        || estimated_states > STATE_CEILING
    {
        return Err(OracleError::TooLarge {
            cells: cells.len(),
            max_cells: limits.max_cells,
            users: users.len(),
            max_users: limits.max_users,
            levels: levels.len(),
            max_levels: limits.max_mcs_levels,
            estimated_states,
        });
    }

    let problem = Problem {
        table: instance.mcs_table(),
        grid,
        instance,
        cells,
        users,
    };
    Ok(match mode {
        SearchMode::Pruned => pruned::solve(&problem),
        SearchMode::BruteForce => brute::solve(&problem),
    })
}

fn prefix_combinations(instance: &SlicingInstance) -> u64 {
    (0..instance.num_mvnos() as u32)
        .map(|m| instance.schedule(m).len() as u64 + 1)
        .fold(1u64, u64::saturating_mul)
}

/// One user's cells grouped by TTI: `(tti, cell count, lowest level)`.
fn tti_groups(p: &Problem<'_>, owner: &[Option<usize>], user: usize) -> Vec<(usize, u64, McsLevel)> {
    let mut groups: BTreeMap<usize, (u64, McsLevel)> = BTreeMap::new();
    for (cell, o) in owner.iter().enumerate() {
        if *o == Some(user) {
            let q = p.q(user, cell);
            let tti = p.cells[cell].1;
            let e = groups.entry(tti).or_insert((0, McsLevel::MAX));
            e.0 += 1;
            e.1 = e.1.min(q);
        }
    }
    groups.into_iter().map(|(t, (n, q))| (t, n, q)).collect()
}

/// Cheapest per-TTI MCS choice (each at most that TTI's lowest level) whose
/// total reaches `lambda`. Returns the total and the levels, or `None` if
/// even the highest allowed levels fall short.
fn min_bits_choice(table: &McsTable, groups: &[(usize, u64, McsLevel)], lambda: Rate) -> Option<(Rate, Vec<McsLevel>)> {
    // Partial sums below lambda, plus the cheapest partial at or above it.
    let mut below: BTreeMap<Rate, Vec<McsLevel>> = BTreeMap::new();
    below.insert(Rate::ZERO, Vec::new());
    let mut above: Option<(Rate, Vec<McsLevel>)> = None;
    for &(_, count, q) in groups {
        let mut next_below: BTreeMap<Rate, Vec<McsLevel>> = BTreeMap::new();
        let mut next_above: Option<(Rate, Vec<McsLevel>)> = None;
        let mut offer = |sum: Rate, choice: Vec<McsLevel>, into_above: &mut Option<(Rate, Vec<McsLevel>)>| {
            if sum >= lambda {
                if into_above.as_ref().is_none_or(|(s, _)| sum < *s) {
                    *into_above = Some((sum, choice));
                }
            } else {
                next_below.entry(sum).or_insert(choice);
            }
        };
        let starts = below.iter().map(|(s, c)| (*s, c)).chain(above.as_ref().map(|(s, c)| (*s, c)));
        for (sum, choice) in starts {
            for c in McsLevel::MIN.index()..=q.index() {
                let c = McsLevel::of(c);
                let mut ch = choice.clone();
                ch.push(c);
                offer(sum + table.bits(c) * count, ch, &mut next_above);
            }
        }
        below = next_below;
        above = next_above;
    }
    above
}

fn witness(p: &Problem<'_>, owner: &[Option<usize>], levels: &BTreeMap<(usize, usize), McsLevel>, served: &[usize]) -> Allocation {
    let assignments = owner
        .iter()
        .enumerate()
        .filter_map(|(cell, o)| {
            let u = (*o)?;
            let (rb, tti) = p.cells[cell];
            Some(Assignment {
                rb,
                tti,
                user: p.users[u],
                mcs: levels[&(u, tti)],
            })
        })
        .collect();
    Allocation {
        assignments,
        served: served.iter().map(|&u| p.users[u]).collect(),
    }
}

mod pruned {
    use super::*;

    pub(super) fn solve(p: &Problem<'_>) -> OracleSolution {
        let mut leaves = 0u64;
        for set in candidate_sets(p) {
            if set.is_empty() {
                break;
            }
            if let Some(witness) = feasible(p, &set, &mut leaves) {
                return OracleSolution {
                    optimum: set.len(),
                    witness,
                    leaves_visited: leaves,
                };
            }
        }
        OracleSolution {
            optimum: 0,
            witness: Allocation::default(),
            leaves_visited: leaves,
        }
    }

    /// Served sets made of one scheduling prefix per MVNO whose minimum rates
    /// fit the cap, largest first, then by prefix lengths.
    fn candidate_sets(p: &Problem<'_>) -> Vec<Vec<usize>> {
        let inst = p.instance;
        let mut max_k = Vec::new();
        for m in 0..inst.num_mvnos() as u32 {
            let mut total = Rate::ZERO;
            let k = inst
                .schedule(m)
                .iter()
                .take_while(|&&l| {
                    total += l;
                    total <= inst.slice_cap(m)
                })
                .count();
            max_k.push(k);
        }
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for &k in &max_k {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..=k).map(move |j| {
                        let mut c = c.clone();
                        c.push(j);
                        c
                    })
                })
                .collect();
        }
        combos.sort_by(|a, b| {
            let (sa, sb): (usize, usize) = (a.iter().sum(), b.iter().sum());
            sb.cmp(&sa).then(a.cmp(b))
        });
        combos
            .into_iter()
            .map(|ks| {
                ks.iter()
                    .enumerate()
                    .flat_map(|(m, &k)| {
                        (1..=k as u32).map(move |pos| {
                            inst.user_index(UserId::new(m as u32, pos)).expect("user from instance")
                        })
                    })
                    .collect()
            })
            .collect()
    }

    struct Search<'p, 'a> {
        p: &'p Problem<'a>,
        set: &'p [usize],
        /// suffix[i][cell]: bits user set[i] could still add from cells >= cell.
        suffix: Vec<Vec<Rate>>,
        potential: Vec<Rate>,
        owner: Vec<Option<usize>>,
        leaves: u64,
    }

    fn feasible(p: &Problem<'_>, set: &[usize], leaves: &mut u64) -> Option<Allocation> {
        let n = p.cells.len();
        let suffix: Vec<Vec<Rate>> = set
            .iter()
            .map(|&u| {
                let mut s = vec![Rate::ZERO; n + 1];
                for cell in (0..n).rev() {
                    s[cell] = s[cell + 1] + p.table.bits(p.q(u, cell));
                }
                s
            })
            .collect();
        let mut search = Search {
            p,
            set,
            suffix,
            potential: vec![Rate::ZERO; set.len()],
            owner: vec![None; n],
            leaves: 0,
        };
        let found = search.descend(0);
        *leaves += search.leaves;
        found
    }

    impl Search<'_, '_> {
        fn hopeless(&self, cell: usize) -> bool {
            self.set
                .iter()
                .enumerate()
                .any(|(i, &u)| self.potential[i] + self.suffix[i][cell] < self.p.lambda(u))
        }

        fn descend(&mut self, cell: usize) -> Option<Allocation> {
            if self.hopeless(cell) {
                return None;
            }
            if cell == self.p.cells.len() {
                self.leaves += 1;
                return self.evaluate();
            }
            self.owner[cell] = None;
            if let Some(found) = self.descend(cell + 1) {
                return Some(found);
            }
            for i in 0..self.set.len() {
                let u = self.set[i];
                let v = self.p.table.bits(self.p.q(u, cell));
                self.owner[cell] = Some(u);
                self.potential[i] += v;
                let found = self.descend(cell + 1);
                self.potential[i] = self.potential[i] - v;
                if found.is_some() {
                    return found;
                }
            }
            self.owner[cell] = None;
            None
        }

        fn evaluate(&self) -> Option<Allocation> {
            let p = self.p;
            let mut levels = BTreeMap::new();
            let mut mvno_bits: BTreeMap<u32, Rate> = BTreeMap::new();
            for &u in self.set {
                let groups = tti_groups(p, &self.owner, u);
                let (bits, choice) = min_bits_choice(p.table, &groups, p.lambda(u))?;
                for (g, c) in groups.iter().zip(choice) {
                    levels.insert((u, g.0), c);
                }
                let m = p.users[u].mvno;
                let total = mvno_bits.entry(m).or_insert(Rate::ZERO);
                *total += bits;
                if *total > p.instance.slice_cap(m) {
                    return None;
                }
            }
            Some(witness(p, &self.owner, &levels, self.set))
        }
    }
}

mod brute {
    use super::*;

    struct Best {
        served: usize,
        witness: Allocation,
    }

    pub(super) fn solve(p: &Problem<'_>) -> OracleSolution {
        let mut owner = vec![None; p.cells.len()];
        let mut best = Best {
            served: 0,
            witness: Allocation::default(),
        };
        let mut leaves = 0u64;
        owners(p, 0, &mut owner, &mut best, &mut leaves);
        OracleSolution {
            optimum: best.served,
            witness: best.witness,
            leaves_visited: leaves,
        }
    }

    fn owners(p: &Problem<'_>, cell: usize, owner: &mut Vec<Option<usize>>, best: &mut Best, leaves: &mut u64) {
        if cell == p.cells.len() {
            *leaves += 1;
            let groups: Vec<(usize, (usize, u64, McsLevel))> = (0..p.users.len())
                .flat_map(|u| tti_groups(p, owner, u).into_iter().map(move |g| (u, g)))
                .collect();
            let mut choice = vec![McsLevel::MIN; groups.len()];
            levels(p, owner, &groups, 0, &mut choice, best);
            return;
        }
        for o in core::iter::once(None).chain((0..p.users.len()).map(Some)) {
            owner[cell] = o;
            owners(p, cell + 1, owner, best, leaves);
        }
        owner[cell] = None;
    }

    fn levels(
        p: &Problem<'_>,
        owner: &[Option<usize>],
        groups: &[(usize, (usize, u64, McsLevel))],
        i: usize,
        choice: &mut Vec<McsLevel>,
        best: &mut Best,
    ) {
        if i < groups.len() {
            for c in 0..=28u8 {
                let c = McsLevel::of(c);
                // Levels above a group's lowest cell break the MCS constraint.
                if c > groups[i].1 .2 {
                    break;
                }
                choice[i] = c;
                levels(p, owner, groups, i + 1, choice, best);
            }
            return;
        }
        let mut user_bits = vec![Rate::ZERO; p.users.len()];
        let mut mvno_bits = vec![Rate::ZERO; p.instance.num_mvnos()];
        for ((u, (_, count, _)), c) in groups.iter().zip(choice.iter()) {
            let bits = p.table.bits(*c) * *count;
            user_bits[*u] += bits;
            mvno_bits[p.users[*u].mvno as usize] += bits;
        }
        if (0..mvno_bits.len()).any(|m| mvno_bits[m] > p.instance.slice_cap(m as u32)) {
            return;
        }
        let mut served = Vec::new();
        for m in 0..p.instance.num_mvnos() as u32 {
            for pos in 1..=p.instance.schedule(m).len() as u32 {
                let u = p.instance.user_index(UserId::new(m, pos)).expect("user from instance");
                if user_bits[u] < p.lambda(u) {
                    break;
                }
                served.push(u);
            }
        }
        if served.len() > best.served {
            let lv = groups
                .iter()
                .zip(choice.iter())
                .map(|((u, (t, _, _)), c)| ((*u, *t), *c))
                .collect();
            best.served = served.len();
            best.witness = witness(p, owner, &lv, &served);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate;

    fn r(b: u64) -> Rate {
        Rate::from_bits(b)
    }

    fn both(inst: &SlicingInstance, grid: &ChannelGrid) -> usize {
        let lim = OracleLimits::default();
        let a = solve_exact(inst, grid, &lim, SearchMode::Pruned).unwrap();
        let b = solve_exact(inst, grid, &lim, SearchMode::BruteForce).unwrap();
        assert_eq!(a.optimum, b.optimum);
        for w in [&a.witness, &b.witness] {
            assert_eq!(validate(inst, grid, w).unwrap(), vec![]);
            assert_eq!(w.served.len(), a.optimum);
        }
        a.optimum
    }

    #[test]
    fn single_cell_single_user() {
        let inst = SlicingInstance::new(vec![vec![r(4)]], vec![r(1000)], 1, 1, McsTable::toy()).unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(4));
        assert_eq!(both(&inst, &grid), 1);
    }

    #[test]
    fn prefix_rule_blocks_cheap_second_user() {
        let inst = SlicingInstance::new(vec![vec![r(100), r(1)]], vec![r(1000)], 2, 1, McsTable::toy()).unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(3));
        assert_eq!(both(&inst, &grid), 0);
    }

    #[test]
    fn off_grid_level_meets_tight_cap() {
        // Two RBs at q = 5, demand 7, cap 8: MCS 4 on both gives exactly 8.
        let inst = SlicingInstance::new(vec![vec![r(7)]], vec![r(8)], 2, 1, McsTable::toy()).unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(5));
        assert_eq!(both(&inst, &grid), 1);
    }

    #[test]
    fn refuses_large_instances() {
        let inst = SlicingInstance::new(vec![vec![r(1); 2]], vec![r(9)], 5, 2, McsTable::toy()).unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(3));
        assert!(matches!(
            solve_exact(&inst, &grid, &OracleLimits::default(), SearchMode::Pruned),
            Err(OracleError::TooLarge { cells: 10, .. })
        ));
    }

    #[test]
    fn min_bits_choice_prefers_fewest_bits() {
        let t = McsTable::toy();
        // Two TTIs with 2 cells at q<=5 and 1 cell at q<=3, need 9.
        let groups = [(0, 2, McsLevel::of(5)), (1, 1, McsLevel::of(3))];
        let (bits, ch) = min_bits_choice(&t, &groups, r(9)).unwrap();
        assert_eq!(bits, r(9));
        assert_eq!(ch[0].index() as u64 * 2 + ch[1].index() as u64, 9);
        assert!(min_bits_choice(&t, &groups, r(14)).is_none());
    }
}
