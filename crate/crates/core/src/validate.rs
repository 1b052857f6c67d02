//! Constraint checker for slicing decisions.
//!
//! Checks, for an [`Allocation`] against its instance and channel grid:
//!
//! | constraint | meaning |
//! |---|---|
//! | (3) | each `(rb, tti)` cell goes to at most one user |
//! | (4) | an assignment's MCS never exceeds the cell's supported level |
//! | (5) | a user uses a single MCS within one TTI |
//! | (6) | per MVNO, the served users form a prefix of its scheduling order |
//! | (7) | every served user reaches its minimum rate |
//! | (8) | an MVNO's achieved bits stay within its slice cap |
//!
//! Constraint (7) only applies to users marked served. Rates are computed
//! per assignment with the achievable-rate function, so an assignment whose
//! MCS is above the channel contributes nothing.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::mcs::{McsLevel, Rate};
use crate::model::{Allocation, ChannelGrid, SlicingInstance, UserId};

/// The allocation does not fit the instance at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("user {0} is not part of the instance")]
    UnknownUser(UserId),
    #[error("cell (rb {rb}, tti {tti}) is outside the RB grid")]
    CellOutOfRange { rb: usize, tti: usize },
    #[error("channel grid does not match the instance's users or dimensions")]
    GridMismatch,
    #[error("slicing list does not contain exactly the instance's users")]
    ListMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// (3)
    RbConflict {
        rb: usize,
        tti: usize,
        users: Vec<UserId>,
    },
    /// (4)
    McsAboveChannel {
        rb: usize,
        tti: usize,
        user: UserId,
        mcs: McsLevel,
        supported: McsLevel,
    },
    /// (5)
    MultipleMcs {
        user: UserId,
        tti: usize,
        levels: Vec<McsLevel>,
    },
    /// (6)
    ScheduleOrder {
        mvno: u32,
        unserved_pos: u32,
        served_after: Vec<u32>,
    },
    /// (7)
    MinimumRate {
        user: UserId,
        achieved: Rate,
        required: Rate,
    },
    /// (8)
    SliceCap { mvno: u32, achieved: Rate, cap: Rate },
}

impl Violation {
    /// Constraint number this violation breaks.
    pub fn constraint(&self) -> u8 {
        match self {
            Violation::RbConflict { .. } => 3,
            Violation::McsAboveChannel { .. } => 4,
            Violation::MultipleMcs { .. } => 5,
            Violation::ScheduleOrder { .. } => 6,
            Violation::MinimumRate { .. } => 7,
            Violation::SliceCap { .. } => 8,
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::RbConflict { rb, tti, users } => {
                write!(f, "(3) rb {rb} tti {tti} assigned to {} users:", users.len())?;
                for u in users {
                    write!(f, " {u}")?;
                }
                Ok(())
            }
            Violation::McsAboveChannel {
                rb,
                tti,
                user,
                mcs,
                supported,
            } => write!(
                f,
                "(4) {user} at rb {rb} tti {tti} uses MCS {mcs} above supported {supported}"
            ),
            Violation::MultipleMcs { user, tti, levels } => {
                write!(f, "(5) {user} uses {} MCS levels at tti {tti}", levels.len())
            }
            Violation::ScheduleOrder {
                mvno,
                unserved_pos,
                served_after,
            } => write!(
                f,
                "(6) MVNO {mvno} position {unserved_pos} unserved but later positions {served_after:?} served"
            ),
            Violation::MinimumRate {
                user,
                achieved,
                required,
            } => write!(f, "(7) {user} served with {achieved} bits < required {required}"),
            Violation::SliceCap { mvno, achieved, cap } => {
                write!(f, "(8) MVNO {mvno} achieves {achieved} bits > cap {cap}")
            }
        }
    }
}

/// Checks `alloc` against constraints (3)-(8). An empty list means valid.
pub fn validate(
    instance: &SlicingInstance,
    grid: &ChannelGrid,
    alloc: &Allocation,
) -> Result<Vec<Violation>, StructuralError> {
    if !grid.matches(instance) {
        return Err(StructuralError::GridMismatch);
    }
    for a in &alloc.assignments {
        if instance.user_index(a.user).is_none() {
            return Err(StructuralError::UnknownUser(a.user));
        }
        if a.rb >= instance.num_rbs() || a.tti >= instance.num_ttis() {
            return Err(StructuralError::CellOutOfRange { rb: a.rb, tti: a.tti });
        }
    }
    if let Some(&u) = alloc.served.iter().find(|u| instance.user_index(**u).is_none()) {
        return Err(StructuralError::UnknownUser(u));
    }

    let table = instance.mcs_table();
    let mut violations = Vec::new();

    let mut by_cell: BTreeMap<(usize, usize), Vec<UserId>> = BTreeMap::new();
    let mut by_user_tti: BTreeMap<(UserId, usize), Vec<McsLevel>> = BTreeMap::new();
    for a in &alloc.assignments {
        by_cell.entry((a.tti, a.rb)).or_default().push(a.user);
        let levels = by_user_tti.entry((a.user, a.tti)).or_default();
        if !levels.contains(&a.mcs) {
            levels.push(a.mcs);
        }
    }
    for ((tti, rb), users) in by_cell {
        if users.len() > 1 {
            violations.push(Violation::RbConflict { rb, tti, users });
        }
    }

    for a in &alloc.assignments {
        let idx = grid.user_index(a.user).ok_or(StructuralError::UnknownUser(a.user))?;
        let supported = grid.q(idx, a.rb, a.tti);
        if a.mcs > supported {
            violations.push(Violation::McsAboveChannel {
                rb: a.rb,
                tti: a.tti,
                user: a.user,
                mcs: a.mcs,
                supported,
            });
        }
    }

    for ((user, tti), mut levels) in by_user_tti {
        if levels.len() > 1 {
            levels.sort_unstable();
            violations.push(Violation::MultipleMcs { user, tti, levels });
        }
    }

    for m in 0..instance.num_mvnos() as u32 {
        let n = instance.schedule(m).len() as u32;
        let served = |i: u32| alloc.served.contains(&UserId::new(m, i));
        if let Some(gap) = (1..=n).find(|&i| !served(i)) {
            let after: Vec<u32> = (gap + 1..=n).filter(|&j| served(j)).collect();
            if !after.is_empty() {
                violations.push(Violation::ScheduleOrder {
                    mvno: m,
                    unserved_pos: gap,
                    served_after: after,
                });
            }
        }
    }

    let user_rates = alloc.user_rates(grid, table)?;
    for &user in &alloc.served {
        let achieved = user_rates.get(&user).copied().unwrap_or(Rate::ZERO);
        let required = instance.lambda_min(user).ok_or(StructuralError::UnknownUser(user))?;
        if achieved < required {
            violations.push(Violation::MinimumRate {
                user,
                achieved,
                required,
            });
        }
    }

    let mut mvno_rates: BTreeMap<u32, Rate> = BTreeMap::new();
    for (u, r) in &user_rates {
        *mvno_rates.entry(u.mvno).or_insert(Rate::ZERO) += *r;
    }
    for (mvno, achieved) in mvno_rates {
        let cap = instance.slice_cap(mvno);
        if achieved > cap {
            violations.push(Violation::SliceCap { mvno, achieved, cap });
        }
    }

    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcs::McsTable;
    use crate::model::Assignment;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn one_user(lambda: u64) -> (SlicingInstance, ChannelGrid) {
        let inst = SlicingInstance::new(
            vec![vec![Rate::from_bits(lambda)]],
            vec![Rate::from_bits(1000)],
            2,
            1,
            McsTable::toy(),
        )
        .unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(4));
        (inst, grid)
    }

    fn asg(rb: usize, tti: usize, user: UserId, mcs: u8) -> Assignment {
        Assignment {
            rb,
            tti,
            user,
            mcs: McsLevel::of(mcs),
        }
    }

    #[test]
    fn empty_allocation_is_valid() {
        let (inst, grid) = one_user(10);
        assert_eq!(validate(&inst, &grid, &Allocation::default()), Ok(vec![]));
    }

    #[test]
    fn double_booked_rb() {
        let inst = SlicingInstance::new(
            vec![vec![Rate::from_bits(1), Rate::from_bits(1)]],
            vec![Rate::from_bits(100)],
            2,
            1,
            McsTable::toy(),
        )
        .unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(4));
        let (u1, u2) = (UserId::new(0, 1), UserId::new(0, 2));
        let alloc = Allocation {
            assignments: vec![asg(0, 0, u1, 1), asg(0, 0, u2, 1)],
            served: BTreeSet::new(),
        };
        let v = validate(&inst, &grid, &alloc).unwrap();
        assert_eq!(
            v,
            vec![Violation::RbConflict {
                rb: 0,
                tti: 0,
                users: vec![u1, u2]
            }]
        );
    }

    #[test]
    fn served_below_minimum_rate() {
        // 1 user, lambda 10, one RB at v=4, marked served.
        let (inst, grid) = one_user(10);
        let u = UserId::new(0, 1);
        let alloc = Allocation {
            assignments: vec![asg(0, 0, u, 4)],
            served: [u].into_iter().collect(),
        };
        assert_eq!(
            validate(&inst, &grid, &alloc).unwrap(),
            vec![Violation::MinimumRate {
                user: u,
                achieved: Rate::from_bits(4),
                required: Rate::from_bits(10)
            }]
        );
    }

    #[test]
    fn schedule_order_gap() {
        let inst = SlicingInstance::new(
            vec![vec![Rate::from_bits(100), Rate::from_bits(1)]],
            vec![Rate::from_bits(100)],
            1,
            1,
            McsTable::toy(),
        )
        .unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(4));
        let u2 = UserId::new(0, 2);
        let alloc = Allocation {
            assignments: vec![asg(0, 0, u2, 4)],
            served: [u2].into_iter().collect(),
        };
        assert_eq!(
            validate(&inst, &grid, &alloc).unwrap(),
            vec![Violation::ScheduleOrder {
                mvno: 0,
                unserved_pos: 1,
                served_after: vec![2]
            }]
        );
    }

    #[test]
    fn mcs_above_channel_and_mixed_mcs() {
        let (inst, grid) = one_user(1);
        let u = UserId::new(0, 1);
        let alloc = Allocation {
            assignments: vec![asg(0, 0, u, 5), asg(1, 0, u, 3)],
            served: BTreeSet::new(),
        };
        let classes: Vec<u8> = validate(&inst, &grid, &alloc)
            .unwrap()
            .iter()
            .map(Violation::constraint)
            .collect();
        assert_eq!(classes, [4, 5]);
    }

    #[test]
    fn cap_exceeded() {
        let inst = SlicingInstance::new(
            vec![vec![Rate::from_bits(1)]],
            vec![Rate::from_bits(5)],
            2,
            1,
            McsTable::toy(),
        )
        .unwrap();
        let grid = ChannelGrid::constant(&inst, McsLevel::of(4));
        let u = UserId::new(0, 1);
        let alloc = Allocation {
            assignments: vec![asg(0, 0, u, 4), asg(1, 0, u, 4)],
            served: [u].into_iter().collect(),
        };
        assert_eq!(
            validate(&inst, &grid, &alloc).unwrap(),
            vec![Violation::SliceCap {
                mvno: 0,
                achieved: Rate::from_bits(8),
                cap: Rate::from_bits(5)
            }]
        );
    }

    #[test]
    fn structural_errors() {
        let (inst, grid) = one_user(1);
        let stranger = UserId::new(3, 1);
        let alloc = Allocation {
            assignments: vec![asg(0, 0, stranger, 1)],
            served: BTreeSet::new(),
        };
        assert_eq!(
            validate(&inst, &grid, &alloc),
            Err(StructuralError::UnknownUser(stranger))
        );
        let alloc = Allocation {
            assignments: vec![asg(7, 0, UserId::new(0, 1), 1)],
            served: BTreeSet::new(),
        };
        assert_eq!(
            validate(&inst, &grid, &alloc),
            Err(StructuralError::CellOutOfRange { rb: 7, tti: 0 })
        );
        let other = SlicingInstance::new(
            vec![vec![Rate::from_bits(1)]],
            vec![Rate::from_bits(5)],
            3,
            1,
            McsTable::toy(),
        )
        .unwrap();
        assert_eq!(
            validate(&other, &grid, &Allocation::default()),
            Err(StructuralError::GridMismatch)
        );
    }
}
