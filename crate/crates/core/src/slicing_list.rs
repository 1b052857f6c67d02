//! Cross-MVNO ordering of users for one slicing window.

use alloc::vec::Vec;

use crate::mcs::Rate;
use crate::model::{SlicingInstance, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ListMode {
    /// Users sorted by minimum rate across MVNOs; each MVNO's users are then
    /// placed, in its scheduling order, into the slots its members occupy.
    #[default]
    LambdaGlobal,
    /// Stable sort by minimum rate, then stable sort by scheduling position.
    LiteralTwoStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListEntry {
    pub user: UserId,
    pub lambda_min: Rate,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlicingList {
    pub entries: Vec<ListEntry>,
}

impl SlicingList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.entries.iter().map(|e| e.user)
    }

    /// True if the list holds each user of `instance` exactly once with its
    /// minimum rate, and each MVNO's users appear in scheduling order.
    pub fn is_valid_for(&self, instance: &SlicingInstance) -> bool {
        if self.entries.len() != instance.num_users() {
            return false;
        }
        let mut next_pos = alloc::vec![1u32; instance.num_mvnos()];
        self.entries.iter().all(|e| {
            let ok = instance.lambda_min(e.user) == Some(e.lambda_min)
                && next_pos[e.user.mvno as usize] == e.user.sched_pos;
            if ok {
                next_pos[e.user.mvno as usize] += 1;
            }
            ok
        })
    }
}

pub fn build_slicing_list(instance: &SlicingInstance, mode: ListMode) -> SlicingList {
    let mut entries: Vec<ListEntry> = instance
        .users()
        .map(|user| ListEntry {
            user,
            lambda_min: instance.lambda_min(user).expect("user from instance"),
        })
        .collect();
    // Entries start in (mvno, sched_pos) order, so a stable sort on lambda
    // breaks ties by (mvno, sched_pos).
    entries.sort_by_key(|e| e.lambda_min);
    match mode {
        ListMode::LiteralTwoStage => {
            entries.sort_by_key(|e| e.user.sched_pos);
        }
        ListMode::LambdaGlobal => {
            let mut next_pos = alloc::vec![1u32; instance.num_mvnos()];
            for e in entries.iter_mut() {
                let m = e.user.mvno;
                let pos = next_pos[m as usize];
                next_pos[m as usize] += 1;
                let user = UserId::new(m, pos);
                *e = ListEntry {
                    user,
                    lambda_min: instance.lambda_min(user).expect("user from instance"),
                };
            }
        }
    }
    SlicingList { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcs::McsTable;
    use alloc::vec;

    fn inst(schedules: Vec<Vec<u64>>) -> SlicingInstance {
        let n = schedules.len();
        SlicingInstance::new(
            schedules
                .into_iter()
                .map(|s| s.into_iter().map(Rate::from_bits).collect())
                .collect(),
            vec![Rate::from_bits(1000); n],
            1,
            1,
            McsTable::toy(),
        )
        .unwrap()
    }

    fn order(list: &SlicingList) -> Vec<(u32, u32)> {
        list.users().map(|u| (u.mvno, u.sched_pos)).collect()
    }

    #[test]
    fn interleaves_by_rate() {
        let i = inst(vec![vec![30, 40], vec![50]]);
        assert_eq!(order(&build_slicing_list(&i, ListMode::LambdaGlobal)), [(0, 1), (0, 2), (1, 1)]);
    }

    #[test]
    fn literal_groups_by_position() {
        let i = inst(vec![vec![30, 40], vec![50]]);
        assert_eq!(order(&build_slicing_list(&i, ListMode::LiteralTwoStage)), [(0, 1), (1, 1), (0, 2)]);
    }

    #[test]
    fn single_mvno_keeps_schedule() {
        let i = inst(vec![vec![90, 10, 50, 10]]);
        for mode in [ListMode::LambdaGlobal, ListMode::LiteralTwoStage] {
            let l = build_slicing_list(&i, mode);
            assert_eq!(order(&l), [(0, 1), (0, 2), (0, 3), (0, 4)]);
            assert_eq!(l.entries[0].lambda_min, Rate::from_bits(90));
            assert!(l.is_valid_for(&i));
        }
    }

    #[test]
    fn schedule_order_overrides_rate_within_mvno() {
        // MVNO 0's first user is expensive; it still goes first among MVNO 0,
        // taking the slot of MVNO 0's cheapest member.
        let i = inst(vec![vec![60, 10], vec![30]]);
        let l = build_slicing_list(&i, ListMode::LambdaGlobal);
        assert_eq!(order(&l), [(0, 1), (1, 1), (0, 2)]);
        assert_eq!(l.entries[0].lambda_min, Rate::from_bits(60));
    }

    #[test]
    fn ties_broken_by_mvno_then_position() {
        let i = inst(vec![vec![5], vec![5], vec![5]]);
        assert_eq!(order(&build_slicing_list(&i, ListMode::LambdaGlobal)), [(0, 1), (1, 1), (2, 1)]);
    }
}
