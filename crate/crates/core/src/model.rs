//! Domain types shared by the allocators, the validator and the oracle.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::mcs::{McsLevel, McsTable, Rate};
use crate::validate::StructuralError;

/// A user, identified by its MVNO (0-based) and its 1-based position in that
/// MVNO's scheduling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId {
    pub mvno: u32,
    pub sched_pos: u32,
}

impl UserId {
    pub const fn new(mvno: u32, sched_pos: u32) -> UserId {
        UserId { mvno, sched_pos }
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}u{}", self.mvno, self.sched_pos)
    }
}

/// Rate a single RB delivers when transmitted at `c` over a channel that
/// supports at most `q_max`: the table entry if `c <= q_max`, zero otherwise.
pub fn achievable_rate(c: McsLevel, q_max: McsLevel, table: &McsTable) -> Rate {
    if c <= q_max {
        table.bits(c)
    } else {
        Rate::ZERO
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance needs at least one MVNO")]
    NoMvnos,
    #[error("{caps} slice caps given for {mvnos} MVNOs")]
    CapCountMismatch { mvnos: usize, caps: usize },
    #[error("num_rbs must be positive")]
    NoRbs,
    #[error("num_ttis must be positive")]
    NoTtis,
    #[error("user {0} has a zero minimum rate")]
    ZeroLambda(UserId),
    #[error("MVNO {0} has a zero slice cap")]
    ZeroCap(u32),
}

/// One slicing problem: per-MVNO scheduling orders with minimum rates, slice
/// caps, RB grid dimensions and the MCS table. Rates are bits per window of
/// `num_ttis` TTIs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicingInstance {
    schedules: Vec<Vec<Rate>>,
    slice_caps: Vec<Rate>,
    num_rbs: usize,
    num_ttis: usize,
    mcs_table: McsTable,
    offsets: Vec<usize>,
}

impl SlicingInstance {
    /// `schedules[m][i]` is the minimum rate of the user at scheduling
    /// position `i + 1` of MVNO `m`.
    pub fn new(
        schedules: Vec<Vec<Rate>>,
        slice_caps: Vec<Rate>,
        num_rbs: usize,
        num_ttis: usize,
        mcs_table: McsTable,
    ) -> Result<SlicingInstance, InstanceError> {
        if schedules.is_empty() {
            return Err(InstanceError::NoMvnos);
        }
        if slice_caps.len() != schedules.len() {
            return Err(InstanceError::CapCountMismatch {
                mvnos: schedules.len(),
                caps: slice_caps.len(),
            });
        }
        if num_rbs == 0 {
            return Err(InstanceError::NoRbs);
        }
        if num_ttis == 0 {
            return Err(InstanceError::NoTtis);
        }
        for (m, sched) in schedules.iter().enumerate() {
            if slice_caps[m].is_zero() {
                return Err(InstanceError::ZeroCap(m as u32));
            }
            if let Some(i) = sched.iter().position(|l| l.is_zero()) {
                return Err(InstanceError::ZeroLambda(UserId::new(m as u32, i as u32 + 1)));
            }
        }
        let mut offsets = Vec::with_capacity(schedules.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for s in &schedules {
            acc += s.len();
            offsets.push(acc);
        }
        Ok(SlicingInstance {
            schedules,
            slice_caps,
            num_rbs,
            num_ttis,
            mcs_table,
            offsets,
        })
    }

    pub fn num_mvnos(&self) -> usize {
        self.schedules.len()
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    pub fn num_ttis(&self) -> usize {
        self.num_ttis
    }

    /// `num_rbs * num_ttis`.
    pub fn num_cells(&self) -> usize {
        self.num_rbs * self.num_ttis
    }

    pub fn mcs_table(&self) -> &McsTable {
        &self.mcs_table
    }

    pub fn slice_cap(&self, mvno: u32) -> Rate {
        self.slice_caps[mvno as usize]
    }

    pub fn slice_caps(&self) -> &[Rate] {
        &self.slice_caps
    }

    /// Minimum rates of MVNO `mvno` in scheduling order.
    pub fn schedule(&self, mvno: u32) -> &[Rate] {
        &self.schedules[mvno as usize]
    }

    pub fn num_users(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn lambda_min(&self, user: UserId) -> Option<Rate> {
        let pos = (user.sched_pos as usize).checked_sub(1)?;
        self.schedules.get(user.mvno as usize)?.get(pos).copied()
    }

    /// Dense index of `user` in `(mvno, sched_pos)` order.
    pub fn user_index(&self, user: UserId) -> Option<usize> {
        self.lambda_min(user)?;
        Some(self.offsets[user.mvno as usize] + user.sched_pos as usize - 1)
    }

    /// All users in `(mvno, sched_pos)` order.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.schedules.iter().enumerate().flat_map(|(m, s)| {
            (1..=s.len() as u32).map(move |i| UserId::new(m as u32, i))
        })
    }

    /// Returns a copy with a different table.
    pub fn with_mcs_table(&self, mcs_table: McsTable) -> SlicingInstance {
        SlicingInstance {
            mcs_table,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid has {got} cells, expected {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("grid users must be strictly increasing")]
    UnsortedUsers,
}

/// Maximum supportable MCS of every `(user, rb, tti)` cell.
///
/// Stored user-major, then TTI, then RB, so one user's RBs at one TTI are a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelGrid {
    users: Vec<UserId>,
    num_rbs: usize,
    num_ttis: usize,
    q: Vec<McsLevel>,
}

impl ChannelGrid {
    pub fn new(
        users: Vec<UserId>,
        num_rbs: usize,
        num_ttis: usize,
        q: Vec<McsLevel>,
    ) -> Result<ChannelGrid, GridError> {
        if users.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GridError::UnsortedUsers);
        }
        let expected = users.len() * num_rbs * num_ttis;
        if q.len() != expected {
            return Err(GridError::WrongSize {
                expected,
                got: q.len(),
            });
        }
        Ok(ChannelGrid {
            users,
            num_rbs,
            num_ttis,
            q,
        })
    }

    /// Builds a grid covering every user of `instance` from `f(user, rb, tti)`.
    pub fn from_fn(
        instance: &SlicingInstance,
        mut f: impl FnMut(UserId, usize, usize) -> McsLevel,
    ) -> ChannelGrid {
        let users: Vec<UserId> = instance.users().collect();
        let (nr, nt) = (instance.num_rbs(), instance.num_ttis());
        let mut q = Vec::with_capacity(users.len() * nr * nt);
        for &u in &users {
            for t in 0..nt {
                for r in 0..nr {
                    q.push(f(u, r, t));
                }
            }
        }
        ChannelGrid {
            users,
            num_rbs: nr,
            num_ttis: nt,
            q,
        }
    }

    pub fn constant(instance: &SlicingInstance, level: McsLevel) -> ChannelGrid {
        ChannelGrid::from_fn(instance, |_, _, _| level)
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    pub fn num_ttis(&self) -> usize {
        self.num_ttis
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn user_index(&self, user: UserId) -> Option<usize> {
        self.users.binary_search(&user).ok()
    }

    /// True if the grid has exactly the instance's users and dimensions.
    pub fn matches(&self, instance: &SlicingInstance) -> bool {
        self.num_rbs == instance.num_rbs()
            && self.num_ttis == instance.num_ttis()
            && self.users.len() == instance.num_users()
            && self.users.iter().copied().eq(instance.users())
    }

    #[inline]
    pub fn q(&self, user_idx: usize, rb: usize, tti: usize) -> McsLevel {
        self.q[(user_idx * self.num_ttis + tti) * self.num_rbs + rb]
    }

    /// The user's levels over all RBs at one TTI.
    #[inline]
    pub fn row(&self, user_idx: usize, tti: usize) -> &[McsLevel] {
        let start = (user_idx * self.num_ttis + tti) * self.num_rbs;
        &self.q[start..start + self.num_rbs]
    }

    /// All of a user's cells, TTI-major.
    pub fn user_cells(&self, user_idx: usize) -> &[McsLevel] {
        let n = self.num_rbs * self.num_ttis;
        &self.q[user_idx * n..(user_idx + 1) * n]
    }

    /// Highest level over all of a user's cells.
    pub fn user_max(&self, user_idx: usize) -> McsLevel {
        self.user_cells(user_idx)
            .iter()
            .copied()
            .max()
            .unwrap_or(McsLevel::MIN)
    }
}

/// One RB at one TTI handed to a user at an MCS level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub rb: usize,
    pub tti: usize,
    pub user: UserId,
    pub mcs: McsLevel,
}

/// A slicing decision: the RB/MCS assignments and the set of served users.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    pub assignments: Vec<Assignment>,
    pub served: BTreeSet<UserId>,
}

impl Allocation {
    pub fn rbs_used(&self) -> usize {
        self.assignments.len()
    }

    pub fn users_served(&self) -> usize {
        self.served.len()
    }

    /// Achieved bits per user, summing the achievable rate of every
    /// assignment. Users without assignments are absent.
    pub fn user_rates(
        &self,
        grid: &ChannelGrid,
        table: &McsTable,
    ) -> Result<BTreeMap<UserId, Rate>, StructuralError> {
        let mut rates = BTreeMap::new();
        for a in &self.assignments {
            let idx = grid
                .user_index(a.user)
                .ok_or(StructuralError::UnknownUser(a.user))?;
            if a.rb >= grid.num_rbs() || a.tti >= grid.num_ttis() {
                return Err(StructuralError::CellOutOfRange { rb: a.rb, tti: a.tti });
            }
            let d = achievable_rate(a.mcs, grid.q(idx, a.rb, a.tti), table);
            *rates.entry(a.user).or_insert(Rate::ZERO) += d;
        }
        Ok(rates)
    }

    /// Achieved bits per MVNO over all of its users' assignments.
    pub fn mvno_rates(
        &self,
        grid: &ChannelGrid,
        table: &McsTable,
    ) -> Result<BTreeMap<u32, Rate>, StructuralError> {
        let mut out = BTreeMap::new();
        for (u, r) in self.user_rates(grid, table)? {
            *out.entry(u.mvno).or_insert(Rate::ZERO) += r;
        }
        Ok(out)
    }

    /// Bits delivered to served users.
    pub fn bits_served(&self, grid: &ChannelGrid, table: &McsTable) -> Result<Rate, StructuralError> {
        Ok(self
            .user_rates(grid, table)?
            .into_iter()
            .filter(|(u, _)| self.served.contains(u))
            .map(|(_, r)| r)
            .sum())
    }

    /// Sorts assignments by `(tti, rb)` so equal allocations compare equal.
    pub fn normalize(&mut self) {
        self.assignments.sort_by_key(|a| (a.tti, a.rb, a.user, a.mcs));
    }
}
