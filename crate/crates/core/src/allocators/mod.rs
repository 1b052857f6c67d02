//! Slicing allocators.
//!
//! - [`mars_allocate`]: the greedy MCS-aware allocator.
//! - [`upper_bound`]: served-user bound under a best-channel relaxation.
//! - [`static_baseline`]: one fixed MCS per user (max, mean or min of its cells).

mod bound;
mod mars;

use alloc::vec;
use alloc::vec::Vec;

pub use bound::{static_baseline, upper_bound, BaselineReport, McsCriterion, UpperBound};
pub use mars::{allocate_user, best_bundle_at_tti, mars_allocate, MarsOptions, TtiBundle, UserOutcome};

/// Tracks which `(rb, tti)` cells are already allocated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RbPool {
    num_rbs: usize,
    taken: Vec<bool>,
    free: usize,
}

impl RbPool {
    pub fn new(num_rbs: usize, num_ttis: usize) -> RbPool {
        RbPool {
            num_rbs,
            taken: vec![false; num_rbs * num_ttis],
            free: num_rbs * num_ttis,
        }
    }

    pub fn is_taken(&self, rb: usize, tti: usize) -> bool {
        self.taken[tti * self.num_rbs + rb]
    }

    /// Marks a cell as allocated. Returns false if it already was.
    pub fn take(&mut self, rb: usize, tti: usize) -> bool {
        let slot = &mut self.taken[tti * self.num_rbs + rb];
        if *slot {
            return false;
        }
        *slot = true;
        self.free -= 1;
        true
    }

    pub fn free(&self) -> usize {
        self.free
    }

    pub fn is_exhausted(&self) -> bool {
        self.free == 0
    }

    pub(crate) fn tti_row(&self, tti: usize) -> &[bool] {
        &self.taken[tti * self.num_rbs..(tti + 1) * self.num_rbs]
    }
}
