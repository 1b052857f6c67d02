//! MCS-aware RAN slicing.
//!
//! A network operator owns a grid of resource blocks (RBs) spanning
//! `num_rbs` frequency slots and `num_ttis` transmission time intervals.
//! Several virtual operators (MVNOs) each hand it a scheduling order of
//! users with per-user minimum rates, and the operator decides which RBs
//! each user gets and at which MCS level, so that as many users as possible
//! meet their minimum rate while every slice stays under its throughput cap.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computation:
//!
//! - [`mcs`]: MCS levels, exact fixed-point rates and the bits-per-RB table.
//! - [`model`]: instances, channel grids, allocations and the achievable-rate function.
//! - [`validate`]: machine check of the slicing constraints.
//! - [`channel`]: seeded Rician/Rayleigh channel grids.
//! - [`slicing_list`]: cross-MVNO user ordering.
//! - [`allocators`]: the greedy MaRS allocator, the upper bound and static baselines.
//! - [`oracle`]: exhaustive optimum for tiny instances.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod allocators;
pub mod channel;
pub mod mcs;
pub mod model;
pub mod oracle;
pub mod slicing_list;
pub mod validate;

pub use allocators::{
    allocate_user, best_bundle_at_tti, mars_allocate, static_baseline, upper_bound,
    BaselineReport, MarsOptions, McsCriterion, RbPool, TtiBundle, UpperBound, UserOutcome,
};
pub use channel::{generate_grid, q_max_per_user, ChannelModel, Fading, SnrThresholds, TimeCorrelation};
pub use mcs::{McsLevel, McsTable, Rate, NUM_MCS_LEVELS};
pub use model::{achievable_rate, Allocation, Assignment, ChannelGrid, SlicingInstance, UserId};
pub use oracle::{solve_exact, OracleLimits, OracleSolution, SearchMode};
pub use slicing_list::{build_slicing_list, ListEntry, ListMode, SlicingList};
pub use validate::{validate, StructuralError, Violation};
