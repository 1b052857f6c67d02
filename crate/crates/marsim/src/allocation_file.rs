//! JSON form of an allocation, as written by `marsim allocate` and read by
//! `marsim validate`.
//!
//! ```json
//! {
//!   "scenario_id": "scenario1",
//!   "seed": 0,
//!   "assignments": [{ "rb": 0, "tti": 0, "mvno": 0, "sched_pos": 1, "mcs": 17 }],
//!   "served": [{ "mvno": 0, "sched_pos": 1 }]
//! }
//! ```

use marsim_core::{Allocation, Assignment, McsLevel, UserId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserRecord {
    pub mvno: u32,
    pub sched_pos: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRecord {
    pub rb: usize,
    pub tti: usize,
    pub mvno: u32,
    pub sched_pos: u32,
    pub mcs: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub scenario_id: String,
    pub seed: u64,
    pub assignments: Vec<AssignmentRecord>,
    pub served: Vec<UserRecord>,
}

impl AllocationFile {
    pub fn from_allocation(scenario_id: &str, seed: u64, alloc: &Allocation) -> AllocationFile {
        AllocationFile {
            scenario_id: scenario_id.to_owned(),
            seed,
            assignments: alloc
                .assignments
                .iter()
                .map(|a| AssignmentRecord {
                    rb: a.rb,
                    tti: a.tti,
                    mvno: a.user.mvno,
                    sched_pos: a.user.sched_pos,
                    mcs: a.mcs.index(),
                })
                .collect(),
            served: alloc
                .served
                .iter()
                .map(|u| UserRecord {
                    mvno: u.mvno,
                    sched_pos: u.sched_pos,
                })
                .collect(),
        }
    }

    pub fn to_allocation(&self) -> Result<Allocation, String> {
        let assignments = self
            .assignments
            .iter()
            .map(|a| {
                let mcs = McsLevel::new(a.mcs).ok_or_else(|| format!("MCS level {} out of range", a.mcs))?;
                Ok(Assignment {
                    rb: a.rb,
                    tti: a.tti,
                    user: UserId::new(a.mvno, a.sched_pos),
                    mcs,
                })
            })
            .collect::<Result<_, String>>()?;
        Ok(Allocation {
            assignments,
            served: self.served.iter().map(|u| UserId::new(u.mvno, u.sched_pos)).collect(),
        })
    }
}
