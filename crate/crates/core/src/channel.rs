//! Seeded channel grids.
//!
//! Each user gets a mean SNR drawn uniformly from a dB range. Every cell then
//! draws an independent Rician power gain (no frequency correlation), adds it
//! in dB to the mean, and maps the result to the highest MCS whose SNR
//! threshold it reaches. With [`TimeCorrelation::BlockConstant`] the draws of
//! TTI 0 are reused for the whole window.
//!
//! Every user has its own random stream, seeded from the model seed and the
//! user id, so grids do not depend on generation order or on other users.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::mcs::{McsLevel, NUM_MCS_LEVELS};
use crate::model::{ChannelGrid, SlicingInstance, UserId};
use crate::validate::StructuralError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    /// Rician fading with linear K factor; `k = 0` is Rayleigh.
    Rician { k: f64 },
    /// Every cell independently uniform over `0..=28`; no SNR involved.
    IidUniformMcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeCorrelation {
    /// One draw per (user, rb), held for every TTI of the window.
    BlockConstant,
    /// Fresh draw every TTI.
    PerTti,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("SNR thresholds must be finite and strictly increasing (index {0})")]
    ThresholdsNotIncreasing(usize),
    #[error("threshold table has {0} entries, expected 29")]
    WrongLength(usize),
    #[error("threshold file line {line}: {reason}")]
    Parse { line: usize, reason: &'static str },
    #[error("Rician K factor must be finite and >= 0, got {0}")]
    BadK(f64),
    #[error("mean SNR range must be finite with low <= high, got ({0}, {1})")]
    BadSnrRange(f64, f64),
}

/// SNR (dB) needed for each MCS level.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrThresholds([f64; NUM_MCS_LEVELS]);

impl SnrThresholds {
    pub fn new(db: [f64; NUM_MCS_LEVELS]) -> Result<SnrThresholds, ChannelError> {
        if let Some(i) = db.iter().position(|x| !x.is_finite()) {
            return Err(ChannelError::ThresholdsNotIncreasing(i));
        }
        if let Some(i) = (1..NUM_MCS_LEVELS).find(|&i| db[i] <= db[i - 1]) {
            return Err(ChannelError::ThresholdsNotIncreasing(i));
        }
        Ok(SnrThresholds(db))
    }

    pub fn from_slice(db: &[f64]) -> Result<SnrThresholds, ChannelError> {
        let arr: [f64; NUM_MCS_LEVELS] = db
            .try_into()
            .map_err(|_| ChannelError::WrongLength(db.len()))?;
        SnrThresholds::new(arr)
    }

    /// Evenly spaced from -6 dB (MCS 0) to 22 dB (MCS 28), 1 dB apart.
    pub fn evenly_spaced() -> SnrThresholds {
        let mut db = [0.0; NUM_MCS_LEVELS];
        for (c, x) in db.iter_mut().enumerate() {
            *x = -6.0 + c as f64;
        }
        SnrThresholds(db)
    }

    /// Parses `index snr_db` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<SnrThresholds, ChannelError> {
        let mut seen = [None::<f64>; NUM_MCS_LEVELS];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason| ChannelError::Parse {
                line: lineno + 1,
                reason,
            };
            let mut parts = line.split_whitespace();
            let (Some(i), Some(x), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err("expected `index snr_db`"));
            };
            let i: usize = i.parse().map_err(|_| err("index is not an integer"))?;
            let x: f64 = x.parse().map_err(|_| err("threshold is not a number"))?;
            let slot = seen.get_mut(i).ok_or(err("index outside 0..=28"))?;
            if slot.replace(x).is_some() {
                return Err(err("index listed twice"));
            }
        }
        let mut db = [0.0; NUM_MCS_LEVELS];
        for (c, s) in seen.iter().enumerate() {
            db[c] = s.ok_or(ChannelError::WrongLength(c))?;
        }
        SnrThresholds::new(db)
    }

    /// Highest level whose threshold is at or below `snr_db`; level 0 below
    /// the lowest threshold.
    pub fn level_for(&self, snr_db: f64) -> McsLevel {
        let above = self.0.partition_point(|&th| th <= snr_db);
        McsLevel::of(above.saturating_sub(1) as u8)
    }

    pub fn as_slice(&self) -> &[f64; NUM_MCS_LEVELS] {
        &self.0
    }
}

impl Default for SnrThresholds {
    fn default() -> SnrThresholds {
        SnrThresholds::evenly_spaced()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    fading: Fading,
    time_correlation: TimeCorrelation,
    thresholds: SnrThresholds,
    mean_snr_range_db: (f64, f64),
    seed: u64,
}

impl ChannelModel {
    pub fn new(
        fading: Fading,
        time_correlation: TimeCorrelation,
        thresholds: SnrThresholds,
        mean_snr_range_db: (f64, f64),
        seed: u64,
    ) -> Result<ChannelModel, ChannelError> {
        if let Fading::Rician { k } = fading {
            if !(k.is_finite() && k >= 0.0) {
                return Err(ChannelError::BadK(k));
            }
        }
        let (lo, hi) = mean_snr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ChannelError::BadSnrRange(lo, hi));
        }
        Ok(ChannelModel {
            fading,
            time_correlation,
            thresholds,
            mean_snr_range_db,
            seed,
        })
    }

    /// Rician with the default thresholds and a (0, 25) dB mean SNR range.
    pub fn rician(k: f64, time_correlation: TimeCorrelation, seed: u64) -> Result<ChannelModel, ChannelError> {
        ChannelModel::new(
            Fading::Rician { k },
            time_correlation,
            SnrThresholds::default(),
            (0.0, 25.0),
            seed,
        )
    }

    pub fn iid_uniform(time_correlation: TimeCorrelation, seed: u64) -> ChannelModel {
        ChannelModel {
            fading: Fading::IidUniformMcs,
            time_correlation,
            thresholds: SnrThresholds::default(),
            mean_snr_range_db: (0.0, 25.0),
            seed,
        }
    }

    pub fn fading(&self) -> Fading {
        self.fading
    }

    pub fn time_correlation(&self) -> TimeCorrelation {
        self.time_correlation
    }

    pub fn thresholds(&self) -> &SnrThresholds {
        &self.thresholds
    }

    pub fn mean_snr_range_db(&self) -> (f64, f64) {
        self.mean_snr_range_db
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> ChannelModel {
        ChannelModel { seed, ..self.clone() }
    }

    /// Random stream for one user.
    pub fn user_rng(&self, user: UserId) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ mix64(((user.mvno as u64) << 32) | user.sched_pos as u64))
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One Rician power gain `|h|^2` with unit mean. The line-of-sight part has
/// power `k / (k + 1)`, the scattered part `1 / (k + 1)`.
pub fn rician_power_gain<R: Rng + ?Sized>(rng: &mut R, k: f64) -> f64 {
    let los = libm::sqrt(k / (k + 1.0));
    let sigma = libm::sqrt(0.5 / (k + 1.0));
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let re = los + sigma * x;
    let im = sigma * y;
    re * re + im * im
}

fn power_to_db(p: f64) -> f64 {
    10.0 * libm::log10(p)
}

/// Generates the channel grid for every user of `instance`.
pub fn generate_grid(model: &ChannelModel, instance: &SlicingInstance) -> ChannelGrid {
    let (nr, nt) = (instance.num_rbs(), instance.num_ttis());
    let users: Vec<UserId> = instance.users().collect();
    let mut q = Vec::with_capacity(users.len() * nr * nt);
    let drawn_ttis = match model.time_correlation {
        TimeCorrelation::BlockConstant => 1,
        TimeCorrelation::PerTti => nt,
    };
    for &user in &users {
        let mut rng = model.user_rng(user);
        let start = q.len();
        match model.fading {
            Fading::Rician { k } => {
                let (lo, hi) = model.mean_snr_range_db;
                let mean_db = if lo < hi { rng.random_range(lo..hi) } else { lo };
                for _ in 0..drawn_ttis * nr {
                    let g = rician_power_gain(&mut rng, k);
                    let level = if g > 0.0 {
                        model.thresholds.level_for(mean_db + power_to_db(g))
                    } else {
                        McsLevel::MIN
                    };
                    q.push(level);
                }
            }
            Fading::IidUniformMcs => {
                for _ in 0..drawn_ttis * nr {
                    q.push(McsLevel::of(rng.random_range(0..NUM_MCS_LEVELS as u8)));
                }
            }
        }
        for _ in drawn_ttis..nt {
            q.extend_from_within(start..start + nr);
        }
    }
    ChannelGrid::new(users, nr, nt, q).expect("grid dimensions are consistent")
}

/// Highest level the user reaches over all RBs and TTIs.
pub fn q_max_per_user(grid: &ChannelGrid, user: UserId) -> Result<McsLevel, StructuralError> {
    let idx = grid.user_index(user).ok_or(StructuralError::UnknownUser(user))?;
    Ok(grid.user_max(idx))
}
