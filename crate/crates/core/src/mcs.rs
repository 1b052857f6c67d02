//! MCS levels, exact rates and the per-RB bit table.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Sub};
use core::str::FromStr;

use thiserror::Error;

/// Number of MCS levels, `0..=28`.
pub const NUM_MCS_LEVELS: usize = 29;

/// Resource elements per RB: 12 subcarriers x 14 symbols.
pub const RES_ELEMENTS_PER_RB: u64 = 12 * 14;

const DEFAULT_TABLE: &str = include_str!("../data/mcs_efficiency.txt");

/// An MCS index in `0..=28`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct McsLevel(u8);

impl McsLevel {
    pub const MIN: McsLevel = McsLevel(0);
    pub const MAX: McsLevel = McsLevel(28);

    pub const fn new(index: u8) -> Option<McsLevel> {
        if (index as usize) < NUM_MCS_LEVELS {
            Some(McsLevel(index))
        } else {
            None
        }
    }

    /// Panics if `index > 28`. Intended for literals in tests and tables.
    pub const fn of(index: u8) -> McsLevel {
        match McsLevel::new(index) {
            Some(level) => level,
            None => panic!("MCS index out of range"),
        }
    }

    pub const fn index(self) -> u8 {
        self.0
    }

    /// All levels from `self` down to `low`, inclusive. Empty if `low > self`.
    pub fn down_to(self, low: McsLevel) -> impl Iterator<Item = McsLevel> {
        (low.0..=self.0).rev().map(McsLevel)
    }

    pub fn all() -> impl Iterator<Item = McsLevel> {
        (0..NUM_MCS_LEVELS as u8).map(McsLevel)
    }
}

impl fmt::Display for McsLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A bit count held as an exact fixed-point number with four decimal digits.
///
/// Spectral efficiencies are tabulated to four decimals, so every per-RB
/// rate and every sum of them is representable without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rate(u64);

impl Rate {
    /// Raw units per bit.
    pub const SCALE: u64 = 10_000;
    pub const ZERO: Rate = Rate(0);

    pub const fn from_raw(raw: u64) -> Rate {
        Rate(raw)
    }

    pub const fn from_bits(bits: u64) -> Rate {
        Rate(bits * Rate::SCALE)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }

    pub fn as_bits_f64(self) -> f64 {
        self.0 as f64 / Rate::SCALE as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, other: Rate) -> Option<Rate> {
        self.0.checked_add(other.0).map(Rate)
    }

    pub fn saturating_sub(self, other: Rate) -> Rate {
        Rate(self.0.saturating_sub(other.0))
    }

    /// Smallest `n` with `n * per_unit >= self`; `None` when `per_unit` is zero
    /// and `self` is not.
    pub fn units_needed(self, per_unit: Rate) -> Option<u64> {
        if self.0 == 0 {
            Some(0)
        } else if per_unit.0 == 0 {
            None
        } else {
            Some(self.0.div_ceil(per_unit.0))
        }
    }
}

impl Add for Rate {
    type Output = Rate;
    fn add(self, rhs: Rate) -> Rate {
        Rate(self.0 + rhs.0)
    }
}

impl AddAssign for Rate {
    fn add_assign(&mut self, rhs: Rate) {
        self.0 += rhs.0;
    }
}

impl Sub for Rate {
    type Output = Rate;
    fn sub(self, rhs: Rate) -> Rate {
        Rate(self.0 - rhs.0)
    }
}

impl Mul<u64> for Rate {
    type Output = Rate;
    fn mul(self, rhs: u64) -> Rate {
        Rate(self.0 * rhs)
    }
}

impl core::iter::Sum for Rate {
    fn sum<I: Iterator<Item = Rate>>(iter: I) -> Rate {
        iter.fold(Rate::ZERO, |a, b| a + b)
    }
}

/// Formats as an exact decimal bit count, e.g. `39.3792` or `500000`.
impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.0 / Rate::SCALE;
        let mut frac = self.0 % Rate::SCALE;
        if frac == 0 {
            return write!(f, "{int}");
        }
        let mut width = 4;
        while frac.is_multiple_of(10) {
            frac /= 10;
            width -= 1;
        }
        write!(f, "{int}.{frac:0width$}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal `{0}` (expected a non-negative number with at most 4 decimals)")]
pub struct ParseRateError(pub alloc::string::String);

/// Parses an exact decimal bit count.
impl FromStr for Rate {
    type Err = ParseRateError;

    fn from_str(s: &str) -> Result<Rate, ParseRateError> {
        parse_fixed4(s)
            .map(Rate)
            .ok_or_else(|| ParseRateError(s.into()))
    }
}

/// Parses a non-negative decimal into units of 1e-4, rejecting anything that
/// would need rounding.
pub(crate) fn parse_fixed4(s: &str) -> Option<u64> {
    let s = s.trim();
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) {
        return None;
    }
    let frac = frac.trim_end_matches('0');
    if frac.len() > 4 {
        return None;
    }
    let int_val: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let mut frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    for _ in frac.len()..4 {
        frac_val *= 10;
    }
    int_val.checked_mul(Rate::SCALE)?.checked_add(frac_val)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McsTableError {
    #[error("table has {0} entries, expected 29")]
    WrongLength(usize),
    #[error("bits per RB decrease from MCS {prev} to MCS {next}")]
    Decreasing { prev: u8, next: u8 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: &'static str },
    #[error("MCS index {0} listed twice")]
    Duplicate(u8),
    #[error("MCS index {0} missing")]
    Missing(u8),
}

/// Bits carried by one RB in one TTI at each MCS level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsTable {
    bits_per_rb: [Rate; NUM_MCS_LEVELS],
}

impl McsTable {
    pub fn new(bits_per_rb: [Rate; NUM_MCS_LEVELS]) -> Result<McsTable, McsTableError> {
        for c in 1..NUM_MCS_LEVELS {
            if bits_per_rb[c] < bits_per_rb[c - 1] {
                return Err(McsTableError::Decreasing {
                    prev: c as u8 - 1,
                    next: c as u8,
                });
            }
        }
        Ok(McsTable { bits_per_rb })
    }

    pub fn from_slice(bits_per_rb: &[Rate]) -> Result<McsTable, McsTableError> {
        let arr: [Rate; NUM_MCS_LEVELS] = bits_per_rb
            .try_into()
            .map_err(|_| McsTableError::WrongLength(bits_per_rb.len()))?;
        McsTable::new(arr)
    }

    /// `v^c = c` bits; handy for hand-checked examples.
    pub fn toy() -> McsTable {
        let mut bits = [Rate::ZERO; NUM_MCS_LEVELS];
        for (c, b) in bits.iter_mut().enumerate() {
            *b = Rate::from_bits(c as u64);
        }
        McsTable { bits_per_rb: bits }
    }

    /// The shipped 3GPP efficiency table scaled to bits per RB.
    pub fn standard() -> McsTable {
        McsTable::parse_efficiency(DEFAULT_TABLE).expect("bundled MCS table is valid")
    }

    /// Parses the efficiency file format: one `index efficiency` pair per
    /// line, `#` comments and blank lines ignored, all 29 indices present.
    /// Efficiencies are bits per resource element with up to four decimals;
    /// bits per RB are `efficiency * 168`.
    pub fn parse_efficiency(text: &str) -> Result<McsTable, McsTableError> {
        let mut seen = [None::<Rate>; NUM_MCS_LEVELS];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let line_no = lineno + 1;
            let mut parts = line.split_whitespace();
            let (Some(idx), Some(eff), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(McsTableError::Parse {
                    line: line_no,
                    reason: "expected `index efficiency`",
                });
            };
            let idx: u8 = idx.parse().map_err(|_| McsTableError::Parse {
                line: line_no,
                reason: "index is not an integer",
            })?;
            if McsLevel::new(idx).is_none() {
                return Err(McsTableError::Parse {
                    line: line_no,
                    reason: "index outside 0..=28",
                });
            }
            let eff = parse_fixed4(eff).ok_or(McsTableError::Parse {
                line: line_no,
                reason: "efficiency must be a non-negative decimal with at most 4 decimals",
            })?;
            let slot = &mut seen[idx as usize];
            if slot.is_some() {
                return Err(McsTableError::Duplicate(idx));
            }
            *slot = Some(Rate::from_raw(eff * RES_ELEMENTS_PER_RB));
        }
        let mut bits = [Rate::ZERO; NUM_MCS_LEVELS];
        for (c, s) in seen.iter().enumerate() {
            bits[c] = s.ok_or(McsTableError::Missing(c as u8))?;
        }
        McsTable::new(bits)
    }

    pub fn bits(&self, c: McsLevel) -> Rate {
        self.bits_per_rb[c.index() as usize]
    }

    pub fn as_slice(&self) -> &[Rate; NUM_MCS_LEVELS] {
        &self.bits_per_rb
    }
}

impl Default for McsTable {
    fn default() -> McsTable {
        McsTable::standard()
    }
}
