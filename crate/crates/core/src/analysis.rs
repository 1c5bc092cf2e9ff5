//! Independent verifiers and empirical diagnostics.
//!
//! The checkers here are deliberately naive and share no code with the
//! optimized scanners in [`crate::avoider`]; they serve as oracles.

use std::fmt;

use crate::bits::{BitGrid, BitString};
use crate::forbidden::ForbiddenFamily;
use crate::scaffold::{PeriodLadder, ScaffoldError};

/// Number of phrases in the LZ78 incremental parse of `x`.
///
/// Each phrase is the longest already-seen phrase plus one more bit. A
/// trailing piece that matches a known phrase counts as one final phrase.
/// This is a computable proxy for description length, nothing more.
pub fn lz78_phrase_estimate(x: &[u8]) -> usize {
    // trie over {0,1}; node 0 is the empty phrase, 0 marks a missing child
    let mut children: Vec<[u32; 2]> = vec![[0, 0]];
    let mut node = 0usize;
    let mut phrases = 0;
    for &bit in x {
        let b = (bit != 0) as usize;
        let next = children[node][b];
        if next == 0 {
            children[node][b] = children.len() as u32;
            children.push([0, 0]);
            phrases += 1;
            node = 0;
        } else {
            node = next as usize;
        }
    }
    phrases + usize::from(node != 0)
}

/// First window `[start, start+len)` of `x` with `len >= min_len` whose
/// content is forbidden, ordered by `(start, len)`.
pub fn verify_avoidance(x: &BitString, family: &ForbiddenFamily, min_len: usize) -> Option<(usize, usize)> {
    let bits = x.as_slice();
    for start in 0..bits.len() {
        for (&len, set) in family.entries().range(min_len..) {
            if start + len > bits.len() {
                break;
            }
            if set.iter().any(|f| f.as_slice() == &bits[start..start + len]) {
                return Some((start, len));
            }
        }
    }
    None
}

/// Square analogue of [`verify_avoidance`]: first `(row, col, side)` in
/// row-major order whose square is forbidden.
pub fn verify_grid_avoidance(grid: &BitGrid, family: &ForbiddenFamily, min_side: usize) -> Option<(usize, usize, usize)> {
    for row in 0..grid.rows() {
        for col in 0..grid.cols() {
            for (&side, _) in family.entries().range(min_side..) {
                if row + side > grid.rows() || col + side > grid.cols() {
                    break;
                }
                if family.contains_at(side, &grid.square(row, col, side)) {
                    return Some((row, col, side));
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceReport {
    pub pattern: BitString,
    pub occurrences: Vec<usize>,
    pub max_gap: Option<usize>,
    pub window_k: Option<usize>,
}

impl RecurrenceReport {
    /// `pattern,occurrences,max_gap,window_k`, undefined fields left empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        format!("{},{},{},{}", self.pattern, self.occurrences.len(), opt(self.max_gap), opt(self.window_k))
    }
}

pub const RECURRENCE_CSV_HEADER: &str = "pattern,occurrences,max_gap,window_k";

pub fn recurrence_gap(prefix: &BitString, x: &BitString) -> RecurrenceReport {
    let (hay, needle) = (prefix.as_slice(), x.as_slice());
    let occurrences: Vec<usize> = if needle.len() > hay.len() {
        Vec::new()
    } else {
        (0..=hay.len() - needle.len()).filter(|&i| &hay[i..i + needle.len()] == needle).collect()
    };
    let max_gap = occurrences.windows(2).map(|w| w[1] - w[0]).max();
    RecurrenceReport {
        pattern: x.clone(),
        window_k: max_gap.map(|g| g + x.len()),
        max_gap,
        occurrences,
    }
}

/// Position of the first bit that breaks the repetition of `[0, n_s)`
/// with period `n_{s+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodicityViolation {
    pub level: usize,
    pub position: usize,
}

impl fmt::Display for PeriodicityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {}: bit at position {} differs from its prefix copy", self.level, self.position)
    }
}

/// Checks that every block `ω[p, p+n_s)` with `p` a multiple of `n_{s+1}`
/// and `p + n_s <= |ω|` equals the prefix `ω[0, n_s)`. When no full block
/// fits the check is vacuously true.
pub fn verify_ladder_periodicity(
    omega: &BitString,
    ladder: &PeriodLadder,
    s: usize,
) -> Result<Result<(), PeriodicityViolation>, ScaffoldError> {
    if s + 1 >= ladder.depth() {
        return Err(ScaffoldError::LevelOutOfRange { level: s, needed: s + 2 });
    }
    let bits = omega.as_slice();
    let span = ladder.period(s) as usize;
    let period = ladder.period(s + 1) as usize;
    let mut p = period;
    while p + span <= bits.len() {
        if let Some(i) = (0..span).find(|&i| bits[p + i] != bits[i]) {
            return Ok(Err(PeriodicityViolation { level: s, position: p + i }));
        }
        p += period;
    }
    Ok(Ok(()))
}

/// [`verify_ladder_periodicity`] for every level `s < t - 1`.
pub fn verify_ladder_all(omega: &BitString, ladder: &PeriodLadder) -> Result<(), PeriodicityViolation> {
    for s in 0..ladder.depth().saturating_sub(1) {
        verify_ladder_periodicity(omega, ladder, s).expect("level in range")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub length: usize,
    pub windows: usize,
    pub min_estimate: usize,
    pub estimate_sum: u64,
}

impl ProfileRow {
    pub fn mean_estimate(&self) -> f64 {
        self.estimate_sum as f64 / self.windows as f64
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.6}", self.length, self.min_estimate, self.mean_estimate())
    }
}

pub const PROFILE_CSV_HEADER: &str = "length,min_estimate,mean_estimate";

/// Minimum and mean LZ78 phrase count over all windows of each length.
/// Lengths longer than `ω` are skipped.
pub fn complexity_profile(omega: &BitString, lengths: &[usize]) -> Vec<ProfileRow> {
    let bits = omega.as_slice();
    lengths
        .iter()
        .filter(|&&len| len > 0 && len <= bits.len())
        .map(|&length| {
            let estimates = bits.windows(length).map(lz78_phrase_estimate);
            let (mut min, mut sum, mut windows) = (usize::MAX, 0u64, 0usize);
            for e in estimates {
                min = min.min(e);
                sum += e as u64;
                windows += 1;
            }
            ProfileRow { length, windows, min_estimate: min, estimate_sum: sum }
        })
        .collect()
}
