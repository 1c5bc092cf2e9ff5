//! Families of forbidden binary strings with an exponential size budget.
//!
//! A family holds, for each length `n`, a set of bitstrings of length
//! `n` (or, for `dim > 1`, of `n^dim` cells read row-major) together with
//! the budget exponent `alpha`: at most `floor(2^(alpha * n^dim))` strings
//! per length. `alpha` is an exact rational and every budget comparison is
//! done in integers.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::lz78_phrase_estimate;
use crate::bits::BitString;

/// Largest length `gen_lz_family` will enumerate exhaustively by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 22;

/// Largest number of strings `gen_random_family` will draw for one length.
pub const MAX_SAMPLED_PER_LENGTH: u64 = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("alpha must be a fraction p/q with 0 < p < q, got {0:?}")]
    InvalidAlpha(String),
    #[error("line {line}: missing `alpha=<p>/<q>` header")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: malformed section header {text:?}")]
    MalformedSection { line: usize, text: String },
    #[error("line {line}: bitstring before any `length` section")]
    StringOutsideSection { line: usize },
    #[error("line {line}: invalid character {found:?} at column {column}")]
    NonBit { line: usize, column: usize, found: char },
    #[error("line {line}: string has {found} cells, section length {len} needs {expected}")]
    LengthMismatch { line: usize, len: usize, expected: usize, found: usize },
    #[error("line {line}: duplicate string {text} in section {len}")]
    Duplicate { line: usize, len: usize, text: String },
    #[error("string of {found} cells does not fit length {len} (needs {expected})")]
    WrongLength { len: usize, expected: usize, found: usize },
    #[error("length {len} exceeds the enumeration cap {cap}")]
    AboveEnumerationCap { len: usize, cap: usize },
    #[error("length {len}: {count} strings requested, above the sampling limit")]
    TooManyStrings { len: usize, count: u64 },
    #[error("empty length range")]
    EmptyRange,
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

/// Budget exponent `p/q` with `0 < p < q`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alpha {
    num: u32,
    den: u32,
}

impl Alpha {
    pub fn new(num: u32, den: u32) -> Result<Self, FamilyError> {
        if num == 0 || num >= den {
            return Err(FamilyError::InvalidAlpha(format!("{num}/{den}")));
        }
        let g = num_integer::gcd(num, den);
        Ok(Alpha { num: num / g, den: den / g })
    }

    pub fn numer(&self) -> u32 {
        self.num
    }

    pub fn denom(&self) -> u32 {
        self.den
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new(self.num.into(), self.den.into())
    }

    /// `floor(2^(alpha * volume))`, saturating at `u64::MAX`.
    pub fn cap(&self, volume: usize) -> u64 {
        let exp = volume as u128 * self.num as u128;
        if exp >= 64 * self.den as u128 {
            return u64::MAX;
        }
        let power = BigUint::one() << (exp as usize);
        let root = power.nth_root(self.den);
        root.iter_u64_digits().next().unwrap_or(0)
    }

    /// Exact test `count^q <= 2^(volume * p)`.
    pub fn admits(&self, count: u64, volume: usize) -> bool {
        if count <= 1 {
            return true;
        }
        let exp = volume as u128 * self.num as u128;
        // count < 2^64, so count^q < 2^(64q)
        if exp >= 64 * self.den as u128 {
            return true;
        }
        BigUint::from(count).pow(self.den) <= BigUint::one() << (exp as usize)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Alpha {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FamilyError::InvalidAlpha(s.to_string());
        let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
        let p: u32 = p.trim().parse().map_err(|_| bad())?;
        let q: u32 = q.trim().parse().map_err(|_| bad())?;
        Alpha::new(p, q)
    }
}

/// A length whose string count exceeds `floor(2^(alpha * n^dim))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetWarning {
    pub len: usize,
    pub count: u64,
    pub cap: u64,
}

impl fmt::Display for BudgetWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "length {}: {} strings exceed the budget cap {}", self.len, self.count, self.cap)
    }
}

/// Per-length sets of forbidden strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenFamily {
    alpha: Alpha,
    dim: usize,
    entries: BTreeMap<usize, BTreeSet<BitString>>,
}

impl ForbiddenFamily {
    pub fn new(alpha: Alpha) -> Self {
        ForbiddenFamily { alpha, dim: 1, entries: BTreeMap::new() }
    }

    /// A family of `dim`-dimensional cubes keyed by side length.
    pub fn with_dim(alpha: Alpha, dim: usize) -> Result<Self, FamilyError> {
        if dim == 0 {
            return Err(FamilyError::ZeroDimension);
        }
        Ok(ForbiddenFamily { alpha, dim, entries: BTreeMap::new() })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells in a string keyed by `len`.
    pub fn volume(&self, len: usize) -> usize {
        len.pow(self.dim as u32)
    }

    /// Adds `s` under length `len`; returns whether it was new.
    pub fn insert(&mut self, len: usize, s: BitString) -> Result<bool, FamilyError> {
        let expected = self.volume(len);
        if len == 0 || s.len() != expected {
            return Err(FamilyError::WrongLength { len, expected, found: s.len() });
        }
        Ok(self.entries.entry(len).or_default().insert(s))
    }

    pub fn entries(&self) -> &BTreeMap<usize, BTreeSet<BitString>> {
        &self.entries
    }

    pub fn strings(&self, len: usize) -> impl Iterator<Item = &BitString> {
        self.entries.get(&len).into_iter().flatten()
    }

    pub fn count(&self, len: usize) -> usize {
        self.entries.get(&len).map_or(0, BTreeSet::len)
    }

    pub fn total(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_len(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    /// Whether `x` is forbidden at its own length.
    pub fn contains(&self, x: &BitString) -> bool {
        match side_for_volume(x.len(), self.dim) {
            Some(len) => self.contains_at(len, x),
            None => false,
        }
    }

    pub fn contains_at(&self, len: usize, x: &BitString) -> bool {
        self.entries.get(&len).is_some_and(|set| set.contains(x))
    }

    pub fn budget_warnings(&self) -> Vec<BudgetWarning> {
        self.entries
            .iter()
            .filter_map(|(&len, set)| {
                let count = set.len() as u64;
                let volume = self.volume(len);
                (!self.alpha.admits(count, volume)).then(|| BudgetWarning {
                    len,
                    count,
                    cap: self.alpha.cap(volume),
                })
            })
            .collect()
    }

    pub fn within_budget(&self) -> bool {
        self.budget_warnings().is_empty()
    }

    /// Keeps only the lengths `>= min_len`.
    pub fn restricted(&self, min_len: usize) -> ForbiddenFamily {
        ForbiddenFamily {
            alpha: self.alpha,
            dim: self.dim,
            entries: self.entries.range(min_len..).map(|(&k, v)| (k, v.clone())).collect(),
        }
    }

    /// Canonical text form: sections ascending by length, strings sorted.
    pub fn to_text(&self) -> String {
        let mut out = format!("alpha={}\n", self.alpha);
        if self.dim != 1 {
            out.push_str(&format!("dim={}\n", self.dim));
        }
        for (len, set) in &self.entries {
            out.push_str(&format!("length {len}\n"));
            for s in set {
                out.push_str(&s.to_string());
                out.push('\n');
            }
        }
        out
    }
}

fn side_for_volume(volume: usize, dim: usize) -> Option<usize> {
    if dim == 1 {
        return Some(volume);
    }
    let guess = (volume as f64).powf(1.0 / dim as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&s| s > 0 && s.pow(dim as u32) == volume)
}

/// A parsed family together with the budget warnings it raised.
#[derive(Clone, Debug)]
pub struct ParsedFamily {
    pub family: ForbiddenFamily,
    pub warnings: Vec<BudgetWarning>,
}

/// Parses the family file format. Budget overruns are reported as
/// warnings, not errors.
pub fn parse_family(text: &str) -> Result<ParsedFamily, FamilyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let (line, header) = lines.next().ok_or(FamilyError::MissingHeader { line: 1 })?;
    let alpha_text = header
        .strip_prefix("alpha=")
        .ok_or(FamilyError::MissingHeader { line })?;
    let alpha: Alpha = alpha_text
        .parse()
        .map_err(|_| FamilyError::MalformedHeader { line, text: header.to_string() })?;

    let mut dim = 1;
    if let Some(&(line, text)) = lines.peek() {
        if let Some(d) = text.strip_prefix("dim=") {
            dim = d
                .parse()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| FamilyError::MalformedHeader { line, text: text.to_string() })?;
            lines.next();
        }
    }

    let mut family = ForbiddenFamily::with_dim(alpha, dim)?;
    let mut section: Option<usize> = None;
    for (line, text) in lines {
        if let Some(rest) = text.strip_prefix("length") {
            let len = rest
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0 && rest.starts_with(char::is_whitespace))
                .ok_or_else(|| FamilyError::MalformedSection { line, text: text.to_string() })?;
            section = Some(len);
            continue;
        }
        let len = section.ok_or(FamilyError::StringOutsideSection { line })?;
        let s: BitString = text.parse().map_err(|e: crate::bits::BitParseError| {
            FamilyError::NonBit { line, column: e.offset + 1, found: e.found }
        })?;
        let expected = family.volume(len);
        if s.len() != expected {
            return Err(FamilyError::LengthMismatch { line, len, expected, found: s.len() });
        }
        let shown = s.to_string();
        if !family.insert(len, s)? {
            return Err(FamilyError::Duplicate { line, len, text: shown });
        }
    }
    let warnings = family.budget_warnings();
    Ok(ParsedFamily { family, warnings })
}

/// Canonical serialization; inverse of [`parse_family`].
pub fn write_family(family: &ForbiddenFamily) -> String {
    family.to_text()
}

/// Draws, for every length in `lengths`, `min(cap(n), 2^n - 1)` distinct
/// uniformly random strings.
pub fn gen_random_family(
    alpha: Alpha,
    lengths: RangeInclusive<usize>,
    seed: u64,
) -> Result<ForbiddenFamily, FamilyError> {
    gen_random_family_dim(alpha, 1, lengths, seed)
}

/// [`gen_random_family`] for `dim`-dimensional cubes of the given sides.
pub fn gen_random_family_dim(
    alpha: Alpha,
    dim: usize,
    sides: RangeInclusive<usize>,
    seed: u64,
) -> Result<ForbiddenFamily, FamilyError> {
    if sides.is_empty() || *sides.start() == 0 {
        return Err(FamilyError::EmptyRange);
    }
    let mut family = ForbiddenFamily::with_dim(alpha, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for len in sides {
        let volume = family.volume(len);
        if volume > 64 {
            return Err(FamilyError::TooManyStrings { len, count: alpha.cap(volume) });
        }
        let space: u128 = 1u128 << volume;
        let count = (alpha.cap(volume) as u128).min(space - 1) as u64;
        if count > MAX_SAMPLED_PER_LENGTH {
            return Err(FamilyError::TooManyStrings { len, count });
        }
        for value in floyd_sample(&mut rng, space, count) {
            family.insert(len, BitString::from_u64(value as u64, volume))?;
        }
    }
    Ok(family)
}

// Floyd's algorithm: `count` distinct values from `0..space`, uniformly.
fn floyd_sample<R: Rng>(rng: &mut R, space: u128, count: u64) -> Vec<u128> {
    let mut chosen = HashSet::with_capacity(count as usize);
    let mut order = Vec::with_capacity(count as usize);
    for j in (space - count as u128)..space {
        let t = rng.gen_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick);
    }
    order
}

/// A length where more strings qualified than the budget allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub len: usize,
    pub candidates: usize,
    pub kept: usize,
}

/// Forbids the strings whose LZ78 phrase count (a computable stand-in for
/// description length) is below `alpha * n`, keeping at most the budget
/// cap per length, lowest counts first, ties broken lexicographically.
pub fn gen_lz_family(
    alpha: Alpha,
    lengths: RangeInclusive<usize>,
) -> Result<(ForbiddenFamily, Vec<Truncation>), FamilyError> {
    gen_lz_family_capped(alpha, lengths, DEFAULT_ENUMERATION_CAP)
}

pub fn gen_lz_family_capped(
    alpha: Alpha,
    lengths: RangeInclusive<usize>,
    enumeration_cap: usize,
) -> Result<(ForbiddenFamily, Vec<Truncation>), FamilyError> {
    if lengths.is_empty() || *lengths.start() == 0 {
        return Err(FamilyError::EmptyRange);
    }
    if *lengths.end() > enumeration_cap {
        return Err(FamilyError::AboveEnumerationCap { len: *lengths.end(), cap: enumeration_cap });
    }
    let (p, q) = (alpha.numer() as u64, alpha.denom() as u64);
    let mut family = ForbiddenFamily::new(alpha);
    let mut truncations = Vec::new();
    for len in lengths {
        // estimate < alpha * len  <=>  estimate * q < len * p
        let mut candidates: Vec<(usize, BitString)> = (0..1u64 << len)
            .map(|v| BitString::from_u64(v, len))
            .map(|s| (lz78_phrase_estimate(s.as_slice()), s))
            .filter(|(est, _)| (*est as u64) * q < len as u64 * p)
            .collect();
        candidates.sort();
        let cap = alpha.cap(len).min(usize::MAX as u64) as usize;
        if candidates.len() > cap {
            truncations.push(Truncation { len, candidates: candidates.len(), kept: cap });
            candidates.truncate(cap);
        }
        for (_, s) in candidates {
            family.insert(len, s)?;
        }
    }
    Ok((family, truncations))
}
