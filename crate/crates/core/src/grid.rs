//! The d-dimensional scaffold: the centered cube `[-n_{j-1}, n_{j-1})^d` is
//! repeated with every shift in `(n_j Z)^d`, and fresh cells are filled from
//! the source by rank, then lexicographically (last axis fastest).
//!
//! Cells outside every configured level live on the top cube
//! `U = [-n_{t-1}, n_{t-1})^d`, which is taken to tile the plane with period
//! `2 n_{t-1}`; such a cell has rank `t + 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_integer::{Integer, Roots};
use thiserror::Error;

use crate::bits::{BitGrid, BitParseError, BitString};
use crate::scaffold::{PeriodLadder, ScaffoldError};

pub const MAX_DIM: usize = 3;
pub const MAX_REGION_VOLUME: u64 = 1 << 24;
const MAX_TOP_PERIOD: u64 = 1 << 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error(transparent)]
    Ladder(#[from] ScaffoldError),
    #[error("top period {0} is too large for grid indexing")]
    LadderTooLarge(u64),
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("region: {0}")]
    Region(String),
    #[error("region has {volume} points, limit is {MAX_REGION_VOLUME}")]
    RegionTooLarge { volume: u64 },
    #[error("source exhausted: {needed} bits needed, {provided} provided")]
    SourceExhausted { needed: u64, provided: u64 },
    #[error("cube side must be positive")]
    EmptyCube,
    #[error("cube side {k} exceeds the top period {top}")]
    LadderTooShort { k: u64, top: u64 },
    #[error("grid file line {line}: {message}")]
    File { line: usize, message: String },
    #[error("grid file line {line}: {source}")]
    Bits { line: usize, source: BitParseError },
}

/// Spiral order of `Z^2`: ring `r` holds indices `(2r-1)^2 .. (2r+1)^2`,
/// starts at `(r, -r+1)` and runs counterclockwise.
pub fn spiral_index(p: (i64, i64)) -> u64 {
    let (x, y) = p;
    let r = x.abs().max(y.abs());
    if r == 0 {
        return 0;
    }
    let base = (2 * r - 1) * (2 * r - 1);
    let offset = if x == r && y > -r {
        y + r - 1
    } else if y == r {
        2 * r + (r - 1 - x)
    } else if x == -r {
        4 * r + (r - 1 - y)
    } else {
        6 * r + (x + r - 1)
    };
    (base + offset) as u64
}

pub fn spiral_point(index: u64) -> (i64, i64) {
    if index == 0 {
        return (0, 0);
    }
    let r = (index.sqrt() as i64 + 1) / 2;
    let offset = index as i64 - (2 * r - 1) * (2 * r - 1);
    let (side, step) = (offset / (2 * r), offset % (2 * r));
    match side {
        0 => (r, -r + 1 + step),
        1 => (r - 1 - step, r),
        2 => (-r, r - 1 - step),
        _ => (-r + 1 + step, -r),
    }
}

/// Axis-aligned box `[lo_u, hi_u)` per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridRegion {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl GridRegion {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self, GridError> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > MAX_DIM {
            return Err(GridError::Dimension(lo.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(GridError::Region("every range needs lo < hi".into()));
        }
        let region = GridRegion { lo, hi };
        let volume = region.volume();
        if volume > MAX_REGION_VOLUME {
            return Err(GridError::RegionTooLarge { volume });
        }
        Ok(region)
    }

    /// The cube `[lo_u, lo_u + k)` per axis.
    pub fn cube(lo: Vec<i64>, k: u64) -> Result<Self, GridError> {
        let hi = lo.iter().map(|&a| a + k as i64).collect();
        GridRegion::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, axis: usize) -> u64 {
        (self.hi[axis] - self.lo[axis]) as u64
    }

    pub fn volume(&self) -> u64 {
        (0..self.dim()).fold(1u64, |v, u| v.saturating_mul(self.side(u)))
    }

    /// Points in row-major order, last axis fastest.
    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let volume = self.volume();
        (0..volume).map(move |mut i| {
            let mut p = vec![0; self.dim()];
            for u in (0..self.dim()).rev() {
                let side = self.side(u);
                p[u] = self.lo[u] + (i % side) as i64;
                i /= side;
            }
            p
        })
    }
}

impl fmt::Display for GridRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(a, b)| format!("{a}..{b}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl FromStr for GridRegion {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in s.trim().split('x') {
            let (a, b) = part.split_once("..").ok_or_else(|| GridError::Region(format!("expected a..b, got {part:?}")))?;
            let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| GridError::Region(format!("bad bound {t:?}")));
            lo.push(parse(a)?);
            hi.push(parse(b)?);
        }
        GridRegion::new(lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPositionInfo {
    pub point: Vec<i64>,
    pub rank: usize,
    pub is_primary: bool,
    pub representative: Vec<i64>,
    pub source_index: u64,
}

/// Period chain with its dimension and the per-level counting tables.
#[derive(Debug)]
pub struct GridLadder {
    dim: usize,
    periods: Vec<u64>,
    // prefix-count tables, one per subset of levels 1..t-1
    tables: Vec<OnceLock<Vec<u32>>>,
    // fill-order offset of each rank, indexed by rank position
    offsets: Vec<u64>,
}

impl Clone for GridLadder {
    fn clone(&self) -> Self {
        GridLadder::new(self.dim, self.periods.clone()).expect("already validated")
    }
}

impl PartialEq for GridLadder {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.periods == other.periods
    }
}

impl GridLadder {
    pub fn new(dim: usize, periods: Vec<u64>) -> Result<Self, GridError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GridError::Dimension(dim));
        }
        PeriodLadder::new(periods.clone())?;
        let top = *periods.last().expect("nonempty");
        if top > MAX_TOP_PERIOD {
            return Err(GridError::LadderTooLarge(top));
        }
        let levels = periods.len() - 1;
        let tables = (0..1usize << levels).map(|_| OnceLock::new()).collect();
        let mut ladder = GridLadder { dim, periods, tables, offsets: Vec::new() };
        let mut acc = 0u64;
        let mut offsets = Vec::new();
        for rank in ladder.ranks() {
            offsets.push(acc);
            acc += ladder.rank_size(rank);
        }
        offsets.push(acc);
        ladder.offsets = offsets;
        Ok(ladder)
    }

    pub fn from_ladder(dim: usize, ladder: &PeriodLadder) -> Result<Self, GridError> {
        GridLadder::new(dim, ladder.periods().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    pub fn depth(&self) -> usize {
        self.periods.len()
    }

    fn n(&self, j: usize) -> i64 {
        self.periods[j] as i64
    }

    pub fn top_rank(&self) -> usize {
        self.depth() + 1
    }

    /// Ranks in fill order: `1..t`, then `t + 1`.
    pub fn ranks(&self) -> impl Iterator<Item = usize> {
        let t = self.depth();
        (1..t).chain(std::iter::once(t + 1))
    }

    fn rank_slot(&self, rank: usize) -> usize {
        if rank == self.top_rank() {
            self.depth() - 1
        } else {
            rank - 1
        }
    }

    /// Half-width of the cube holding the primaries of `rank`.
    fn half_width(&self, rank: usize) -> i64 {
        if rank == self.top_rank() {
            self.n(self.depth() - 1)
        } else {
            self.n(rank - 1)
        }
    }

    /// Whether coordinate `x` is within `n_{level-1}` of a multiple of
    /// `n_level`, shifted to `[-n_{level-1}, n_{level-1})`.
    fn coord_at_level(&self, x: i64, level: usize) -> bool {
        (x + self.n(level - 1)).mod_floor(&self.n(level)) < 2 * self.n(level - 1)
    }

    /// Whether `p` is duplicated with period `n_level`.
    pub fn level_member(&self, p: &[i64], level: usize) -> bool {
        assert!(level >= 1 && level < self.depth(), "level out of range");
        p.iter().all(|&x| self.coord_at_level(x, level))
    }

    pub fn rank(&self, p: &[i64]) -> usize {
        (1..self.depth()).find(|&j| self.level_member(p, j)).unwrap_or(self.top_rank())
    }

    pub fn representative(&self, p: &[i64]) -> Vec<i64> {
        let rank = self.rank(p);
        let (h, period) = if rank == self.top_rank() {
            let top = self.n(self.depth() - 1);
            (top, 2 * top)
        } else {
            (self.n(rank - 1), self.n(rank))
        };
        p.iter().map(|&x| (x + h).mod_floor(&period) - h).collect()
    }

    fn table(&self, mask: usize) -> &[u32] {
        self.tables[mask].get_or_init(|| {
            let top_level = usize::BITS as usize - mask.leading_zeros() as usize;
            let period = self.n(top_level);
            let mut table = Vec::with_capacity(period as usize + 1);
            let mut acc = 0u32;
            table.push(0);
            for x in 0..period {
                if (0..top_level).filter(|b| mask >> b & 1 == 1).all(|b| self.coord_at_level(x, b + 1)) {
                    acc += 1;
                }
                table.push(acc);
            }
            table
        })
    }

    // #{x in [0, y) : x in every level of `mask`}, signed for y < 0
    fn prefix(&self, mask: usize, y: i64) -> i64 {
        if mask == 0 {
            return y;
        }
        let table = self.table(mask);
        let period = (table.len() - 1) as i64;
        let (q, r) = y.div_mod_floor(&period);
        q * table[period as usize] as i64 + table[r as usize] as i64
    }

    fn count_range(&self, mask: usize, lo: i64, hi: i64) -> i64 {
        self.prefix(mask, hi) - self.prefix(mask, lo)
    }

    fn excluded_masks(&self, rank: usize) -> impl Iterator<Item = usize> {
        let below = rank.min(self.depth()) - 1;
        0..1usize << below
    }

    fn rank_size(&self, rank: usize) -> u64 {
        let h = self.half_width(rank);
        let total: i128 = self
            .excluded_masks(rank)
            .map(|mask| {
                let side = self.count_range(mask, -h, h) as i128;
                sign(mask) * side.pow(self.dim as u32)
            })
            .sum();
        total as u64
    }

    /// Number of primary cells of `rank` lexicographically below `q`.
    fn lex_rank(&self, rank: usize, q: &[i64]) -> u64 {
        let h = self.half_width(rank);
        let total: i128 = self
            .excluded_masks(rank)
            .map(|mask| {
                let side = self.count_range(mask, -h, h) as i128;
                let mut sum = 0i128;
                let mut prefix_in = true;
                for (u, &x) in q.iter().enumerate() {
                    if !prefix_in {
                        break;
                    }
                    let below = self.count_range(mask, -h, x.clamp(-h, h)) as i128;
                    sum += below * side.pow((self.dim - 1 - u) as u32);
                    let member = (-h..h).contains(&x)
                        && (0..self.depth() - 1).filter(|b| mask >> b & 1 == 1).all(|b| self.coord_at_level(x, b + 1));
                    prefix_in = member;
                }
                sign(mask) * sum
            })
            .sum();
        total as u64
    }

    /// Total number of primary cells: the source length one period needs.
    pub fn fresh_total(&self) -> u64 {
        *self.offsets.last().expect("offsets")
    }

    pub fn classify(&self, p: &[i64]) -> GridPositionInfo {
        assert_eq!(p.len(), self.dim, "point dimension");
        let rank = self.rank(p);
        let representative = self.representative(p);
        let source_index = self.offsets[self.rank_slot(rank)] + self.lex_rank(rank, &representative);
        GridPositionInfo {
            point: p.to_vec(),
            is_primary: representative == p,
            rank,
            representative,
            source_index,
        }
    }
}

fn sign(mask: usize) -> i128 {
    if mask.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn classify_point(p: &[i64], ladder: &GridLadder) -> GridPositionInfo {
    ladder.classify(p)
}

/// Bits over a region, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridData {
    pub region: GridRegion,
    pub bits: Vec<u8>,
}

impl GridData {
    pub fn get(&self, p: &[i64]) -> Option<u8> {
        let mut index = 0u64;
        for (u, &x) in p.iter().enumerate() {
            if x < self.region.lo[u] || x >= self.region.hi[u] {
                return None;
            }
            index = index * self.region.side(u) + (x - self.region.lo[u]) as u64;
        }
        Some(self.bits[index as usize])
    }

    /// Header `d=<d> region=<a..b>x...`, then one line per setting of all
    /// axes but the last.
    pub fn to_text(&self) -> String {
        let d = self.region.dim();
        let width = self.region.side(d - 1) as usize;
        let mut out = format!("d={d} region={}\n", self.region);
        for line in self.bits.chunks(width) {
            out.push_str(&BitString::from_bits(line.iter().copied()).to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(GridError::File { line: 1, message: "missing header".into() })?;
        let bad_header = || GridError::File { line, message: format!("expected `d=<d> region=...`, got {header:?}") };
        let mut parts = header.split_whitespace();
        let d: usize = parts.next().and_then(|p| p.strip_prefix("d=")).and_then(|v| v.parse().ok()).ok_or_else(bad_header)?;
        let region: GridRegion = parts.next().and_then(|p| p.strip_prefix("region=")).ok_or_else(bad_header)?.parse()?;
        if region.dim() != d || parts.next().is_some() {
            return Err(bad_header());
        }
        let width = region.side(d - 1) as usize;
        let mut bits = Vec::with_capacity(region.volume() as usize);
        for (line, text) in lines {
            let row: BitString = text.parse().map_err(|source| GridError::Bits { line, source })?;
            if row.len() != width {
                return Err(GridError::File { line, message: format!("expected {width} cells, found {}", row.len()) });
            }
            bits.extend(row.into_vec());
        }
        if bits.len() as u64 != region.volume() {
            return Err(GridError::File { line: 0, message: format!("expected {} cells in total, found {}", region.volume(), bits.len()) });
        }
        Ok(GridData { region, bits })
    }

    /// Rows along the first axis, columns along the second.
    pub fn to_bit_grid(&self) -> Option<BitGrid> {
        (self.region.dim() == 2).then(|| {
            BitGrid::from_cells(self.region.side(0) as usize, self.region.side(1) as usize, self.bits.clone())
        })
    }
}

fn take_source<I: IntoIterator<Item = u8>>(source: I, needed: u64) -> Result<Vec<u8>, GridError> {
    let v: Vec<u8> = source.into_iter().take(needed as usize).collect();
    if (v.len() as u64) < needed {
        return Err(GridError::SourceExhausted { needed, provided: v.len() as u64 });
    }
    Ok(v)
}

/// Fills `region` with the source bit of each point's representative.
pub fn build_grid<I: IntoIterator<Item = u8>>(source: I, ladder: &GridLadder, region: &GridRegion) -> Result<GridData, GridError> {
    if region.dim() != ladder.dim() {
        return Err(GridError::Dimension(region.dim()));
    }
    let indices: Vec<u64> = region.points().map(|p| ladder.classify(&p).source_index).collect();
    let needed = indices.iter().max().map_or(0, |&m| m + 1);
    let v = take_source(source, needed)?;
    Ok(GridData { region: region.clone(), bits: indices.iter().map(|&i| (v[i as usize] != 0) as u8).collect() })
}

/// Writes the source along the spiral, without any periodic structure.
pub fn build_spiral_grid<I: IntoIterator<Item = u8>>(source: I, region: &GridRegion) -> Result<GridData, GridError> {
    if region.dim() != 2 {
        return Err(GridError::Dimension(region.dim()));
    }
    let indices: Vec<u64> = region.points().map(|p| spiral_index((p[0], p[1]))).collect();
    let needed = indices.iter().max().map_or(0, |&m| m + 1);
    let v = take_source(source, needed)?;
    Ok(GridData { region: region.clone(), bits: indices.iter().map(|&i| (v[i as usize] != 0) as u8).collect() })
}

/// Source runs of a cube after dropping cells of rank below the cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeDecomposition {
    pub cube: GridRegion,
    pub side: u64,
    pub cutoff_rank: usize,
    /// Half-open source intervals, sorted and disjoint.
    pub intervals: Vec<(u64, u64)>,
    pub small_rank_count: u64,
    pub total_len: u64,
    pub density_bound_holds: bool,
}

impl CubeDecomposition {
    pub fn interval_bound(&self) -> u64 {
        4 * self.side.pow(self.cube.dim() as u32 - 1)
    }
}

pub fn decompose_cube(lo: &[i64], k: u64, ladder: &GridLadder) -> Result<CubeDecomposition, GridError> {
    if k == 0 {
        return Err(GridError::EmptyCube);
    }
    let top = *ladder.periods().last().expect("nonempty");
    if k > top {
        return Err(GridError::LadderTooShort { k, top });
    }
    if lo.len() != ladder.dim() {
        return Err(GridError::Dimension(lo.len()));
    }
    let cube = GridRegion::cube(lo.to_vec(), k)?;
    let cutoff = ladder.periods().iter().position(|&n| n >= k).expect("top covers k");

    let mut small = 0u64;
    let mut runs: Vec<(u64, u64)> = Vec::new();
    for p in cube.points() {
        let info = ladder.classify(&p);
        if info.rank < cutoff {
            small += 1;
            continue;
        }
        match runs.last_mut() {
            Some((_, end)) if *end == info.source_index => *end += 1,
            _ => runs.push((info.source_index, info.source_index + 1)),
        }
    }
    runs.sort_unstable();
    let total_len = runs.iter().map(|(a, b)| b - a).sum();

    // small / k^d <= 4 * sum_{j<i} n_{j-1}/n_j, cross-multiplied over n_{i-1}
    let p = ladder.periods();
    let volume = k.pow(ladder.dim() as u32) as u128;
    let density_bound_holds = if cutoff <= 1 {
        small == 0
    } else {
        let common = p[cutoff - 1] as u128;
        let sum: u128 = (1..cutoff).map(|j| p[j - 1] as u128 * (common / p[j] as u128)).sum();
        small as u128 * common <= 4 * sum * volume
    };
    Ok(CubeDecomposition { cube, side: k, cutoff_rank: cutoff, intervals: runs, small_rank_count: small, total_len, density_bound_holds })
}
