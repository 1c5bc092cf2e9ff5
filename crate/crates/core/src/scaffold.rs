//! Nested-period equivalence scaffold for almost periodic sequences.
//!
//! A [`PeriodLadder`] `n_0 | n_1 | ... | n_{t-1}` makes every position
//! `i < n_s` equivalent to `i + k * n_{s+1}`. Writing a position in mixed
//! radix (radix `n_0` for the last digit, `n_j / n_{j-1}` for digit `j`),
//! its rank is the index of the lowest zero digit above digit 0, and its
//! class representative is the position reduced modulo `n_rank`. Positions
//! with no zero digit among the configured ones are never duplicated; they
//! get rank `t + 1` and are always primary.
//!
//! Primary positions (the leftmost member of each class) consume fresh
//! source bits from left to right; every other position copies its
//! representative. All counts here are closed-form digit computations, so
//! classifying one position costs `O(t^2)` word operations.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScaffoldError {
    #[error("ladder needs at least one period")]
    EmptyLadder,
    #[error("period n_0 must be positive")]
    ZeroPeriod,
    #[error("periods n_{index}={prev} and n_{next_index}={next} are not strictly increasing", next_index = index + 1)]
    NotIncreasing { index: usize, prev: u64, next: u64 },
    #[error("period n_{next_index}={next} is not a multiple of n_{index}={prev}", next_index = index + 1)]
    NotDivisible { index: usize, prev: u64, next: u64 },
    #[error("cannot parse ladder entry {0:?}")]
    Parse(String),
    #[error("window length {k} exceeds the top period {top}")]
    LadderTooShort { k: u64, top: u64 },
    #[error("window length must be positive")]
    EmptyWindow,
    #[error("source exhausted after {provided} bits, {needed} needed")]
    SourceExhausted { needed: u64, provided: u64 },
    #[error("recovered position {0} is negative")]
    NegativePosition(i128),
    #[error("level {level} needs at least {needed} periods in the ladder")]
    LevelOutOfRange { level: usize, needed: usize },
}

/// Strictly increasing divisibility chain of periods.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodLadder {
    periods: Vec<u64>,
    // full[m] = number of y < n_m whose digits 1..=m are all nonzero
    full: Vec<u64>,
}

impl PeriodLadder {
    pub fn new(periods: Vec<u64>) -> Result<Self, ScaffoldError> {
        let first = *periods.first().ok_or(ScaffoldError::EmptyLadder)?;
        if first == 0 {
            return Err(ScaffoldError::ZeroPeriod);
        }
        for (index, pair) in periods.windows(2).enumerate() {
            let (prev, next) = (pair[0], pair[1]);
            if next <= prev {
                return Err(ScaffoldError::NotIncreasing { index, prev, next });
            }
            if next % prev != 0 {
                return Err(ScaffoldError::NotDivisible { index, prev, next });
            }
        }
        let mut full = Vec::with_capacity(periods.len());
        full.push(first);
        for m in 1..periods.len() {
            let radix = periods[m] / periods[m - 1];
            full.push(full[m - 1] * (radix - 1));
        }
        Ok(PeriodLadder { periods, full })
    }

    /// A ladder of depth `depth` starting at `n0` whose ratio sum
    /// `sum_j n_{j-1}/n_j` stays below `eps_num / eps_den`.
    ///
    /// Radices are `c * 2^j` with `c = floor(eps_den / eps_num) + 1`, so the
    /// sum is below `1/c < eps`.
    pub fn generate(n0: u64, depth: usize, eps_num: u64, eps_den: u64) -> Result<Self, ScaffoldError> {
        assert!(eps_num > 0 && eps_den > 0);
        let c = eps_den / eps_num + 1;
        let mut periods = vec![n0];
        for j in 1..depth {
            let radix = c << j;
            periods.push(periods[j - 1] * radix);
        }
        PeriodLadder::new(periods)
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    /// Number of configured periods `t`.
    pub fn depth(&self) -> usize {
        self.periods.len()
    }

    pub fn period(&self, j: usize) -> u64 {
        self.periods[j]
    }

    pub fn top(&self) -> u64 {
        *self.periods.last().expect("ladder is nonempty")
    }

    /// Radix of digit `j`: `n_0` for `j = 0`, `n_j / n_{j-1}` above.
    pub fn radix(&self, j: usize) -> u64 {
        if j == 0 {
            self.periods[0]
        } else {
            self.periods[j] / self.periods[j - 1]
        }
    }

    /// Rank given to positions above every configured level.
    pub fn unbounded_rank(&self) -> usize {
        self.depth() + 1
    }

    /// Mixed-radix digits `d_0 .. d_{t-1}` followed by the unbounded top digit.
    pub fn digits(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.depth() + 1);
        out.push(x % self.periods[0]);
        for j in 1..self.depth() {
            out.push((x / self.periods[j - 1]) % self.radix(j));
        }
        out.push(x / self.top());
        out
    }

    /// Smallest `j >= 1` with digit `j` zero, or `t + 1`.
    pub fn rank(&self, x: u64) -> usize {
        (1..self.depth())
            .find(|&j| x % self.periods[j] < self.periods[j - 1])
            .unwrap_or(self.unbounded_rank())
    }

    pub fn representative(&self, x: u64) -> u64 {
        let rank = self.rank(x);
        if rank < self.depth() {
            x % self.periods[rank]
        } else {
            x
        }
    }

    pub fn is_primary(&self, x: u64) -> bool {
        self.representative(x) == x
    }

    // #{y < bound : digits 1..=m of y nonzero}, for bound <= n_m
    fn nonzero_digit_count(&self, m: usize, bound: u64) -> u64 {
        if m == 0 {
            return bound;
        }
        let block = self.periods[m - 1];
        let (q, rem) = (bound / block, bound % block);
        if q == 0 {
            0
        } else {
            (q - 1) * self.full[m - 1] + self.nonzero_digit_count(m - 1, rem)
        }
    }

    /// Number of primary positions in `[0, n)`.
    pub fn primary_count(&self, n: u64) -> u64 {
        let mut secondary = 0;
        for j in 1..self.depth() {
            let (nj, prev) = (self.periods[j], self.periods[j - 1]);
            let in_class = (n / nj) * self.full[j - 1] + self.nonzero_digit_count(j - 1, (n % nj).min(prev));
            let primaries = self.nonzero_digit_count(j - 1, n.min(prev));
            secondary += in_class - primaries;
        }
        n - secondary
    }

    /// The primary position carrying source bit `index`.
    pub fn primary_position(&self, index: u64) -> u64 {
        // least x with primary_count(x + 1) > index
        let mut hi = index.max(1);
        while self.primary_count(hi) <= index {
            hi = hi.checked_mul(2).expect("position overflow");
        }
        let mut lo = 0;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.primary_count(mid + 1) > index {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Sum `sum_{j=1}^{upto-1} n_{j-1} / n_j` as an exact rational.
    pub fn ratio_sum(&self, upto: usize) -> BigRational {
        (1..upto.min(self.depth()))
            .map(|j| BigRational::new(self.periods[j - 1].into(), self.periods[j].into()))
            .fold(BigRational::zero(), |acc, r| acc + r)
    }
}

impl FromStr for PeriodLadder {
    type Err = ScaffoldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let periods = s
            .split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|_| ScaffoldError::Parse(p.trim().to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        PeriodLadder::new(periods)
    }
}

impl fmt::Display for PeriodLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.periods.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionInfo {
    pub position: u64,
    pub rank: usize,
    pub is_primary: bool,
    pub representative: u64,
    pub source_index: u64,
}

pub fn classify_position(x: u64, ladder: &PeriodLadder) -> PositionInfo {
    let rank = ladder.rank(x);
    let representative = if rank < ladder.depth() { x % ladder.period(rank) } else { x };
    PositionInfo {
        position: x,
        rank,
        is_primary: representative == x,
        representative,
        source_index: ladder.primary_count(representative),
    }
}

/// `prod_{i=0}^{t-2} (1 - n_i / n_{i+1})`, a lower bound on the fraction of
/// primary positions in every prefix.
pub fn density_d(ladder: &PeriodLadder) -> BigRational {
    ladder
        .periods()
        .windows(2)
        .map(|w| BigRational::one() - BigRational::new(BigInt::from(w[0]), BigInt::from(w[1])))
        .fold(BigRational::one(), |acc, f| acc * f)
}

pub fn fresh_count(ladder: &PeriodLadder, n: u64) -> u64 {
    ladder.primary_count(n)
}

/// Lays source bits on the primary positions of `[0, n)` in order and
/// copies them to every equivalent position.
pub fn build_sequence<I>(source: I, ladder: &PeriodLadder, n: u64) -> Result<BitString, ScaffoldError>
where
    I: IntoIterator<Item = u8>,
{
    let mut source = source.into_iter();
    let mut out: Vec<u8> = Vec::with_capacity(n as usize);
    let mut consumed = 0u64;
    for x in 0..n {
        let rep = ladder.representative(x);
        if rep == x {
            let bit = source.next().ok_or_else(|| ScaffoldError::SourceExhausted {
                needed: ladder.primary_count(n),
                provided: consumed,
            })?;
            consumed += 1;
            out.push((bit != 0) as u8);
        } else {
            out.push(out[rep as usize]);
        }
    }
    Ok(BitString::from_bits(out))
}

/// A maximal run `[start, end)` of source indices, read in position order
/// from a window; `offset` is where `v[start]` sits inside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceInterval {
    pub start: u64,
    pub end: u64,
    pub offset: u64,
}

impl SourceInterval {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowDecomposition {
    pub start: u64,
    pub len: u64,
    pub cutoff_rank: usize,
    /// Sorted by `start`, pairwise disjoint.
    pub intervals: Vec<SourceInterval>,
    pub small_rank_count: u64,
    pub total_len: u64,
    /// `small_rank_count / len <= 2 * sum_{j=1}^{cutoff-1} n_{j-1}/n_j`.
    pub density_bound_holds: bool,
}

impl WindowDecomposition {
    /// For each consecutive pair `(a_j, a_{j+1})`: `a_{j+1}` and the
    /// displacement from the window position of `v[a_{j+1}]` to that of `v[a_j]`.
    pub fn displacements(&self) -> Vec<(u64, i64)> {
        self.intervals
            .windows(2)
            .map(|w| (w[1].start, w[0].offset as i64 - w[1].offset as i64))
            .collect()
    }
}

/// Maps the window `[m, m+k)` back to source intervals after dropping
/// positions of rank below the cutoff `i = min{j : n_j >= k}`.
pub fn decompose_window(m: u64, k: u64, ladder: &PeriodLadder) -> Result<WindowDecomposition, ScaffoldError> {
    if k == 0 {
        return Err(ScaffoldError::EmptyWindow);
    }
    if ladder.top() < k {
        return Err(ScaffoldError::LadderTooShort { k, top: ladder.top() });
    }
    let cutoff = ladder.periods().iter().position(|&n| n >= k).expect("top period covers k");

    let mut intervals: Vec<SourceInterval> = Vec::new();
    let mut small = 0u64;
    for offset in 0..k {
        let info = classify_position(m + offset, ladder);
        if info.rank < cutoff {
            small += 1;
            continue;
        }
        match intervals.last_mut() {
            Some(run) if run.end == info.source_index => run.end += 1,
            _ => intervals.push(SourceInterval {
                start: info.source_index,
                end: info.source_index + 1,
                offset,
            }),
        }
    }
    intervals.sort_by_key(|iv| iv.start);
    let total_len = intervals.iter().map(SourceInterval::len).sum();

    let bound = BigRational::from_integer(2.into()) * ladder.ratio_sum(cutoff);
    let density = BigRational::new(small.into(), k.into());
    Ok(WindowDecomposition {
        start: m,
        len: k,
        cutoff_rank: cutoff,
        intervals,
        small_rank_count: small,
        total_len,
        density_bound_holds: density <= bound,
    })
}

/// Recovers `a_j` from `a_{j+1}` and the in-window displacement between
/// their positions, using the first occurrence of `v[a_{j+1}]` instead of
/// the window's own position.
pub fn recover_a(a_next: u64, displacement: i64, ladder: &PeriodLadder) -> Result<u64, ScaffoldError> {
    let anchor = ladder.primary_position(a_next) as i128;
    let pos = anchor + displacement as i128;
    if pos < 0 {
        return Err(ScaffoldError::NegativePosition(pos));
    }
    Ok(classify_position(pos as u64, ladder).source_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn ladder(p: &[u64]) -> PeriodLadder {
        PeriodLadder::new(p.to_vec()).unwrap()
    }

    /// Union-find over `[0, n)` with the raw repetition rule
    /// `i ~ i + k * n_{s+1}` for `i < n_s`.
    pub(crate) struct ClassOracle {
        pub rep: Vec<u64>,
        pub source: Vec<u64>,
    }

    impl ClassOracle {
        pub fn new(periods: &[u64], n: u64) -> Self {
            let mut parent: Vec<usize> = (0..n as usize).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                let mut y = x;
                while p[y] != r {
                    let nx = p[y];
                    p[y] = r;
                    y = nx;
                }
                r
            }
            for s in 0..periods.len().saturating_sub(1) {
                let (span, period) = (periods[s] as usize, periods[s + 1] as usize);
                for i in 0..span.min(n as usize) {
                    let mut j = i + period;
                    while j < n as usize {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        let (lo, hi) = (a.min(b), a.max(b));
                        parent[hi] = lo;
                        j += period;
                    }
                }
            }
            let rep: Vec<u64> = (0..n as usize).map(|x| find(&mut parent, x) as u64).collect();
            let mut source = vec![0; n as usize];
            let mut next = 0;
            let mut seen = BTreeMap::new();
            for x in 0..n as usize {
                let r = rep[x];
                let idx = *seen.entry(r).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                source[x] = idx;
            }
            ClassOracle { rep, source }
        }
    }

    #[test]
    fn validation_names_the_offending_pair() {
        assert_eq!(PeriodLadder::new(vec![]), Err(ScaffoldError::EmptyLadder));
        assert_eq!(
            "2,8,12".parse::<PeriodLadder>(),
            Err(ScaffoldError::NotDivisible { index: 1, prev: 8, next: 12 })
        );
        assert_eq!(
            "2,8,8".parse::<PeriodLadder>(),
            Err(ScaffoldError::NotIncreasing { index: 1, prev: 8, next: 8 })
        );
        assert_eq!("2,x".parse::<PeriodLadder>(), Err(ScaffoldError::Parse("x".into())));
        let err = "4,6".parse::<PeriodLadder>().unwrap_err();
        assert_eq!(err.to_string(), "period n_1=6 is not a multiple of n_0=4");
    }

    #[test]
    fn digits_of_examples() {
        let l = ladder(&[2, 8, 32]);
        assert_eq!(l.digits(9), vec![1, 0, 1, 0]);
        assert_eq!(l.digits(3), vec![1, 1, 0, 0]);
        assert_eq!(l.digits(45), vec![1, 2, 1, 1]);
    }

    #[test]
    fn classify_examples() {
        let l = ladder(&[2, 8, 32]);
        let origin = classify_position(0, &l);
        assert_eq!((origin.rank, origin.is_primary, origin.representative, origin.source_index), (1, true, 0, 0));
        let nine = classify_position(9, &l);
        assert_eq!((nine.rank, nine.is_primary, nine.representative, nine.source_index), (1, false, 1, 1));
        let three = classify_position(3, &l);
        assert_eq!((three.rank, three.is_primary, three.representative), (2, true, 3));
        let ten = classify_position(10, &l);
        assert_eq!((ten.rank, ten.is_primary, ten.source_index), (4, true, 8));
    }

    #[test]
    fn classification_matches_union_find_oracle() {
        for periods in [&[2u64, 8, 32][..], &[1, 2], &[3, 6, 24], &[4, 64, 4096], &[2, 4, 8, 16, 32]] {
            let l = ladder(periods);
            let n = 3 * l.top() + 17;
            let oracle = ClassOracle::new(periods, n);
            for x in 0..n {
                let info = classify_position(x, &l);
                assert_eq!(info.representative, oracle.rep[x as usize], "{periods:?} x={x}");
                assert_eq!(info.source_index, oracle.source[x as usize], "{periods:?} x={x}");
                assert_eq!(info.is_primary, info.representative == x);
            }
        }
    }

    #[test]
    fn primary_count_matches_enumeration() {
        for periods in [&[2u64, 8, 32][..], &[1, 5], &[3, 9, 27, 81], &[5]] {
            let l = ladder(periods);
            let mut count = 0;
            for n in 0..=4 * l.top() {
                assert_eq!(l.primary_count(n), count, "{periods:?} n={n}");
                if n < 4 * l.top() && l.is_primary(n) {
                    count += 1;
                }
            }
        }
    }

    #[test]
    fn primary_position_inverts_count() {
        let l = ladder(&[2, 8, 32]);
        let primaries: Vec<u64> = (0..300).filter(|&x| l.is_primary(x)).collect();
        for (idx, &pos) in primaries.iter().enumerate() {
            assert_eq!(l.primary_position(idx as u64), pos);
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_d(&ladder(&[2, 8, 32])), BigRational::new(9.into(), 16.into()));
        assert_eq!(density_d(&ladder(&[7])), BigRational::one());
        assert_eq!(density_d(&ladder(&[1, 10])), BigRational::new(9.into(), 10.into()));
    }

    #[test]
    fn fresh_count_examples() {
        let l = ladder(&[2, 8, 32]);
        assert_eq!(fresh_count(&l, 16), 14);
        assert_eq!(fresh_count(&l, 0), 0);
        assert_eq!(fresh_count(&l, 10), 8);
    }

    #[test]
    fn build_sequence_example() {
        let l = ladder(&[2, 8, 32]);
        let out = build_sequence((0..100u64).map(|i| (i & 1) as u8), &l, 16).unwrap();
        let expected_sources = [0, 1, 2, 3, 4, 5, 6, 7, 0, 1, 8, 9, 10, 11, 12, 13];
        for (x, &src) in expected_sources.iter().enumerate() {
            assert_eq!(classify_position(x as u64, &l).source_index, src as u64);
            assert_eq!(out[x], (src & 1) as u8);
        }
        assert!(build_sequence(std::iter::repeat(0u8), &l, 64).unwrap().as_slice().iter().all(|&b| b == 0));
    }

    #[test]
    fn build_sequence_consumes_exactly_the_primaries() {
        let l = ladder(&[2, 8, 32]);
        assert!(build_sequence(vec![1u8; 14], &l, 16).is_ok());
        assert_eq!(
            build_sequence(vec![1u8; 13], &l, 16),
            Err(ScaffoldError::SourceExhausted { needed: 14, provided: 13 })
        );
    }

    #[test]
    fn decompose_example_window() {
        let l = ladder(&[2, 8, 32]);
        let d = decompose_window(4, 6, &l).unwrap();
        assert_eq!(d.cutoff_rank, 1);
        assert_eq!(d.small_rank_count, 0);
        assert_eq!(
            d.intervals,
            vec![
                SourceInterval { start: 0, end: 2, offset: 4 },
                SourceInterval { start: 4, end: 8, offset: 0 },
            ]
        );
        assert_eq!(d.total_len, 6);
        assert!(d.density_bound_holds);
        assert_eq!(d.displacements(), vec![(4, 4)]);
        assert_eq!(recover_a(4, 4, &l).unwrap(), 0);
    }

    #[test]
    fn decompose_prefix_inside_first_block() {
        let l = ladder(&[4, 64, 4096]);
        for k in 1..=4 {
            let d = decompose_window(0, k, &l).unwrap();
            assert_eq!(d.intervals, vec![SourceInterval { start: 0, end: k, offset: 0 }]);
            assert_eq!(d.small_rank_count, 0);
        }
    }

    #[test]
    fn decompose_drops_small_ranks() {
        let l = ladder(&[2, 8, 32]);
        // cutoff 2: positions 8 and 9 have rank 1
        let d = decompose_window(4, 10, &l).unwrap();
        assert_eq!(d.cutoff_rank, 2);
        assert_eq!(d.small_rank_count, 2);
        assert_eq!(d.intervals, vec![SourceInterval { start: 4, end: 12, offset: 0 }]);
    }

    #[test]
    fn decompose_errors() {
        let l = ladder(&[2, 8, 32]);
        assert_eq!(decompose_window(0, 33, &l), Err(ScaffoldError::LadderTooShort { k: 33, top: 32 }));
        assert_eq!(decompose_window(0, 0, &l), Err(ScaffoldError::EmptyWindow));
    }

    #[test]
    fn recover_a_identity_and_negative() {
        let l = ladder(&[2, 8, 32]);
        for a in 0..50 {
            assert_eq!(recover_a(a, 0, &l).unwrap(), a);
        }
        assert_eq!(recover_a(0, -1, &l), Err(ScaffoldError::NegativePosition(-1)));
    }

    #[test]
    fn generated_ladder_ratio_sum() {
        let l = PeriodLadder::generate(2, 3, 1, 8).unwrap();
        assert_eq!(l.periods(), &[2, 36, 1296]);
        assert!(l.ratio_sum(l.depth()) < BigRational::new(1.into(), 8.into()));
        let deep = PeriodLadder::generate(3, 5, 1, 4).unwrap();
        assert!(deep.ratio_sum(deep.depth()) < BigRational::new(1.into(), 4.into()));
    }
}
