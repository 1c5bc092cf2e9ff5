//! Resampling samplers for forbidden-pattern avoidance and an exact
//! feasibility test for small explicit families.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::{BitGrid, BitString};
use crate::forbidden::{ForbiddenFamily, DEFAULT_ENUMERATION_CAP};
use crate::scaffold::PeriodLadder;

pub const MAX_GRID_SIDE: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AvoiderError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("longest forbidden length {len} exceeds the enumeration cap {cap}")]
    AboveCap { len: usize, cap: usize },
    #[error("grid sampling needs a two-dimensional family, got dim={0}")]
    WrongDimension(usize),
    #[error("square side {side} exceeds the supported maximum {MAX_GRID_SIDE}")]
    SideTooLarge { side: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    #[default]
    Leftmost,
    Random,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Leftmost => "leftmost",
            Selection::Random => "random",
        })
    }
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "leftmost" => Ok(Selection::Leftmost),
            "random" => Ok(Selection::Random),
            other => Err(format!("unknown selection rule {other:?} (leftmost|random)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Target length, or side for grids.
    pub n: usize,
    pub seed: u64,
    pub min_len: usize,
    pub selection: Selection,
    pub max_rounds: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64, min_len: usize) -> Self {
        SamplerConfig { n, seed, min_len, selection: Selection::Leftmost, max_rounds: 1_000_000 }
    }

    pub fn validate(&self) -> Result<(), AvoiderError> {
        if self.min_len == 0 {
            return Err(AvoiderError::InvalidConfig("min_len must be at least 1".into()));
        }
        if self.n < self.min_len {
            return Err(AvoiderError::InvalidConfig(format!("N={} is below min_len={}", self.n, self.min_len)));
        }
        if self.max_rounds == 0 {
            return Err(AvoiderError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleTrace<T> {
    pub result: T,
    pub rounds: u64,
    pub violations_initial: usize,
    pub converged: bool,
}

impl<T> SampleTrace<T> {
    /// `key=value` lines for the stats side channel.
    pub fn stats_text(&self, config: &SamplerConfig) -> String {
        format!(
            "n={}\nseed={}\nmin_len={}\nselection={}\nmax_rounds={}\nrounds={}\nviolations_initial={}\nconverged={}\n",
            config.n,
            config.seed,
            config.min_len,
            config.selection,
            config.max_rounds,
            self.rounds,
            self.violations_initial,
            self.converged
        )
    }
}

/// Multi-pattern matcher over all forbidden strings of length at least
/// `min_len`.
pub struct ViolationScanner {
    automaton: Option<AhoCorasick>,
    lens: Vec<usize>,
    max_len: usize,
}

impl ViolationScanner {
    pub fn new(family: &ForbiddenFamily, min_len: usize) -> Self {
        let mut patterns: Vec<&[u8]> = Vec::new();
        let mut lens = Vec::new();
        for (&len, set) in family.entries().range(min_len..) {
            for s in set {
                patterns.push(s.as_slice());
                lens.push(len);
            }
        }
        let max_len = lens.iter().copied().max().unwrap_or(0);
        let automaton = (!patterns.is_empty()).then(|| {
            AhoCorasickBuilder::new()
                .match_kind(MatchKind::Standard)
                .build(&patterns)
                .expect("binary patterns always build")
        });
        ViolationScanner { automaton, lens, max_len }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Matches lying entirely inside `x[lo..hi]`, in unspecified order.
    pub fn scan_range(&self, x: &[u8], lo: usize, hi: usize, out: &mut Vec<(usize, usize)>) {
        if let Some(ac) = &self.automaton {
            for m in ac.find_overlapping_iter(&x[lo..hi]) {
                out.push((lo + m.start(), self.lens[m.pattern().as_usize()]));
            }
        }
    }

    pub fn scan(&self, x: &[u8]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        self.scan_range(x, 0, x.len(), &mut out);
        out.sort_unstable();
        out
    }
}

/// All windows `(start, len)` with `len >= min_len` whose content is
/// forbidden, sorted.
pub fn scan_violations(x: &BitString, family: &ForbiddenFamily, min_len: usize) -> Vec<(usize, usize)> {
    ViolationScanner::new(family, min_len).scan(x.as_slice())
}

fn pick<T: Copy + Ord>(set: &BTreeSet<T>, selection: Selection, rng: &mut ChaCha8Rng) -> T {
    match selection {
        Selection::Leftmost => *set.first().expect("nonempty"),
        Selection::Random => *set.iter().nth(rng.gen_range(0..set.len())).expect("in range"),
    }
}

pub fn resample_run(family: &ForbiddenFamily, config: &SamplerConfig) -> Result<SampleTrace<BitString>, AvoiderError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x: Vec<u8> = (0..config.n).map(|_| rng.gen::<bool>() as u8).collect();
    let scanner = ViolationScanner::new(family, config.min_len);
    let reach = scanner.max_len().saturating_sub(1);

    let mut violations: BTreeSet<(usize, usize)> = scanner.scan(&x).into_iter().collect();
    let violations_initial = violations.len();
    let mut rounds = 0;
    let mut found = Vec::new();
    while !violations.is_empty() && rounds < config.max_rounds {
        let (start, len) = pick(&violations, config.selection, &mut rng);
        let end = start + len;
        for bit in &mut x[start..end] {
            *bit = rng.gen::<bool>() as u8;
        }
        let lo = start.saturating_sub(reach);
        let stale: Vec<_> = violations.range((lo, 0)..(end, 0)).filter(|&&(s, l)| s + l > start).copied().collect();
        for v in stale {
            violations.remove(&v);
        }
        found.clear();
        scanner.scan_range(&x, lo, (end + reach).min(x.len()), &mut found);
        violations.extend(found.iter().copied());
        rounds += 1;
    }
    Ok(SampleTrace { converged: violations.is_empty(), result: BitString::from_bits(x), rounds, violations_initial })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaffoldSample {
    pub source: BitString,
    pub omega: BitString,
}

/// Samples a source so that the scaffold `ω = build_sequence(source)` of
/// length `config.n` avoids the family. Violations are found in `ω` and
/// repaired by redrawing the source bits behind the offending window, so
/// windows straddling copied blocks are covered too.
pub fn resample_scaffold(
    family: &ForbiddenFamily,
    ladder: &PeriodLadder,
    config: &SamplerConfig,
) -> Result<SampleTrace<ScaffoldSample>, AvoiderError> {
    config.validate()?;
    let n = config.n;
    let mut source_of = vec![0usize; n];
    let mut fresh = 0usize;
    for x in 0..n {
        let rep = ladder.representative(x as u64) as usize;
        if rep == x {
            source_of[x] = fresh;
            fresh += 1;
        } else {
            source_of[x] = source_of[rep];
        }
    }
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); fresh];
    for (x, &i) in source_of.iter().enumerate() {
        copies[i].push(x);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut source: Vec<u8> = (0..fresh).map(|_| rng.gen::<bool>() as u8).collect();
    let mut omega: Vec<u8> = source_of.iter().map(|&i| source[i]).collect();
    let scanner = ViolationScanner::new(family, config.min_len);
    let reach = scanner.max_len().saturating_sub(1);

    let mut violations: BTreeSet<(usize, usize)> = scanner.scan(&omega).into_iter().collect();
    let violations_initial = violations.len();
    let mut rounds = 0;
    let mut touched = Vec::new();
    let mut found = Vec::new();
    while !violations.is_empty() && rounds < config.max_rounds {
        let (start, len) = pick(&violations, config.selection, &mut rng);
        let mut indices: Vec<usize> = source_of[start..start + len].to_vec();
        indices.sort_unstable();
        indices.dedup();
        touched.clear();
        for i in indices {
            source[i] = rng.gen::<bool>() as u8;
            for &x in &copies[i] {
                omega[x] = source[i];
                touched.push(x);
            }
        }
        touched.sort_unstable();
        let mut k = 0;
        while k < touched.len() {
            let lo = touched[k].saturating_sub(reach);
            let mut hi = touched[k] + 1;
            while k < touched.len() && touched[k] <= hi + reach {
                hi = touched[k] + 1;
                k += 1;
            }
            let stale: Vec<_> = violations.range((lo, 0)..(hi, 0)).copied().collect();
            for v in stale {
                violations.remove(&v);
            }
            found.clear();
            scanner.scan_range(&omega, lo, (hi + reach).min(n), &mut found);
            violations.extend(found.iter().copied());
        }
        rounds += 1;
    }
    Ok(SampleTrace {
        converged: violations.is_empty(),
        result: ScaffoldSample { source: BitString::from_bits(source), omega: BitString::from_bits(omega) },
        rounds,
        violations_initial,
    })
}

/// Whether an infinite sequence avoids every forbidden string of length at
/// least `min_len`: a cycle search in the overlap graph on allowed
/// `(M-1)`-bit words, `M` the longest forbidden length.
pub fn sft_feasible(family: &ForbiddenFamily, min_len: usize) -> Result<bool, AvoiderError> {
    sft_feasible_capped(family, min_len, DEFAULT_ENUMERATION_CAP)
}

pub fn sft_feasible_capped(family: &ForbiddenFamily, min_len: usize, cap: usize) -> Result<bool, AvoiderError> {
    let Some(m) = family.entries().range(min_len.max(1)..).map(|(&l, _)| l).next_back() else {
        return Ok(true);
    };
    if m > cap {
        return Err(AvoiderError::AboveCap { len: m, cap });
    }

    // allowed[n][w]: w (n bits, first bit most significant) has no
    // forbidden factor
    let mut allowed: Vec<Vec<bool>> = vec![vec![true]];
    for n in 1..=m {
        let forbidden: HashSet<u64> = if n >= min_len {
            family.strings(n).map(BitString::to_u64).collect()
        } else {
            HashSet::new()
        };
        let prev = &allowed[n - 1];
        let low = (1u64 << (n - 1)) - 1;
        let level: Vec<bool> = (0..1u64 << n)
            .map(|w| prev[(w >> 1) as usize] && prev[(w & low) as usize] && !forbidden.contains(&w))
            .collect();
        allowed.push(level);
    }

    let words = &allowed[m];
    let vertices = 1usize << (m - 1);
    let mask = vertices - 1;
    let succ = |u: usize, b: usize| ((u << 1) | b) & mask;
    let edge = |u: usize, b: usize| words[(u << 1) | b];

    // peel vertices without outgoing edges; a cycle survives
    let mut out_degree: Vec<u8> = (0..vertices).map(|u| edge(u, 0) as u8 + edge(u, 1) as u8).collect();
    let mut stack: Vec<usize> = (0..vertices).filter(|&u| out_degree[u] == 0).collect();
    let mut removed = stack.len();
    while let Some(v) = stack.pop() {
        if m == 1 {
            break;
        }
        for b in 0..2 {
            let u = (b << (m - 2)) | (v >> 1);
            if edge(u, v & 1) && succ(u, v & 1) == v && out_degree[u] > 0 {
                out_degree[u] -= 1;
                if out_degree[u] == 0 {
                    stack.push(u);
                    removed += 1;
                }
            }
        }
    }
    Ok(removed < vertices)
}

/// A violated square `(row, col, side)`.
pub type SquareViolation = (usize, usize, usize);

struct SquareScanner {
    // keys[side] = packed forbidden squares of that side
    keys: Vec<HashSet<u64>>,
    max_side: usize,
}

impl SquareScanner {
    fn new(family: &ForbiddenFamily, min_side: usize) -> Result<Self, AvoiderError> {
        if family.dim() != 2 {
            return Err(AvoiderError::WrongDimension(family.dim()));
        }
        let mut keys = vec![HashSet::new(); MAX_GRID_SIDE + 1];
        let mut max_side = 0;
        for (&side, set) in family.entries().range(min_side..) {
            if side > MAX_GRID_SIDE {
                return Err(AvoiderError::SideTooLarge { side });
            }
            keys[side] = set.iter().map(BitString::to_u64).collect();
            max_side = max_side.max(side);
        }
        Ok(SquareScanner { keys, max_side })
    }

    fn scan_range(&self, grid: &BitGrid, rows: (usize, usize), cols: (usize, usize), out: &mut Vec<SquareViolation>) {
        for side in 1..=self.max_side {
            if self.keys[side].is_empty() || rows.1 - rows.0 < side || cols.1 - cols.0 < side {
                continue;
            }
            for r in rows.0..=rows.1 - side {
                for c in cols.0..=cols.1 - side {
                    if self.keys[side].contains(&grid.square_key(r, c, side)) {
                        out.push((r, c, side));
                    }
                }
            }
        }
    }
}

/// Resampling on an `N x N` grid; a violation is a forbidden square and
/// the whole square is redrawn.
pub fn resample_grid(family: &ForbiddenFamily, config: &SamplerConfig) -> Result<SampleTrace<BitGrid>, AvoiderError> {
    config.validate()?;
    let scanner = SquareScanner::new(family, config.min_len)?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cells: Vec<u8> = (0..n * n).map(|_| rng.gen::<bool>() as u8).collect();
    let mut grid = BitGrid::from_cells(n, n, cells);
    let reach = scanner.max_side.saturating_sub(1);

    let mut found = Vec::new();
    scanner.scan_range(&grid, (0, n), (0, n), &mut found);
    let mut violations: BTreeSet<SquareViolation> = found.drain(..).collect();
    let violations_initial = violations.len();
    let mut rounds = 0;
    while !violations.is_empty() && rounds < config.max_rounds {
        let (row, col, side) = pick(&violations, config.selection, &mut rng);
        for r in row..row + side {
            for c in col..col + side {
                grid.set(r, c, rng.gen::<bool>() as u8);
            }
        }
        violations.retain(|&(r, c, s)| r + s <= row || r >= row + side || c + s <= col || c >= col + side);
        let rows = (row.saturating_sub(reach), (row + side + reach).min(n));
        let cols = (col.saturating_sub(reach), (col + side + reach).min(n));
        scanner.scan_range(&grid, rows, cols, &mut found);
        violations.extend(found.drain(..));
        rounds += 1;
    }
    Ok(SampleTrace { converged: violations.is_empty(), result: grid, rounds, violations_initial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{verify_avoidance, verify_grid_avoidance};
    use crate::forbidden::{gen_random_family, parse_family, Alpha};

    fn family(text: &str) -> ForbiddenFamily {
        parse_family(text).unwrap().family
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn naive_scan(x: &BitString, fam: &ForbiddenFamily, min_len: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for start in 0..x.len() {
            for len in min_len..=x.len() - start {
                if fam.contains_at(len, &x.slice(start, start + len)) {
                    out.push((start, len));
                }
            }
        }
        out
    }

    // exists a string of length n avoiding the family, by backtracking
    fn avoiding_word_exists(fam: &ForbiddenFamily, min_len: usize, n: usize) -> bool {
        fn extend(w: &mut BitString, fam: &ForbiddenFamily, min_len: usize, n: usize) -> bool {
            if w.len() == n {
                return true;
            }
            for b in 0..2 {
                w.push(b);
                let end = w.len();
                let ok = (min_len..=end).all(|l| !fam.contains_at(l, &w.slice(end - l, end)));
                if ok && extend(w, fam, min_len, n) {
                    return true;
                }
                *w = w.slice(0, end - 1);
            }
            false
        }
        extend(&mut BitString::new(), fam, min_len, n)
    }

    #[test]
    fn scan_examples() {
        let f = family("alpha=1/2\nlength 2\n11\n");
        assert_eq!(scan_violations(&bits("0110"), &f, 2), vec![(1, 2)]);
        assert_eq!(scan_violations(&bits("1111"), &f, 2), vec![(0, 2), (1, 2), (2, 2)]);
        let empty = ForbiddenFamily::new(Alpha::new(1, 2).unwrap());
        assert!(scan_violations(&bits("1111"), &empty, 1).is_empty());
    }

    #[test]
    fn scan_matches_naive_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for case in 0..1000 {
            let lo = rng.gen_range(1..6);
            let hi = rng.gen_range(lo..lo + 5);
            let fam = gen_random_family(Alpha::new(rng.gen_range(1..4), 4).unwrap(), lo..=hi, case).unwrap();
            let n = rng.gen_range(0..=256);
            let x = BitString::from_bits((0..n).map(|_| rng.gen_range(0..2u8)));
            let min_len = rng.gen_range(1..=hi);
            assert_eq!(scan_violations(&x, &fam, min_len), naive_scan(&x, &fam, min_len), "case {case}");
        }
    }

    #[test]
    fn empty_family_is_one_draw() {
        let empty = ForbiddenFamily::new(Alpha::new(1, 2).unwrap());
        let t = resample_run(&empty, &SamplerConfig::new(64, 17, 1)).unwrap();
        assert!(t.converged);
        assert_eq!(t.rounds, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draw = BitString::from_bits((0..64).map(|_| rng.gen::<bool>() as u8));
        assert_eq!(t.result, draw);
    }

    #[test]
    fn exhausted_length_never_converges() {
        let f = family("alpha=1/2\nlength 2\n00\n01\n10\n11\n");
        let mut cfg = SamplerConfig::new(2, 1, 2);
        cfg.max_rounds = 500;
        let t = resample_run(&f, &cfg).unwrap();
        assert!(!t.converged);
        assert_eq!(t.rounds, 500);
    }

    #[test]
    fn random_family_regression() {
        let fam = gen_random_family(Alpha::new(1, 2).unwrap(), 8..=12, 3).unwrap();
        let t = resample_run(&fam, &SamplerConfig::new(1024, 5, 9)).unwrap();
        assert!(t.converged);
        assert!(scan_violations(&t.result, &fam, 9).is_empty());
        assert_eq!(verify_avoidance(&t.result, &fam, 9), None);
        assert_eq!(t.rounds, 690);
    }

    #[test]
    fn random_selection_also_converges() {
        let fam = gen_random_family(Alpha::new(1, 2).unwrap(), 8..=12, 4).unwrap();
        let mut cfg = SamplerConfig::new(1024, 9, 8);
        cfg.selection = Selection::Random;
        let t = resample_run(&fam, &cfg).unwrap();
        assert!(t.converged);
        assert_eq!(verify_avoidance(&t.result, &fam, 8), None);
        assert_eq!(t, resample_run(&fam, &cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let f = ForbiddenFamily::new(Alpha::new(1, 2).unwrap());
        assert!(resample_run(&f, &SamplerConfig::new(3, 0, 4)).is_err());
        assert!(resample_run(&f, &SamplerConfig::new(3, 0, 0)).is_err());
        let mut cfg = SamplerConfig::new(3, 0, 1);
        cfg.max_rounds = 0;
        assert!(resample_run(&f, &cfg).is_err());
    }

    #[test]
    fn feasibility_examples() {
        assert!(sft_feasible(&family("alpha=1/2\nlength 2\n00\n11\n"), 2).unwrap());
        assert!(!sft_feasible(&family("alpha=1/2\nlength 1\n0\nlength 2\n11\n"), 1).unwrap());
        assert!(sft_feasible(&ForbiddenFamily::new(Alpha::new(1, 2).unwrap()), 1).unwrap());
        assert!(!sft_feasible(&family("alpha=1/2\nlength 1\n0\n1\n"), 1).unwrap());
        assert!(sft_feasible(&family("alpha=1/2\nlength 1\n0\n"), 1).unwrap());
        // below min_len the family is ignored
        assert!(sft_feasible(&family("alpha=1/2\nlength 1\n0\nlength 2\n11\n"), 2).unwrap());
    }

    #[test]
    fn feasibility_matches_backtracking() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut yes, mut no) = (0, 0);
        for case in 0..300 {
            let hi = rng.gen_range(2..=6);
            let lo = rng.gen_range(1..=hi);
            let alpha = Alpha::new(rng.gen_range(2..8), 8).unwrap();
            let fam = gen_random_family(alpha, lo..=hi, case).unwrap();
            let n = (1 << (hi - 1)) + hi - 1;
            let expected = avoiding_word_exists(&fam, lo, n);
            assert_eq!(sft_feasible(&fam, lo).unwrap(), expected, "case {case}: {}", fam.to_text());
            if expected { yes += 1 } else { no += 1 }
        }
        assert!(yes > 20 && no > 20, "{yes} {no}");
    }

    #[test]
    fn feasibility_cap() {
        let mut f = ForbiddenFamily::new(Alpha::new(1, 2).unwrap());
        f.insert(23, BitString::zeros(23)).unwrap();
        assert_eq!(sft_feasible(&f, 1), Err(AvoiderError::AboveCap { len: 23, cap: 22 }));
    }

    #[test]
    fn infeasible_families_do_not_converge() {
        let f = family("alpha=1/2\nlength 2\n00\n11\nlength 3\n010\n101\n");
        assert!(!sft_feasible(&f, 2).unwrap());
        for seed in 0..20 {
            let mut cfg = SamplerConfig::new(8, seed, 2);
            cfg.max_rounds = 2000;
            assert!(!resample_run(&f, &cfg).unwrap().converged);
        }
    }

    #[test]
    fn grid_examples() {
        let alpha = Alpha::new(1, 2).unwrap();
        let empty = ForbiddenFamily::with_dim(alpha, 2).unwrap();
        let t = resample_grid(&empty, &SamplerConfig::new(8, 1, 1)).unwrap();
        assert!(t.converged && t.rounds == 0);

        let zeros = family("alpha=1/2\ndim=2\nlength 2\n0000\n");
        let t = resample_grid(&zeros, &SamplerConfig::new(16, 2, 2)).unwrap();
        assert!(t.converged);
        assert_eq!(verify_grid_avoidance(&t.result, &zeros, 2), None);
        for r in 0..15 {
            for c in 0..15 {
                assert_ne!(t.result.square(r, c, 2).to_string(), "0000");
            }
        }

        let mut all = ForbiddenFamily::with_dim(alpha, 2).unwrap();
        for v in 0..16 {
            all.insert(2, BitString::from_u64(v, 4)).unwrap();
        }
        let mut cfg = SamplerConfig::new(4, 3, 2);
        cfg.max_rounds = 300;
        assert!(!resample_grid(&all, &cfg).unwrap().converged);
    }

    #[test]
    fn grid_rejects_line_family() {
        let f = family("alpha=1/2\nlength 2\n11\n");
        assert_eq!(resample_grid(&f, &SamplerConfig::new(4, 0, 1)), Err(AvoiderError::WrongDimension(1)));
    }

    #[test]
    fn grid_scan_after_resampling_is_exact() {
        use crate::forbidden::gen_random_family_dim;
        let fam = gen_random_family_dim(Alpha::new(1, 2).unwrap(), 2, 3..=4, 8).unwrap();
        for seed in 0..5 {
            let t = resample_grid(&fam, &SamplerConfig::new(24, seed, 3)).unwrap();
            assert!(t.converged);
            assert_eq!(verify_grid_avoidance(&t.result, &fam, 3), None);
        }
    }

    #[test]
    fn scaffold_sampling_avoids_family_in_omega() {
        use crate::analysis::verify_ladder_all;
        use crate::scaffold::build_sequence;
        let (fam, _) = crate::forbidden::gen_lz_family(Alpha::new(9, 16).unwrap(), 16..=16).unwrap();
        for periods in [vec![2u64, 8, 32], vec![16, 256, 4096]] {
            let ladder = PeriodLadder::new(periods).unwrap();
            let n = 2 * ladder.top() as usize;
            let mut config = SamplerConfig::new(n, 3, 16);
            config.selection = Selection::Random;
            let t = resample_scaffold(&fam, &ladder, &config).unwrap();
            assert!(t.converged);
            let rebuilt = build_sequence(t.result.source.as_slice().iter().copied(), &ladder, n as u64).unwrap();
            assert_eq!(rebuilt, t.result.omega);
            assert_eq!(t.result.source.len() as u64, crate::scaffold::fresh_count(&ladder, n as u64));
            assert_eq!(verify_avoidance(&t.result.omega, &fam, 16), None);
            assert!(verify_ladder_all(&t.result.omega, &ladder).is_ok());
        }
    }
}
