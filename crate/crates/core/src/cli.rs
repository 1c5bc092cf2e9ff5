//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    complexity_profile, recurrence_gap, verify_avoidance, verify_grid_avoidance, verify_ladder_all,
    verify_ladder_periodicity, PROFILE_CSV_HEADER, RECURRENCE_CSV_HEADER,
};
use crate::avoider::{resample_grid, resample_run, resample_scaffold, SamplerConfig, Selection};
use crate::bits::{BitGrid, BitString};
use crate::forbidden::{gen_lz_family, gen_random_family_dim, parse_family, Alpha, ForbiddenFamily};
use crate::grid::{build_grid, build_spiral_grid, decompose_cube, GridData, GridLadder, GridRegion};
use crate::lll::{make_grid_plan_with, make_plan_with, SearchConfig, DEFAULT_SEARCH_CEILING};
use crate::scaffold::{build_sequence, decompose_window, PeriodLadder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "apfree", version, about = "Forbidden-pattern avoidance and almost periodic scaffolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify local-lemma parameters for a budget exponent.
    Plan {
        #[arg(long)]
        alpha: Alpha,
        #[arg(long, default_value_t = 1)]
        dim: u32,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CEILING)]
        ceiling: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Generate forbidden families.
    Forbidden {
        #[command(subcommand)]
        command: ForbiddenCommand,
    },
    /// Sample a string (or square grid) avoiding a family.
    Sample(SampleArgs),
    /// Fill a sequence through a period ladder.
    Scaffold {
        #[arg(long)]
        ladder: PeriodLadder,
        /// A file of bits, or `random:<seed>`.
        #[arg(long)]
        source: String,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Fill a region of the d-dimensional scaffold.
    Grid {
        #[arg(long)]
        ladder: PeriodLadder,
        #[arg(long = "d", default_value_t = 2)]
        dim: usize,
        /// `a..b` per axis joined by `x`, half-open.
        #[arg(long)]
        region: GridRegion,
        #[arg(long)]
        source: String,
        #[arg(long, value_enum, default_value_t = FillOrder::Scaffold)]
        order: FillOrder,
        #[command(flatten)]
        out: OutArg,
    },
    /// Check a file; the verdict is the exit code.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Map a window (or cube) back to source intervals.
    Decompose {
        #[arg(long)]
        ladder: PeriodLadder,
        /// `m,k` for the window `[m, m+k)`.
        #[arg(long, conflicts_with = "cube")]
        window: Option<String>,
        /// `m_1,...,m_d,k` for the cube with corner `m` and side `k`.
        #[arg(long)]
        cube: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Empirical diagnostics as CSV.
    Stats {
        #[command(subcommand)]
        command: StatsCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ForbiddenCommand {
    Gen {
        #[arg(long)]
        alpha: Alpha,
        /// Inclusive range `a..b`.
        #[arg(long)]
        lengths: String,
        /// Required for `--mode random`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = GenMode::Random)]
        mode: GenMode,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Defaults to the certified plan threshold L for the family's alpha.
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    max_rounds: u64,
    #[arg(long, default_value_t = Selection::Leftmost)]
    selection: Selection,
    /// Sample an N x N grid against a dim=2 family.
    #[arg(long)]
    grid: bool,
    /// Emit the length-N scaffold through this ladder, sampled so the
    /// scaffold itself avoids the family.
    #[arg(long, conflicts_with = "grid")]
    ladder: Option<PeriodLadder>,
    #[arg(long)]
    stats_out: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// No forbidden window (or square) of length >= min-len.
    Avoid {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the certified plan threshold L.
        #[arg(long)]
        min_len: Option<usize>,
        #[arg(long)]
        grid: bool,
    },
    /// Prefix periodicity at every ladder level.
    Ap {
        #[arg(long)]
        ladder: PeriodLadder,
        #[arg(long)]
        input: PathBuf,
    },
    /// Prefix periodicity at one level.
    Ladder {
        #[arg(long)]
        ladder: PeriodLadder,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        level: usize,
    },
}

#[derive(Subcommand, Debug)]
enum StatsCommand {
    Complexity {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated window lengths.
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    Recurrence {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        pattern: BitString,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenMode {
    Random,
    Lz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FillOrder {
    Scaffold,
    Spiral,
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    Failed(String),
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, out: &OutArg, text: &str) -> Result<()> {
        match &out.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => self.stdout.write_all(text.as_bytes()).context("writing stdout"),
        }
    }

    fn warn(&mut self, message: &str) {
        let _ = writeln!(self.stderr, "warning: {message}");
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { stdout, stderr };
    match dispatch(cli.command, &mut io) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Failed(message)) => {
            let _ = writeln!(io.stderr, "verification failed: {message}");
            EXIT_FAILED
        }
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, io: &mut Io<'_>) -> Result<Outcome> {
    match command {
        Command::Plan { alpha, dim, ceiling, out } => {
            let config = SearchConfig { ceiling };
            let text = if dim == 1 {
                make_plan_with(alpha, config)?.to_string()
            } else {
                make_grid_plan_with(alpha, dim, config)?.to_string()
            };
            io.emit(&out, &text)?;
        }
        Command::Forbidden { command: ForbiddenCommand::Gen { alpha, lengths, seed, mode, dim, out } } => {
            let lengths = parse_range(&lengths)?;
            let family = match mode {
                GenMode::Random => gen_random_family_dim(alpha, dim, lengths, seed.ok_or_else(|| anyhow!("--seed is required for --mode random"))?)?,
                GenMode::Lz => {
                    if dim != 1 {
                        bail!("--mode lz supports only --dim 1");
                    }
                    let (family, truncations) = gen_lz_family(alpha, lengths)?;
                    for t in truncations {
                        io.warn(&format!("length {}: {} candidates truncated to {}", t.len, t.candidates, t.kept));
                    }
                    family
                }
            };
            io.emit(&out, &family.to_text())?;
        }
        Command::Sample(args) => return sample(args, io),
        Command::Scaffold { ladder, source, n, out } => {
            let bits = build_sequence(open_source(&source)?, &ladder, n)?;
            io.emit(&out, &format!("{bits}\n"))?;
        }
        Command::Grid { ladder, dim, region, source, order, out } => {
            if region.dim() != dim {
                bail!("--region has {} axes but --d is {dim}", region.dim());
            }
            let source = open_source(&source)?;
            let grid = match order {
                FillOrder::Scaffold => build_grid(source, &GridLadder::from_ladder(dim, &ladder)?, &region)?,
                FillOrder::Spiral => build_spiral_grid(source, &region)?,
            };
            io.emit(&out, &grid.to_text())?;
        }
        Command::Verify { command } => return verify(command, io),
        Command::Decompose { ladder, window, cube, out } => {
            let text = match (window, cube) {
                (Some(w), None) => decompose_text(&ladder, &w)?,
                (None, Some(c)) => cube_text(&ladder, &c)?,
                _ => bail!("give exactly one of --window or --cube"),
            };
            io.emit(&out, &text)?;
        }
        Command::Stats { command } => match command {
            StatsCommand::Complexity { input, lengths, out } => {
                let omega = read_sequence(&input)?;
                if let Some(&bad) = lengths.iter().find(|&&l| l == 0 || l > omega.len()) {
                    bail!("--lengths: {bad} is outside 1..={}", omega.len());
                }
                let mut text = format!("{PROFILE_CSV_HEADER}\n");
                for row in complexity_profile(&omega, &lengths) {
                    text.push_str(&row.csv_row());
                    text.push('\n');
                }
                io.emit(&out, &text)?;
            }
            StatsCommand::Recurrence { input, pattern, out } => {
                let omega = read_sequence(&input)?;
                if pattern.len() > omega.len() {
                    bail!("--pattern is longer than the input");
                }
                let report = recurrence_gap(&omega, &pattern);
                io.emit(&out, &format!("{RECURRENCE_CSV_HEADER}\n{}\n", report.csv_row()))?;
            }
        },
    }
    Ok(Outcome::Ok)
}

fn sample(args: SampleArgs, io: &mut Io<'_>) -> Result<Outcome> {
    let family = read_family(&args.family, io)?;
    let min_len = match args.min_len {
        Some(m) => m,
        None => default_min_len(&family, args.grid)?,
    };
    let config = SamplerConfig {
        n: args.n,
        seed: args.seed,
        min_len,
        selection: args.selection,
        max_rounds: args.max_rounds,
    };
    let (text, stats) = if args.grid {
        let trace = resample_grid(&family, &config)?;
        (trace.result.to_text(), trace.stats_text(&config))
    } else if let Some(ladder) = &args.ladder {
        let trace = resample_scaffold(&family, ladder, &config)?;
        (format!("{}\n", trace.result.omega), trace.stats_text(&config))
    } else {
        let trace = resample_run(&family, &config)?;
        (format!("{}\n", trace.result), trace.stats_text(&config))
    };
    io.emit(&args.out, &text)?;
    if let Some(path) = &args.stats_out {
        fs::write(path, &stats).with_context(|| format!("writing {}", path.display()))?;
    }
    if stats.contains("converged=false") {
        io.warn(&format!("sampler stopped after {} rounds without converging", config.max_rounds));
    }
    Ok(Outcome::Ok)
}

fn default_min_len(family: &ForbiddenFamily, grid: bool) -> Result<usize> {
    let min_len = if grid {
        make_grid_plan_with(family.alpha(), family.dim() as u32, SearchConfig::default())?.min_len
    } else {
        make_plan_with(family.alpha(), SearchConfig::default())?.min_len
    };
    usize::try_from(min_len).context("plan threshold does not fit usize")
}

fn verify(command: VerifyCommand, io: &mut Io<'_>) -> Result<Outcome> {
    match command {
        VerifyCommand::Avoid { family, input, min_len, grid } => {
            let family = read_family(&family, io)?;
            let min_len = match min_len {
                Some(m) => m,
                None => default_min_len(&family, grid)?,
            };
            if grid {
                let g = read_bit_grid(&input)?;
                if let Some((row, col, side)) = verify_grid_avoidance(&g, &family, min_len) {
                    return Ok(Outcome::Failed(format!("forbidden square of side {side} at row {row}, column {col}")));
                }
            } else {
                let x = read_sequence(&input)?;
                if let Some((start, len)) = verify_avoidance(&x, &family, min_len) {
                    return Ok(Outcome::Failed(format!(
                        "forbidden window at {start} of length {len}: {}",
                        x.slice(start, start + len)
                    )));
                }
            }
            let _ = writeln!(io.stdout, "ok");
        }
        VerifyCommand::Ap { ladder, input } => {
            let omega = read_sequence(&input)?;
            if let Err(v) = verify_ladder_all(&omega, &ladder) {
                return Ok(Outcome::Failed(format!("{v}")));
            }
            let _ = writeln!(io.stdout, "ok");
        }
        VerifyCommand::Ladder { ladder, input, level } => {
            let omega = read_sequence(&input)?;
            if let Err(v) = verify_ladder_periodicity(&omega, &ladder, level)? {
                return Ok(Outcome::Failed(format!("{v}")));
            }
            let _ = writeln!(io.stdout, "ok");
        }
    }
    Ok(Outcome::Ok)
}

fn decompose_text(ladder: &PeriodLadder, window: &str) -> Result<String> {
    let nums = parse_list::<u64>(window, "--window")?;
    let [m, k] = nums[..] else { bail!("--window expects m,k") };
    let d = decompose_window(m, k, ladder)?;
    let mut text = format!(
        "window={m},{k}\ncutoff_rank={}\nsmall_rank_count={}\ntotal_len={}\ndensity_bound_holds={}\nintervals={}\n",
        d.cutoff_rank,
        d.small_rank_count,
        d.total_len,
        d.density_bound_holds,
        d.intervals.len()
    );
    for iv in &d.intervals {
        text.push_str(&format!("interval={}..{} offset={}\n", iv.start, iv.end, iv.offset));
    }
    for (a_next, disp) in d.displacements() {
        text.push_str(&format!("displacement a_next={a_next} offset={disp}\n"));
    }
    Ok(text)
}

fn cube_text(ladder: &PeriodLadder, cube: &str) -> Result<String> {
    let nums = parse_list::<i64>(cube, "--cube")?;
    let (k, corner) = nums.split_last().ok_or_else(|| anyhow!("--cube expects m_1,...,m_d,k"))?;
    if corner.is_empty() || *k <= 0 {
        bail!("--cube expects m_1,...,m_d,k with k > 0");
    }
    let grid = GridLadder::from_ladder(corner.len(), ladder)?;
    let d = decompose_cube(corner, *k as u64, &grid)?;
    let mut text = format!(
        "cube={}\ncutoff_rank={}\nsmall_rank_count={}\ntotal_len={}\ndensity_bound_holds={}\nintervals={}\nbound={}\n",
        d.cube,
        d.cutoff_rank,
        d.small_rank_count,
        d.total_len,
        d.density_bound_holds,
        d.intervals.len(),
        d.interval_bound()
    );
    for (a, b) in &d.intervals {
        text.push_str(&format!("interval={a}..{b}\n"));
    }
    Ok(text)
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| anyhow!("{flag}: cannot parse {p:?}")))
        .collect()
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let (a, b) = text.split_once("..").ok_or_else(|| anyhow!("--lengths expects a..b, got {text:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| anyhow!("--lengths: bad start {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| anyhow!("--lengths: bad end {b:?}"))?;
    if a == 0 || a > b {
        bail!("--lengths: need 1 <= a <= b, got {a}..{b}");
    }
    Ok(a..=b)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_family(path: &Path, io: &mut Io<'_>) -> Result<ForbiddenFamily> {
    let parsed = parse_family(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?;
    for w in &parsed.warnings {
        io.warn(&w.to_string());
    }
    Ok(parsed.family)
}

/// Bits of a sequence file; whitespace is ignored.
fn read_sequence(path: &Path) -> Result<BitString> {
    let text = read_text(path)?;
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    compact.parse().with_context(|| format!("parsing {}", path.display()))
}

/// Either a bare grid or a grid file with a `d=2 region=...` header.
fn read_bit_grid(path: &Path) -> Result<BitGrid> {
    let text = read_text(path)?;
    if text.trim_start().starts_with("d=") {
        let data = GridData::parse(&text)?;
        return data.to_bit_grid().ok_or_else(|| anyhow!("{}: not a two-dimensional grid", path.display()));
    }
    BitGrid::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `random:<seed>` or a file of bits.
fn open_source(source: &str) -> Result<Box<dyn Iterator<Item = u8>>> {
    if let Some(seed) = source.strip_prefix("random:") {
        let seed: u64 = seed.parse().map_err(|_| anyhow!("--source: bad seed {seed:?}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(Box::new(std::iter::repeat_with(move || rng.gen::<bool>() as u8)));
    }
    Ok(Box::new(read_sequence(Path::new(source))?.into_vec().into_iter()))
}
