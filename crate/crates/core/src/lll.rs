//! Certified local-lemma parameters.
//!
//! Infinite products `∏_{k≥L} (1 − 2^{−δk^d})^{k^j}` are bounded from below
//! with fixed-point integers carrying [`FRAC_BITS`] fractional bits. Every
//! rounding goes toward the smaller product, and the tail beyond a cutoff is
//! bounded with `∏(1−x_k) ≥ 1 − 2Σx_k·k^j` (valid for `x_k ≤ 1/2`) and a
//! geometric majorant of the sum.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::forbidden::Alpha;

pub const FRAC_BITS: u64 = 192;
pub const DEFAULT_SEARCH_CEILING: u64 = 1 << 20;
/// Published constants are floored to multiples of `2^-CONST_BITS`.
const CONST_BITS: u64 = 64;
/// `gamma` is rounded up to a multiple of `2^-GAMMA_BITS`.
const GAMMA_BITS: u64 = 32;
/// Cutoff is placed where the factors are within `2^-CUTOFF_BITS` of one.
const CUTOFF_BITS: f64 = 100.0;
const LOG_SERIES_TERMS: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("delta {0} has a denominator too large for the root extraction")]
    DeltaTooFine(String),
    #[error("certification needs 2^(-delta*L^d) < 1/2, fails at L={min_len}")]
    ThresholdTooSmall { min_len: u64 },
    #[error("no L up to the search ceiling {ceiling} certifies the plan")]
    SearchCeiling { ceiling: u64 },
    #[error("length {len} is below the plan threshold L={min_len}")]
    BelowThreshold { len: u64, min_len: u64 },
    #[error("plan text: {0}")]
    Parse(String),
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn one_fixed() -> BigUint {
    BigUint::one() << FRAC_BITS
}

/// `2^{-delta·k^d}` upper bounds for a fixed `(delta, d)`.
struct Threshold {
    num: BigUint,
    den: u32,
    dim: u32,
    // ceil(2^F · 2^{-b/den}) keyed by b
    roots: HashMap<u32, BigUint>,
}

impl Threshold {
    fn new(delta: &BigRational, dim: u32) -> Result<Self, PlanError> {
        if !delta.is_positive() {
            return Err(PlanError::NonPositiveDelta);
        }
        let den = delta.denom().to_u32().ok_or_else(|| PlanError::DeltaTooFine(delta.to_string()))?;
        let num = delta.numer().to_biguint().expect("positive");
        Ok(Threshold { num, den, dim, roots: HashMap::new() })
    }

    fn root(&mut self, b: u32) -> &BigUint {
        let den = self.den;
        self.roots.entry(b).or_insert_with(|| {
            let value = BigUint::one() << (FRAC_BITS * den as u64 - b as u64);
            let r = value.nth_root(den);
            if r.pow(den) == value {
                r
            } else {
                r + 1u32
            }
        })
    }

    /// Fixed-point upper bound on `2^{-delta·k^e}`, never zero.
    fn upper(&mut self, k: u64, e: u32) -> BigUint {
        let exponent = &self.num * BigUint::from(k).pow(e);
        let (a, b) = exponent.div_rem(&BigUint::from(self.den));
        let b = b.to_u32().expect("remainder below den");
        let t = self.root(b).clone();
        match a.to_u64() {
            Some(a) if a <= 2 * FRAC_BITS => {
                let bump = (BigUint::one() << a) - 1u32;
                (t + bump) >> a
            }
            _ => BigUint::one(),
        }
    }

    fn term(&mut self, k: u64) -> BigUint {
        self.upper(k, self.dim)
    }

    /// Exact test of `delta·k^d > 1`, i.e. `2^{-delta·k^d} < 1/2`.
    fn below_half(&self, k: u64) -> bool {
        &self.num * BigUint::from(k).pow(self.dim) > BigUint::from(self.den)
    }
}

fn mul_floor(a: &BigUint, b: &BigUint) -> BigUint {
    (a * b) >> FRAC_BITS
}

fn pow_floor(base: &BigUint, mut e: BigUint) -> BigUint {
    let mut result = one_fixed();
    let mut base = base.clone();
    while !e.is_zero() {
        if e.is_odd() {
            result = mul_floor(&result, &base);
        }
        e >>= 1;
        if !e.is_zero() {
            base = mul_floor(&base, &base);
        }
    }
    result
}

/// Cutoff beyond which the tail bound takes over. Depends only on
/// `(delta, j, d)` so that the result is monotone in `L`.
fn cutoff(delta: f64, j: u32, d: u32) -> u64 {
    let log_ratio = |k: f64| j as f64 * ((k + 2.0) / (k + 1.0)).log2() - delta * (k + 1.0).powi(d as i32 - 1);
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        if delta * kf.powi(d as i32) - j as f64 * (kf + 1.0).log2() >= CUTOFF_BITS && log_ratio(kf) <= -delta / 2.0 {
            return k;
        }
        k = k + 1 + k / 64;
    }
}

/// Fixed-point lower bound on `∏_{k>K} (1 − x_k)^{k^j}`.
fn tail_floor(th: &mut Threshold, big_k: u64, j: u32) -> BigUint {
    let one = one_fixed();
    let k1 = big_k + 1;
    let first = BigUint::from(k1).pow(j) * th.term(k1);
    // ratio of consecutive terms: ((K+2)/(K+1))^j · 2^{-delta·(K+1)^{d-1}}
    let growth = (BigUint::from(k1 + 1).pow(j) << FRAC_BITS).div_ceil(&BigUint::from(k1).pow(j));
    let decay = th.upper(k1, th.dim - 1);
    let rho = (growth * decay).div_ceil(&one);
    if rho >= one {
        return BigUint::zero();
    }
    let sum = (first << FRAC_BITS).div_ceil(&(&one - rho));
    let twice = sum << 1;
    if twice >= one {
        BigUint::zero()
    } else {
        one - twice
    }
}

fn certified_fixed(th: &mut Threshold, min_len: u64, j: u32) -> Result<BigUint, PlanError> {
    if min_len == 0 || !th.below_half(min_len) {
        return Err(PlanError::ThresholdTooSmall { min_len });
    }
    let delta = th.num.to_f64().unwrap_or(f64::MAX) / th.den as f64;
    let big_k = cutoff(delta, j, th.dim).max(1);
    if min_len > big_k {
        return Ok(tail_floor(th, min_len - 1, j));
    }
    let one = one_fixed();
    let mut acc = tail_floor(th, big_k, j);
    for k in (min_len..=big_k).rev() {
        let factor = &one - th.term(k);
        let weighted = pow_floor(&factor, BigUint::from(k).pow(j));
        acc = mul_floor(&acc, &weighted);
    }
    Ok(acc)
}

fn fixed_to_rational(x: BigUint, bits: u64) -> BigRational {
    ratio(x, BigUint::one() << bits)
}

/// Lower bound on `∏_{k≥L} (1 − 2^{−δk})^{k^j}`, nondecreasing in `L`.
pub fn certified_product(delta: &BigRational, min_len: u64, j: u32) -> Result<BigRational, PlanError> {
    certified_product_dim(delta, min_len, j, 1)
}

/// Lower bound on `∏_{k≥L} (1 − 2^{−δk^d})^{k^j}`.
pub fn certified_product_dim(delta: &BigRational, min_len: u64, j: u32, dim: u32) -> Result<BigRational, PlanError> {
    if dim == 0 {
        return Err(PlanError::ZeroDimension);
    }
    let mut th = Threshold::new(delta, dim)?;
    Ok(fixed_to_rational(certified_fixed(&mut th, min_len, j)?, FRAC_BITS))
}

/// Rational just below `ln 2`.
fn ln2_lower() -> BigRational {
    ratio(
        "6931471805599453094172321214581".parse::<BigInt>().expect("literal"),
        BigInt::from(10u32).pow(31),
    )
}

/// Upper bound on `-log2(d)` for `d ∈ (0,1]`, rounded up to `2^-32`.
pub fn gamma_upper(d: &BigRational) -> BigRational {
    assert!(d.is_positive() && *d <= BigRational::one(), "d must lie in (0,1]");
    let y = BigRational::one() - d;
    if y.is_zero() {
        return BigRational::zero();
    }
    // -ln(1-y) = Σ y^n/n ≤ Σ_{n≤N} y^n/n + y^{N+1}/((N+1)(1-y))
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    for n in 1..=LOG_SERIES_TERMS {
        power = &power * &y;
        sum += &power / BigRational::from_integer(n.into());
    }
    let rest = &power * &y / (BigRational::from_integer((LOG_SERIES_TERMS + 1).into()) * d);
    let nats = sum + rest;
    let bits = nats / ln2_lower();
    let scale = BigRational::from_integer(BigInt::one() << GAMMA_BITS);
    ratio((bits * &scale).ceil().to_integer(), BigInt::one() << GAMMA_BITS)
}

fn floor_to_grid(x: &BigRational) -> BigRational {
    let scale = BigInt::one() << CONST_BITS;
    ratio((x * BigRational::from_integer(scale.clone())).floor().to_integer(), scale)
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Certified parameters for one-dimensional sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LllPlan {
    pub alpha: Alpha,
    pub delta: BigRational,
    pub min_len: u64,
    pub d_lower: BigRational,
    pub gamma: BigRational,
    pub margin: BigRational,
}

/// Certified parameters for `d`-dimensional cubes. `monomial_constants[i]`
/// bounds the product weighted by `k^{d-i}` and is raised to
/// `coefficients[i] = C(d,i)` in the combined constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridLllPlan {
    pub dim: u32,
    pub alpha: Alpha,
    pub delta: BigRational,
    pub min_len: u64,
    pub coefficients: Vec<u64>,
    pub monomial_constants: Vec<BigRational>,
    pub d_lower: BigRational,
    pub gamma: BigRational,
    pub margin: BigRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub ceiling: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { ceiling: DEFAULT_SEARCH_CEILING }
    }
}

pub fn default_delta(alpha: Alpha) -> BigRational {
    (BigRational::one() - alpha.to_big_rational()) / BigRational::from_integer(4.into())
}

struct Candidate {
    monomials: Vec<BigRational>,
    d_lower: BigRational,
    gamma: BigRational,
}

fn evaluate(delta: &BigRational, min_len: u64, dim: u32, coefficients: &[u64]) -> Result<Candidate, PlanError> {
    let mut monomials = Vec::with_capacity(dim as usize + 1);
    let mut d_lower = BigRational::one();
    for (i, &c) in coefficients.iter().enumerate() {
        let j = dim - i as u32;
        let exact = certified_product_dim(delta, min_len, j, dim)?;
        let di = floor_to_grid(&exact);
        d_lower *= num_traits::pow(di.clone(), c as usize);
        monomials.push(di);
    }
    let d_lower = floor_to_grid(&d_lower);
    if !d_lower.is_positive() {
        return Ok(Candidate { monomials, d_lower, gamma: BigRational::from_integer(BigInt::from(u64::MAX)) });
    }
    let gamma = gamma_upper(&d_lower);
    Ok(Candidate { monomials, d_lower, gamma })
}

pub fn make_plan(alpha: Alpha) -> Result<LllPlan, PlanError> {
    make_plan_with(alpha, SearchConfig::default())
}

pub fn make_plan_with(alpha: Alpha, config: SearchConfig) -> Result<LllPlan, PlanError> {
    let g = make_grid_plan_with(alpha, 1, config)?;
    Ok(LllPlan {
        alpha: g.alpha,
        delta: g.delta,
        min_len: g.min_len,
        d_lower: g.d_lower,
        gamma: g.gamma,
        margin: g.margin,
    })
}

pub fn make_grid_plan(alpha: Alpha, dim: u32) -> Result<GridLllPlan, PlanError> {
    make_grid_plan_with(alpha, dim, SearchConfig::default())
}

pub fn make_grid_plan_with(alpha: Alpha, dim: u32, config: SearchConfig) -> Result<GridLllPlan, PlanError> {
    if dim == 0 {
        return Err(PlanError::ZeroDimension);
    }
    let delta = default_delta(alpha);
    let target = (BigRational::one() - alpha.to_big_rational()) / BigRational::from_integer(2.into());
    let coefficients: Vec<u64> = (0..=dim).map(|i| binomial(dim, i)).collect();
    let th = Threshold::new(&delta, dim)?;

    let mut lo = 1u64;
    while !th.below_half(lo) {
        lo += 1;
        if lo > config.ceiling {
            return Err(PlanError::SearchCeiling { ceiling: config.ceiling });
        }
    }
    let good = |l: u64| -> Result<Option<Candidate>, PlanError> {
        let c = evaluate(&delta, l, dim, &coefficients)?;
        Ok((c.gamma < target).then_some(c))
    };

    // doubling, then bisection on (bad, hi]
    let mut hi = lo;
    let mut bad = None;
    let mut best = loop {
        if let Some(c) = good(hi)? {
            break c;
        }
        bad = Some(hi);
        if hi >= config.ceiling {
            return Err(PlanError::SearchCeiling { ceiling: config.ceiling });
        }
        hi = (hi * 2).min(config.ceiling);
    };
    if let Some(mut bad) = bad {
        while hi - bad > 1 {
            let mid = bad + (hi - bad) / 2;
            match good(mid)? {
                Some(c) => {
                    hi = mid;
                    best = c;
                }
                None => bad = mid,
            }
        }
    }

    let margin = BigRational::one() - alpha.to_big_rational() - &delta - &best.gamma;
    Ok(GridLllPlan {
        dim,
        alpha,
        delta,
        min_len: hi,
        coefficients,
        monomial_constants: best.monomials,
        d_lower: best.d_lower,
        gamma: best.gamma,
        margin,
    })
}

/// Exact test of `2^{-δ}·D ≥ 2^{-(1-α)}`, which is the per-unit form of
/// the local-lemma inequality and hence independent of the length.
fn margin_holds(alpha: Alpha, delta: &BigRational, d_lower: &BigRational) -> bool {
    if !d_lower.is_positive() {
        return false;
    }
    let e = BigRational::one() - alpha.to_big_rational() - delta;
    let b = e.denom().to_usize().expect("small denominator");
    let a = e.numer().clone();
    let lhs = num_traits::pow(d_lower.clone(), b);
    if a.is_negative() {
        let shift = (-a).to_usize().expect("small numerator");
        lhs >= BigRational::from_integer(BigInt::one() << shift)
    } else {
        let shift = a.to_usize().expect("small numerator");
        lhs * BigRational::from_integer(BigInt::one() << shift) >= BigRational::one()
    }
}

/// Whether `2^{−δl}·D^l ≥ 2^{−(1−α)l}` holds exactly.
pub fn check_condition(plan: &LllPlan, len: u64) -> Result<bool, PlanError> {
    if len < plan.min_len {
        return Err(PlanError::BelowThreshold { len, min_len: plan.min_len });
    }
    Ok(margin_holds(plan.alpha, &plan.delta, &plan.d_lower))
}

/// Same test with exponent `l^d`.
pub fn check_grid_condition(plan: &GridLllPlan, len: u64) -> Result<bool, PlanError> {
    if len < plan.min_len {
        return Err(PlanError::BelowThreshold { len, min_len: plan.min_len });
    }
    Ok(margin_holds(plan.alpha, &plan.delta, &plan.d_lower))
}

fn write_common(
    f: &mut fmt::Formatter<'_>,
    alpha: Alpha,
    delta: &BigRational,
    min_len: u64,
) -> fmt::Result {
    writeln!(f, "alpha={alpha}")?;
    writeln!(f, "delta={delta}")?;
    writeln!(f, "L={min_len}")
}

fn write_tail(f: &mut fmt::Formatter<'_>, d_lower: &BigRational, gamma: &BigRational, margin: &BigRational) -> fmt::Result {
    writeln!(f, "D_lower={d_lower}")?;
    writeln!(f, "gamma={gamma}")?;
    writeln!(f, "margin={margin}")
}

impl fmt::Display for LllPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_common(f, self.alpha, &self.delta, self.min_len)?;
        write_tail(f, &self.d_lower, &self.gamma, &self.margin)
    }
}

impl fmt::Display for GridLllPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim={}", self.dim)?;
        write_common(f, self.alpha, &self.delta, self.min_len)?;
        let c: Vec<String> = self.coefficients.iter().map(u64::to_string).collect();
        writeln!(f, "c={}", c.join(","))?;
        for (i, d) in self.monomial_constants.iter().enumerate() {
            writeln!(f, "D_{i}={d}")?;
        }
        write_tail(f, &self.d_lower, &self.gamma, &self.margin)
    }
}

fn parse_fields(text: &str) -> Result<HashMap<String, String>, PlanError> {
    let mut fields = HashMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line.split_once('=').ok_or_else(|| PlanError::Parse(format!("expected key=value, got {line:?}")))?;
        if fields.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(PlanError::Parse(format!("duplicate key {k}")));
        }
    }
    Ok(fields)
}

fn field<'a>(fields: &'a HashMap<String, String>, key: &str) -> Result<&'a str, PlanError> {
    fields.get(key).map(String::as_str).ok_or_else(|| PlanError::Parse(format!("missing key {key}")))
}

fn rational_field(fields: &HashMap<String, String>, key: &str) -> Result<BigRational, PlanError> {
    let v = field(fields, key)?;
    v.parse().map_err(|_| PlanError::Parse(format!("{key}: not a rational: {v:?}")))
}

fn int_field<T: std::str::FromStr>(fields: &HashMap<String, String>, key: &str) -> Result<T, PlanError> {
    let v = field(fields, key)?;
    v.parse().map_err(|_| PlanError::Parse(format!("{key}: not an integer: {v:?}")))
}

fn alpha_field(fields: &HashMap<String, String>) -> Result<Alpha, PlanError> {
    let v = field(fields, "alpha")?;
    v.parse().map_err(|e| PlanError::Parse(format!("alpha: {e}")))
}

impl std::str::FromStr for LllPlan {
    type Err = PlanError;

    fn from_str(text: &str) -> Result<Self, PlanError> {
        let f = parse_fields(text)?;
        if f.get("dim").is_some_and(|d| d != "1") {
            return Err(PlanError::Parse("not a one-dimensional plan".into()));
        }
        Ok(LllPlan {
            alpha: alpha_field(&f)?,
            delta: rational_field(&f, "delta")?,
            min_len: int_field(&f, "L")?,
            d_lower: rational_field(&f, "D_lower")?,
            gamma: rational_field(&f, "gamma")?,
            margin: rational_field(&f, "margin")?,
        })
    }
}

impl std::str::FromStr for GridLllPlan {
    type Err = PlanError;

    fn from_str(text: &str) -> Result<Self, PlanError> {
        let f = parse_fields(text)?;
        let dim: u32 = int_field(&f, "dim")?;
        let coefficients = field(&f, "c")?
            .split(',')
            .map(|c| c.trim().parse::<u64>().map_err(|_| PlanError::Parse(format!("c: bad entry {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if coefficients.len() != dim as usize + 1 {
            return Err(PlanError::Parse(format!("c: expected {} entries", dim + 1)));
        }
        let monomial_constants =
            (0..=dim).map(|i| rational_field(&f, &format!("D_{i}"))).collect::<Result<Vec<_>, _>>()?;
        Ok(GridLllPlan {
            dim,
            alpha: alpha_field(&f)?,
            delta: rational_field(&f, "delta")?,
            min_len: int_field(&f, "L")?,
            coefficients,
            monomial_constants,
            d_lower: rational_field(&f, "D_lower")?,
            gamma: rational_field(&f, "gamma")?,
            margin: rational_field(&f, "margin")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        ratio(n, d)
    }

    fn alpha(n: u32, d: u32) -> Alpha {
        Alpha::new(n, d).unwrap()
    }

    fn to_f64(x: &BigRational) -> f64 {
        x.numer().to_f64().unwrap() / x.denom().to_f64().unwrap()
    }

    // plain f64 evaluation of the product with many terms
    fn float_product(delta: f64, from: u64, to: u64, j: i32, d: i32) -> f64 {
        (from..=to).map(|k| (1.0 - (-delta * (k as f64).powi(d)).exp2()).powf((k as f64).powi(j))).product()
    }

    #[test]
    fn delta_one_from_two() {
        let reference = float_product(1.0, 2, 64, 0, 1);
        assert!((reference - 0.5776).abs() < 1e-4);
        let b = to_f64(&certified_product(&q(1, 1), 2, 0).unwrap());
        assert!(b > 0.5 && b <= reference, "{b} vs {reference}");
        assert!(reference - b < 1e-12);
    }

    #[test]
    fn bound_below_float_reference() {
        for (delta, from, j) in [(0.125, 20u64, 0i32), (0.125, 20, 1), (0.5, 3, 2), (0.25, 50, 1)] {
            let d = q((delta * 8.0) as i64, 8);
            let b = to_f64(&certified_product(&d, from, j as u32).unwrap());
            let reference = float_product(delta, from, 20_000, j, 1);
            assert!(b <= reference * (1.0 + 1e-12), "{delta} {from} {j}: {b} > {reference}");
            assert!(b > 0.0 && b <= 1.0);
            assert!(reference - b < 1e-9 * reference.max(1e-300), "{b} far below {reference}");
        }
    }

    #[test]
    fn bound_monotone_in_start() {
        let d = q(1, 8);
        let mut prev = BigRational::zero();
        for l in 9..400 {
            let b = certified_product(&d, l, 1).unwrap();
            assert!(b >= prev, "L={l}");
            prev = b;
        }
        assert!(prev <= BigRational::one());
    }

    #[test]
    fn bound_continues_past_cutoff() {
        let d = q(1, 1);
        let big_k = cutoff(1.0, 1, 1);
        let below = certified_product(&d, big_k, 1).unwrap();
        let above = certified_product(&d, big_k + 1, 1).unwrap();
        let far = certified_product(&d, big_k + 40, 1).unwrap();
        assert!(below <= above && above <= far && far < BigRational::one());
    }

    #[test]
    fn threshold_precondition() {
        assert_eq!(certified_product(&q(1, 1), 1, 0), Err(PlanError::ThresholdTooSmall { min_len: 1 }));
        assert_eq!(certified_product(&q(1, 8), 8, 0), Err(PlanError::ThresholdTooSmall { min_len: 8 }));
        assert!(certified_product(&q(1, 8), 9, 0).is_ok());
        assert_eq!(certified_product(&q(0, 1), 9, 0), Err(PlanError::NonPositiveDelta));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_upper(&BigRational::one()), BigRational::zero());
        let half = gamma_upper(&q(1, 2));
        assert!(half >= BigRational::one() && to_f64(&half) < 1.0 + 1e-9);
        let g = gamma_upper(&q(7, 8));
        let exact = -(7.0f64 / 8.0).log2();
        assert!(to_f64(&g) >= exact && to_f64(&g) < exact + 1e-9);
    }

    #[test]
    fn plan_for_one_half() {
        let plan = make_plan(alpha(1, 2)).unwrap();
        assert_eq!(plan.delta, q(1, 8));
        assert!(plan.gamma < q(1, 4));
        assert!(plan.margin.is_positive());
        assert!(plan.d_lower.is_positive() && plan.d_lower <= BigRational::one());
        assert_eq!(plan.min_len, 104);
        assert!(check_condition(&plan, plan.min_len).unwrap());
        assert!(check_condition(&plan, 10 * plan.min_len).unwrap());
        assert_eq!(
            check_condition(&plan, plan.min_len - 1),
            Err(PlanError::BelowThreshold { len: plan.min_len - 1, min_len: plan.min_len })
        );
    }

    #[test]
    fn plan_is_least_certified() {
        let plan = make_plan(alpha(1, 2)).unwrap();
        let before = evaluate(&plan.delta, plan.min_len - 1, 1, &[1, 1]).unwrap();
        assert!(before.gamma >= q(1, 4));
    }

    #[test]
    fn hand_built_plan_checks() {
        let plan = LllPlan {
            alpha: alpha(1, 2),
            delta: q(1, 5),
            min_len: 10,
            d_lower: q(7, 8),
            gamma: gamma_upper(&q(7, 8)),
            margin: q(1, 2) - q(1, 5) - gamma_upper(&q(7, 8)),
        };
        assert!(plan.gamma <= q(1, 5));
        assert!(check_condition(&plan, 10).unwrap());

        let mut corrupted = make_plan(alpha(1, 2)).unwrap();
        corrupted.delta = q(1, 2);
        assert!(!check_condition(&corrupted, corrupted.min_len).unwrap());
        corrupted.delta = q(3, 4);
        assert!(!check_condition(&corrupted, corrupted.min_len).unwrap());
    }

    #[test]
    fn threshold_grows_with_alpha() {
        let ls: Vec<u64> = [(1, 4), (1, 2), (3, 4), (7, 8)]
            .iter()
            .map(|&(n, d)| make_plan(alpha(n, d)).unwrap().min_len)
            .collect();
        assert!(ls.windows(2).all(|w| w[0] <= w[1]), "{ls:?}");
    }

    #[test]
    fn grid_plan_reduces_to_line_plan() {
        let line = make_plan(alpha(1, 2)).unwrap();
        let grid = make_grid_plan(alpha(1, 2), 1).unwrap();
        assert_eq!(grid.coefficients, vec![1, 1]);
        assert_eq!((grid.min_len, &grid.delta, &grid.d_lower), (line.min_len, &line.delta, &line.d_lower));
    }

    #[test]
    fn grid_plan_two_dimensions() {
        let plan = make_grid_plan(alpha(1, 2), 2).unwrap();
        assert_eq!(plan.coefficients, vec![1, 2, 1]);
        assert!(plan.margin.is_positive());
        assert!(plan.gamma.is_positive());
        assert!(plan.d_lower.is_positive() && plan.d_lower <= BigRational::one());
        assert!(check_grid_condition(&plan, plan.min_len).unwrap());
    }

    #[test]
    fn ceiling_is_reported() {
        let err = make_plan_with(alpha(1, 2), SearchConfig { ceiling: 40 }).unwrap_err();
        assert_eq!(err, PlanError::SearchCeiling { ceiling: 40 });
    }

    #[test]
    fn text_round_trip() {
        let plan = make_plan(alpha(1, 2)).unwrap();
        let text = plan.to_string();
        assert!(text.starts_with("alpha=1/2\ndelta=1/8\nL="));
        assert_eq!(text.parse::<LllPlan>().unwrap(), plan);

        let grid = make_grid_plan(alpha(1, 2), 2).unwrap();
        assert_eq!(grid.to_string().parse::<GridLllPlan>().unwrap(), grid);
        assert!(matches!("alpha=1/2\n".parse::<LllPlan>(), Err(PlanError::Parse(_))));
    }

    #[test]
    fn verdict_is_repeatable() {
        let plan = make_plan(alpha(3, 4)).unwrap();
        let first = check_condition(&plan, plan.min_len).unwrap();
        assert!((0..5).all(|_| check_condition(&plan, plan.min_len).unwrap() == first));
    }
}
