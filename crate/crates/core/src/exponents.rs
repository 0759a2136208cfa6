//! Closed-form diversity exponents and an exhaustive block-diversity check.
//!
//! Floors and ceilings of `(B/N)(1 - R/M)` are taken on exact rationals, so
//! boundary points such as `R/M = 1/2` never misfire through rounding.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Default limit on the number of codewords scanned by [`block_diversity`].
pub const DEFAULT_CODEBOOK_CAP: usize = 1 << 16;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact ratio `R/M` in `[0, 1]`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RateRatio {
    num: u64,
    den: u64,
}

impl RateRatio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::InvalidParameter(format!("rate ratio {num}/{den} is outside [0, 1]")));
        }
        let g = gcd(num, den).max(1);
        Ok(RateRatio { num: num / g, den: den / g })
    }

    /// Closest ratio with denominator at most 10^6.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("rate ratio {x} is outside [0, 1]")));
        }
        // Continued-fraction convergents.
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut r = x;
        loop {
            let a = r.floor();
            let (p2, q2) = (a as u64 * p1 + p0, a as u64 * q1 + q0);
            if q2 > 1_000_000 {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let frac = r - a;
            if frac < 1e-12 || (p1 as f64 / q1 as f64 - x).abs() < 1e-15 {
                break;
            }
            r = 1.0 / frac;
        }
        RateRatio::new(p1, q1)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl FromStr for RateRatio {
    type Err = Error;

    /// Accepts `p/q` or a decimal such as `0.4` (read exactly as `4/10`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse rate ratio '{s}'"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse().map_err(|_| bad())?;
            let q = q.trim().parse().map_err(|_| bad())?;
            return RateRatio::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        RateRatio::new(int * den + frac, den)
    }
}

impl fmt::Display for RateRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Parameters of an exponent evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentQuery {
    pub blocks: usize,
    /// Rotation dimension; must divide `blocks`.
    pub dim: usize,
    /// Nakagami parameter.
    pub m: f64,
    pub bits_per_symbol: usize,
    pub ratio: RateRatio,
    /// Growth of the code length with `log SNR`; `f64::INFINITY` is allowed.
    pub lambda: Option<f64>,
}

impl ExponentQuery {
    pub fn new(blocks: usize, dim: usize, m: f64, bits_per_symbol: usize, ratio: RateRatio) -> Result<Self> {
        if blocks == 0 || dim == 0 || !blocks.is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!("N={dim} must divide B={blocks}")));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("m must be positive, got {m}")));
        }
        if bits_per_symbol == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        Ok(ExponentQuery { blocks, dim, m, bits_per_symbol, ratio, lambda: None })
    }

    /// Builds the query from a rate in bits per channel use.
    pub fn with_rate(blocks: usize, dim: usize, m: f64, bits_per_symbol: usize, rate: f64) -> Result<Self> {
        if !(0.0..=bits_per_symbol as f64).contains(&rate) {
            return Err(Error::InvalidParameter(format!("rate {rate} must lie in [0, {bits_per_symbol}]")));
        }
        let ratio = RateRatio::from_f64(rate / bits_per_symbol as f64)?;
        Self::new(blocks, dim, m, bits_per_symbol, ratio)
    }

    pub fn lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
        }
        self.lambda = Some(lambda);
        Ok(self)
    }

    pub fn rate(&self) -> f64 {
        self.ratio.value() * self.bits_per_symbol as f64
    }

    /// Number of rotations, `K = B/N`.
    pub fn rotations(&self) -> usize {
        self.blocks / self.dim
    }

    /// `(B/N)(1 - R/M)` as the exact pair (numerator, denominator).
    fn x_exact(&self) -> (u64, u64) {
        let k = self.rotations() as u64;
        (k * (self.ratio.den - self.ratio.num), self.ratio.den)
    }

    pub fn x(&self) -> f64 {
        let (n, d) = self.x_exact();
        n as f64 / d as f64
    }

    pub fn x_floor(&self) -> u64 {
        let (n, d) = self.x_exact();
        n / d
    }

    pub fn x_ceil(&self) -> u64 {
        let (n, d) = self.x_exact();
        n.div_ceil(d)
    }

    pub fn x_is_integer(&self) -> bool {
        let (n, d) = self.x_exact();
        n % d == 0
    }
}

/// Exponent achieved by Gaussian codes, `mB`.
pub fn optimal_exponent(m: f64, blocks: usize) -> f64 {
    m * blocks as f64
}

/// Blockwise Singleton bound `N(1 + floor((B/N)(1 - R/M)))`.
pub fn singleton_block_diversity(q: &ExponentQuery) -> u64 {
    q.dim as u64 * (1 + q.x_floor())
}

/// `m` times the Singleton bound.
pub fn upper_bound(q: &ExponentQuery) -> f64 {
    q.m * singleton_block_diversity(q) as f64
}

/// Exponent of the coded-modulation scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoremExponent {
    Value(f64),
    /// `(B/N)(1 - R/M)` is an integer; the exponent lies between `lower`
    /// (the random-coding bound for unbounded length) and `upper`.
    Boundary { upper: f64, lower: f64 },
}

impl TheoremExponent {
    /// The upper-bound value, which is what is usually quoted.
    pub fn upper(&self) -> f64 {
        match *self {
            TheoremExponent::Value(v) => v,
            TheoremExponent::Boundary { upper, .. } => upper,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, TheoremExponent::Boundary { .. })
    }
}

pub fn theorem_exponent(q: &ExponentQuery) -> TheoremExponent {
    let upper = upper_bound(q);
    if q.x_is_integer() {
        let lower = q.m * (q.dim as u64 * q.x_ceil()) as f64;
        TheoremExponent::Boundary { upper, lower }
    } else {
        TheoremExponent::Value(upper)
    }
}

/// Random-coding lower bound for code length growing as `lambda log SNR`.
/// A query without `lambda` is evaluated for `lambda -> infinity`.
pub fn random_coding_lower_bound(q: &ExponentQuery) -> f64 {
    let lambda = q.lambda.unwrap_or(f64::INFINITY);
    let (m, b, n, mm) = (q.m, q.blocks as f64, q.dim as f64, q.bits_per_symbol as f64);
    let one_minus = 1.0 - q.ratio.value();
    if lambda * n * mm * LN_2 < m {
        return lambda * b * mm * LN_2 * one_minus;
    }
    let ceil = m * n * q.x_ceil() as f64;
    let floor = m * n * q.x_floor() as f64;
    if lambda.is_infinite() {
        // The remainder term is either zero (integer x) or unbounded.
        return if q.x_is_integer() { floor } else { ceil };
    }
    let remainder = b * one_minus - n * q.x_floor() as f64;
    ceil.min(floor + lambda * mm * LN_2 * remainder)
}

/// One row of an exponent staircase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseRow {
    pub ratio: RateRatio,
    pub singleton: u64,
    pub upper: f64,
    pub theorem: TheoremExponent,
    pub lower: f64,
}

/// Exponents on the grid `R/M = i/steps`, `i = 0..=steps`.
pub fn staircase(
    blocks: usize,
    dim: usize,
    m: f64,
    bits_per_symbol: usize,
    lambda: Option<f64>,
    steps: u64,
) -> Result<Vec<StaircaseRow>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("staircase needs at least one step".into()));
    }
    (0..=steps)
        .map(|i| {
            let ratio = RateRatio::new(i, steps)?;
            let mut q = ExponentQuery::new(blocks, dim, m, bits_per_symbol, ratio)?;
            if let Some(l) = lambda {
                q = q.lambda(l)?;
            }
            Ok(StaircaseRow {
                ratio,
                singleton: singleton_block_diversity(&q),
                upper: upper_bound(&q),
                theorem: theorem_exponent(&q),
                lower: random_coding_lower_bound(&q),
            })
        })
        .collect()
}

/// Minimum, over pairs of distinct codewords, of the number of blocks
/// (rows) in which they differ. Each codeword is a list of `B` rows.
pub fn block_diversity<T: PartialEq>(codebook: &[Vec<Vec<T>>], cap: usize) -> Result<usize> {
    if codebook.len() > cap {
        return Err(Error::CapExceeded { requested: codebook.len() as u128, cap: cap as u128 });
    }
    if codebook.len() < 2 {
        return Err(Error::InvalidParameter("block diversity needs at least two codewords".into()));
    }
    let blocks = codebook[0].len();
    if let Some(c) = codebook.iter().find(|c| c.len() != blocks) {
        return Err(Error::DimensionMismatch { expected: blocks, actual: c.len() });
    }
    let mut best = usize::MAX;
    for (i, a) in codebook.iter().enumerate() {
        for b in &codebook[i + 1..] {
            let d = a.iter().zip(b).filter(|(ra, rb)| ra != rb).count();
            if d > 0 {
                best = best.min(d);
            }
        }
    }
    if best == usize::MAX {
        return Err(Error::InvalidParameter("all codewords are identical".into()));
    }
    Ok(best)
}
