//! Exact rationals, dyadic numbers and rigorous enclosures of natural logarithms.
//!
//! Every magnitude in the engine is handled in the log domain as a
//! [`LogBound`], a closed interval with rational endpoints that provably
//! contains the true value. [`ln_enclosure`] produces such intervals for
//! `ln q` at a requested number of bits; raising the precision only ever
//! shrinks the interval.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default ceiling on the bits spent refining a log comparison.
pub const DEFAULT_REFINEMENT_CAP: u32 = 512;

/// Canonical `num/den` rendering, also used for integers.
pub fn rational_to_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `a/b`, an integer, or a finite decimal such as `-0.125`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub(crate) mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rational_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `floor(q * 2^k)`.
pub(crate) fn floor_scaled(q: &Rational, k: i64) -> BigInt {
    let (n, d) = (q.numer(), q.denom());
    if k >= 0 {
        (n << k as usize).div_floor(d)
    } else {
        n.div_floor(&(d << (-k) as usize))
    }
}

/// `ceil(q * 2^k)`.
pub(crate) fn ceil_scaled(q: &Rational, k: i64) -> BigInt {
    -floor_scaled(&-q, k)
}

/// `floor(log2 |q|)` for nonzero `q`.
pub(crate) fn floor_log2(q: &Rational) -> i64 {
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let e = n.bits() as i64 - d.bits() as i64;
    let at_least = if e >= 0 {
        *n >= (d << e as usize)
    } else {
        (n << (-e) as usize) >= *d
    };
    if at_least {
        e
    } else {
        e - 1
    }
}

/// Largest integer `r` with `r^2 <= y` for `y >= 0`.
pub(crate) fn isqrt(y: &BigUint) -> BigUint {
    y.sqrt()
}

/// Exact square root of a rational, when it has one.
pub fn rational_sqrt_exact(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let (rn, rd) = (isqrt(n), isqrt(d));
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// A number `mantissa * 2^exponent` with an odd mantissa (or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        match mantissa.trailing_zeros() {
            None => Dyadic::zero(),
            Some(tz) => Dyadic {
                mantissa: mantissa >> tz as usize,
                exponent: exponent + tz as i64,
            },
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            // Odd mantissa over a power of two is already reduced.
            Rational::new_raw(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    /// Exact conversion when the denominator is a power of two.
    pub fn try_from_rational(q: &Rational) -> Option<Dyadic> {
        let d = q.denom();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz as usize).is_one() {
            Some(Dyadic::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    /// Largest dyadic with `bits` significant bits that is `<= q`.
    pub fn floor_of(q: &Rational, bits: u32) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let k = bits as i64 - 1 - floor_log2(q);
        Dyadic::new(floor_scaled(q, k), -k)
    }

    /// Smallest dyadic with `bits` significant bits that is `>= q`.
    pub fn ceil_of(q: &Rational, bits: u32) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let k = bits as i64 - 1 - floor_log2(q);
        Dyadic::new(ceil_scaled(q, k), -k)
    }

    /// Number of significant bits of the mantissa.
    pub fn significant_bits(&self) -> u64 {
        self.mantissa.bits()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("not a dyadic `mant*2^exp`: `{s}`"));
        let (m, e) = s.trim().split_once("*2^").ok_or_else(bad)?;
        let m: BigInt = m.parse().map_err(|_| bad())?;
        let e: i64 = e.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(m, e))
    }
}

/// Natural logarithm of a positive integer, kept exact as its argument.
///
/// Heights are always of this form, so sums of heights are products of
/// integers and never lose precision until they are enclosed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactLog(BigUint);

impl ExactLog {
    pub fn of(arg: BigUint) -> Result<Self> {
        if arg.is_zero() {
            return Err(Error::Domain("ln 0 is not finite".into()));
        }
        Ok(ExactLog(arg))
    }

    pub fn zero() -> Self {
        ExactLog(BigUint::one())
    }

    /// The integer whose logarithm this is.
    pub fn arg(&self) -> &BigUint {
        &self.0
    }

    /// `ln a + ln b`.
    pub fn plus(&self, other: &ExactLog) -> ExactLog {
        ExactLog(&self.0 * &other.0)
    }

    pub fn enclose(&self, bits: u32) -> LogBound {
        ln_enclosure(&Rational::from_integer(BigInt::from(self.0.clone())), bits)
            .expect("argument is a positive integer")
    }

    pub fn approx_f64(&self) -> f64 {
        let b = self.0.bits();
        if b <= 1000 {
            self.0.to_f64().unwrap_or(f64::INFINITY).ln()
        } else {
            let shift = b - 64;
            (&self.0 >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

/// A closed interval `[lo, hi]` of the extended reals containing a logarithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogBound {
    /// The logarithm of zero.
    NegInfinity,
    Finite { lo: Rational, hi: Rational },
}

impl LogBound {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Invalid(format!(
                "empty log interval [{}, {}]",
                rational_to_string(&lo),
                rational_to_string(&hi)
            )));
        }
        Ok(LogBound::Finite { lo, hi })
    }

    pub fn exact(q: Rational) -> Self {
        LogBound::Finite {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn from_int(n: i64) -> Self {
        LogBound::exact(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        LogBound::from_int(0)
    }

    pub fn is_neg_infinity(&self) -> bool {
        matches!(self, LogBound::NegInfinity)
    }

    pub fn lo(&self) -> Option<&Rational> {
        match self {
            LogBound::NegInfinity => None,
            LogBound::Finite { lo, .. } => Some(lo),
        }
    }

    pub fn hi(&self) -> Option<&Rational> {
        match self {
            LogBound::NegInfinity => None,
            LogBound::Finite { hi, .. } => Some(hi),
        }
    }

    pub fn width(&self) -> Option<Rational> {
        match self {
            LogBound::NegInfinity => None,
            LogBound::Finite { lo, hi } => Some(hi - lo),
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        match self {
            LogBound::NegInfinity => false,
            LogBound::Finite { lo, hi } => lo <= q && q <= hi,
        }
    }

    /// Whether `self` lies inside `other`.
    pub fn is_within(&self, other: &LogBound) -> bool {
        match (self, other) {
            (LogBound::NegInfinity, LogBound::NegInfinity) => true,
            (LogBound::Finite { lo, hi }, LogBound::Finite { lo: l2, hi: h2 }) => {
                l2 <= lo && hi <= h2
            }
            _ => false,
        }
    }

    pub fn add(&self, other: &LogBound) -> LogBound {
        match (self, other) {
            (LogBound::Finite { lo, hi }, LogBound::Finite { lo: l2, hi: h2 }) => {
                LogBound::Finite {
                    lo: lo + l2,
                    hi: hi + h2,
                }
            }
            _ => LogBound::NegInfinity,
        }
    }

    pub fn add_rational(&self, q: &Rational) -> LogBound {
        self.add(&LogBound::exact(q.clone()))
    }

    pub fn neg(&self) -> Result<LogBound> {
        match self {
            LogBound::NegInfinity => Err(Error::Arithmetic("negating -inf".into())),
            LogBound::Finite { lo, hi } => Ok(LogBound::Finite {
                lo: -hi,
                hi: -lo,
            }),
        }
    }

    pub fn sub(&self, other: &LogBound) -> Result<LogBound> {
        Ok(self.add(&other.neg()?))
    }

    /// Multiplies by a constant `c >= 0`.
    pub fn scale(&self, c: &Rational) -> Result<LogBound> {
        if c.is_negative() {
            return Err(Error::Arithmetic("scaling a log bound by a negative constant".into()));
        }
        match self {
            LogBound::NegInfinity if c.is_zero() => {
                Err(Error::Arithmetic("0 * -inf is undefined".into()))
            }
            LogBound::NegInfinity => Ok(LogBound::NegInfinity),
            LogBound::Finite { lo, hi } => Ok(LogBound::Finite {
                lo: lo * c,
                hi: hi * c,
            }),
        }
    }

    pub fn scale_int(&self, c: &BigUint) -> Result<LogBound> {
        self.scale(&Rational::from_integer(BigInt::from(c.clone())))
    }

    /// Product of two intervals of possibly mixed sign.
    pub fn mul(&self, other: &LogBound) -> Result<LogBound> {
        match (self, other) {
            (LogBound::Finite { lo, hi }, LogBound::Finite { lo: l2, hi: h2 }) => {
                let p = [lo * l2, lo * h2, hi * l2, hi * h2];
                let mn = p.iter().min().unwrap().clone();
                let mx = p.iter().max().unwrap().clone();
                Ok(LogBound::Finite { lo: mn, hi: mx })
            }
            _ => Err(Error::Arithmetic("product with -inf".into())),
        }
    }

    pub fn max(&self, other: &LogBound) -> LogBound {
        match (self, other) {
            (LogBound::NegInfinity, x) | (x, LogBound::NegInfinity) => x.clone(),
            (LogBound::Finite { lo, hi }, LogBound::Finite { lo: l2, hi: h2 }) => {
                LogBound::Finite {
                    lo: lo.max(l2).clone(),
                    hi: hi.max(h2).clone(),
                }
            }
        }
    }

    pub fn min(&self, other: &LogBound) -> LogBound {
        match (self, other) {
            (LogBound::NegInfinity, _) | (_, LogBound::NegInfinity) => LogBound::NegInfinity,
            (LogBound::Finite { lo, hi }, LogBound::Finite { lo: l2, hi: h2 }) => {
                LogBound::Finite {
                    lo: lo.min(l2).clone(),
                    hi: hi.min(h2).clone(),
                }
            }
        }
    }

    /// Midpoint as a float, for display only.
    pub fn midpoint_f64(&self) -> f64 {
        match self {
            LogBound::NegInfinity => f64::NEG_INFINITY,
            LogBound::Finite { lo, hi } => {
                let mid: Rational = (lo + hi) / Rational::from_integer(BigInt::from(2));
                mid.to_f64().unwrap_or(f64::NAN)
            }
        }
    }
}

impl fmt::Display for LogBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogBound::NegInfinity => write!(f, "-inf"),
            LogBound::Finite { lo, hi } => {
                let (l, h) = (lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN));
                if lo == hi {
                    write!(f, "{l:.6}")
                } else {
                    write!(f, "[{l:.6}, {h:.6}]")
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LogBoundRepr {
    lo: String,
    hi: String,
}

impl Serialize for LogBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            LogBound::NegInfinity => LogBoundRepr {
                lo: "-inf".into(),
                hi: "-inf".into(),
            },
            LogBound::Finite { lo, hi } => LogBoundRepr {
                lo: rational_to_string(lo),
                hi: rational_to_string(hi),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = LogBoundRepr::deserialize(d)?;
        if r.lo == "-inf" && r.hi == "-inf" {
            return Ok(LogBound::NegInfinity);
        }
        let lo = parse_rational(&r.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&r.hi).map_err(serde::de::Error::custom)?;
        LogBound::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Fixed-point enclosure of `2 atanh(t)` for `t` in `[t_lo, t_hi] / 2^w`,
/// valid for `0 <= t < 1/2`. Returns numerators over `2^w`.
fn two_atanh_fixed(t_lo: &BigInt, t_hi: &BigInt, w: u32) -> (BigInt, BigInt) {
    let t2_lo = (t_lo * t_lo) >> w as usize;
    let t2_hi = ceil_shift(&(t_hi * t_hi), w);
    let mut p_lo = t_lo.clone();
    let mut p_hi = t_hi.clone();
    let mut s_lo = BigInt::zero();
    let mut s_hi = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let den = BigInt::from(2 * k + 1);
        s_lo += &p_lo / &den;
        s_hi += ceil_div(&p_hi, &den);
        p_lo = (&p_lo * &t2_lo) >> w as usize;
        p_hi = ceil_shift(&(&p_hi * &t2_hi), w);
        k += 1;
        if p_hi <= BigInt::one() {
            // Tail sum_{j>=k} t^(2j+1)/(2j+1) <= t^(2k+1) / ((2k+1)(1 - t^2)) and t^2 < 1/4.
            let tail = ceil_div(&(&p_hi * 4u32), &(BigInt::from(2 * k + 1) * 3u32));
            s_hi += tail;
            break;
        }
    }
    (s_lo * 2u32, s_hi * 2u32)
}

fn ceil_shift(x: &BigInt, w: u32) -> BigInt {
    let d = BigInt::one() << w as usize;
    ceil_div(x, &d)
}

fn ceil_div(x: &BigInt, d: &BigInt) -> BigInt {
    x.div_ceil(d)
}

fn guard_bits(level: u32) -> u32 {
    8 + (32 - level.leading_zeros())
}

fn ln2_fixed(w: u32) -> (BigInt, BigInt) {
    static CACHE: OnceLock<Mutex<HashMap<u32, (BigInt, BigInt)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&w) {
        return v.clone();
    }
    let one = BigInt::one() << w as usize;
    let three = BigInt::from(3u32);
    let t_lo = &one / &three;
    let t_hi = ceil_div(&one, &three);
    let v = two_atanh_fixed(&t_lo, &t_hi, w);
    cache.lock().unwrap().insert(w, v.clone());
    v
}

/// Enclosure of `ln q` as numerators over `2^w`.
fn ln_fixed(q: &Rational, w: u32) -> (BigInt, BigInt) {
    let e = floor_log2(q);
    let (mut a, mut b) = (q.numer().clone(), q.denom().clone());
    if e >= 0 {
        b <<= e as usize;
    } else {
        a <<= (-e) as usize;
    }
    // r = a/b in [1, 2), t = (r-1)/(r+1) in [0, 1/3).
    let num = (&a - &b) << w as usize;
    let den = &a + &b;
    let t_lo = num.div_floor(&den);
    let t_hi = num.div_ceil(&den);
    let (s_lo, s_hi) = two_atanh_fixed(&t_lo, &t_hi, w);
    if e == 0 {
        return (s_lo, s_hi);
    }
    let (l2_lo, l2_hi) = ln2_fixed(w);
    let eb = BigInt::from(e);
    if e > 0 {
        (s_lo + &eb * l2_lo, s_hi + &eb * l2_hi)
    } else {
        (s_lo + &eb * l2_hi, s_hi + &eb * l2_lo)
    }
}

/// Rigorous enclosure of `ln q` for rational `q > 0`.
///
/// The width is at most about `2^-bits * (1 + |log2 q|)`, and the interval
/// returned for more bits is always contained in the one for fewer bits.
pub fn ln_enclosure(q: &Rational, bits: u32) -> Result<LogBound> {
    if !q.is_positive() {
        return Err(Error::Domain(format!(
            "ln of non-positive value {}",
            rational_to_string(q)
        )));
    }
    if q.is_one() {
        return Ok(LogBound::zero());
    }
    let top = bits.max(8).next_power_of_two();
    let mut level = 8u32;
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    loop {
        let w = level + guard_bits(level);
        let (l, h) = ln_fixed(q, w);
        let den = BigInt::one() << w as usize;
        let l = Rational::new(l, den.clone());
        let h = Rational::new(h, den);
        lo = Some(match lo {
            Some(x) if x > l => x,
            _ => l,
        });
        hi = Some(match hi {
            Some(x) if x < h => x,
            _ => h,
        });
        if level >= top {
            break;
        }
        level *= 2;
    }
    LogBound::new(lo.unwrap(), hi.unwrap())
}

/// `ln |q|`, or `-inf` for zero.
pub fn ln_abs(q: &Rational, bits: u32) -> LogBound {
    if q.is_zero() {
        LogBound::NegInfinity
    } else {
        ln_enclosure(&q.abs(), bits).expect("positive argument")
    }
}

pub fn ln_int(n: u64, bits: u32) -> LogBound {
    ln_enclosure(&Rational::from_integer(BigInt::from(n)), bits).expect("positive argument")
}

pub fn ln_biguint(n: &BigUint, bits: u32) -> Result<LogBound> {
    ln_enclosure(&Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone())), bits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Comparison {
    /// `a <= b` holds for every pair of points in the two intervals.
    Le,
    /// `a >= b` holds for every pair of points in the two intervals.
    Ge,
    Unknown,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Le => "LE",
            Comparison::Ge => "GE",
            Comparison::Unknown => "UNKNOWN",
        })
    }
}

/// Single-shot certain comparison of two enclosures.
pub fn compare(a: &LogBound, b: &LogBound) -> Comparison {
    match (a, b) {
        (LogBound::NegInfinity, _) => Comparison::Le,
        (_, LogBound::NegInfinity) => Comparison::Ge,
        (LogBound::Finite { lo: al, hi: ah }, LogBound::Finite { lo: bl, hi: bh }) => {
            if ah <= bl {
                Comparison::Le
            } else if al >= bh {
                Comparison::Ge
            } else {
                Comparison::Unknown
            }
        }
    }
}

/// Compares two quantities whose enclosures are recomputed at doubling
/// precision until the comparison is decided or `cap` bits are reached.
pub fn compare_certain<F>(start_bits: u32, cap: u32, mut eval: F) -> Result<Comparison>
where
    F: FnMut(u32) -> Result<(LogBound, LogBound)>,
{
    let mut bits = start_bits.max(8);
    loop {
        let (a, b) = eval(bits)?;
        let c = compare(&a, &b);
        if c != Comparison::Unknown || bits >= cap {
            return Ok(c);
        }
        bits = (bits * 2).min(cap.max(bits));
    }
}

/// Order of two rationals by cross-multiplication; `Ratio::cmp` recurses
/// along the continued fraction and overflows the stack on huge inputs.
pub fn cmp_q(a: &Rational, b: &Rational) -> Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

/// Equality of reduced rationals without `Ratio::cmp`.
pub fn eq_q(a: &Rational, b: &Rational) -> bool {
    a.numer() == b.numer() && a.denom() == b.denom()
}

pub(crate) fn min_q<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if cmp_q(a, b) == Ordering::Greater { b } else { a }
}

pub(crate) fn max_q<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if cmp_q(a, b) == Ordering::Less { b } else { a }
}

#[cfg(test)]
pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
pub(crate) fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
