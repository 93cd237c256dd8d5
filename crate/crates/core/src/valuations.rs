//! Certified evaluation at a place of the rationals: outward-rounded real
//! balls for the archimedean place and residue classes modulo `p^N` for odd
//! primes.
//!
//! Values that are still exact rationals stay exact through every operation;
//! rounding (or reduction modulo `p^N`) happens only once an approximate
//! operand is involved, and then once per fused Horner step.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{
    ceil_scaled, compare_certain, floor_log2, floor_scaled, ln_enclosure, ln_int,
    cmp_q, eq_q, max_q, min_q, rational_sqrt_exact, rational_to_string, Comparison, Dyadic, LogBound, Rational,
};
use crate::mpoly::{Arith, MPoly};

/// A place of the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Infinity,
    /// An odd prime.
    Prime(u64),
}

impl Place {
    pub fn prime(p: u64) -> Result<Place> {
        if p == 2 {
            return Err(Error::Invalid("the 2-adic place is not supported".into()));
        }
        if p < 3 || p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not a supported odd prime")));
        }
        Ok(Place::Prime(p))
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    /// `ln p` for a prime place.
    pub fn ln_p(&self, bits: u32) -> Option<LogBound> {
        match self {
            Place::Infinity => None,
            Place::Prime(p) => Some(ln_int(*p, bits)),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Infinity),
            t => {
                let p: u64 = t
                    .parse()
                    .map_err(|_| Error::Invalid(format!("place must be `inf` or a prime, got `{t}`")))?;
                Place::prime(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A closed real interval with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealBall {
    lo: Dyadic,
    hi: Dyadic,
    bits: u32,
}

impl RealBall {
    pub fn new(lo: Dyadic, hi: Dyadic, bits: u32) -> Result<RealBall> {
        if lo > hi {
            return Err(Error::Invalid("ball with lo > hi".into()));
        }
        Ok(RealBall { lo, hi, bits })
    }

    /// Smallest ball at `bits` containing the rational `q`.
    pub fn around(q: &Rational, bits: u32) -> RealBall {
        RealBall {
            lo: Dyadic::floor_of(q, bits),
            hi: Dyadic::ceil_of(q, bits),
            bits,
        }
    }

    /// Ball at `bits` containing `[lo, hi]`.
    pub fn enclosing(lo: &Rational, hi: &Rational, bits: u32) -> RealBall {
        RealBall {
            lo: Dyadic::floor_of(lo, bits),
            hi: Dyadic::ceil_of(hi, bits),
            bits,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo_q(&self) -> Rational {
        self.lo.to_rational()
    }

    pub fn hi_q(&self) -> Rational {
        self.hi.to_rational()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        cmp_q(&self.lo_q(), q).is_le() && cmp_q(q, &self.hi_q()).is_le()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.mantissa().is_positive() && !self.hi.mantissa().is_negative()
    }

    pub fn width(&self) -> Rational {
        self.hi_q() - self.lo_q()
    }

    pub fn midpoint(&self) -> Rational {
        (self.lo_q() + self.hi_q()) / Rational::from_integer(BigInt::from(2))
    }

    pub fn approx_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Serialize, Deserialize)]
struct RealBallRepr {
    lo: String,
    hi: String,
    bits: u32,
}

impl Serialize for RealBall {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealBallRepr {
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
            bits: self.bits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RealBall {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RealBallRepr::deserialize(d)?;
        let lo: Dyadic = r.lo.parse().map_err(serde::de::Error::custom)?;
        let hi: Dyadic = r.hi.parse().map_err(serde::de::Error::custom)?;
        RealBall::new(lo, hi, r.bits).map_err(serde::de::Error::custom)
    }
}

/// The residue class `residue + p^N Z_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    p: u64,
    n: u32,
    residue: BigUint,
}

impl PadicApprox {
    pub fn new(p: u64, n: u32, residue: BigUint) -> PadicApprox {
        let m = p_power(p, n);
        PadicApprox {
            p,
            n,
            residue: residue % m,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    /// Exact valuation, or `None` when the residue is zero (valuation `>= N`).
    pub fn valuation(&self) -> Option<u32> {
        if self.residue.is_zero() {
            None
        } else {
            Some(valuation_of(&self.residue, self.p))
        }
    }

    /// The first `k` base-`p` digits, least significant first.
    pub fn digits(&self, k: usize) -> Vec<u64> {
        let p = BigUint::from(self.p);
        let mut r = self.residue.clone();
        let mut out = Vec::with_capacity(k);
        for _ in 0..k.min(self.n as usize) {
            let (q, d) = r.div_rem(&p);
            out.push(d.to_u64().unwrap());
            r = q;
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct PadicRepr {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    residue: String,
}

impl Serialize for PadicApprox {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PadicRepr {
            p: self.p,
            n: self.n,
            residue: self.residue.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicApprox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PadicRepr::deserialize(d)?;
        let residue: BigUint = r.residue.parse().map_err(serde::de::Error::custom)?;
        Ok(PadicApprox::new(r.p, r.n, residue))
    }
}

/// A certified enclosure of a number under one place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertifiedValue {
    Real(RealBall),
    Padic(PadicApprox),
}

impl CertifiedValue {
    pub fn place(&self) -> Place {
        match self {
            CertifiedValue::Real(_) => Place::Infinity,
            CertifiedValue::Padic(a) => Place::Prime(a.p),
        }
    }

    pub fn precision(&self) -> u32 {
        match self {
            CertifiedValue::Real(b) => b.bits,
            CertifiedValue::Padic(a) => a.n,
        }
    }

    pub fn as_real(&self) -> Option<&RealBall> {
        match self {
            CertifiedValue::Real(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_padic(&self) -> Option<&PadicApprox> {
        match self {
            CertifiedValue::Padic(a) => Some(a),
            _ => None,
        }
    }
}

/// A witness coordinate: an exact rational or a certified enclosure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Exact(Rational),
    Certified(CertifiedValue),
}

impl Coordinate {
    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Coordinate::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coordinate::Exact(_))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CoordinateRepr {
    Exact(String),
    Real(RealBall),
    Padic(PadicApprox),
}

impl Serialize for Coordinate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Coordinate::Exact(q) => CoordinateRepr::Exact(rational_to_string(q)),
            Coordinate::Certified(CertifiedValue::Real(b)) => CoordinateRepr::Real(b.clone()),
            Coordinate::Certified(CertifiedValue::Padic(a)) => CoordinateRepr::Padic(a.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coordinate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match CoordinateRepr::deserialize(d)? {
            CoordinateRepr::Exact(s) => Coordinate::Exact(
                crate::exactnum::parse_rational(&s).map_err(serde::de::Error::custom)?,
            ),
            CoordinateRepr::Real(b) => Coordinate::Certified(CertifiedValue::Real(b)),
            CoordinateRepr::Padic(a) => Coordinate::Certified(CertifiedValue::Padic(a)),
        })
    }
}

/// Square-root branch selector.
///
/// At the real place `Plus`/`Minus` pick the sign. At a prime `p` they pick
/// the root whose residue mod `p` is the smaller/larger of the two, and
/// `Residue(r)` names the class explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
    Residue(u64),
}

/// Outcome of a norm comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NormCheck {
    Yes,
    No,
    Unknown,
}

thread_local! {
    static POWERS: RefCell<HashMap<(u64, u32), BigUint>> = RefCell::new(HashMap::new());
}

/// `p^n`, memoized per thread.
pub(crate) fn p_power(p: u64, n: u32) -> BigUint {
    POWERS.with(|c| {
        c.borrow_mut()
            .entry((p, n))
            .or_insert_with(|| num_traits::pow(BigUint::from(p), n as usize))
            .clone()
    })
}

fn valuation_of(x: &BigUint, p: u64) -> u32 {
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut r = x.clone();
    while !r.is_zero() {
        let (q, rem) = r.div_rem(&pb);
        if !rem.is_zero() {
            break;
        }
        r = q;
        v += 1;
    }
    v
}

fn int_valuation(x: &BigInt, p: u64) -> u32 {
    valuation_of(x.magnitude(), p)
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(&m).magnitude().clone())
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

/// Tonelli–Shanks square root modulo an odd prime.
fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulmod(tt, tt, p);
            i += 1;
        }
        let b = powmod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Lifts a square root `r0` of the unit `u` mod `p` to one mod `p^n`.
fn hensel_sqrt(u: &BigUint, r0: u64, p: u64, n: u32) -> BigUint {
    let mut x = BigUint::from(r0);
    let mut k = 1u32;
    while k < n {
        k = (2 * k).min(n);
        let m = p_power(p, k);
        let um = u % &m;
        let x2 = (&x * &x) % &m;
        let fx = (x2 + &m - um) % &m;
        let two_x = (&x << 1usize) % &m;
        let inv = mod_inverse(&two_x, &m).expect("2x is a unit for odd p");
        x = (&x + &m - (fx * inv) % &m) % &m;
    }
    x % p_power(p, n)
}

/// Internal working value.
#[derive(Clone, Debug)]
pub enum Val {
    Exact(Rational),
    /// Real interval; endpoints are dyadic after every rounded operation.
    Iv(Rational, Rational),
    /// Residue modulo `p^n`.
    Pa(BigUint, u32),
}

/// Arithmetic context for one place and working precision (bits at the real
/// place, digits at a prime).
#[derive(Clone, Debug)]
pub struct Backend {
    place: Place,
    precision: u32,
}

impl Backend {
    pub fn new(place: Place, precision: u32) -> Backend {
        Backend {
            place,
            precision: precision.max(8),
        }
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn prime(&self) -> u64 {
        match self.place {
            Place::Prime(p) => p,
            Place::Infinity => unreachable!("prime place expected"),
        }
    }

    pub fn lift(&self, c: &Coordinate) -> Result<Val> {
        Ok(match c {
            Coordinate::Exact(q) => Val::Exact(q.clone()),
            Coordinate::Certified(v) => self.lift_certified(v)?,
        })
    }

    fn lift_certified(&self, v: &CertifiedValue) -> Result<Val> {
        match (v, self.place) {
            (CertifiedValue::Real(b), Place::Infinity) => Ok(Val::Iv(b.lo_q(), b.hi_q())),
            (CertifiedValue::Padic(a), Place::Prime(p)) if a.p == p => {
                Ok(Val::Pa(a.residue.clone(), a.n))
            }
            _ => Err(Error::PrecisionMismatch(format!(
                "value at place {} used at place {}",
                v.place(),
                self.place
            ))),
        }
    }

    pub fn lower(&self, v: Val) -> Coordinate {
        match v {
            Val::Exact(q) => Coordinate::Exact(q),
            Val::Iv(lo, hi) => Coordinate::Certified(CertifiedValue::Real(RealBall {
                lo: Dyadic::floor_of(&lo, self.precision),
                hi: Dyadic::ceil_of(&hi, self.precision),
                bits: self.precision,
            })),
            Val::Pa(r, n) => Coordinate::Certified(CertifiedValue::Padic(PadicApprox {
                p: self.prime(),
                n,
                residue: r,
            })),
        }
    }

    /// Enclosure of a coordinate as a certified value at this precision.
    pub fn certify(&self, c: &Coordinate) -> Result<CertifiedValue> {
        match c {
            Coordinate::Certified(v) => {
                self.lift_certified(v)?;
                Ok(v.clone())
            }
            Coordinate::Exact(q) => match self.place {
                Place::Infinity => Ok(CertifiedValue::Real(RealBall::around(q, self.precision))),
                Place::Prime(p) => Ok(CertifiedValue::Padic(PadicApprox {
                    p,
                    n: self.precision,
                    residue: self.exact_residue(q, self.precision)?,
                })),
            },
        }
    }

    fn exact_residue(&self, q: &Rational, n: u32) -> Result<BigUint> {
        let p = self.prime();
        if int_valuation(q.denom(), p) > 0 {
            return Err(Error::Domain(format!(
                "{} is not a {p}-adic integer",
                rational_to_string(q)
            )));
        }
        let m = p_power(p, n);
        let num = q.numer().mod_floor(&BigInt::from(m.clone())).magnitude().clone();
        let den = q.denom().magnitude() % &m;
        let inv = mod_inverse(&den, &m).expect("denominator is a unit");
        Ok((num * inv) % m)
    }

    fn to_residue(&self, v: &Val, n: u32) -> Result<BigUint> {
        match v {
            Val::Exact(q) => self.exact_residue(q, n),
            Val::Pa(r, k) => {
                if *k < n {
                    return Err(Error::PrecisionMismatch(format!(
                        "residue known mod p^{k}, needed mod p^{n}"
                    )));
                }
                Ok(r % p_power(self.prime(), n))
            }
            Val::Iv(..) => Err(Error::PrecisionMismatch("real interval at a p-adic place".into())),
        }
    }

    fn padic_precision_of(&self, vals: &[&Val]) -> u32 {
        vals.iter()
            .filter_map(|v| match v {
                Val::Pa(_, n) => Some(*n),
                _ => None,
            })
            .min()
            .unwrap_or(self.precision)
    }

    fn bounds(v: &Val) -> (Rational, Rational) {
        match v {
            Val::Exact(q) => (q.clone(), q.clone()),
            Val::Iv(lo, hi) => (lo.clone(), hi.clone()),
            Val::Pa(..) => unreachable!("p-adic value at the real place"),
        }
    }

    fn round(&self, lo: Rational, hi: Rational) -> Val {
        let lo = Dyadic::floor_of(&lo, self.precision).to_rational();
        let hi = Dyadic::ceil_of(&hi, self.precision).to_rational();
        Val::Iv(lo, hi)
    }

    fn check_place(&self, v: &Val) -> Result<()> {
        match (v, self.place) {
            (Val::Iv(..), Place::Prime(_)) | (Val::Pa(..), Place::Infinity) => Err(
                Error::PrecisionMismatch("value does not belong to this place".into()),
            ),
            _ => Ok(()),
        }
    }

    /// `a * x + c`, rounded once.
    pub fn mul_add_val(&self, a: &Val, x: &Val, c: Option<&Val>) -> Result<Val> {
        for v in [Some(a), Some(x), c].into_iter().flatten() {
            self.check_place(v)?;
        }
        if let (Val::Exact(a), Val::Exact(x)) = (a, x) {
            match c {
                None => return Ok(Val::Exact(a * x)),
                Some(Val::Exact(c)) => return Ok(Val::Exact(a * x + c)),
                _ => {}
            }
        }
        match self.place {
            Place::Prime(p) => {
                let mut all = vec![a, x];
                all.extend(c);
                let n = self.padic_precision_of(&all);
                let m = p_power(p, n);
                let mut r = self.to_residue(a, n)? * self.to_residue(x, n)?;
                if let Some(c) = c {
                    r += self.to_residue(c, n)?;
                }
                Ok(Val::Pa(r % m, n))
            }
            Place::Infinity => {
                let (al, ah) = Self::bounds(a);
                let (xl, xh) = Self::bounds(x);
                let (mut lo, mut hi) = interval_mul(&al, &ah, &xl, &xh);
                if let Some(c) = c {
                    let (cl, ch) = Self::bounds(c);
                    lo += cl;
                    hi += ch;
                }
                Ok(self.round(lo, hi))
            }
        }
    }

    pub fn add_val(&self, a: &Val, b: &Val) -> Result<Val> {
        self.mul_add_val(a, &Val::Exact(Rational::one()), Some(b))
    }

    pub fn sub_val(&self, a: &Val, b: &Val) -> Result<Val> {
        let nb = self.mul_add_val(b, &Val::Exact(-Rational::one()), None)?;
        self.add_val(a, &nb)
    }

    pub fn mul_val(&self, a: &Val, b: &Val) -> Result<Val> {
        self.mul_add_val(a, b, None)
    }

    pub fn div_val(&self, a: &Val, b: &Val) -> Result<Val> {
        self.check_place(a)?;
        self.check_place(b)?;
        match (a, b) {
            (_, Val::Exact(q)) if q.is_zero() => Err(Error::Domain("division by zero".into())),
            (Val::Exact(x), Val::Exact(y)) => Ok(Val::Exact(x / y)),
            _ => match self.place {
                Place::Prime(p) => {
                    let n = self.padic_precision_of(&[a, b]);
                    let m = p_power(p, n);
                    let rb = self.to_residue(b, n)?;
                    if (&rb % p).is_zero() {
                        return Err(Error::Domain(format!(
                            "division by a non-unit at the {p}-adic place"
                        )));
                    }
                    let inv = mod_inverse(&rb, &m).expect("unit");
                    Ok(Val::Pa((self.to_residue(a, n)? * inv) % m, n))
                }
                Place::Infinity => {
                    let (bl, bh) = Self::bounds(b);
                    if !bl.is_positive() && !bh.is_negative() {
                        return Err(Error::Domain("division by an interval containing 0".into()));
                    }
                    let (al, ah) = Self::bounds(a);
                    let (il, ih) = (bh.recip(), bl.recip());
                    let (lo, hi) = interval_mul(&al, &ah, &il, &ih);
                    Ok(self.round(lo, hi))
                }
            },
        }
    }

    /// Square root on the chosen branch.
    pub fn sqrt_val(&self, a: &Val, branch: Branch) -> Result<Val> {
        self.check_place(a)?;
        if let Val::Exact(q) = a {
            if let Some(r) = rational_sqrt_exact(q) {
                return match self.place {
                    Place::Infinity => match branch {
                        Branch::Plus => Ok(Val::Exact(r)),
                        Branch::Minus => Ok(Val::Exact(-r)),
                        Branch::Residue(_) => Err(Error::Invalid(
                            "residue branches apply only at prime places".into(),
                        )),
                    },
                    Place::Prime(p) => self.pick_exact_padic_root(r, p, branch),
                };
            }
            if q.is_negative() && self.place.is_archimedean() {
                return Err(Error::NegativeRadicand);
            }
        }
        match self.place {
            Place::Infinity => {
                let (lo, hi) = Self::bounds(a);
                if lo.is_negative() {
                    return Err(Error::NegativeRadicand);
                }
                let (slo, shi) = self.sqrt_interval(&lo, &hi);
                Ok(match branch {
                    Branch::Plus => Val::Iv(slo, shi),
                    Branch::Minus => Val::Iv(-shi, -slo),
                    Branch::Residue(_) => {
                        return Err(Error::Invalid(
                            "residue branches apply only at prime places".into(),
                        ))
                    }
                })
            }
            Place::Prime(p) => {
                let n = self.padic_precision_of(&[a]);
                let r = self.to_residue(a, n)?;
                let (root, n2) = padic_sqrt(&r, n, p, branch)?;
                Ok(Val::Pa(root, n2))
            }
        }
    }

    fn pick_exact_padic_root(&self, r: Rational, p: u64, branch: Branch) -> Result<Val> {
        if r.is_zero() {
            return Ok(Val::Exact(r));
        }
        // Classes are only meaningful for units; compare the unit parts.
        let n = self.precision;
        let plus = self.exact_residue(&r, n)?;
        let minus = self.exact_residue(&-r.clone(), n)?;
        let cp = (&plus % p).to_u64().unwrap();
        let cm = (&minus % p).to_u64().unwrap();
        let want_plus = match branch {
            Branch::Plus => cp <= cm,
            Branch::Minus => cp > cm,
            Branch::Residue(c) => {
                if c % p == cp {
                    true
                } else if c % p == cm {
                    false
                } else {
                    return Err(Error::BranchUndetermined(format!(
                        "no root in class {c} mod {p}"
                    )));
                }
            }
        };
        if cp == cm && matches!(branch, Branch::Residue(_)) {
            return Err(Error::BranchUndetermined(
                "both roots share the requested class".into(),
            ));
        }
        Ok(Val::Exact(if want_plus { r } else { -r }))
    }

    fn sqrt_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        if hi.is_zero() {
            return (Rational::zero(), Rational::zero());
        }
        // Common grid 2^-k with about `precision` significant bits.
        let k = self.precision as i64 + 1 - Integer::div_floor(&floor_log2(hi), &2);
        let grid = |x: BigInt| Rational::new(x, BigInt::one() << k as usize);
        let slo = if lo.is_zero() {
            Rational::zero()
        } else {
            let y = floor_scaled(lo, 2 * k);
            grid(BigInt::from(y.magnitude().sqrt()))
        };
        let y = ceil_scaled(hi, 2 * k);
        let shi = grid(BigInt::from((y.magnitude() - 1u32).sqrt() + 1u32));
        (slo, shi)
    }

    pub fn eval_val(&self, f: &MPoly, point: &[Val]) -> Result<Val> {
        f.eval_with(self, point)
    }

    /// Evaluates `f` at a point given by coordinates.
    pub fn eval(&self, f: &MPoly, point: &[Coordinate]) -> Result<Coordinate> {
        let vals = point.iter().map(|c| self.lift(c)).collect::<Result<Vec<_>>>()?;
        Ok(self.lower(self.eval_val(f, &vals)?))
    }

    pub fn add(&self, a: &Coordinate, b: &Coordinate) -> Result<Coordinate> {
        Ok(self.lower(self.add_val(&self.lift(a)?, &self.lift(b)?)?))
    }

    pub fn mul(&self, a: &Coordinate, b: &Coordinate) -> Result<Coordinate> {
        Ok(self.lower(self.mul_val(&self.lift(a)?, &self.lift(b)?)?))
    }

    pub fn div(&self, a: &Coordinate, b: &Coordinate) -> Result<Coordinate> {
        Ok(self.lower(self.div_val(&self.lift(a)?, &self.lift(b)?)?))
    }

    pub fn sqrt(&self, a: &Coordinate, branch: Branch) -> Result<Coordinate> {
        Ok(self.lower(self.sqrt_val(&self.lift(a)?, branch)?))
    }

    /// Determinant by cofactor expansion.
    pub fn det_val(&self, m: &[Vec<Val>]) -> Result<Val> {
        let n = m.len();
        if m.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("determinant of a non-square matrix".into()));
        }
        if n > 4 && self.place.is_archimedean() {
            if let Some(d) = self.bareiss(m)? {
                return Ok(d);
            }
        }
        let cols: Vec<usize> = (0..n).collect();
        self.laplace(m, 0, &cols)
    }

    fn laplace(&self, m: &[Vec<Val>], row: usize, cols: &[usize]) -> Result<Val> {
        if cols.is_empty() {
            return Ok(Val::Exact(Rational::one()));
        }
        if cols.len() == 1 {
            return Ok(m[row][cols[0]].clone());
        }
        let mut acc = Val::Exact(Rational::zero());
        for (j, &c) in cols.iter().enumerate() {
            if matches!(&m[row][c], Val::Exact(q) if q.is_zero()) {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let minor = self.laplace(m, row + 1, &rest)?;
            let sign = Val::Exact(if j % 2 == 0 { Rational::one() } else { -Rational::one() });
            let term = self.mul_val(&m[row][c], &sign)?;
            acc = self.mul_add_val(&term, &minor, Some(&acc))?;
        }
        Ok(acc)
    }

    /// Fraction-free elimination; `None` when a pivot enclosure contains zero.
    fn bareiss(&self, m: &[Vec<Val>]) -> Result<Option<Val>> {
        let n = m.len();
        let mut a: Vec<Vec<Val>> = m.to_vec();
        let mut prev = Val::Exact(Rational::one());
        for k in 0..n - 1 {
            let pivot = a[k][k].clone();
            let (pl, ph) = Self::bounds(&pivot);
            if !pl.is_positive() && !ph.is_negative() {
                return Ok(None);
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t1 = self.mul_val(&a[i][j], &pivot)?;
                    let t2 = self.mul_val(&a[i][k], &a[k][j])?;
                    let num = self.sub_val(&t1, &t2)?;
                    a[i][j] = self.div_val(&num, &prev)?;
                }
            }
            prev = pivot;
        }
        Ok(Some(a[n - 1][n - 1].clone()))
    }
}

fn interval_mul(al: &Rational, ah: &Rational, xl: &Rational, xh: &Rational) -> (Rational, Rational) {
    if eq_q(al, ah) && eq_q(xl, xh) {
        let p = al * xl;
        return (p.clone(), p);
    }
    if !al.is_negative() && !xl.is_negative() {
        return (al * xl, ah * xh);
    }
    let p = [al * xl, al * xh, ah * xl, ah * xh];
    let lo = p.iter().fold(&p[0], |m, x| min_q(m, x)).clone();
    let hi = p.iter().fold(&p[0], |m, x| max_q(m, x)).clone();
    (lo, hi)
}

/// Square root of a residue mod `p^n`; returns the root and its precision.
fn padic_sqrt(r: &BigUint, n: u32, p: u64, branch: Branch) -> Result<(BigUint, u32)> {
    if r.is_zero() {
        return Err(Error::BranchUndetermined(format!(
            "radicand is 0 mod {p}^{n}; its square root is not determined"
        )));
    }
    let v = valuation_of(r, p);
    if v % 2 == 1 {
        return Err(Error::NonResidue(format!(
            "{p} (odd valuation {v})"
        )));
    }
    let unit_prec = n - v;
    let unit = r / p_power(p, v);
    let u0 = (&unit % p).to_u64().unwrap();
    let r0 = sqrt_mod_prime(u0, p).ok_or_else(|| Error::NonResidue(format!("{p}")))?;
    let other = (p - r0) % p;
    let (lo, hi) = (r0.min(other), r0.max(other));
    let chosen = match branch {
        Branch::Plus => lo,
        Branch::Minus => hi,
        Branch::Residue(c) => {
            let c = c % p;
            if c != lo && c != hi {
                return Err(Error::BranchUndetermined(format!(
                    "no square root in class {c} mod {p}"
                )));
            }
            c
        }
    };
    let root_unit = hensel_sqrt(&unit, chosen, p, unit_prec);
    let half = v / 2;
    let out_prec = n - half;
    let root = (root_unit * p_power(p, half)) % p_power(p, out_prec);
    Ok((root, out_prec))
}

impl Arith for Backend {
    type Value = Val;

    fn constant(&self, c: &Rational) -> Result<Val> {
        Ok(Val::Exact(c.clone()))
    }

    fn mul_add(&self, acc: &Val, x: &Val, c: Option<&Val>) -> Result<Val> {
        self.mul_add_val(acc, x, c)
    }
}

fn check_inputs(values: &[&CertifiedValue], place: Place, precision: u32) -> Result<()> {
    for v in values {
        if v.place() != place {
            return Err(Error::PrecisionMismatch(format!(
                "value at place {} used at place {place}",
                v.place()
            )));
        }
        let ok = match v {
            CertifiedValue::Real(b) => b.bits == precision,
            CertifiedValue::Padic(a) => a.n >= precision,
        };
        if !ok {
            return Err(Error::PrecisionMismatch(format!(
                "input precision {} incompatible with working precision {precision}",
                v.precision()
            )));
        }
    }
    Ok(())
}

/// Encloses `f(P)` for every point in the given enclosures.
pub fn eval_certified(
    f: &MPoly,
    point: &[CertifiedValue],
    place: Place,
    precision: u32,
) -> Result<CertifiedValue> {
    check_inputs(&point.iter().collect::<Vec<_>>(), place, precision)?;
    let be = Backend::new(place, precision);
    let coords: Vec<Coordinate> = point.iter().cloned().map(Coordinate::Certified).collect();
    be.certify(&be.eval(f, &coords)?)
}

/// Square root of a certified value on the chosen branch.
pub fn sqrt_certified(x: &CertifiedValue, branch: Branch) -> Result<CertifiedValue> {
    let be = Backend::new(x.place(), x.precision());
    be.certify(&be.sqrt(&Coordinate::Certified(x.clone()), branch)?)
}

/// Enclosure of an upper bound for `ln |x|_v`.
pub fn norm_upper_bound(x: &CertifiedValue, bits: u32) -> LogBound {
    match x {
        CertifiedValue::Real(b) => {
            let m = max_q(&b.lo_q().abs(), &b.hi_q().abs()).clone();
            if m.is_zero() {
                LogBound::NegInfinity
            } else {
                ln_enclosure(&m, bits).expect("positive")
            }
        }
        CertifiedValue::Padic(a) => {
            let v = a.valuation().unwrap_or(a.n);
            ln_int(a.p, bits)
                .scale(&Rational::from_integer(BigInt::from(v)))
                .and_then(|l| l.neg())
                .expect("finite")
        }
    }
}

/// Enclosure of a lower bound for `ln |x|_v`; `-inf` when zero is possible.
pub fn norm_lower_bound(x: &CertifiedValue, bits: u32) -> LogBound {
    match x {
        CertifiedValue::Real(b) => {
            if b.contains_zero() {
                LogBound::NegInfinity
            } else {
                let m = min_q(&b.lo_q().abs(), &b.hi_q().abs()).clone();
                ln_enclosure(&m, bits).expect("positive")
            }
        }
        CertifiedValue::Padic(a) => match a.valuation() {
            None => LogBound::NegInfinity,
            Some(v) => ln_int(a.p, bits)
                .scale(&Rational::from_integer(BigInt::from(v)))
                .and_then(|l| l.neg())
                .expect("finite"),
        },
    }
}

/// Decides `|x|_v <= exp(eps_log)` from the enclosure, refining logarithms up
/// to `cap` bits.
pub fn norm_leq(x: &CertifiedValue, eps_log: &LogBound, cap: u32) -> Result<NormCheck> {
    let le = compare_certain(64, cap, |b| Ok((norm_upper_bound(x, b), eps_log.clone())))?;
    if le == Comparison::Le {
        return Ok(NormCheck::Yes);
    }
    let ge = compare_certain(64, cap, |b| Ok((norm_lower_bound(x, b), eps_log.clone())))?;
    if ge == Comparison::Ge {
        if let (Some(lo), Some(hi)) = (norm_lower_bound(x, cap).lo().cloned(), eps_log.hi()) {
            if &lo > hi {
                return Ok(NormCheck::No);
            }
        }
    }
    Ok(NormCheck::Unknown)
}

/// Encloses the determinant of a square matrix of certified values.
pub fn det_certified(m: &[Vec<CertifiedValue>]) -> Result<CertifiedValue> {
    let first = m
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| Error::Invalid("empty matrix".into()))?;
    let (place, precision) = (first.place(), first.precision());
    let all: Vec<&CertifiedValue> = m.iter().flatten().collect();
    check_inputs(&all, place, precision)?;
    let be = Backend::new(place, precision);
    let vals = m
        .iter()
        .map(|r| r.iter().map(|v| be.lift_certified(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let d = be.det_val(&vals)?;
    be.certify(&be.lower(d))
}

fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, piv);
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let f = &m[i][k] / &m[k][k];
                for j in k..=n {
                    let t = &f * &m[k][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

fn invert_exact(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<Rational> = (0..n)
            .map(|i| if i == j { Rational::one() } else { Rational::zero() })
            .collect();
        cols.push(solve_exact(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Krawczyk verification of a unique zero of the square system `f` inside
/// `region`. Returns a verified box or `NotVerified`.
pub fn interval_newton_refine(f: &[MPoly], region: &[RealBall]) -> Result<Vec<RealBall>> {
    let n = region.len();
    if f.len() != n || f.iter().any(|p| p.nvars() != n) {
        return Err(Error::Invalid("interval Newton needs a square system".into()));
    }
    let bits = region.iter().map(|b| b.bits).max().unwrap_or(64).max(32);
    let be = Backend::new(Place::Infinity, bits);
    let jac: Vec<Vec<MPoly>> = f.iter().map(|p| p.gradient()).collect();
    let eval_exact_jac = |y: &[Rational]| -> Vec<Vec<Rational>> {
        jac.iter()
            .map(|row| row.iter().map(|d| d.eval_exact(y)).collect())
            .collect()
    };

    // Non-rigorous Newton from the midpoint, rounded to the working grid.
    let mut y: Vec<Rational> = region.iter().map(|b| b.midpoint()).collect();
    let iterations = 8 + (32 - bits.leading_zeros());
    for _ in 0..iterations {
        let fy: Vec<Rational> = f.iter().map(|p| p.eval_exact(&y)).collect();
        if fy.iter().all(|v| v.is_zero()) {
            break;
        }
        let delta = solve_exact(&eval_exact_jac(&y), &fy)
            .ok_or_else(|| Error::NotVerified("singular Jacobian during Newton iteration".into()))?;
        y = y
            .iter()
            .zip(&delta)
            .map(|(a, d)| Dyadic::floor_of(&(a - d), bits + 8).to_rational())
            .collect();
    }
    let c = invert_exact(&eval_exact_jac(&y))
        .ok_or_else(|| Error::NotVerified("singular Jacobian at the approximate root".into()))?;
    let fy: Vec<Rational> = f.iter().map(|p| p.eval_exact(&y)).collect();
    // Newton correction C F(y), computed exactly.
    let cfy: Vec<Rational> = (0..n)
        .map(|i| (0..n).fold(Rational::zero(), |s, j| s + &c[i][j] * &fy[j]))
        .collect();
    let ymax = y.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero) + Rational::one();
    let cmax = cfy.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero);

    for attempt in 0..4u32 {
        let shift = bits as i64 - 16 * (attempt as i64 + 1);
        let mut r = &ymax * Rational::new(BigInt::one(), BigInt::one() << shift.max(1) as usize);
        let r2 = &cmax * Rational::from_integer(BigInt::from(4));
        if r2 > r {
            r = r2 * Rational::from_integer(BigInt::from(1u64 << (8 * attempt)));
        }
        let bx: Vec<Val> = y.iter().map(|v| be.round(v - &r, v + &r)).collect();
        // K = y - C F(y) + (I - C J(B)) (B - y)
        let jb: Vec<Vec<Val>> = jac
            .iter()
            .map(|row| row.iter().map(|d| be.eval_val(d, &bx)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut ok = true;
        let mut kbox = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Val::Exact(&y[i] - &cfy[i]);
            for j in 0..n {
                // (I - C J(B))_{ij}
                let mut cj = Val::Exact(Rational::zero());
                for (k, jrow) in jb.iter().enumerate() {
                    cj = be.mul_add_val(&Val::Exact(c[i][k].clone()), &jrow[j], Some(&cj))?;
                }
                let ident = Val::Exact(if i == j { Rational::one() } else { Rational::zero() });
                let m = be.sub_val(&ident, &cj)?;
                let d = be.sub_val(&bx[j], &Val::Exact(y[j].clone()))?;
                acc = be.mul_add_val(&m, &d, Some(&acc))?;
            }
            let (kl, kh) = Backend::bounds(&acc);
            let (bl, bh) = Backend::bounds(&bx[i]);
            if !(kl > bl && kh < bh) {
                ok = false;
                break;
            }
            kbox.push((kl, kh));
        }
        if ok {
            let out: Vec<RealBall> = kbox
                .iter()
                .map(|(l, h)| RealBall::enclosing(l, h, bits))
                .collect();
            for (o, reg) in out.iter().zip(region) {
                if o.lo_q() < reg.lo_q() || o.hi_q() > reg.hi_q() {
                    return Err(Error::NotVerified("verified root lies outside the given box".into()));
                }
            }
            return Ok(out);
        }
    }
    Err(Error::NotVerified("Krawczyk inclusion failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{parse_rational, rat, rat_frac};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circle() -> MPoly {
        MPoly::parse_in("x1^2 + x2^2 - 1", &["x1", "x2"]).unwrap()
    }

    fn p1() -> Rational {
        parse_rational("1234567890123/10000000000000").unwrap()
    }

    fn real(q: &Rational, bits: u32) -> CertifiedValue {
        CertifiedValue::Real(RealBall::around(q, bits))
    }

    #[test]
    fn exact_zero_is_enclosed() {
        let pt = [real(&rat_frac(3, 5), 100), real(&rat_frac(4, 5), 100)];
        let v = eval_certified(&circle(), &pt, Place::Infinity, 100).unwrap();
        let b = v.as_real().unwrap();
        assert!(b.contains(&rat(0)));
        assert!(b.width() < Rational::new(BigInt::one(), BigInt::one() << 95usize));
    }

    #[test]
    fn thales_goal_enclosure_at_4330_bits() {
        let be = Backend::new(Place::Infinity, 4330);
        let rad = Coordinate::Exact(rat(1) - p1() * p1());
        let p2 = be.sqrt(&rad, Branch::Plus).unwrap();
        let g = MPoly::parse_in("(x1-1)*(x1+1) + x2*x2", &["x1", "x2"]).unwrap();
        let v = be.certify(&be.eval(&g, &[Coordinate::Exact(p1()), p2]).unwrap()).unwrap();
        let b = v.as_real().unwrap();
        let bound = parse_rational("11/10").unwrap()
            / Rational::from_integer(num_traits::pow(BigInt::from(10), 1303));
        assert!(b.lo_q() >= -bound.clone() && b.hi_q() <= bound);
    }

    #[test]
    fn real_sqrt_squares_back_and_is_narrow() {
        let be = Backend::new(Place::Infinity, 4330);
        let rad = rat(1) - p1() * p1();
        let root = be.sqrt(&Coordinate::Exact(rad.clone()), Branch::Plus).unwrap();
        let Coordinate::Certified(CertifiedValue::Real(b)) = root else { panic!() };
        assert!(b.width() <= Rational::new(BigInt::one(), BigInt::one() << 4318usize));
        assert!(b.lo_q() * b.lo_q() <= rad && rad <= b.hi_q() * b.hi_q());
        assert!((b.approx_f64() - 0.99235).abs() < 1e-5);
    }

    #[test]
    fn sqrt_of_exact_one() {
        let one = CertifiedValue::Real(RealBall::around(&rat(1), 64));
        let r = sqrt_certified(&one, Branch::Plus).unwrap();
        assert_eq!(r.as_real().unwrap().lo_q(), rat(1));
        assert_eq!(r.as_real().unwrap().hi_q(), rat(1));
    }

    #[test]
    fn seven_adic_thales_root_digits() {
        let p1 = Rational::from_integer(BigInt::from(7u64 * 1234567890123));
        let be = Backend::new(Place::Prime(7), 1525);
        let root = be
            .sqrt(&Coordinate::Exact(rat(1) - &p1 * &p1), Branch::Residue(1))
            .unwrap();
        let Coordinate::Certified(CertifiedValue::Padic(a)) = root.clone() else { panic!() };
        assert_eq!(a.digits(4), vec![1, 0, 3, 5]);
        assert_eq!(a.precision(), 1525);
        // residue^2 == 1 - p1^2 mod 7^1525
        let m = p_power(7, 1525);
        let rad = be.exact_residue(&(rat(1) - &p1 * &p1), 1525).unwrap();
        assert_eq!((a.residue() * a.residue()) % &m, rad);
        let f = circle();
        let g = MPoly::parse_in("(x1-1)*(x1+1) + x2*x2", &["x1", "x2"]).unwrap();
        for poly in [&f, &g] {
            let v = be.certify(&be.eval(poly, &[Coordinate::Exact(p1.clone()), root.clone()]).unwrap()).unwrap();
            assert!(v.as_padic().unwrap().residue().is_zero());
        }
        // Plus picks the smaller class, Minus the other.
        let plus = be.sqrt(&Coordinate::Exact(rat(1) - &p1 * &p1), Branch::Plus).unwrap();
        assert_eq!(plus, root);
    }

    #[test]
    fn padic_sqrt_errors_and_even_valuation() {
        let be = Backend::new(Place::Prime(7), 20);
        assert!(matches!(
            be.sqrt(&Coordinate::Exact(rat(3)), Branch::Plus),
            Err(Error::NonResidue(_))
        ));
        assert!(matches!(
            be.sqrt(&Coordinate::Exact(rat(14)), Branch::Plus),
            Err(Error::NonResidue(_))
        ));
        // 49 * 2: valuation 2, unit 2 = 3^2 = 9 mod 7.
        let x = Coordinate::Certified(be.certify(&Coordinate::Exact(rat(98))).unwrap());
        let r = be.sqrt(&x, Branch::Plus).unwrap();
        let Coordinate::Certified(CertifiedValue::Padic(a)) = r else { panic!() };
        assert_eq!(a.precision(), 19);
        let m = p_power(7, 19);
        assert_eq!((a.residue() * a.residue()) % &m, BigUint::from(98u32) % &m);
        assert_eq!(a.valuation(), Some(1));
    }

    #[test]
    fn norm_checks() {
        let tiny = parse_rational("11/10").unwrap()
            / Rational::from_integer(num_traits::pow(BigInt::from(10), 1303));
        let b = CertifiedValue::Real(RealBall::enclosing(&-tiny.clone(), &tiny, 4400));
        let eps = ln_int(10, 64).scale(&rat(1200)).unwrap().neg().unwrap();
        assert_eq!(norm_leq(&b, &eps, 512).unwrap(), NormCheck::Yes);
        let unit = CertifiedValue::Real(RealBall::enclosing(&rat(1), &rat(2), 64));
        assert_eq!(norm_leq(&unit, &LogBound::from_int(-1), 512).unwrap(), NormCheck::No);
        let zero = CertifiedValue::Padic(PadicApprox::new(7, 1525, BigUint::zero()));
        let eps = ln_int(7, 64).scale(&rat_frac(3049, 2)).unwrap().neg().unwrap();
        assert_eq!(norm_leq(&zero, &eps, 512).unwrap(), NormCheck::Yes);
        let eps = ln_int(7, 64).scale(&rat(1526)).unwrap().neg().unwrap();
        assert_ne!(norm_leq(&zero, &eps, 512).unwrap(), NormCheck::Yes);
    }

    #[test]
    fn norm_leq_never_yes_above_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let q = rat_frac(rng.gen_range(1..10_000), rng.gen_range(1..10_000));
            let v = real(&q, 64);
            // eps strictly below |q|
            let eps = ln_enclosure(&(&q * rat_frac(999, 1000)), 64).unwrap();
            assert_ne!(norm_leq(&v, &eps, 512).unwrap(), NormCheck::Yes);
        }
    }

    #[test]
    fn determinants() {
        let bits = 200;
        let one = real(&rat(1), bits);
        let zero = real(&rat(0), bits);
        let id = vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]];
        let d = det_certified(&id).unwrap();
        assert!(d.as_real().unwrap().contains(&rat(1)));

        let be = Backend::new(Place::Infinity, bits);
        let p2 = be.sqrt(&Coordinate::Exact(rat(1) - p1() * p1()), Branch::Plus).unwrap();
        let two_p2 = be.certify(&be.mul(&Coordinate::Exact(rat(2)), &p2).unwrap()).unwrap();
        let m = vec![vec![one.clone(), real(&(rat(2) * p1()), bits)], vec![zero.clone(), two_p2]];
        let d = det_certified(&m).unwrap();
        assert!((d.as_real().unwrap().approx_f64() - 1.98471).abs() < 1e-4);

        let row = vec![real(&rat_frac(1, 3), bits), real(&rat_frac(2, 7), bits)];
        let d = det_certified(&[row.clone(), row]).unwrap();
        let b = d.as_real().unwrap();
        assert!(b.contains(&rat(0)));
        assert!(b.width() < Rational::new(BigInt::one(), BigInt::one() << 190usize));
    }

    #[test]
    fn bareiss_agrees_with_exact_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 6;
        let m: Vec<Vec<Rational>> = (0..n)
            .map(|_| (0..n).map(|_| rat_frac(rng.gen_range(-9..10), rng.gen_range(1..5))).collect())
            .collect();
        let exact = {
            let be = Backend::new(Place::Infinity, 64);
            let vals: Vec<Vec<Val>> = m.iter().map(|r| r.iter().map(|q| Val::Exact(q.clone())).collect()).collect();
            let cols: Vec<usize> = (0..n).collect();
            match be.laplace(&vals, 0, &cols).unwrap() {
                Val::Exact(q) => q,
                _ => unreachable!(),
            }
        };
        let balls: Vec<Vec<CertifiedValue>> = m.iter().map(|r| r.iter().map(|q| real(q, 128)).collect()).collect();
        let d = det_certified(&balls).unwrap();
        assert!(d.as_real().unwrap().contains(&exact));
    }

    #[test]
    fn krawczyk_examples() {
        let x = &["x"];
        let f = MPoly::parse_in("x^2 - 4", x).unwrap();
        let region = vec![RealBall::enclosing(&rat_frac(19, 10), &rat_frac(21, 10), 128)];
        let b = interval_newton_refine(&[f], &region).unwrap();
        assert!(b[0].contains(&rat(2)));
        assert!(b[0].width() < Rational::new(BigInt::one(), BigInt::one() << 100usize));

        let sq = MPoly::parse_in("x^2", x).unwrap();
        let region = vec![RealBall::enclosing(&rat_frac(-1, 10), &rat_frac(1, 10), 128)];
        assert!(matches!(
            interval_newton_refine(&[sq], &region),
            Err(Error::NotVerified(_))
        ));

        let vars = ["x1", "x2"];
        let sys = vec![
            circle(),
            MPoly::parse_in(&format!("x1 - {}", crate::exactnum::rational_to_string(&p1())), &vars).unwrap(),
        ];
        let region = vec![
            RealBall::enclosing(&rat_frac(1, 10), &rat_frac(15, 100), 256),
            RealBall::enclosing(&rat_frac(98, 100), &rat(1), 256),
        ];
        let b = interval_newton_refine(&sys, &region).unwrap();
        let be = Backend::new(Place::Infinity, 256);
        let p2 = be.sqrt(&Coordinate::Exact(rat(1) - p1() * p1()), Branch::Plus).unwrap();
        let Coordinate::Certified(CertifiedValue::Real(s)) = p2 else { panic!() };
        assert!(b[1].lo_q() <= s.hi_q() && s.lo_q() <= b[1].hi_q());
        assert!(b[0].contains(&p1()));
    }

    #[test]
    fn place_parsing() {
        assert_eq!("inf".parse::<Place>().unwrap(), Place::Infinity);
        assert_eq!("7".parse::<Place>().unwrap(), Place::Prime(7));
        assert!("2".parse::<Place>().is_err());
        assert!("9".parse::<Place>().is_err());
    }

    #[test]
    fn serialization_shapes() {
        let b = RealBall::around(&rat_frac(1, 3), 16);
        let j = serde_json::to_value(&b).unwrap();
        assert_eq!(j["bits"], 16);
        assert!(j["lo"].as_str().unwrap().contains("*2^"));
        let back: RealBall = serde_json::from_value(j).unwrap();
        assert_eq!(back, b);
        let a = PadicApprox::new(7, 5, BigUint::from(50u32));
        let j = serde_json::to_value(&a).unwrap();
        assert_eq!(j, serde_json::json!({"p": 7, "N": 5, "residue": "50"}));
    }

    fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> MPoly {
        let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let vars = MPoly::var_list(&vars);
        let t = rng.gen_range(1..6);
        MPoly::from_terms(
            vars,
            (0..t).map(|_| {
                let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                (e, rat_frac(rng.gen_range(-20..21), rng.gen_range(1..6)))
            }),
        )
    }

    #[test]
    fn containment_fuzz_real_and_padic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..1000 {
            let n = rng.gen_range(1..4);
            let f = random_poly(&mut rng, n);
            let q: Vec<Rational> = (0..n)
                .map(|_| rat_frac(rng.gen_range(-100..100), rng.gen_range(1..50)))
                .collect();
            let exact = f.eval_exact(&q);
            if case % 2 == 0 {
                let bits = rng.gen_range(16..200);
                let pt: Vec<CertifiedValue> = q.iter().map(|x| real(x, bits)).collect();
                let v = eval_certified(&f, &pt, Place::Infinity, bits).unwrap();
                assert!(v.as_real().unwrap().contains(&exact), "case {case}");
            } else {
                let p = [3u64, 5, 7, 11, 13][rng.gen_range(0..5)];
                let q: Vec<Rational> = q
                    .into_iter()
                    .map(|x| if int_valuation(x.denom(), p) > 0 { Rational::from_integer(x.numer().clone()) } else { x })
                    .collect();
                let f = f.clear_denominators().0;
                let exact = f.eval_exact(&q);
                let n_dig = rng.gen_range(1..40);
                let be = Backend::new(Place::Prime(p), n_dig);
                let pt: Vec<CertifiedValue> = q.iter().map(|x| be.certify(&Coordinate::Exact(x.clone())).unwrap()).collect();
                let v = eval_certified(&f, &pt, Place::Prime(p), be.precision()).unwrap();
                let a = v.as_padic().unwrap();
                if int_valuation(exact.denom(), p) == 0 {
                    let want = be.exact_residue(&exact, a.precision()).unwrap();
                    assert_eq!(a.residue(), &want, "case {case}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn width_does_not_grow_with_precision(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_poly(&mut rng, 2);
            let q: Vec<Rational> = (0..2).map(|_| rat_frac(rng.gen_range(-50..50), 3)).collect();
            let w = |bits: u32| {
                let pt: Vec<CertifiedValue> = q.iter().map(|x| real(x, bits)).collect();
                eval_certified(&f, &pt, Place::Infinity, bits).unwrap().as_real().unwrap().width()
            };
            prop_assert!(w(128) <= w(64));
        }

        #[test]
        fn both_real_branches_square_to_the_radicand(n in 1i64..10_000, d in 1i64..10_000) {
            let q = rat_frac(n, d);
            let be = Backend::new(Place::Infinity, 96);
            for br in [Branch::Plus, Branch::Minus] {
                let r = be.sqrt(&Coordinate::Exact(q.clone()), br).unwrap();
                let sq = be.certify(&be.mul(&r, &r).unwrap()).unwrap();
                prop_assert!(sq.as_real().unwrap().contains(&q));
            }
        }

        #[test]
        fn padic_sqrt_squares_back(k in 1u64..500, n in 2u32..60) {
            let p = 11u64;
            let sq = Rational::from_integer(BigInt::from(k * k + p * 4));
            let be = Backend::new(Place::Prime(p), n);
            match be.sqrt(&Coordinate::Certified(be.certify(&Coordinate::Exact(sq.clone())).unwrap()), Branch::Plus) {
                Ok(Coordinate::Certified(CertifiedValue::Padic(a))) => {
                    let m = p_power(p, a.precision());
                    let want = be.exact_residue(&sq, a.precision()).unwrap();
                    prop_assert_eq!((a.residue() * a.residue()) % m, want);
                }
                Ok(other) => prop_assert!(false, "unexpected {:?}", other),
                Err(Error::NonResidue(_)) | Err(Error::BranchUndetermined(_)) => {}
                Err(e) => prop_assert!(false, "unexpected error {}", e),
            }
        }
    }
}
