//! Explicit constants: genericity chains, tolerances, distance bounds and
//! Nullstellensatz size bounds, all as enclosures of natural logarithms.
//!
//! Every calculator is interval arithmetic on exact rationals, so the
//! returned enclosure contains the true value of the formula. Callers pick
//! the pessimistic endpoint: `.hi` for thresholds that must be exceeded,
//! `.lo` for tolerances.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{ln_biguint, ln_enclosure, ln_int, LogBound, Rational};
use crate::mpoly::MPoly;
use crate::valuations::Place;

/// Default precision of the `ln` constants inside the formulas.
pub const CONSTANT_BITS: u32 = 128;

/// Which genericity hypothesis to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    /// The sharper per-coordinate bound with sorted degrees.
    Weak,
    /// `n D^(m+1) (H + 4 ln(n+2))`.
    Main,
    /// `n D_f^m (H + 4 ln(n+2))` over the constraints alone.
    #[serde(rename = "f_only")]
    FOnly,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::Weak => "weak",
            ChainKind::Main => "main",
            ChainKind::FOnly => "f_only",
        })
    }
}

/// Size parameters of a system and its ambient ball.
#[derive(Clone, Debug)]
pub struct BoundContext {
    pub n: usize,
    pub d: usize,
    /// `deg f_i`, one per constraint.
    pub degrees: Vec<u32>,
    pub deg_g: u32,
    pub k_degree: u32,
    pub nv: u32,
    pub log_r: LogBound,
    pub place: Place,
    pub bits: u32,
}

impl BoundContext {
    pub fn new(
        n: usize,
        d: usize,
        degrees: Vec<u32>,
        deg_g: u32,
        radius: &Rational,
        place: Place,
    ) -> Result<BoundContext> {
        if n == 0 {
            return Err(Error::Invalid("ambient dimension must be at least 1".into()));
        }
        if d > n {
            return Err(Error::Invalid(format!("dimension {d} exceeds n = {n}")));
        }
        if radius < &Rational::one() {
            return Err(Error::Invalid("radius R must be at least 1".into()));
        }
        Ok(BoundContext {
            n,
            d,
            degrees,
            deg_g,
            k_degree: 1,
            nv: 1,
            log_r: ln_enclosure(radius, CONSTANT_BITS)?,
            place,
            bits: CONSTANT_BITS,
        })
    }

    pub fn with_bits(mut self, bits: u32) -> BoundContext {
        self.bits = bits;
        self
    }

    pub fn m(&self) -> usize {
        self.degrees.len()
    }

    /// `max(deg f_i, deg g)`, at least 1.
    pub fn big_d(&self) -> u32 {
        self.d_f().max(self.deg_g).max(1)
    }

    /// `max deg f_i`, at least 1.
    pub fn d_f(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(1).max(1)
    }

    fn ln(&self, k: u64) -> LogBound {
        ln_int(k.max(1), self.bits)
    }

    fn k(&self) -> Rational {
        int(self.k_degree as u64)
    }

    fn k_over_nv(&self) -> Rational {
        Rational::new(BigInt::from(self.k_degree), BigInt::from(self.nv))
    }

    fn k2_over_nv(&self) -> Rational {
        self.k() * self.k_over_nv()
    }
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn big(n: BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn pow(base: u64, e: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), e as usize)
}

fn times(b: &LogBound, c: &Rational) -> LogBound {
    b.scale(c).expect("non-negative scale")
}

fn neg(b: &LogBound) -> LogBound {
    b.neg().expect("finite bound")
}

fn sum(parts: &[LogBound]) -> LogBound {
    parts.iter().fold(LogBound::zero(), |a, b| a.add(b))
}

/// `n D^(m+1) (H_prev + 4 ln(n+2))`.
pub fn genericity_threshold_main(ctx: &BoundContext, h_prev: &LogBound) -> LogBound {
    let n = ctx.n as u64;
    let c = int(n) * big(pow(ctx.big_d() as u64, ctx.m() as u64 + 1));
    times(&h_prev.add(&times(&ctx.ln(n + 2), &int(4))), &c)
}

/// Per-coordinate bound with the degree sequence `(deg f, deg g, 1, 1, ...)`
/// sorted non-increasingly; `i` is 1-based.
pub fn genericity_threshold_weak(ctx: &BoundContext, h_prev: &LogBound, i: usize) -> LogBound {
    let (n, m, d) = (ctx.n as u64, ctx.m() as u64, ctx.d as u64);
    let ni = n.min(m + i as u64);
    let mut seq: Vec<u64> = ctx.degrees.iter().map(|&x| x.max(1) as u64).collect();
    seq.push(ctx.deg_g.max(1) as u64);
    seq.sort_unstable_by(|a, b| b.cmp(a));
    seq.resize(seq.len().max(ni as usize), 1);
    let dj = &seq[..ni as usize];
    let inv_sum: Rational = dj.iter().map(|&x| Rational::new(BigInt::one(), BigInt::from(x))).sum();
    let prod: BigUint = dj.iter().map(|&x| BigUint::from(x)).product();
    let first = times(
        &times(h_prev, &inv_sum).add(&times(&ctx.ln(n + 1), &int(n + ni))),
        &big(prod),
    );
    let harmonic: Rational = (1..=m)
        .map(|j| Rational::new(BigInt::one(), BigInt::from(2 * j)))
        .sum();
    let multiplicity = (d + 1).saturating_sub(i as u64);
    let second = times(
        &ctx.ln(n + 2).add_rational(&harmonic),
        &(big(pow(ctx.big_d() as u64, ni)) * int(multiplicity)),
    );
    sum(&[first, second, ctx.ln(2)])
}

/// `n D_f^m (H_prev + 4 ln(n+2))`, the hypothesis shared by the dichotomy and
/// dimension theorems.
pub fn genericity_threshold_fonly(ctx: &BoundContext, h_prev: &LogBound) -> LogBound {
    let n = ctx.n as u64;
    let c = int(n) * big(pow(ctx.d_f() as u64, ctx.m() as u64));
    times(&h_prev.add(&times(&ctx.ln(n + 2), &int(4))), &c)
}

/// Shared shape of the main tolerance and the empty-variety bound.
fn empty_shape(ctx: &BoundContext, h: &LogBound, big_d: u32) -> LogBound {
    let (n, m) = (ctx.n as u64, ctx.m() as u64);
    let dd = big_d as u64;
    let outer = int(4) * ctx.k_over_nv() * int((n + 1) * (n + 1)) * big(pow(dd, n));
    let inner = sum(&[
        times(h, &ctx.k()),
        ctx.ln(m),
        times(&ctx.ln(n + 1), &int((n + 7) * dd)),
        times(&ctx.log_r, &Rational::new(BigInt::one(), BigInt::from(n + 1))),
    ]);
    neg(&times(&inner, &outer))
}

/// `log ε` of the identity theorem; `h_full = h(f, g, p_1..p_d)`.
pub fn epsilon_main(ctx: &BoundContext, h_full: &LogBound) -> LogBound {
    empty_shape(ctx, h_full, ctx.big_d())
}

/// Lower bound on `max_i ln |f_i(P)|_v` for a system without common zeros;
/// `h = h(f)`.
pub fn epsilon_lojasiewicz_empty(ctx: &BoundContext, h: &LogBound) -> LogBound {
    empty_shape(ctx, h, ctx.d_f())
}

fn tail_block(ctx: &BoundContext, h: &LogBound) -> LogBound {
    let n = ctx.n as u64;
    let c = int(4) * ctx.k2_over_nv() * int((n + 7).pow(3));
    let inner = sum(&[
        h.clone(),
        times(&ctx.ln(n), &int(2)),
        ctx.ln(ctx.m() as u64),
        ctx.log_r.clone(),
    ])
    .add_rational(&int(12));
    times(&inner, &c)
}

/// `(log ε_f, log ε_g)` of the dichotomy theorem; `h >= h(f, p) + h(g)`.
pub fn dichotomy_thresholds(ctx: &BoundContext, h: &LogBound) -> Result<(LogBound, LogBound)> {
    if ctx.deg_g == 0 {
        return Err(Error::Invalid("dichotomy needs a non-constant g".into()));
    }
    let (n, df, dg) = (ctx.n as u64, ctx.d_f() as u64, ctx.deg_g as u64);
    let base = pow(df, n) + 1u32;
    let eps_f = neg(&times(
        &tail_block(ctx, h),
        &(big(num_traits::pow(base, (n + 4) as usize)) * int(dg)),
    ));
    let eps_g = neg(&times(
        &h.add(&times(&ctx.ln(n + 1), &int(4))),
        &(ctx.k_over_nv() * int(n) * big(pow(df, 2 * n)) * int(dg)),
    ));
    Ok((eps_f, eps_g))
}

/// `(log ε'_f, log ε_det)` of the dimension theorem; `h = h(f, p)`.
pub fn dimension_thresholds(ctx: &BoundContext, h: &LogBound) -> (LogBound, LogBound) {
    let (n, df) = (ctx.n as u64, ctx.d_f() as u64);
    let base = pow(df, n) + 1u32;
    let eps_f = neg(&times(
        &tail_block(ctx, h),
        &big(num_traits::pow(base, (n + 5) as usize)),
    ));
    let eps_det = neg(&times(
        &h.add(&times(&ctx.ln(n + 1), &int(4))),
        &(ctx.k_over_nv() * int(n) * big(pow(df, 3 * n))),
    ));
    (eps_f, eps_det)
}

/// `worst / c + K^2/N_v (n+7)^2 (D^n+1) (H + ln(k n D^(2n)) + 21) + extra`.
fn distance_block(
    ctx: &BoundContext,
    h: &LogBound,
    worst: &LogBound,
    denom: BigUint,
    dd: u64,
    log_count: u64,
    log_r_factor: u64,
) -> LogBound {
    let n = ctx.n as u64;
    if worst.is_neg_infinity() {
        return LogBound::NegInfinity;
    }
    let first = worst
        .scale(&Rational::new(BigInt::one(), BigInt::from(denom)))
        .expect("positive");
    let c = ctx.k2_over_nv() * int((n + 7) * (n + 7)) * big(pow(dd, n) + 1u32);
    let log_term = ln_biguint(&(BigUint::from(log_count.max(1) * n) * pow(dd, 2 * n)), ctx.bits)
        .expect("positive");
    let block = times(&h.add(&log_term).add_rational(&int(21)), &c);
    sum(&[first, block, times(&ctx.log_r, &int(log_r_factor))])
}

/// `log ε'` of the reducible corollary; `worst = ln max(|f_i(P)|, |g(P)|)`.
pub fn epsilon_reducible(ctx: &BoundContext, h_full: &LogBound, worst: &LogBound) -> LogBound {
    let (n, dd) = (ctx.n as u64, ctx.big_d() as u64);
    let denom = BigUint::from(4 * (n + 1)) * num_traits::pow(pow(dd, n) + 1u32, (n + 2) as usize);
    distance_block(ctx, h_full, worst, denom, dd, ctx.m() as u64 + 1, 2)
}

/// `log ε_PQ` bounding the distance from the witness to a nearby point of `X`.
pub fn epsilon_pq(ctx: &BoundContext, h: &LogBound, log_eps_f: &LogBound) -> LogBound {
    let (n, df) = (ctx.n as u64, ctx.d_f() as u64);
    let denom = BigUint::from(4 * (n + 1)) * num_traits::pow(pow(df, n) + 1u32, (n + 2) as usize);
    distance_block(ctx, h, log_eps_f, denom, df, (ctx.m() + ctx.d) as u64, 2)
}

/// Upper bound on `ln dist_v(P, X)` for non-empty `X`; `worst = max ln |f_i(P)|_v`.
///
/// When some `|f_i(P)|_v` may exceed 1 the smaller denominator `4(n+1)D^(n+1)`
/// is used, and when the enclosure straddles 0 the larger of both bounds.
pub fn lojasiewicz_nonempty_bound(ctx: &BoundContext, h: &LogBound, worst: &LogBound) -> LogBound {
    let (n, df) = (ctx.n as u64, ctx.d_f() as u64);
    let standard = BigUint::from(4 * (n + 1)) * num_traits::pow(pow(df, n) + 1u32, (n + 2) as usize);
    let general = BigUint::from(4 * (n + 1)) * pow(df, n + 1);
    let m = ctx.m() as u64;
    let with = |den: BigUint| distance_block(ctx, h, worst, den, df, m, 2);
    match (worst.lo(), worst.hi()) {
        (_, Some(hi)) if hi <= &Rational::zero() => with(standard),
        (Some(lo), _) if lo > &Rational::zero() => with(general),
        (Some(_), Some(_)) => with(standard).max(&with(general)),
        _ => LogBound::NegInfinity,
    }
}

/// Upper bound on `ln dist_v(P, X)` for zero-dimensional `X` of degree `deg_x`.
pub fn lojasiewicz_zerodim_bound(
    ctx: &BoundContext,
    h: &LogBound,
    worst: &LogBound,
    deg_x: u64,
) -> LogBound {
    let (n, df) = (ctx.n as u64, ctx.d_f() as u64);
    let kh = times(h, &ctx.k());
    let max1h = kh.max(&LogBound::zero().add_rational(&int(1)));
    let fact: BigUint = (1..=pow(df, n).to_u64().expect("D^n fits in u64") + 2)
        .map(BigUint::from)
        .product();
    let c = ctx.k() * ctx.k() * int((n + 3).pow(3)) * big(fact);
    let nn = BigUint::from(4 * (n + 1)) * pow(df, n + 1) * BigUint::from(deg_x.max(1));
    let last = if worst.is_neg_infinity() {
        LogBound::NegInfinity
    } else {
        worst
            .scale(&Rational::new(BigInt::one(), BigInt::from(nn)))
            .expect("positive")
    };
    sum(&[
        times(&max1h, &c),
        times(&ctx.log_r, &int(2)),
        ctx.ln(ctx.m() as u64),
    ])
    .add(&last)
}

/// Variant of the arithmetic Nullstellensatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NssVariant {
    Bezout,
    General,
}

/// Degree and height bounds for the combiners `λ_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NssBounds {
    pub variant: NssVariant,
    /// Exponent of `g` (general version only).
    #[serde(with = "opt_biguint")]
    pub big_n: Option<BigUint>,
    #[serde(with = "biguint_str")]
    pub deg_lambda_max: BigUint,
    pub h_lambda_max: LogBound,
}

mod biguint_str {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_biguint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Combiner size bounds; `h` is the height of the input polynomials.
pub fn nullstellensatz_size_bounds(ctx: &BoundContext, h: &LogBound, variant: NssVariant) -> NssBounds {
    let (n, m) = (ctx.n as u64, ctx.m() as u64);
    match variant {
        NssVariant::Bezout => {
            let dd = ctx.d_f() as u64;
            let deg = BigUint::from(4 * n) * pow(dd, n);
            let c = int(4 * n * (n + 1)) * big(pow(dd, n));
            let inner = sum(&[h.clone(), ctx.ln(m), times(&ctx.ln(n + 1), &int((n + 7) * dd))]);
            NssBounds {
                variant,
                big_n: None,
                deg_lambda_max: deg,
                h_lambda_max: times(&inner, &c),
            }
        }
        NssVariant::General => {
            let dd = (ctx.deg_g as u64 + 1).max(ctx.d_f() as u64);
            let big_n = BigUint::from(4 * (n + 1)) * pow(dd, n + 1);
            let deg = &big_n * BigUint::from(ctx.deg_g as u64 + 1);
            let inner = sum(&[h.clone(), ctx.ln(m + 1), times(&ctx.ln(n + 2), &int((n + 8) * dd))]);
            let c = big(big_n.clone()) * int(n + 3);
            NssBounds {
                variant,
                big_n: Some(big_n),
                deg_lambda_max: deg,
                h_lambda_max: times(&inner, &c),
            }
        }
    }
}

/// `D_f^min(n, m)`.
pub fn bezout_degree_bound(ctx: &BoundContext) -> BigUint {
    pow(ctx.d_f() as u64, ctx.n.min(ctx.m()) as u64)
}

/// `(H Σ 1/D_i + (n + n0) ln(n+1)) Π D_i` over the `n0 = min(n, m)` largest degrees.
pub fn variety_height_bound(ctx: &BoundContext, h: &LogBound) -> LogBound {
    let n = ctx.n as u64;
    let n0 = ctx.n.min(ctx.m());
    let mut degs: Vec<u64> = ctx.degrees.iter().map(|&x| x.max(1) as u64).collect();
    degs.sort_unstable_by(|a, b| b.cmp(a));
    let top = &degs[..n0];
    let inv_sum: Rational = top.iter().map(|&x| Rational::new(BigInt::one(), BigInt::from(x))).sum();
    let prod: BigUint = top.iter().map(|&x| BigUint::from(x)).product();
    times(
        &times(h, &inv_sum).add(&times(&ctx.ln(n + 1), &int(n + n0 as u64))),
        &big(prod),
    )
}

/// `(H_0, D_0)` with `D_0 = d D^(m+1)` and `H_0 = n D^(m+1) (H_fg + 3 ln(n+2))`.
pub fn generic_point_requirements(ctx: &BoundContext, h_fg: &LogBound) -> (LogBound, BigUint) {
    let n = ctx.n as u64;
    let dm = pow(ctx.big_d() as u64, ctx.m() as u64 + 1);
    let h0 = times(
        &h_fg.add(&times(&ctx.ln(n + 2), &int(3))),
        &(int(n) * big(dm.clone())),
    );
    (h0, BigUint::from(ctx.d) * dm)
}

/// Integer `c` with `|z| >= c` implying `g(z) != 0` for univariate `g != 0`:
/// `1 + max|coeff| + 1` after clearing denominators.
pub fn cauchy_threshold(g: &MPoly) -> Rational {
    let (gi, _) = g.clear_denominators();
    let max = gi
        .coefficients()
        .map(|c| c.numer().magnitude().clone())
        .max()
        .unwrap_or_default();
    big(max) + int(2)
}

/// Working precision for a tolerance: bits at the real place
/// (`ceil(-log2 ε) + 32`), digits at a prime (`ceil(-ln ε / ln p) + 4`).
pub fn working_precision(log_eps: &LogBound, place: Place) -> u32 {
    let lo = match log_eps.lo() {
        Some(lo) => -lo.clone(),
        None => return 64,
    };
    if lo <= Rational::zero() {
        return 64;
    }
    let (unit, guard) = match place {
        Place::Infinity => (ln_int(2, 64), 32),
        Place::Prime(p) => (ln_int(p, 64), 4),
    };
    let q = lo / unit.lo().expect("finite").clone();
    let c = q.ceil().to_integer().to_u64().unwrap_or(u64::from(u32::MAX / 2));
    (c + guard).min(u64::from(u32::MAX / 2)) as u32
}

/// Named enclosures recorded by a procedure, serialized as an ordered object.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constants(pub Vec<(String, LogBound)>);

impl Constants {
    pub fn push(&mut self, name: impl Into<String>, value: LogBound) {
        self.0.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<&LogBound> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

impl Serialize for Constants {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Constants {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Constants;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of log bounds")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> std::result::Result<Constants, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, LogBound>()? {
                    out.push((k, v));
                }
                Ok(Constants(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// Thresholds and tolerances used by one certification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub chain: ChainKind,
    /// Height each free coordinate must reach, in order.
    pub genericity: Vec<LogBound>,
    /// Height of the data preceding each free coordinate.
    pub heights: Vec<LogBound>,
    pub log_eps: LogBound,
    pub constants: Constants,
}

impl ThresholdReport {
    /// Human-readable lines, each value in nats and as a power of 10.
    pub fn text_lines(&self) -> Vec<String> {
        let ln10 = std::f64::consts::LN_10;
        let fmt = |b: &LogBound| match b {
            LogBound::NegInfinity => "-inf".to_string(),
            _ => {
                let x = b.midpoint_f64();
                format!("{x:.4} nats (log10 {:.4})", x / ln10)
            }
        };
        let mut out = vec![format!("chain: {}", self.chain)];
        for (i, (t, h)) in self.genericity.iter().zip(&self.heights).enumerate() {
            out.push(format!("h(p_{}) must be >= {}  [H_prev = {}]", i + 1, fmt(t), fmt(h)));
        }
        out.push(format!("log eps: {}", fmt(&self.log_eps)));
        for (k, v) in &self.constants.0 {
            match k.as_str() {
                "k_degree" | "precision" => out.push(format!("{k}: {}", v.midpoint_f64().round())),
                _ => out.push(format!("{k}: {}", fmt(v))),
            }
        }
        out
    }
}
