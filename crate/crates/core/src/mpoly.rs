//! Sparse multivariate polynomials over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{ExactLog, Rational};

/// A polynomial in a fixed, ordered list of variables.
///
/// Terms map exponent vectors to nonzero coefficients; the zero polynomial
/// has no terms.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({self})")
    }
}

impl MPoly {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        MPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: Rational) -> Self {
        let n = vars.len();
        let mut p = MPoly::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = MPoly::zero(vars);
        p.terms.insert(e, Rational::one());
        p
    }

    pub fn from_terms(
        vars: Arc<Vec<String>>,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Self {
        let mut p = MPoly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len(), "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    /// Builds a variable list shared by several polynomials.
    pub fn var_list<S: AsRef<str>>(names: &[S]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.as_ref().to_string()).collect())
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn shared_vars(&self) -> Arc<Vec<String>> {
        self.vars.clone()
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        self.terms.values()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0; self.nvars()])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree in one variable; `None` for the zero polynomial.
    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    /// Largest single-variable degree; `None` for the zero polynomial.
    pub fn max_var_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().copied().max().unwrap_or(0))
            .max()
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&i| self.uses_var(i)).collect()
    }

    fn check_same_vars(&self, other: &MPoly) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variable lists"
        );
    }

    pub fn scale(&self, c: &Rational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.vars.clone());
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut result = MPoly::constant(self.vars.clone(), Rational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn partial_derivative(&self, i: usize) -> MPoly {
        assert!(i < self.nvars(), "variable index out of range");
        let mut p = MPoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.add_term(e2, c * Rational::from_integer(BigInt::from(e[i])));
            }
        }
        p
    }

    pub fn gradient(&self) -> Vec<MPoly> {
        (0..self.nvars()).map(|i| self.partial_derivative(i)).collect()
    }

    /// Coefficients `c_j` with `self = sum_j c_j * x_i^j`; each `c_j` is free of `x_i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<MPoly> {
        let deg = self.degree_in(i).unwrap_or(0) as usize;
        let mut out = vec![MPoly::zero(self.vars.clone()); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            out[e[i] as usize].add_term(e2, c.clone());
        }
        out
    }

    /// Replaces variable `i` by an exact rational.
    pub fn substitute(&self, i: usize, q: &Rational) -> MPoly {
        let mut p = MPoly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            p.add_term(e2, c * num_traits::pow(q.clone(), e[i] as usize));
        }
        p
    }

    /// Re-expresses the polynomial over `new_vars`, which must contain every
    /// variable the polynomial uses.
    pub fn with_vars(&self, new_vars: Arc<Vec<String>>) -> Result<MPoly> {
        let mut map = Vec::with_capacity(self.nvars());
        for (i, v) in self.vars.iter().enumerate() {
            match new_vars.iter().position(|w| w == v) {
                Some(j) => map.push(Some(j)),
                None if !self.uses_var(i) => map.push(None),
                None => return Err(Error::UnknownVariable(v.clone())),
            }
        }
        let n = new_vars.len();
        let mut p = MPoly::zero(new_vars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; n];
            for (i, &k) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    e2[j] = k;
                }
            }
            p.add_term(e2, c.clone());
        }
        Ok(p)
    }

    /// Multiplies by the lcm of the coefficient denominators, returning the
    /// integral polynomial and the multiplier.
    pub fn clear_denominators(&self) -> (MPoly, BigInt) {
        let l = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        (self.scale(&Rational::from_integer(l.clone())), l)
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Rational {
        self.eval_with(&ExactArith, point).expect("exact evaluation is total")
    }

    /// Horner evaluation along the last variable, recursing on the others.
    pub fn eval_with<A: Arith>(&self, a: &A, point: &[A::Value]) -> Result<A::Value> {
        if point.len() != self.nvars() {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.nvars()
            )));
        }
        let terms: Vec<(&[u32], &Rational)> =
            self.terms.iter().map(|(e, c)| (e.as_slice(), c)).collect();
        horner(a, &terms, self.nvars(), point)
    }

    pub fn parse(text: &str, vars: Arc<Vec<String>>) -> Result<MPoly> {
        let expr = parse_expr(text)?;
        expr.to_poly(&vars)
    }

    /// Parses with a plain list of names.
    pub fn parse_in<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<MPoly> {
        MPoly::parse(text, MPoly::var_list(vars))
    }
}

fn horner<A: Arith>(
    a: &A,
    terms: &[(&[u32], &Rational)],
    k: usize,
    point: &[A::Value],
) -> Result<A::Value> {
    if terms.is_empty() {
        return a.constant(&Rational::zero());
    }
    if k == 0 {
        let s = terms.iter().fold(Rational::zero(), |s, (_, c)| s + *c);
        return a.constant(&s);
    }
    let mut groups: BTreeMap<u32, Vec<(&[u32], &Rational)>> = BTreeMap::new();
    for t in terms {
        groups.entry(t.0[k - 1]).or_default().push(*t);
    }
    let x = &point[k - 1];
    let mut acc: Option<A::Value> = None;
    let mut prev = 0u32;
    for (&e, group) in groups.iter().rev() {
        let c = horner(a, group, k - 1, point)?;
        acc = Some(match acc {
            None => c,
            Some(mut v) => {
                for _ in 0..(prev - e - 1) {
                    v = a.mul_add(&v, x, None)?;
                }
                a.mul_add(&v, x, Some(&c))?
            }
        });
        prev = e;
    }
    let mut v = acc.expect("non-empty groups");
    for _ in 0..prev {
        v = a.mul_add(&v, x, None)?;
    }
    Ok(v)
}

/// Arithmetic backend for polynomial evaluation.
///
/// Each Horner step is one fused `acc * x + c`, so enclosure backends round
/// once per step.
pub trait Arith {
    type Value: Clone;
    fn constant(&self, c: &Rational) -> Result<Self::Value>;
    fn mul_add(
        &self,
        acc: &Self::Value,
        x: &Self::Value,
        c: Option<&Self::Value>,
    ) -> Result<Self::Value>;
}

/// Exact rational evaluation.
pub struct ExactArith;

impl Arith for ExactArith {
    type Value = Rational;

    fn constant(&self, c: &Rational) -> Result<Rational> {
        Ok(c.clone())
    }

    fn mul_add(&self, acc: &Rational, x: &Rational, c: Option<&Rational>) -> Result<Rational> {
        let p = acc * x;
        Ok(match c {
            Some(c) => p + c,
            None => p,
        })
    }
}

/// Evaluation with polynomial values, i.e. composition.
pub struct PolyArith(pub Arc<Vec<String>>);

impl Arith for PolyArith {
    type Value = MPoly;

    fn constant(&self, c: &Rational) -> Result<MPoly> {
        Ok(MPoly::constant(self.0.clone(), c.clone()))
    }

    fn mul_add(&self, acc: &MPoly, x: &MPoly, c: Option<&MPoly>) -> Result<MPoly> {
        let p = acc * x;
        Ok(match c {
            Some(c) => &p + c,
            None => p,
        })
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        self.check_same_vars(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self.check_same_vars(rhs);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        self.check_same_vars(rhs);
        let mut p = MPoly::zero(self.vars.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&-Rational::one())
    }
}

impl Add for MPoly {
    type Output = MPoly;
    fn add(self, rhs: MPoly) -> MPoly {
        &self + &rhs
    }
}

impl Sub for MPoly {
    type Output = MPoly;
    fn sub(self, rhs: MPoly) -> MPoly {
        &self - &rhs
    }
}

impl Mul for MPoly {
    type Output = MPoly;
    fn mul(self, rhs: MPoly) -> MPoly {
        &self * &rhs
    }
}

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

fn fmt_monomial(vars: &[String], e: &[u32]) -> String {
    let mut parts = Vec::new();
    for (v, &k) in vars.iter().zip(e) {
        match k {
            0 => {}
            1 => parts.push(v.clone()),
            _ => parts.push(format!("{v}^{k}")),
        }
    }
    parts.join("*")
}

fn fmt_coeff(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for MPoly {
    /// Canonical form: terms by descending total degree, then descending
    /// exponent vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mono = fmt_monomial(&self.vars, e);
            if mono.is_empty() {
                f.write_str(&fmt_coeff(&abs))?;
            } else if abs.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{}*{}", fmt_coeff(&abs), mono)?;
            }
        }
        Ok(())
    }
}

/// Height of a pooled set of rationals via the lcm of denominators:
/// `h(A) = ln max(b, |b a_1|, …, |b a_k|)`. Empty sets have height 0.
pub fn height_of_values<'a>(values: impl IntoIterator<Item = &'a Rational>) -> ExactLog {
    let values: Vec<&Rational> = values.into_iter().collect();
    let b = values
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut m: BigUint = b.magnitude().clone();
    for q in values {
        let scaled = q.numer().magnitude() * (&b / q.denom()).magnitude();
        if scaled > m {
            m = scaled;
        }
    }
    ExactLog::of(m).expect("lcm is positive")
}

/// Height of a non-empty set of rationals.
pub fn height_of_set(values: &[Rational]) -> Result<ExactLog> {
    if values.is_empty() {
        return Err(Error::Invalid("height of an empty set".into()));
    }
    Ok(height_of_values(values))
}

/// Height of the pooled coefficients of several polynomials.
pub fn height_of_polys<'a>(polys: impl IntoIterator<Item = &'a MPoly>) -> ExactLog {
    height_of_values(polys.into_iter().flat_map(|p| p.coefficients()))
}

/// Result of a Kronecker substitution.
#[derive(Clone, Debug)]
pub struct Kronecker {
    /// Univariate polynomial in `z`.
    pub poly: MPoly,
    /// Base `D`: variable `x_i` becomes `z^(D^i)`.
    pub base: u32,
}

/// Substitutes `x_i -> z^(D^i)` with `D = 1 + max per-variable degree`, which
/// maps distinct monomials to distinct powers of `z`.
pub fn kronecker_substitute(g: &MPoly) -> Result<Kronecker> {
    let base = g.max_var_degree().unwrap_or(0) + 1;
    let z = MPoly::var_list(&["z"]);
    let mut out = MPoly::zero(z);
    let overflow = || Error::Invalid("Kronecker exponent overflows u32".into());
    for (e, c) in g.terms() {
        let mut exp: u32 = 0;
        let mut weight: u32 = 1;
        for (i, &k) in e.iter().enumerate() {
            if i > 0 {
                weight = weight.checked_mul(base).ok_or_else(overflow)?;
            }
            exp = exp
                .checked_add(k.checked_mul(weight).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        out.add_term(vec![exp], c.clone());
    }
    Ok(Kronecker { poly: out, base })
}

/// Expression tree shared by the polynomial and geometry parsers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(String, Vec<Expr>),
}

impl Expr {
    /// Lowers to a polynomial over `vars`; calls are rejected.
    pub fn to_poly(&self, vars: &Arc<Vec<String>>) -> Result<MPoly> {
        Ok(match self {
            Expr::Num(q) => MPoly::constant(vars.clone(), q.clone()),
            Expr::Var(name) => match vars.iter().position(|v| v == name) {
                Some(i) => MPoly::var(vars.clone(), i),
                None => return Err(Error::UnknownVariable(name.clone())),
            },
            Expr::Neg(a) => -&a.to_poly(vars)?,
            Expr::Add(a, b) => &a.to_poly(vars)? + &b.to_poly(vars)?,
            Expr::Sub(a, b) => &a.to_poly(vars)? - &b.to_poly(vars)?,
            Expr::Mul(a, b) => &a.to_poly(vars)? * &b.to_poly(vars)?,
            Expr::Pow(a, k) => a.to_poly(vars)?.pow(*k),
            Expr::Call(name, _) => {
                return Err(Error::Invalid(format!("function `{name}` is not allowed here")))
            }
        })
    }

    /// Identifiers in order of first appearance.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_identifiers(&mut out);
        out
    }

    fn collect_identifiers(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_identifiers(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_identifiers(out);
                b.collect_identifiers(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_identifiers(out)),
        }
    }

    fn is_sum(&self) -> bool {
        matches!(self, Expr::Add(..) | Expr::Sub(..))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) if q.is_negative() => write!(f, "(-{})", fmt_coeff(&q.abs())),
            Expr::Num(q) => f.write_str(&fmt_coeff(q)),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => {
                if a.is_sum() || matches!(**a, Expr::Mul(..)) {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Add(a, b) => {
                if b.is_sum() {
                    write!(f, "{a} + ({b})")
                } else {
                    write!(f, "{a} + {b}")
                }
            }
            Expr::Sub(a, b) => {
                if b.is_sum() {
                    write!(f, "{a} - ({b})")
                } else {
                    write!(f, "{a} - {b}")
                }
            }
            Expr::Mul(a, b) => {
                if a.is_sum() {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str("*")?;
                if b.is_sum() || matches!(**b, Expr::Mul(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Pow(a, k) => match **a {
                Expr::Var(_) | Expr::Call(..) => write!(f, "{a}^{k}"),
                Expr::Num(ref q) if q.is_integer() && !q.is_negative() => write!(f, "{a}^{k}"),
                _ => write!(f, "({a})^{k}"),
            },
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Tokenizes `text`; `line0` is the line number of the first line.
pub(crate) fn lex(text: &str, line0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, line0, 1usize);
    let is_ident_start = |c: char| c.is_ascii_alphabetic() || c == '_';
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let mut text: String = chars[start..i].iter().collect();
            // Optional `/uint` denominator, whitespace allowed around the slash.
            let mut j = i;
            while j < chars.len() && chars[j] == ' ' {
                j += 1;
            }
            if j < chars.len() && chars[j] == '/' {
                let mut k = j + 1;
                while k < chars.len() && chars[k] == ' ' {
                    k += 1;
                }
                let ds = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                if k == ds {
                    return Err(Error::parse(tl, tc + (j - start), "expected denominator after `/`"));
                }
                let den: String = chars[ds..k].iter().collect();
                if den.trim_start_matches('0').is_empty() {
                    return Err(Error::parse(tl, tc + (ds - start), "zero denominator"));
                }
                let num = crate::exactnum::parse_rational(&text)
                    .map_err(|e| Error::parse(tl, tc, e.to_string()))?;
                let den: BigInt = den.parse().expect("digits");
                i = k;
                col += i - start;
                out.push(Token {
                    tok: Tok::Num(num / Rational::from_integer(den)),
                    line: tl,
                    col: tc,
                });
                continue;
            }
            if text.ends_with('.') {
                text.pop();
            }
            Tok::Num(
                crate::exactnum::parse_rational(&text)
                    .map_err(|e| Error::parse(tl, tc, e.to_string()))?,
            )
        } else if is_ident_start(c) {
            i += 1;
            loop {
                while i < chars.len() && is_ident(chars[i]) {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && is_ident_start(chars[i + 1]) {
                    i += 1;
                    continue;
                }
                break;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                ':' => Tok::Colon,
                '/' => {
                    return Err(Error::parse(
                        tl,
                        tc,
                        "`/` is only allowed inside rational literals",
                    ))
                }
                other => return Err(Error::parse(tl, tc, format!("unexpected character `{other}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, line: tl, col: tc });
    }
    Ok(out)
}

/// Recursive-descent parser over a token slice.
pub(crate) struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token], end: (usize, usize)) -> Self {
        Parser { toks, pos: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn position(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.position();
        Error::parse(l, c, msg)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    pub fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(q)) if q.is_integer() && !q.is_negative() => {
                    let k = q
                        .to_integer()
                        .to_u32()
                        .ok_or_else(|| self.error("exponent too large"))?;
                    return Ok(Expr::Pow(Box::new(base), k));
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected a non-negative integer exponent"));
                }
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(q)) => Ok(Expr::Num(q)),
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a number, variable or `(`"))
            }
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let line = text.matches('\n').count() + 1;
    let col = text.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    (line, col)
}

/// Parses a full expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text, 1)?;
    let mut p = Parser::new(&toks, end_position(text));
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}
