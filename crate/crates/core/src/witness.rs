//! Witness points: free coordinates of large height, then the remaining
//! coordinates solved on the fiber with certified enclosures.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{
    compare_certain, parse_rational, rational_to_string, Comparison, ExactLog, LogBound, Rational,
};
use crate::mpoly::{height_of_values, MPoly};
pub use crate::valuations::Branch;
use crate::valuations::{interval_newton_refine, Backend, CertifiedValue, Coordinate, Place, RealBall, Val};

/// How to pick a free coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FreeStyle {
    /// `0.123456789012...` truncated to `k` digits.
    DecimalPattern,
    /// `p * 123456789012...`.
    PadicPattern,
    /// A given value, checked against the threshold.
    User(Rational),
}

/// A chosen free coordinate and its exact height.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCoordinate {
    pub value: Rational,
    pub height: ExactLog,
    pub threshold: LogBound,
}

/// Digits `1 2 3 4 5 6 7 8 9 0 1 2 ...` read as an integer of `k` digits.
pub fn pattern_integer(k: u32) -> BigUint {
    (1..=k).fold(BigUint::zero(), |acc, i| acc * 10u32 + (i % 10))
}

pub fn height_of(q: &Rational) -> ExactLog {
    height_of_values([q])
}

fn exceeds(h: &ExactLog, threshold: &LogBound, cap: u32) -> Result<bool> {
    Ok(compare_certain(64, cap, |b| Ok((h.enclose(b), threshold.clone())))? == Comparison::Ge)
}

/// Picks the first candidate of the style whose height certainly reaches
/// `threshold`; a user value is checked, not trusted.
pub fn choose_free_coordinate(
    threshold: &LogBound,
    place: Place,
    style: &FreeStyle,
    cap: u32,
) -> Result<FreeCoordinate> {
    let t_hi = threshold
        .hi()
        .ok_or_else(|| Error::Invalid("genericity threshold must be finite".into()))?;
    let accept = |value: Rational| -> Result<Option<FreeCoordinate>> {
        let height = height_of(&value);
        Ok(exceeds(&height, threshold, cap)?.then(|| FreeCoordinate {
            value,
            height,
            threshold: threshold.clone(),
        }))
    };
    match style {
        FreeStyle::User(v) => accept(v.clone())?.ok_or_else(|| {
            Error::Invalid(format!(
                "free coordinate {} has height {:.4} below the genericity threshold {:.4}",
                rational_to_string(v),
                height_of(v).approx_f64(),
                threshold.midpoint_f64()
            ))
        }),
        FreeStyle::DecimalPattern | FreeStyle::PadicPattern => {
            // Lengths beyond this have far more height than needed.
            let max_k = 64 + (t_hi.to_integer_ceil() / 2).max(1);
            for k in 1..=max_k {
                let num = BigInt::from(pattern_integer(k));
                let value = match style {
                    FreeStyle::DecimalPattern => {
                        Rational::new(num, num_traits::pow(BigInt::from(10), k as usize))
                    }
                    _ => {
                        let p = match place {
                            Place::Prime(p) => p,
                            Place::Infinity => {
                                return Err(Error::Invalid(
                                    "the p-adic pattern needs a prime place".into(),
                                ))
                            }
                        };
                        Rational::from_integer(num * BigInt::from(p))
                    }
                };
                if let Some(c) = accept(value)? {
                    return Ok(c);
                }
            }
            Err(Error::Invalid("no pattern coordinate reaches the threshold".into()))
        }
    }
}

trait CeilInt {
    fn to_integer_ceil(&self) -> u32;
}

impl CeilInt for Rational {
    fn to_integer_ceil(&self) -> u32 {
        let c = self.ceil().to_integer();
        if c.is_negative() {
            0
        } else {
            c.try_into().unwrap_or(u32::MAX / 4).min(u32::MAX / 4)
        }
    }
}

/// One triangular solving step. Polynomials are written in the system's
/// variables and may only involve coordinates solved earlier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum RecipeStep {
    /// `a * var + b = 0`.
    Linear {
        var: String,
        a: String,
        b: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<usize>,
    },
    /// `a * var^2 + b * var + c = 0`. At the real place the branch is the
    /// sign of the square root in `(-b ± s) / 2a`; at a prime it selects the
    /// root by its residue class mod `p`.
    Quadratic {
        var: String,
        a: String,
        b: String,
        c: String,
        branch: Branch,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<usize>,
    },
    /// `var = -1 / expr`.
    RabinowitschInverse {
        var: String,
        expr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<usize>,
    },
    /// Verified zero of `f_equations` in `vars` inside `region`.
    Newton {
        vars: Vec<String>,
        equations: Vec<usize>,
        region: Vec<RealBall>,
    },
}

impl RecipeStep {
    /// Step solving `f = 0` for variable `var` when `f` has degree 1 or 2 in it.
    pub fn solve_for(f: &MPoly, var: usize, source: Option<usize>, branch: Branch) -> Result<RecipeStep> {
        let name = f.vars()[var].clone();
        let cs = f.coefficients_in(var);
        let s = |i: usize| cs.get(i).map(|p| p.to_string()).unwrap_or_else(|| "0".into());
        match cs.len() {
            2 => Ok(RecipeStep::Linear { var: name, a: s(1), b: s(0), source }),
            3 => Ok(RecipeStep::Quadratic {
                var: name,
                a: s(2),
                b: s(1),
                c: s(0),
                branch,
                source,
            }),
            _ => Err(Error::Invalid(format!(
                "cannot solve for `{name}`: degree must be 1 or 2"
            ))),
        }
    }

    pub fn solved_vars(&self) -> Vec<&str> {
        match self {
            RecipeStep::Linear { var, .. }
            | RecipeStep::Quadratic { var, .. }
            | RecipeStep::RabinowitschInverse { var, .. } => vec![var.as_str()],
            RecipeStep::Newton { vars, .. } => vars.iter().map(|s| s.as_str()).collect(),
        }
    }

    pub fn source(&self) -> Option<usize> {
        match self {
            RecipeStep::Linear { source, .. }
            | RecipeStep::Quadratic { source, .. }
            | RecipeStep::RabinowitschInverse { source, .. } => *source,
            RecipeStep::Newton { .. } => None,
        }
    }
}

/// Ordered steps covering every dependent coordinate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolvingRecipe {
    pub steps: Vec<RecipeStep>,
}

impl SolvingRecipe {
    pub fn has_newton(&self) -> bool {
        self.steps.iter().any(|s| matches!(s, RecipeStep::Newton { .. }))
    }

    /// Indices of the polynomials each step solves exactly.
    pub fn sources(&self) -> Vec<usize> {
        self.steps.iter().filter_map(|s| s.source()).collect()
    }
}

/// A witness point with its construction protocol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub place: Place,
    pub precision: u32,
    #[serde(with = "crate::exactnum::serde_rational_vec")]
    pub free: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<SolvingRecipe>,
    pub coordinates: Vec<Coordinate>,
    /// Number of square roots that left the rationals.
    pub irrational_roots: u32,
}

impl Witness {
    /// Witness with every coordinate given exactly.
    pub fn exact(place: Place, d: usize, point: Vec<Rational>) -> Witness {
        Witness {
            place,
            precision: 0,
            free: point[..d.min(point.len())].to_vec(),
            recipe: None,
            coordinates: point.into_iter().map(Coordinate::Exact).collect(),
            irrational_roots: 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.coordinates.iter().all(|c| c.is_exact())
    }

    pub fn exact_point(&self) -> Option<Vec<Rational>> {
        self.coordinates.iter().map(|c| c.as_exact().cloned()).collect()
    }

    /// `[K:Q]` of the field generated by the coordinates, bounded by
    /// `2^(irrational roots)`.
    pub fn field_degree(&self) -> u64 {
        1u64 << self.irrational_roots.min(62)
    }

    /// Whether every coordinate certainly satisfies `|x|_v <= R`.
    pub fn fits_radius(&self, radius: &Rational) -> Result<bool> {
        for c in &self.coordinates {
            let ok = match c {
                Coordinate::Exact(q) if !self.place.is_archimedean() => {
                    padic_norm_leq(q, self.place, radius)
                }
                Coordinate::Exact(q) => q.abs() <= *radius,
                Coordinate::Certified(CertifiedValue::Real(b)) => {
                    b.lo_q().abs() <= *radius && b.hi_q().abs() <= *radius
                }
                // Residue classes lie in Z_p.
                Coordinate::Certified(CertifiedValue::Padic(_)) => true,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn padic_norm_leq(q: &Rational, place: Place, radius: &Rational) -> bool {
    let Place::Prime(p) = place else { return true };
    if q.is_zero() {
        return true;
    }
    let pb = BigInt::from(p);
    let mut den = q.denom().clone();
    let mut norm = Rational::one();
    while (&den % &pb).is_zero() {
        den /= &pb;
        norm *= Rational::from_integer(pb.clone());
    }
    &norm <= radius
}

/// Input form of a witness: free values and optionally a recipe, or a full
/// exact point.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSpec {
    #[serde(default)]
    pub free: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<SolvingRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
}

impl WitnessSpec {
    pub fn free_values(&self) -> Result<Vec<Rational>> {
        self.free.iter().map(|s| parse_rational(s)).collect()
    }

    pub fn point_values(&self) -> Result<Option<Vec<Rational>>> {
        self.point
            .as_ref()
            .map(|p| p.iter().map(|s| parse_rational(s)).collect())
            .transpose()
    }
}

fn var_index(vars: &[String], name: &str) -> Result<usize> {
    vars.iter()
        .position(|v| v == name)
        .ok_or_else(|| Error::UnknownVariable(name.to_string()))
}

/// Solves the dependent coordinates with the recipe, the first `free.len()`
/// variables being fixed to `free`.
pub fn solve_fiber(
    f: &[MPoly],
    vars: &Arc<Vec<String>>,
    free: &[Rational],
    recipe: &SolvingRecipe,
    place: Place,
    precision: u32,
) -> Result<Witness> {
    let n = vars.len();
    let be = Backend::new(place, precision);
    let mut point: Vec<Option<Val>> = vec![None; n];
    for (i, q) in free.iter().enumerate() {
        if i >= n {
            return Err(Error::Invalid("more free values than variables".into()));
        }
        point[i] = Some(Val::Exact(q.clone()));
    }
    let mut irrational = 0u32;
    let eval = |poly: &str, point: &[Option<Val>]| -> Result<Val> {
        let p = MPoly::parse(poly, vars.clone())?;
        for v in p.used_vars() {
            if point[v].is_none() {
                return Err(Error::Invalid(format!(
                    "recipe step uses `{}` before it is solved",
                    vars[v]
                )));
            }
        }
        let vals: Vec<Val> = point
            .iter()
            .map(|v| v.clone().unwrap_or(Val::Exact(Rational::zero())))
            .collect();
        be.eval_val(&p, &vals)
    };
    let nonzero = |v: &Val, what: &str| -> Result<()> {
        let zero = match v {
            Val::Exact(q) => q.is_zero(),
            Val::Iv(lo, hi) => !lo.is_positive() && !hi.is_negative(),
            Val::Pa(r, _) => r.is_zero(),
        };
        if zero {
            Err(Error::Domain(format!("{what} may vanish at the witness")))
        } else {
            Ok(())
        }
    };
    for step in &recipe.steps {
        match step {
            RecipeStep::Linear { var, a, b, .. } => {
                let i = var_index(vars, var)?;
                let (a, b) = (eval(a, &point)?, eval(b, &point)?);
                nonzero(&a, "leading coefficient")?;
                let nb = be.mul_val(&b, &Val::Exact(-Rational::one()))?;
                point[i] = Some(be.div_val(&nb, &a)?);
            }
            RecipeStep::Quadratic { var, a, b, c, branch, .. } => {
                let i = var_index(vars, var)?;
                let (a, b, c) = (eval(a, &point)?, eval(b, &point)?, eval(c, &point)?);
                nonzero(&a, "leading coefficient")?;
                let b2 = be.mul_val(&b, &b)?;
                let ac4 = be.mul_val(&be.mul_val(&a, &c)?, &Val::Exact(Rational::from_integer(4.into())))?;
                let disc = be.sub_val(&b2, &ac4)?;
                let den = be.mul_val(&a, &Val::Exact(Rational::from_integer(2.into())))?;
                let root = |s: &Val| -> Result<Val> { be.div_val(&be.sub_val(s, &b)?, &den) };
                let x = match place {
                    Place::Infinity => {
                        let s = be.sqrt_val(&disc, *branch)?;
                        if !matches!(s, Val::Exact(_)) {
                            irrational += 1;
                        }
                        root(&s)?
                    }
                    Place::Prime(p) => {
                        let s = be.sqrt_val(&disc, Branch::Plus)?;
                        if !matches!(s, Val::Exact(_)) {
                            irrational += 1;
                        }
                        let ns = be.mul_val(&s, &Val::Exact(-Rational::one()))?;
                        pick_padic_root(&be, p, root(&s)?, root(&ns)?, *branch)?
                    }
                };
                point[i] = Some(x);
            }
            RecipeStep::RabinowitschInverse { var, expr, .. } => {
                let i = var_index(vars, var)?;
                let e = eval(expr, &point)?;
                nonzero(&e, "inverted expression")?;
                point[i] = Some(be.div_val(&Val::Exact(-Rational::one()), &e)?);
            }
            RecipeStep::Newton { vars: nvars, equations, region } => {
                if !place.is_archimedean() {
                    return Err(Error::Invalid("Newton steps need the real place".into()));
                }
                let idx: Vec<usize> = nvars.iter().map(|v| var_index(vars, v)).collect::<Result<_>>()?;
                let sub = newton_subsystem(f, vars, &point, &idx, equations)?;
                let region: Vec<RealBall> = region
                    .iter()
                    .map(|b| RealBall::enclosing(&b.lo_q(), &b.hi_q(), precision))
                    .collect();
                let sol = interval_newton_refine(&sub, &region)?;
                // A verified simple root may still be irrational.
                irrational += idx.len() as u32;
                for (k, ball) in idx.iter().zip(sol) {
                    point[*k] = Some(Val::Iv(ball.lo_q(), ball.hi_q()));
                }
            }
        }
    }
    let coordinates = point
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.map(|v| be.lower(v))
                .ok_or_else(|| Error::Invalid(format!("recipe leaves `{}` unsolved", vars[i])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Witness {
        place,
        precision,
        free: free.to_vec(),
        recipe: Some(recipe.clone()),
        coordinates,
        irrational_roots: irrational,
    })
}

/// Chooses between the two roots by their classes mod `p`.
fn pick_padic_root(be: &Backend, p: u64, plus: Val, minus: Val, branch: Branch) -> Result<Val> {
    let class = |v: &Val| -> Result<u64> {
        let c = be.certify(&be.lower(v.clone()))?;
        let r = c.as_padic().expect("p-adic value").residue() % p;
        Ok(r.try_into().expect("residue below p"))
    };
    let (cp, cm) = (class(&plus)?, class(&minus)?);
    let take_plus = match branch {
        Branch::Plus => cp <= cm,
        Branch::Minus => cp > cm,
        Branch::Residue(c) => {
            let c = c % p;
            if cp == cm && cp == c {
                return Err(Error::BranchUndetermined(format!(
                    "both roots lie in class {c} mod {p}"
                )));
            }
            if cp == c {
                true
            } else if cm == c {
                false
            } else {
                return Err(Error::BranchUndetermined(format!("no root in class {c} mod {p}")));
            }
        }
    };
    Ok(if take_plus { plus } else { minus })
}

fn newton_subsystem(
    f: &[MPoly],
    vars: &Arc<Vec<String>>,
    point: &[Option<Val>],
    idx: &[usize],
    equations: &[usize],
) -> Result<Vec<MPoly>> {
    let local: Vec<String> = idx.iter().map(|&i| vars[i].clone()).collect();
    let local = MPoly::var_list(&local);
    let mut out = Vec::new();
    for &e in equations {
        let mut p = f
            .get(e)
            .ok_or_else(|| Error::Invalid(format!("Newton step names missing equation {e}")))?
            .clone();
        for (i, v) in point.iter().enumerate() {
            if idx.contains(&i) || !p.uses_var(i) {
                continue;
            }
            match v {
                Some(Val::Exact(q)) => p = p.substitute(i, q),
                _ => {
                    return Err(Error::Invalid(format!(
                        "Newton step needs `{}` solved exactly beforehand",
                        vars[i]
                    )))
                }
            }
        }
        let used: Vec<usize> = p.used_vars();
        if used.iter().any(|u| !idx.contains(u)) {
            return Err(Error::Invalid("Newton equation involves unsolved variables".into()));
        }
        out.push(p.with_vars(local.clone())?);
    }
    Ok(out)
}

/// Chooses `d` free coordinates along a genericity chain and solves the
/// fiber. `threshold_for(prefix)` gives the bound for the next coordinate
/// given the ones already chosen; `precision_for(free)` the working
/// precision once all are known.
#[allow(clippy::too_many_arguments)]
pub fn autopilot(
    f: &[MPoly],
    vars: &Arc<Vec<String>>,
    d: usize,
    recipe: &SolvingRecipe,
    place: Place,
    styles: &[FreeStyle],
    cap: u32,
    mut threshold_for: impl FnMut(&[Rational]) -> Result<LogBound>,
    precision_for: impl FnOnce(&[Rational]) -> Result<u32>,
) -> Result<(Witness, Vec<FreeCoordinate>)> {
    let mut chosen: Vec<FreeCoordinate> = Vec::with_capacity(d);
    for i in 0..d {
        let prefix: Vec<Rational> = chosen.iter().map(|c| c.value.clone()).collect();
        let t = threshold_for(&prefix)?;
        let style = styles
            .get(i)
            .or(styles.last())
            .cloned()
            .unwrap_or(FreeStyle::DecimalPattern);
        let c = choose_free_coordinate(&t, place, &style, cap)
            .map_err(|e| Error::Invalid(format!("free coordinate {}: {e}", i + 1)))?;
        chosen.push(c);
    }
    let free: Vec<Rational> = chosen.iter().map(|c| c.value.clone()).collect();
    let precision = precision_for(&free)?;
    let w = solve_fiber(f, vars, &free, recipe, place, precision)?;
    Ok((w, chosen))
}

/// Greedy triangular decomposition of a system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TriangularPlan {
    /// Variables left free, in the order they were freed.
    pub free: Vec<usize>,
    /// `(equation, variable)` pairs in solving order.
    pub steps: Vec<(usize, usize)>,
    /// Equations no step solves.
    pub unused: Vec<usize>,
    /// Whether every variable is free or solved.
    pub complete: bool,
}

/// Repeatedly solves the first equation with exactly one unknown of degree
/// 1 or 2; when none exists, frees the next variable allowed by `may_free`,
/// preferring variables that no open equation mentions.
pub fn triangular_plan(
    f: &[MPoly],
    n: usize,
    fixed_free: &[usize],
    may_free: impl Fn(usize) -> bool,
) -> TriangularPlan {
    let mut known = vec![false; n];
    for &i in fixed_free {
        known[i] = true;
    }
    let mut plan = TriangularPlan {
        free: fixed_free.to_vec(),
        ..TriangularPlan::default()
    };
    let mut used = vec![false; f.len()];
    while known.iter().any(|k| !k) {
        let found = (0..f.len()).filter(|&e| !used[e]).find_map(|e| {
            let unknown: Vec<usize> = f[e].used_vars().into_iter().filter(|&v| !known[v]).collect();
            match unknown.as_slice() {
                [v] if matches!(f[e].degree_in(*v), Some(1 | 2)) => Some((e, *v)),
                _ => None,
            }
        });
        if let Some((e, v)) = found {
            used[e] = true;
            known[v] = true;
            plan.steps.push((e, v));
            continue;
        }
        let open = |v: usize| (0..f.len()).any(|e| !used[e] && f[e].uses_var(v));
        let pick = (0..n)
            .find(|&v| !known[v] && may_free(v) && !open(v))
            .or_else(|| (0..n).find(|&v| !known[v] && may_free(v)));
        match pick {
            Some(v) => {
                known[v] = true;
                plan.free.push(v);
            }
            None => break,
        }
    }
    plan.complete = known.iter().all(|&k| k);
    plan.unused = (0..f.len()).filter(|&e| !used[e]).collect();
    plan
}

/// Recipe for a plan over `f`, with `Plus` branches and `dummies` solved by
/// inversion. Requires a complete plan.
pub fn recipe_from_plan(f: &[MPoly], plan: &TriangularPlan, dummies: &[usize]) -> Result<SolvingRecipe> {
    if !plan.complete {
        return Err(Error::Invalid("plan leaves variables unsolved".into()));
    }
    let mut steps = Vec::with_capacity(plan.steps.len());
    for &(e, v) in &plan.steps {
        let p = &f[e];
        let cs = p.coefficients_in(v);
        let inverse = dummies.contains(&v)
            && cs.len() == 2
            && cs[0].is_constant()
            && cs[0].constant_term() == Rational::one();
        steps.push(if inverse {
            RecipeStep::RabinowitschInverse {
                var: p.vars()[v].clone(),
                expr: cs[1].to_string(),
                source: Some(e),
            }
        } else {
            RecipeStep::solve_for(p, v, Some(e), Branch::Plus)?
        });
    }
    Ok(SolvingRecipe { steps })
}

/// The polynomial whose root a step computes, over `vars`.
pub fn step_polynomial(step: &RecipeStep, vars: &Arc<Vec<String>>) -> Result<Option<MPoly>> {
    let parse = |s: &str| MPoly::parse(s, vars.clone());
    let var = |name: &str| -> Result<MPoly> { Ok(MPoly::var(vars.clone(), var_index(vars, name)?)) };
    Ok(Some(match step {
        RecipeStep::Linear { var: v, a, b, .. } => &(&parse(a)? * &var(v)?) + &parse(b)?,
        RecipeStep::Quadratic { var: v, a, b, c, .. } => {
            let x = var(v)?;
            &(&(&parse(a)? * &x.pow(2)) + &(&parse(b)? * &x)) + &parse(c)?
        }
        RecipeStep::RabinowitschInverse { var: v, expr, .. } => {
            &(&var(v)? * &parse(expr)?) + &MPoly::constant(vars.clone(), Rational::one())
        }
        RecipeStep::Newton { .. } => return Ok(None),
    }))
}
