//! The certification procedures, their certificates and an offline verifier.
//!
//! Every procedure builds its witness from exact free coordinates and a
//! recipe, evaluates the system with enclosures, and records each comparison
//! in the certificate so that [`verify_certificate`] can recompute it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::{self, BoundContext, ChainKind, Constants, ThresholdReport};
use crate::error::{Error, Result};
use crate::exactnum::{
    compare_certain, ln_abs, ln_int, rational_to_string, Comparison, ExactLog, LogBound, Rational,
    DEFAULT_REFINEMENT_CAP,
};
use crate::mpoly::{height_of_polys, height_of_values, kronecker_substitute, MPoly};
use crate::valuations::{
    norm_leq, norm_lower_bound, norm_upper_bound, Backend, CertifiedValue, Coordinate, NormCheck,
    Place, Val,
};
use crate::witness::{
    autopilot, height_of, recipe_from_plan, solve_fiber, step_polynomial, triangular_plan,
    FreeStyle, RecipeStep, SolvingRecipe, Witness, WitnessSpec,
};

pub const SCHEMA: &str = "pbe-certificate/1";
pub const TOOL: &str = concat!("pbe ", env!("CARGO_PKG_VERSION"));

/// Whether irreducibility of `X` is asserted by the user.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Irreducibility {
    Asserted,
    Unknown,
}

/// `num / den` in the parameters of a parametrization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: MPoly,
    pub den: MPoly,
}

/// A rational map onto a dense subset of `X`, used as a membership oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parametrization {
    pub params: Arc<Vec<String>>,
    pub coords: Vec<RationalFunction>,
}

impl Parametrization {
    pub fn new<S: AsRef<str>>(params: &[S], coords: &[(&str, &str)]) -> Result<Parametrization> {
        let params = MPoly::var_list(params);
        let coords = coords
            .iter()
            .map(|(n, d)| {
                let den = MPoly::parse(d, params.clone())?;
                if den.is_zero() {
                    return Err(Error::Invalid("zero denominator in parametrization".into()));
                }
                Ok(RationalFunction {
                    num: MPoly::parse(n, params.clone())?,
                    den,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Parametrization { params, coords })
    }

    /// The point at parameter values `t`, unless a denominator vanishes.
    pub fn point(&self, t: &[Rational]) -> Option<Vec<Rational>> {
        self.coords
            .iter()
            .map(|c| {
                let den = c.den.eval_exact(t);
                (!den.is_zero()).then(|| c.num.eval_exact(t) / den)
            })
            .collect()
    }
}

/// `X = V(f_1, ..., f_m)` of asserted dimension `dim`, and the goal `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct PolySystem {
    pub vars: Arc<Vec<String>>,
    pub f: Vec<MPoly>,
    pub g: MPoly,
    pub dim: usize,
    pub irreducible: Irreducibility,
    pub parametrization: Option<Parametrization>,
    /// `M` with `h(g) <= ln M` claimed by the producer; the larger of this
    /// and the true height is used.
    pub g_height_bound: Option<u64>,
    pub recipe: Option<SolvingRecipe>,
    /// Meaning of each variable, e.g. `x1 = C.x`.
    pub labels: Vec<String>,
}

impl PolySystem {
    pub fn parse<S: AsRef<str>>(vars: &[S], f: &[&str], g: &str, dim: usize) -> Result<PolySystem> {
        let vars = MPoly::var_list(vars);
        let f = f
            .iter()
            .map(|s| MPoly::parse(s, vars.clone()))
            .collect::<Result<Vec<_>>>()?;
        let g = MPoly::parse(g, vars.clone())?;
        PolySystem::new(vars, f, g, dim)
    }

    pub fn new(vars: Arc<Vec<String>>, f: Vec<MPoly>, g: MPoly, dim: usize) -> Result<PolySystem> {
        let s = PolySystem {
            vars,
            f,
            g,
            dim,
            irreducible: Irreducibility::Asserted,
            parametrization: None,
            g_height_bound: None,
            recipe: None,
            labels: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        for (i, v) in self.vars.iter().enumerate() {
            if self.vars[..i].contains(v) {
                return Err(Error::Invalid(format!("variable `{v}` listed twice")));
            }
        }
        if self.dim > self.n() {
            return Err(Error::Invalid(format!(
                "dimension {} exceeds the number of variables {}",
                self.dim,
                self.n()
            )));
        }
        if let Some(p) = &self.parametrization {
            if p.coords.len() != self.n() {
                return Err(Error::Invalid("parametrization needs one coordinate per variable".into()));
            }
        }
        if self.g_height_bound == Some(0) {
            return Err(Error::Invalid("g_height_bound must be positive".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn m(&self) -> usize {
        self.f.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.f.iter().map(|p| p.degree().unwrap_or(0)).collect()
    }

    pub fn deg_g(&self) -> u32 {
        self.g.degree().unwrap_or(0)
    }

    /// The same variety with a different goal.
    pub fn with_g(&self, g: MPoly) -> Result<PolySystem> {
        let mut s = self.clone();
        s.g = g.with_vars(self.vars.clone())?;
        s.g_height_bound = None;
        Ok(s)
    }

    /// Height used for `g`: `max(h(g), ln M)`.
    pub fn g_height(&self) -> ExactLog {
        let h = height_of_polys([&self.g]);
        match self.g_height_bound {
            Some(m) if BigUint::from(m) > *h.arg() => ExactLog::of(BigUint::from(m)).expect("positive"),
            _ => h,
        }
    }

    /// Pragmas a certificate depends on.
    pub fn assumptions(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.irreducible == Irreducibility::Asserted {
            out.push("assume irreducible".to_string());
        }
        out.push(format!("assume dim {}", self.dim));
        out
    }

    pub fn from_json(text: &str) -> Result<PolySystem> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct RationalFunctionJson {
    num: String,
    #[serde(default = "one_string")]
    den: String,
}

fn one_string() -> String {
    "1".into()
}

#[derive(Serialize, Deserialize)]
struct ParametrizationJson {
    params: Vec<String>,
    coords: Vec<RationalFunctionJson>,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    vars: Vec<String>,
    f: Vec<String>,
    g: String,
    dim: usize,
    irreducible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parametrization: Option<ParametrizationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_height_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    recipe: Option<SolvingRecipe>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

impl TryFrom<SystemJson> for PolySystem {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<PolySystem> {
        let f: Vec<&str> = j.f.iter().map(|s| s.as_str()).collect();
        let mut s = PolySystem::parse(&j.vars, &f, &j.g, j.dim)?;
        s.irreducible = if j.irreducible {
            Irreducibility::Asserted
        } else {
            Irreducibility::Unknown
        };
        s.parametrization = j
            .parametrization
            .map(|p| {
                let coords: Vec<(&str, &str)> =
                    p.coords.iter().map(|c| (c.num.as_str(), c.den.as_str())).collect();
                Parametrization::new(&p.params, &coords)
            })
            .transpose()?;
        s.g_height_bound = j.g_height_bound;
        s.recipe = j.recipe;
        s.labels = j.labels;
        s.validate()?;
        Ok(s)
    }
}

impl From<PolySystem> for SystemJson {
    fn from(s: PolySystem) -> SystemJson {
        SystemJson {
            vars: s.vars.to_vec(),
            f: s.f.iter().map(|p| p.to_string()).collect(),
            g: s.g.to_string(),
            dim: s.dim,
            irreducible: s.irreducible == Irreducibility::Asserted,
            parametrization: s.parametrization.map(|p| ParametrizationJson {
                params: p.params.to_vec(),
                coords: p
                    .coords
                    .iter()
                    .map(|c| RationalFunctionJson {
                        num: c.num.to_string(),
                        den: c.den.to_string(),
                    })
                    .collect(),
            }),
            g_height_bound: s.g_height_bound,
            recipe: s.recipe,
            labels: s.labels,
        }
    }
}

/// Outcome of a procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    /// `g` vanishes on some `d`-dimensional component near the witness.
    ComponentProved,
    Inconclusive,
    /// `g` vanishes on `X`.
    Case1,
    /// `g` does not vanish on `X`.
    Case2,
    DimConfirmed(usize),
    Disproved,
}

impl Verdict {
    /// Whether the verdict settles the question asked.
    pub fn is_definitive(&self) -> bool {
        !matches!(self, Verdict::Inconclusive)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proved => f.write_str("PROVED"),
            Verdict::ComponentProved => f.write_str("COMPONENT_PROVED"),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
            Verdict::Case1 => f.write_str("CASE1"),
            Verdict::Case2 => f.write_str("CASE2"),
            Verdict::DimConfirmed(d) => write!(f, "DIM_CONFIRMED({d})"),
            Verdict::Disproved => f.write_str("DISPROVED"),
        }
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Verdict> {
        Ok(match s {
            "PROVED" => Verdict::Proved,
            "COMPONENT_PROVED" => Verdict::ComponentProved,
            "INCONCLUSIVE" => Verdict::Inconclusive,
            "CASE1" => Verdict::Case1,
            "CASE2" => Verdict::Case2,
            "DISPROVED" => Verdict::Disproved,
            _ => {
                let d = s
                    .strip_prefix("DIM_CONFIRMED(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown verdict `{s}`")))?;
                Verdict::DimConfirmed(d)
            }
        })
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Verdict, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    Identity,
    Dichotomy,
    Dimension,
    Kronecker,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Unknown,
}

/// One recorded comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, status: CheckStatus, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            status,
            detail: Some(detail.into()),
        }
    }
}

/// An evaluated polynomial at the witness, with bounds on `ln |value|_v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub name: String,
    pub value: Coordinate,
    pub log_norm_upper: LogBound,
    pub log_norm_lower: LogBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Given,
    AllPermutations,
}

/// Polynomials whose gradients enter the dimension determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    /// 0-based indices into `f`, exactly `n - d` of them.
    Indices(Vec<usize>),
    /// Every `(n - d)`-subset of `f`, in lexicographic order.
    AllPermutations,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub mode: SelectionMode,
    /// The selection that decided the verdict (or the last one tried).
    pub indices: Vec<usize>,
}

/// A self-contained, re-checkable record of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub tool: String,
    pub procedure: Procedure,
    pub system: PolySystem,
    pub place: Place,
    #[serde(with = "opt_rational")]
    pub radius: Option<Rational>,
    pub chain: Option<ChainKind>,
    pub precision: u32,
    pub selection: Option<SelectionRecord>,
    pub thresholds: Option<ThresholdReport>,
    pub witness: Option<Witness>,
    pub evaluations: Vec<Evaluation>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub assumptions: Vec<String>,
}

mod opt_rational {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&rational_to_string(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| crate::exactnum::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl Certificate {
    pub fn from_json(text: &str) -> Result<Certificate> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn evaluation(&self, name: &str) -> Option<&Evaluation> {
        self.evaluations.iter().find(|e| e.name == name)
    }
}

/// Run configuration shared by the procedures.
#[derive(Clone, Debug)]
pub struct Options {
    pub place: Place,
    /// `R` of the ball `|P|_v <= R`.
    pub radius: Rational,
    pub chain: ChainKind,
    /// Refinement cap, in bits, for logarithm comparisons.
    pub log_cap: u32,
    /// How many times an undecided evaluation is retried at doubled precision.
    pub escalations: u32,
    /// Starting precision; derived from the tolerance when absent.
    pub precision: Option<u32>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            place: Place::Infinity,
            radius: Rational::from_integer(BigInt::from(2)),
            chain: ChainKind::Weak,
            log_cap: DEFAULT_REFINEMENT_CAP,
            escalations: 2,
            precision: None,
        }
    }
}

/// Where the witness comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessSource {
    /// Pattern coordinates meeting the genericity chain, then the recipe.
    Auto,
    Spec(WitnessSpec),
}

/// Free values plus a recipe, or an exact point.
#[derive(Clone, Debug)]
struct Resolved {
    free: Vec<Rational>,
    point: Option<Vec<Rational>>,
    recipe: Option<SolvingRecipe>,
    first: Option<Witness>,
}

impl Resolved {
    /// `2^k` for `k` possible square roots and Newton coordinates.
    fn field_degree_bound(&self) -> u64 {
        let k: usize = self
            .recipe
            .iter()
            .flat_map(|r| &r.steps)
            .map(|s| match s {
                RecipeStep::Quadratic { .. } => 1,
                RecipeStep::Newton { vars, .. } => vars.len(),
                _ => 0,
            })
            .sum();
        1u64 << k.min(62)
    }

    fn build(&self, system: &PolySystem, place: Place, precision: u32) -> Result<Witness> {
        if let Some(w) = &self.first {
            if w.precision == precision {
                return Ok(w.clone());
            }
        }
        match (&self.point, &self.recipe) {
            (Some(p), _) => {
                let mut w = Witness::exact(place, system.dim, p.clone());
                w.precision = precision;
                Ok(w)
            }
            (None, Some(r)) => solve_fiber(&system.f, &system.vars, &self.free, r, place, precision),
            (None, None) => Err(Error::Invalid("witness has neither a point nor a recipe".into())),
        }
    }
}

/// Recipe for a system whose first `dim` variables are free.
pub fn derive_recipe(system: &PolySystem) -> Result<SolvingRecipe> {
    let free: Vec<usize> = (0..system.dim).collect();
    let plan = triangular_plan(&system.f, system.n(), &free, |_| false);
    if !plan.complete {
        return Err(Error::Invalid(
            "no triangular recipe solves the dependent variables; supply a witness".into(),
        ));
    }
    recipe_from_plan(&system.f, &plan, &[])
}

fn validate_recipe(system: &PolySystem, recipe: &SolvingRecipe) -> Result<()> {
    let mut solved: Vec<usize> = (0..system.dim).collect();
    for step in &recipe.steps {
        for v in step.solved_vars() {
            let i = system
                .vars
                .iter()
                .position(|w| w == v)
                .ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
            if solved.contains(&i) {
                return Err(Error::Invalid(format!("recipe solves `{v}`, which is already fixed")));
            }
            solved.push(i);
        }
        if let Some(s) = step.source() {
            if s >= system.m() {
                return Err(Error::Invalid(format!("recipe names missing equation {s}")));
            }
        }
    }
    Ok(())
}

/// Whether `f = c * p` for a nonzero rational `c`.
fn is_scalar_multiple(f: &MPoly, p: &MPoly) -> bool {
    let Some((e, c)) = p.terms().next() else { return false };
    let Some((_, fc)) = f.terms().find(|(fe, _)| *fe == e) else { return false };
    f == &p.scale(&(fc / c))
}

/// `f_i(P) = 0` holds exactly for the algebraic point the recipe defines.
fn by_construction(system: &PolySystem, witness: &Witness, i: usize) -> bool {
    let Some(recipe) = &witness.recipe else { return false };
    if recipe.has_newton() {
        return false;
    }
    recipe.steps.iter().any(|s| {
        s.source() == Some(i)
            && matches!(step_polynomial(s, &system.vars), Ok(Some(p)) if is_scalar_multiple(&system.f[i], &p))
    })
}

struct Base<'a> {
    system: &'a PolySystem,
    opts: &'a Options,
    procedure: Procedure,
    ctx: BoundContext,
}

impl<'a> Base<'a> {
    fn new(system: &'a PolySystem, opts: &'a Options, procedure: Procedure) -> Result<Base<'a>> {
        system.validate()?;
        let ctx = BoundContext::new(
            system.n(),
            system.dim,
            system.degrees(),
            system.deg_g(),
            &opts.radius,
            opts.place,
        )?;
        Ok(Base {
            system,
            opts,
            procedure,
            ctx,
        })
    }

    fn with_k(&self, k: u64) -> BoundContext {
        let mut c = self.ctx.clone();
        c.k_degree = k.min(u32::MAX as u64) as u32;
        c
    }

    fn f_height(&self, extra: &[Rational]) -> ExactLog {
        height_of_values(self.system.f.iter().flat_map(|p| p.coefficients()).chain(extra))
    }

    fn identity_height(&self, extra: &[Rational]) -> ExactLog {
        if self.system.g_height_bound.is_some() {
            self.f_height(extra).plus(&self.system.g_height())
        } else {
            height_of_values(
                self.system
                    .f
                    .iter()
                    .chain([&self.system.g])
                    .flat_map(|p| p.coefficients())
                    .chain(extra),
            )
        }
    }

    /// Height of the data preceding free coordinate `prefix.len() + 1`.
    fn h_prev(&self, prefix: &[Rational]) -> ExactLog {
        match self.procedure {
            Procedure::Identity => self.identity_height(prefix),
            _ => self.f_height(prefix),
        }
    }

    fn chain(&self) -> ChainKind {
        match self.procedure {
            Procedure::Identity => self.opts.chain,
            _ => ChainKind::FOnly,
        }
    }

    fn threshold(&self, prefix: &[Rational]) -> LogBound {
        let h = self.h_prev(prefix).enclose(self.ctx.bits);
        match self.chain() {
            ChainKind::Weak => bounds::genericity_threshold_weak(&self.ctx, &h, prefix.len() + 1),
            ChainKind::Main => bounds::genericity_threshold_main(&self.ctx, &h),
            ChainKind::FOnly => bounds::genericity_threshold_fonly(&self.ctx, &h),
        }
    }

    /// `H` entering the tolerance formulas.
    fn h_full(&self, free: &[Rational]) -> LogBound {
        let h = match self.procedure {
            Procedure::Identity => self.identity_height(free),
            Procedure::Dichotomy => self.f_height(free).plus(&self.system.g_height()),
            _ => self.f_height(free),
        };
        h.enclose(self.ctx.bits)
    }

    fn resolve(
        &self,
        source: &WitnessSource,
        precision_for: impl Fn(&[Rational], u64) -> Result<u32>,
    ) -> Result<Resolved> {
        let s = self.system;
        let d = s.dim;
        let recipe = |given: &Option<SolvingRecipe>| -> Result<SolvingRecipe> {
            let r = match (given, &s.recipe) {
                (Some(r), _) | (None, Some(r)) => r.clone(),
                (None, None) => derive_recipe(s)?,
            };
            validate_recipe(s, &r)?;
            Ok(r)
        };
        match source {
            WitnessSource::Spec(spec) => {
                if let Some(point) = spec.point_values()? {
                    if point.len() != s.n() {
                        return Err(Error::Invalid(format!(
                            "witness point has {} coordinates, the system has {} variables",
                            point.len(),
                            s.n()
                        )));
                    }
                    return Ok(Resolved {
                        free: point[..d].to_vec(),
                        point: Some(point),
                        recipe: None,
                        first: None,
                    });
                }
                let free = spec.free_values()?;
                if free.len() != d {
                    return Err(Error::Invalid(format!(
                        "witness has {} free values, the system has dimension {d}",
                        free.len()
                    )));
                }
                Ok(Resolved {
                    free,
                    point: None,
                    recipe: Some(recipe(&spec.recipe)?),
                    first: None,
                })
            }
            WitnessSource::Auto => {
                let r = recipe(&None)?;
                let style = match self.opts.place {
                    Place::Infinity => FreeStyle::DecimalPattern,
                    Place::Prime(_) => FreeStyle::PadicPattern,
                };
                let probe = Resolved {
                    free: Vec::new(),
                    point: None,
                    recipe: Some(r.clone()),
                    first: None,
                };
                let k = probe.field_degree_bound();
                let (w, _) = autopilot(
                    &s.f,
                    &s.vars,
                    d,
                    &r,
                    self.opts.place,
                    &[style],
                    self.opts.log_cap,
                    |prefix| Ok(self.threshold(prefix)),
                    |free| match self.opts.precision {
                        Some(p) => Ok(p),
                        None => precision_for(free, k),
                    },
                )?;
                Ok(Resolved {
                    free: w.free.clone(),
                    point: None,
                    recipe: Some(r),
                    first: Some(w),
                })
            }
        }
    }

    fn genericity(&self, free: &[Rational]) -> Result<(Vec<Check>, Vec<LogBound>, Vec<LogBound>)> {
        let mut checks = Vec::new();
        let mut thresholds = Vec::new();
        let mut heights = Vec::new();
        for i in 0..free.len() {
            let t = self.threshold(&free[..i]);
            let h = height_of(&free[i]);
            let c = compare_certain(64, self.opts.log_cap, |b| Ok((h.enclose(b), t.clone())))?;
            let status = match c {
                Comparison::Ge => CheckStatus::Pass,
                Comparison::Le => CheckStatus::Fail,
                Comparison::Unknown => CheckStatus::Unknown,
            };
            checks.push(Check::new(
                format!("genericity p{}", i + 1),
                status,
                format!(
                    "h(p{}) = {:.4} nats, threshold {:.4} nats",
                    i + 1,
                    h.approx_f64(),
                    t.midpoint_f64()
                ),
            ));
            heights.push(self.h_prev(&free[..i]).enclose(self.ctx.bits));
            thresholds.push(t);
        }
        Ok((checks, thresholds, heights))
    }

    fn constants(&self, free: &[Rational], k: u64) -> Constants {
        let bits = self.ctx.bits;
        let mut c = Constants::default();
        c.push("h_f", self.f_height(&[]).enclose(bits));
        c.push("h_g", self.system.g_height().enclose(bits));
        c.push("h_full", self.h_full(free));
        c.push("log_radius", self.ctx.log_r.clone());
        c.push("k_degree", LogBound::from_int(k as i64));
        c
    }

    fn radius_check(&self, w: &Witness) -> Result<Check> {
        let ok = w.fits_radius(&self.opts.radius)?;
        Ok(Check::new(
            "radius",
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            format!("|P|_v <= {}", rational_to_string(&self.opts.radius)),
        ))
    }

    fn attempts(&self, base_precision: u32) -> Vec<u32> {
        (0..=self.opts.escalations)
            .map(|k| base_precision.saturating_mul(1u32 << k.min(16)))
            .collect()
    }

    fn certificate(&self, precision: u32) -> Certificate {
        Certificate {
            schema: SCHEMA.to_string(),
            tool: TOOL.to_string(),
            procedure: self.procedure,
            system: self.system.clone(),
            place: self.opts.place,
            radius: Some(self.opts.radius.clone()),
            chain: Some(self.chain()),
            precision,
            selection: None,
            thresholds: None,
            witness: None,
            evaluations: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Inconclusive,
            reason: None,
            assumptions: self.system.assumptions(),
        }
    }
}

fn evaluate(w: &Witness, name: &str, p: &MPoly) -> Result<(Evaluation, CertifiedValue)> {
    let be = Backend::new(w.place, w.precision);
    let value = be.eval(p, &w.coordinates)?;
    record(&be, name, value)
}

fn record(be: &Backend, name: &str, value: Coordinate) -> Result<(Evaluation, CertifiedValue)> {
    let cv = be.certify(&value)?;
    let (upper, lower) = match &value {
        Coordinate::Exact(q) if q.is_zero() => (LogBound::NegInfinity, LogBound::NegInfinity),
        Coordinate::Exact(q) if be.place().is_archimedean() => {
            let l = ln_abs(q, bounds::CONSTANT_BITS);
            (l.clone(), l)
        }
        _ => (
            norm_upper_bound(&cv, bounds::CONSTANT_BITS),
            norm_lower_bound(&cv, bounds::CONSTANT_BITS),
        ),
    };
    Ok((
        Evaluation {
            name: name.to_string(),
            value,
            log_norm_upper: upper,
            log_norm_lower: lower,
        },
        cv,
    ))
}

fn is_exact_zero(e: &Evaluation) -> bool {
    matches!(&e.value, Coordinate::Exact(q) if q.is_zero())
}

fn norm_status(c: NormCheck) -> CheckStatus {
    match c {
        NormCheck::Yes => CheckStatus::Pass,
        NormCheck::No => CheckStatus::Fail,
        NormCheck::Unknown => CheckStatus::Unknown,
    }
}

/// `|x|_v >= 2 exp(log_eps)` with certainty.
fn at_least_twice(x: &CertifiedValue, log_eps: &LogBound, cap: u32) -> Result<bool> {
    Ok(compare_certain(64, cap, |b| {
        Ok((norm_lower_bound(x, b), log_eps.add(&ln_int(2, b))))
    })? == Comparison::Ge)
}

fn first_failure(checks: &[Check]) -> Option<String> {
    checks.iter().find(|c| c.status != CheckStatus::Pass).map(|c| {
        let what = match c.status {
            CheckStatus::Fail => "failed",
            _ => "undecided",
        };
        format!("check `{}` {what}", c.name)
    })
}

fn poly_names(system: &PolySystem) -> Vec<(String, &MPoly)> {
    system
        .f
        .iter()
        .enumerate()
        .map(|(i, p)| (format!("f{}", i + 1), p))
        .collect()
}

/// Checks `|f_i(P)|_v <= eps_f`, accepting exact zeros and constraints the
/// recipe satisfies by construction.
fn constraint_checks(
    system: &PolySystem,
    w: &Witness,
    log_eps_f: &LogBound,
    cap: u32,
) -> Result<(Vec<Evaluation>, Vec<Check>)> {
    let mut evals = Vec::new();
    let mut checks = Vec::new();
    for (i, (name, p)) in poly_names(system).into_iter().enumerate() {
        let (e, cv) = evaluate(w, &name, p)?;
        let check = if is_exact_zero(&e) {
            Check::new(&name, CheckStatus::Pass, "exact zero")
        } else {
            match norm_leq(&cv, log_eps_f, cap)? {
                NormCheck::Yes => Check::new(&name, CheckStatus::Pass, "enclosure within tolerance"),
                _ if by_construction(system, w, i) => Check::new(
                    &name,
                    CheckStatus::Pass,
                    "zero by construction: solved exactly by the recipe",
                ),
                other => Check::new(&name, norm_status(other), "enclosure exceeds the tolerance"),
            }
        };
        evals.push(e);
        checks.push(check);
    }
    Ok((evals, checks))
}

/// Thresholds of a procedure before any free coordinate is chosen: the
/// genericity bound for `p_1` and the tolerances with `H` taken over the
/// system alone.
pub fn threshold_report(system: &PolySystem, opts: &Options, procedure: Procedure) -> Result<ThresholdReport> {
    if procedure == Procedure::Kronecker {
        return Err(Error::Invalid("the Kronecker test has no thresholds".into()));
    }
    let base = Base::new(system, opts, procedure)?;
    let k = match procedure {
        Procedure::Identity => 1,
        _ => {
            let recipe = system.recipe.clone().or_else(|| derive_recipe(system).ok());
            Resolved {
                free: Vec::new(),
                point: None,
                recipe,
                first: None,
            }
            .field_degree_bound()
        }
    };
    let mut constants = base.constants(&[], k);
    let h = base.h_full(&[]);
    let log_eps = match procedure {
        Procedure::Dichotomy => {
            let (f, g) = bounds::dichotomy_thresholds(&base.with_k(k), &h)?;
            constants.push("log_eps_f", f);
            g
        }
        Procedure::Dimension => {
            let (f, det) = bounds::dimension_thresholds(&base.with_k(k), &h);
            constants.push("log_eps_f", f);
            det
        }
        _ => bounds::epsilon_main(&base.ctx, &h),
    };
    constants.push(
        "precision",
        LogBound::from_int(bounds::working_precision(&log_eps, opts.place) as i64),
    );
    let (genericity, heights) = if system.dim > 0 {
        (vec![base.threshold(&[])], vec![base.h_prev(&[]).enclose(base.ctx.bits)])
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(ThresholdReport {
        chain: base.chain(),
        genericity,
        heights,
        log_eps,
        constants,
    })
}

/// Certifies `g|_X = 0` from one witness.
pub fn certify_identity(
    system: &PolySystem,
    opts: &Options,
    source: &WitnessSource,
) -> Result<Certificate> {
    let base = Base::new(system, opts, Procedure::Identity)?;
    let eps_for = |free: &[Rational]| bounds::epsilon_main(&base.ctx, &base.h_full(free));
    let resolved = base.resolve(source, |free, _| {
        Ok(bounds::working_precision(&eps_for(free), opts.place))
    })?;
    let free = &resolved.free;
    let log_eps = eps_for(free);
    let start = opts
        .precision
        .unwrap_or_else(|| bounds::working_precision(&log_eps, opts.place));
    let (gen_checks, thresholds, heights) = base.genericity(free)?;

    let mut polys = poly_names(system);
    polys.push(("g".to_string(), &system.g));
    let attempts = base.attempts(start);
    let mut outcome = None;
    for (k, &prec) in attempts.iter().enumerate() {
        let w = resolved.build(system, opts.place, prec)?;
        let mut evals = Vec::new();
        let mut checks = vec![base.radius_check(&w)?];
        checks.extend(gen_checks.iter().cloned());
        let mut undecided = false;
        for (name, p) in &polys {
            let (e, cv) = evaluate(&w, name, p)?;
            let check = if is_exact_zero(&e) {
                Check::new(name, CheckStatus::Pass, "exact zero")
            } else {
                let r = norm_leq(&cv, &log_eps, opts.log_cap)?;
                undecided |= r == NormCheck::Unknown;
                Check::new(name, norm_status(r), format!("|{name}(P)|_v <= eps"))
            };
            evals.push(e);
            checks.push(check);
        }
        outcome = Some((w, evals, checks));
        if !undecided || k + 1 == attempts.len() {
            break;
        }
    }
    let (w, evals, checks) = outcome.expect("at least one attempt");

    let mut constants = base.constants(free, 1);
    let mut cert = base.certificate(w.precision);
    let exact = evals.iter().all(is_exact_zero);
    match first_failure(&checks) {
        Some(reason) => {
            cert.verdict = Verdict::Inconclusive;
            cert.reason = Some(reason);
        }
        None if system.irreducible == Irreducibility::Asserted => {
            cert.verdict = Verdict::Proved;
            if exact {
                cert.reason = Some("exact witness on X with g(P) = 0".into());
            }
        }
        None => {
            let worst = evals
                .iter()
                .fold(LogBound::NegInfinity, |a, e| a.max(&e.log_norm_upper));
            constants.push(
                "log_eps_component",
                bounds::epsilon_reducible(&base.ctx, &base.h_full(free), &worst),
            );
            cert.verdict = Verdict::ComponentProved;
            cert.reason = Some(
                "irreducibility not asserted: g vanishes on a component of dimension d within eps_component of P"
                    .into(),
            );
        }
    }
    cert.thresholds = Some(ThresholdReport {
        chain: base.chain(),
        genericity: thresholds,
        heights,
        log_eps,
        constants,
    });
    cert.witness = Some(w);
    cert.evaluations = evals;
    cert.checks = checks;
    Ok(cert)
}

/// Decides between `g|_X = 0` (CASE1) and `g|_X != 0` (CASE2).
pub fn dichotomy_decide(
    system: &PolySystem,
    opts: &Options,
    source: &WitnessSource,
) -> Result<Certificate> {
    if system.deg_g() == 0 {
        return Err(Error::Invalid("the dichotomy needs a non-constant g".into()));
    }
    let base = Base::new(system, opts, Procedure::Dichotomy)?;
    let thresholds_for = |free: &[Rational], k: u64| {
        bounds::dichotomy_thresholds(&base.with_k(k), &base.h_full(free))
    };
    let resolved = base.resolve(source, |free, k| {
        Ok(bounds::working_precision(&thresholds_for(free, k)?.1, opts.place))
    })?;
    let free = &resolved.free;
    let k_bound = resolved.field_degree_bound();
    let start = match opts.precision {
        Some(p) => p,
        None => bounds::working_precision(&thresholds_for(free, k_bound)?.1, opts.place),
    };
    let (gen_checks, thresholds, heights) = base.genericity(free)?;

    let attempts = base.attempts(start);
    let mut outcome = None;
    for (a, &prec) in attempts.iter().enumerate() {
        let w = resolved.build(system, opts.place, prec)?;
        let k = w.field_degree();
        let (eps_f, eps_g) = thresholds_for(free, k)?;
        let mut checks = vec![base.radius_check(&w)?];
        checks.extend(gen_checks.iter().cloned());
        let (mut evals, f_checks) = constraint_checks(system, &w, &eps_f, opts.log_cap)?;
        checks.extend(f_checks);
        let (ge, gv) = evaluate(&w, "g", &system.g)?;
        let case = if is_exact_zero(&ge) || norm_leq(&gv, &eps_g, opts.log_cap)? == NormCheck::Yes {
            Some(Verdict::Case1)
        } else if at_least_twice(&gv, &eps_g, opts.log_cap)? {
            Some(Verdict::Case2)
        } else {
            None
        };
        checks.push(match case {
            Some(Verdict::Case1) => Check::new("g", CheckStatus::Pass, "|g(P)|_v <= eps_g"),
            Some(_) => Check::new("g", CheckStatus::Pass, "|g(P)|_v >= 2 eps_g"),
            None => Check::new("g", CheckStatus::Unknown, "enclosure meets [eps_g, 2 eps_g]"),
        });
        evals.push(ge);
        outcome = Some((w, evals, checks, case, k, eps_f, eps_g));
        if case.is_some() || a + 1 == attempts.len() {
            break;
        }
    }
    let (w, evals, checks, case, k, eps_f, eps_g) = outcome.expect("at least one attempt");

    let mut constants = base.constants(free, k);
    constants.push("log_eps_f", eps_f);
    constants.push("log_eps_g", eps_g.clone());
    let mut cert = base.certificate(w.precision);
    match (first_failure(&checks), case) {
        (None, Some(v)) => cert.verdict = v,
        (reason, _) => {
            cert.verdict = Verdict::Inconclusive;
            cert.reason = reason;
        }
    }
    cert.thresholds = Some(ThresholdReport {
        chain: base.chain(),
        genericity: thresholds,
        heights,
        log_eps: eps_g,
        constants,
    });
    cert.witness = Some(w);
    cert.evaluations = evals;
    cert.checks = checks;
    Ok(cert)
}

/// Lexicographic `k`-subsets of `0..m`.
fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < m - k + i) else { return out };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `det(e_1, ..., e_d, grad f_sel(P))` at the witness.
fn dimension_det(system: &PolySystem, w: &Witness, sel: &[usize]) -> Result<Coordinate> {
    let n = system.n();
    let be = Backend::new(w.place, w.precision);
    let point: Vec<Val> = w.coordinates.iter().map(|c| be.lift(c)).collect::<Result<_>>()?;
    let mut rows: Vec<Vec<Val>> = Vec::with_capacity(n);
    for j in 0..system.dim {
        rows.push(
            (0..n)
                .map(|c| Val::Exact(if c == j { Rational::one() } else { Rational::zero() }))
                .collect(),
        );
    }
    for &s in sel {
        let grad = system.f[s].gradient();
        rows.push(grad.iter().map(|p| be.eval_val(p, &point)).collect::<Result<_>>()?);
    }
    if rows.is_empty() {
        return Ok(Coordinate::Exact(Rational::one()));
    }
    Ok(be.lower(be.det_val(&rows)?))
}

/// Confirms `dim X = d` from one witness and a transversality determinant.
pub fn dimension_by_example(
    system: &PolySystem,
    opts: &Options,
    source: &WitnessSource,
    selection: &Selection,
) -> Result<Certificate> {
    let (n, d, m) = (system.n(), system.dim, system.m());
    let size = n - d;
    let (mode, candidates) = match selection {
        Selection::Indices(ix) => {
            if ix.len() != size {
                return Err(Error::Invalid(format!(
                    "selection must name n - d = {size} polynomials, got {}",
                    ix.len()
                )));
            }
            if let Some(bad) = ix.iter().find(|&&i| i >= m) {
                return Err(Error::Invalid(format!("selection index {bad} out of range")));
            }
            (SelectionMode::Given, vec![ix.clone()])
        }
        Selection::AllPermutations => (SelectionMode::AllPermutations, subsets(m, size)),
    };
    let base = Base::new(system, opts, Procedure::Dimension)?;
    let thresholds_for =
        |free: &[Rational], k: u64| bounds::dimension_thresholds(&base.with_k(k), &base.h_full(free));
    let resolved = base.resolve(source, |free, k| {
        Ok(bounds::working_precision(&thresholds_for(free, k).1, opts.place))
    })?;
    let free = &resolved.free;
    let start = opts.precision.unwrap_or_else(|| {
        bounds::working_precision(&thresholds_for(free, resolved.field_degree_bound()).1, opts.place)
    });
    let (gen_checks, thresholds, heights) = base.genericity(free)?;

    let attempts = base.attempts(start);
    let mut outcome = None;
    for (a, &prec) in attempts.iter().enumerate() {
        let w = resolved.build(system, opts.place, prec)?;
        let k = w.field_degree();
        let (eps_f, eps_det) = thresholds_for(free, k);
        let mut checks = vec![base.radius_check(&w)?];
        checks.extend(gen_checks.iter().cloned());
        let (mut evals, f_checks) = constraint_checks(system, &w, &eps_f, opts.log_cap)?;
        checks.extend(f_checks);
        let be = Backend::new(w.place, w.precision);
        let mut chosen = None;
        let mut last = None;
        for sel in &candidates {
            let (e, cv) = record(&be, "det", dimension_det(system, &w, sel)?)?;
            let ok = at_least_twice(&cv, &eps_det, opts.log_cap)?;
            last = Some((sel.clone(), e));
            if ok {
                chosen = last.clone();
                break;
            }
        }
        let confirmed = chosen.is_some();
        let (indices, det_eval) = match chosen.or(last) {
            Some((s, e)) => (s, Some(e)),
            None => (Vec::new(), None),
        };
        checks.push(match (&det_eval, confirmed) {
            (None, _) => Check::new("det", CheckStatus::Fail, "fewer constraints than n - d"),
            (Some(_), true) => Check::new("det", CheckStatus::Pass, "|det|_v >= 2 eps_det"),
            (Some(_), false) => Check::new("det", CheckStatus::Unknown, "|det|_v not above eps_det"),
        });
        evals.extend(det_eval);
        outcome = Some((w, evals, checks, indices, k, eps_f, eps_det));
        if confirmed || candidates.is_empty() || a + 1 == attempts.len() {
            break;
        }
    }
    let (w, evals, checks, indices, k, eps_f, eps_det) = outcome.expect("at least one attempt");

    let mut constants = base.constants(free, k);
    constants.push("log_eps_f", eps_f);
    constants.push("log_eps_det", eps_det.clone());
    let mut cert = base.certificate(w.precision);
    match first_failure(&checks) {
        None => cert.verdict = Verdict::DimConfirmed(d),
        reason => {
            cert.verdict = Verdict::Inconclusive;
            cert.reason = reason;
        }
    }
    cert.selection = Some(SelectionRecord { mode, indices });
    cert.thresholds = Some(ThresholdReport {
        chain: base.chain(),
        genericity: thresholds,
        heights,
        log_eps: eps_det,
        constants,
    });
    cert.witness = Some(w);
    cert.evaluations = evals;
    cert.checks = checks;
    Ok(cert)
}

/// Decides `g = 0` in `Q[x]` by one exact evaluation of the Kronecker
/// substitute at a power of 10 beyond its Cauchy root bound.
pub fn prove_zero_ambient(g: &MPoly) -> Result<Certificate> {
    let (gi, _) = g.clear_denominators();
    let kr = kronecker_substitute(&gi)?;
    let threshold = bounds::cauchy_threshold(&kr.poly);
    let mut p = BigInt::one();
    while Rational::from_integer(p.clone()) < threshold {
        p *= 10;
    }
    let value = kr.poly.eval_exact(&[Rational::from_integer(p.clone())]);
    let verdict = if value.is_zero() {
        Verdict::Proved
    } else {
        Verdict::Disproved
    };
    let be = Backend::new(Place::Infinity, 64);
    let (eval, _) = record(&be, &format!("g_kr({p})"), Coordinate::Exact(value))?;
    let mut system = PolySystem::new(g.shared_vars(), Vec::new(), g.clone(), g.nvars())?;
    system.irreducible = Irreducibility::Asserted;
    Ok(Certificate {
        schema: SCHEMA.to_string(),
        tool: TOOL.to_string(),
        procedure: Procedure::Kronecker,
        system,
        place: Place::Infinity,
        radius: None,
        chain: None,
        precision: 0,
        selection: None,
        thresholds: None,
        witness: None,
        evaluations: vec![eval],
        checks: vec![Check::new(
            "cauchy",
            CheckStatus::Pass,
            format!(
                "p = {p} >= {} bounds every root of g_kr, base D = {}",
                rational_to_string(&threshold),
                kr.base
            ),
        )],
        verdict,
        reason: (verdict == Verdict::Disproved).then(|| "g_kr(p) is a nonzero counter-witness".into()),
        assumptions: Vec::new(),
    })
}

/// Result of offline verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Valid,
    Invalid(String),
}

impl fmt::Display for VerifyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyOutcome::Valid => f.write_str("VALID"),
            VerifyOutcome::Invalid(r) => write!(f, "INVALID: {r}"),
        }
    }
}

const CERT_KEYS: [&str; 15] = [
    "schema",
    "procedure",
    "system",
    "place",
    "radius",
    "chain",
    "precision",
    "selection",
    "thresholds",
    "witness",
    "evaluations",
    "checks",
    "verdict",
    "reason",
    "assumptions",
];

/// Recomputes the certificate from its system, options and witness, and
/// accepts it only if every field other than the tool stamp reproduces.
pub fn verify_certificate(cert: &Certificate) -> Result<VerifyOutcome> {
    verify_certificate_capped(cert, DEFAULT_REFINEMENT_CAP)
}

pub fn verify_certificate_capped(cert: &Certificate, log_cap: u32) -> Result<VerifyOutcome> {
    if cert.schema != SCHEMA {
        return Ok(VerifyOutcome::Invalid(format!("unknown schema `{}`", cert.schema)));
    }
    let rerun = || -> Result<Certificate> {
        if cert.procedure == Procedure::Kronecker {
            return prove_zero_ambient(&cert.system.g);
        }
        let opts = Options {
            place: cert.place,
            radius: cert
                .radius
                .clone()
                .ok_or_else(|| Error::Invalid("certificate has no radius".into()))?,
            chain: match cert.chain {
                Some(ChainKind::Main) => ChainKind::Main,
                _ => ChainKind::Weak,
            },
            log_cap,
            escalations: 0,
            precision: Some(cert.precision),
        };
        let w = cert
            .witness
            .as_ref()
            .ok_or_else(|| Error::Invalid("certificate has no witness".into()))?;
        let spec = match &w.recipe {
            None => WitnessSpec {
                free: Vec::new(),
                recipe: None,
                point: Some(
                    w.exact_point()
                        .ok_or_else(|| Error::Invalid("witness without recipe must be exact".into()))?
                        .iter()
                        .map(rational_to_string)
                        .collect(),
                ),
            },
            Some(r) => WitnessSpec {
                free: w.free.iter().map(rational_to_string).collect(),
                recipe: Some(r.clone()),
                point: None,
            },
        };
        let source = WitnessSource::Spec(spec);
        match cert.procedure {
            Procedure::Identity => certify_identity(&cert.system, &opts, &source),
            Procedure::Dichotomy => dichotomy_decide(&cert.system, &opts, &source),
            Procedure::Dimension => {
                let sel = match &cert.selection {
                    Some(SelectionRecord {
                        mode: SelectionMode::AllPermutations,
                        ..
                    }) => Selection::AllPermutations,
                    Some(r) => Selection::Indices(r.indices.clone()),
                    None => return Err(Error::Invalid("dimension certificate without selection".into())),
                };
                dimension_by_example(&cert.system, &opts, &source, &sel)
            }
            Procedure::Kronecker => unreachable!(),
        }
    };
    let fresh = match rerun() {
        Ok(c) => c,
        Err(e) => return Ok(VerifyOutcome::Invalid(format!("recomputation failed: {e}"))),
    };
    let (a, b) = (serde_json::to_value(cert)?, serde_json::to_value(&fresh)?);
    for key in CERT_KEYS {
        if a.get(key) != b.get(key) {
            let hint = if key == "verdict" {
                format!(" (recomputed {})", fresh.verdict)
            } else {
                String::new()
            };
            return Ok(VerifyOutcome::Invalid(format!("field `{key}` does not reproduce{hint}")));
        }
    }
    Ok(VerifyOutcome::Valid)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember,
}

/// Exact test of `g(rho(t)) = 0` for the system's parametrization `rho`.
pub fn membership_oracle(system: &PolySystem, g: &MPoly) -> Result<Membership> {
    let rho = system
        .parametrization
        .as_ref()
        .ok_or_else(|| Error::Invalid("system has no parametrization".into()))?;
    let g = g.with_vars(system.vars.clone())?;
    let n = system.n();
    let degs: Vec<u32> = (0..n).map(|i| g.degree_in(i).unwrap_or(0)).collect();
    let mut cache: Vec<Vec<(MPoly, MPoly)>> = vec![Vec::new(); n];
    for i in 0..n {
        let c = &rho.coords[i];
        for e in 0..=degs[i] {
            cache[i].push((c.num.pow(e), c.den.pow(degs[i] - e)));
        }
    }
    let mut total = MPoly::zero(rho.params.clone());
    for (e, c) in g.terms() {
        let mut t = MPoly::constant(rho.params.clone(), c.clone());
        for i in 0..n {
            let (num, den) = &cache[i][e[i] as usize];
            t = &(&t * num) * den;
        }
        total = &total + &t;
    }
    Ok(if total.is_zero() {
        Membership::Member
    } else {
        Membership::NonMember
    })
}
