//! A small construction language for plane geometry and its compiler to
//! polynomial systems.
//!
//! ```text
//! const A = point(-1, 0)
//! const B = point(1, 0)
//! const unit = circle(0, 0, 1)
//! free C : point
//! require on_circle(C, unit)
//! forbid distinct(C, A)
//! goal dot(C - A, C - B) = 0
//! assume irreducible
//! ```
//!
//! Objects and their coordinates: `point` (`x`, `y`), `line` `y = a x + b`
//! (`a`, `b`), `circle` `(x - a)^2 + (y - b)^2 = r^2` (`a`, `b`, `r`) and
//! `conic` `a x^2 + b x y + c y^2 + d x + e y + 1 = 0` (`a` .. `e`).
//! Coordinates are written `C.x`, `l.a`, `k.r`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::mpoly::{lex, Expr, MPoly, Parser, Tok};
use crate::pipeline::{
    dimension_by_example, Certificate, Irreducibility, Options, PolySystem, Selection, Verdict,
    WitnessSource,
};
use crate::witness::{recipe_from_plan, triangular_plan, TriangularPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Point,
    Line,
    Circle,
    Conic,
}

impl Kind {
    pub fn params(self) -> &'static [&'static str] {
        match self {
            Kind::Point => &["x", "y"],
            Kind::Line => &["a", "b"],
            Kind::Circle => &["a", "b", "r"],
            Kind::Conic => &["a", "b", "c", "d", "e"],
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "point" => Kind::Point,
            "line" => Kind::Line,
            "circle" => Kind::Circle,
            "conic" => Kind::Conic,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Point => "point",
            Kind::Line => "line",
            Kind::Circle => "circle",
            Kind::Conic => "conic",
        })
    }
}

/// A node with the source line it came from; equality ignores the line.
#[derive(Clone, Debug)]
pub struct Located<T> {
    pub line: usize,
    pub node: T,
}

impl<T: PartialEq> PartialEq for Located<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Located<T> {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub kind: Kind,
    /// Parameter values of a constant; `None` for a free object.
    pub values: Option<Vec<Expr>>,
}

/// A named constraint such as `on_circle(C, k)`, or `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Builtin(String, Vec<Expr>),
    Equal(Expr, Expr),
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Builtin(name, args) => write!(f, "{}", Expr::Call(name.clone(), args.clone())),
            Relation::Equal(l, r) => write!(f, "{l} = {r}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeoProgram {
    pub declarations: Vec<Located<Declaration>>,
    pub requirements: Vec<Located<Relation>>,
    pub forbids: Vec<Located<Relation>>,
    pub goal: Option<Located<Relation>>,
    pub irreducible: bool,
    pub dim: Option<usize>,
}

impl fmt::Display for GeoProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.declarations {
            let d = &d.node;
            match &d.values {
                Some(v) => writeln!(f, "const {} = {}", d.name, Expr::Call(d.kind.to_string(), v.clone()))?,
                None => writeln!(f, "free {} : {}", d.name, d.kind)?,
            }
        }
        for r in &self.requirements {
            writeln!(f, "require {}", r.node)?;
        }
        for r in &self.forbids {
            writeln!(f, "forbid {}", r.node)?;
        }
        if let Some(g) = &self.goal {
            writeln!(f, "goal {}", g.node)?;
        }
        if self.irreducible {
            writeln!(f, "assume irreducible")?;
        }
        if let Some(d) = self.dim {
            writeln!(f, "assume dim {d}")?;
        }
        Ok(())
    }
}

const BUILTINS: [(&str, &[Kind]); 8] = [
    ("on_line", &[Kind::Point, Kind::Line]),
    ("on_circle", &[Kind::Point, Kind::Circle]),
    ("on_conic", &[Kind::Point, Kind::Conic]),
    ("parallel", &[Kind::Line, Kind::Line]),
    ("perpendicular", &[Kind::Line, Kind::Line]),
    ("tangent", &[Kind::Line, Kind::Circle]),
    ("angle_eq", &[Kind::Line, Kind::Line, Kind::Line, Kind::Line]),
    ("distinct", &[Kind::Point, Kind::Point]),
];

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Parses a program; semantic errors (unknown names, wrong kinds, repeated
/// declarations) are reported with their line.
pub fn parse_program(text: &str) -> Result<GeoProgram> {
    let mut prog = GeoProgram::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let src = strip_comment(raw);
        let toks = lex(src, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser::new(&toks, (line, src.chars().count() + 1));
        let Some(Tok::Ident(kw)) = p.next() else {
            return Err(Error::parse(line, toks[0].col, "expected a statement keyword"));
        };
        match kw.as_str() {
            "const" => {
                let name = plain_name(&mut p)?;
                p.expect(&Tok::Eq, "`=`")?;
                let at = p.position();
                let (kind, values) = match p.expr()? {
                    Expr::Call(k, args) => match Kind::parse(&k) {
                        Some(kind) if args.len() == kind.params().len() => (kind, args),
                        Some(kind) => {
                            return Err(Error::parse(
                                at.0,
                                at.1,
                                format!("{kind} takes {} values", kind.params().len()),
                            ))
                        }
                        None => return Err(Error::parse(at.0, at.1, format!("unknown object kind `{k}`"))),
                    },
                    _ => return Err(Error::parse(at.0, at.1, "expected point(..), line(..), circle(..) or conic(..)")),
                };
                prog.declarations.push(Located {
                    line,
                    node: Declaration {
                        name,
                        kind,
                        values: Some(values),
                    },
                });
            }
            "free" => {
                let name = plain_name(&mut p)?;
                p.expect(&Tok::Colon, "`:`")?;
                let k = p.ident("an object kind")?;
                let kind = Kind::parse(&k).ok_or_else(|| p.error(format!("unknown object kind `{k}`")))?;
                prog.declarations.push(Located {
                    line,
                    node: Declaration {
                        name,
                        kind,
                        values: None,
                    },
                });
            }
            "require" | "forbid" | "goal" => {
                let node = relation(&mut p)?;
                let r = Located { line, node };
                match kw.as_str() {
                    "require" => prog.requirements.push(r),
                    "forbid" => prog.forbids.push(r),
                    _ if prog.goal.is_some() => return Err(Error::parse(line, 1, "only one goal is allowed")),
                    _ => prog.goal = Some(r),
                }
            }
            "assume" => match p.ident("`irreducible` or `dim`")?.as_str() {
                "irreducible" => prog.irreducible = true,
                "dim" => match p.next() {
                    Some(Tok::Num(q)) if q.is_integer() && !q.is_negative() => {
                        prog.dim = Some(
                            num_traits::ToPrimitive::to_usize(&q.to_integer())
                                .ok_or_else(|| Error::parse(line, 1, "dimension too large"))?,
                        )
                    }
                    _ => return Err(Error::parse(line, 1, "expected a non-negative integer after `assume dim`")),
                },
                other => return Err(Error::parse(line, 1, format!("unknown assumption `{other}`"))),
            },
            other => return Err(Error::parse(line, toks[0].col, format!("unknown statement `{other}`"))),
        }
        if !p.at_end() {
            return Err(p.error("unexpected trailing input"));
        }
    }
    check(&prog)?;
    Ok(prog)
}

fn plain_name(p: &mut Parser<'_>) -> Result<String> {
    let name = p.ident("a name")?;
    if name.contains('.') || name.starts_with('_') {
        return Err(p.error(format!("`{name}` is not a valid object name")));
    }
    Ok(name)
}

fn relation(p: &mut Parser<'_>) -> Result<Relation> {
    let lhs = p.expr()?;
    if p.peek() == Some(&Tok::Eq) {
        p.next();
        return Ok(Relation::Equal(lhs, p.expr()?));
    }
    match lhs {
        Expr::Call(name, args) if BUILTINS.iter().any(|(b, _)| *b == name) => Ok(Relation::Builtin(name, args)),
        _ => Err(p.error("expected `=` or a constraint such as on_line(P, l)")),
    }
}

/// Semantic checks with line positions.
fn check(prog: &GeoProgram) -> Result<()> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for d in &prog.declarations {
        if let Some(first) = seen.insert(&d.node.name, d.line) {
            return Err(Error::parse(
                d.line,
                1,
                format!("`{}` is already declared on line {first}", d.node.name),
            ));
        }
    }
    Compiler::new(prog).map(|_| ())
}

/// A compiled program with its parameter counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledSystem {
    pub system: PolySystem,
    /// Parameters of free objects.
    pub n_f: usize,
    /// Equality constraints.
    pub n_e: usize,
    /// Inequality constraints, each adding one variable and one equation.
    pub n_i: usize,
    /// `n - m`, or `None` when there are more equations than unknowns.
    pub dim_guess: Option<usize>,
    /// Equations whose gradients complete the free directions to a basis,
    /// in solving order; empty unless the construction is triangular.
    pub selection: Vec<usize>,
}

impl CompiledSystem {
    pub fn n(&self) -> usize {
        self.n_f + self.n_i
    }

    pub fn m(&self) -> usize {
        self.n_e + self.n_i
    }
}

/// Value of an expression: a polynomial, a plane vector, or a whole object.
#[derive(Clone, Debug)]
enum GVal {
    Scalar(MPoly),
    Vector(MPoly, MPoly),
    Object(Kind, Vec<MPoly>),
}

struct Compiler {
    vars: Arc<Vec<String>>,
    objects: HashMap<String, (Kind, Vec<MPoly>)>,
    n_f: usize,
}

impl Compiler {
    fn new(prog: &GeoProgram) -> Result<Compiler> {
        let mut names = Vec::new();
        for d in &prog.declarations {
            if d.node.values.is_none() {
                for p in d.node.kind.params() {
                    names.push(format!("{}.{p}", d.node.name));
                }
            }
        }
        let n_f = names.len();
        names.extend((1..=prog.forbids.len()).map(|i| format!("_z{i}")));
        let mut c = Compiler {
            vars: Arc::new(names),
            objects: HashMap::new(),
            n_f,
        };
        let mut next = 0;
        for d in &prog.declarations {
            let Declaration { name, kind, values } = &d.node;
            let params = match values {
                None => {
                    let ps = (next..next + kind.params().len()).map(|i| MPoly::var(c.vars.clone(), i)).collect();
                    next += kind.params().len();
                    ps
                }
                Some(vals) => vals
                    .iter()
                    .map(|e| match c.eval(e) {
                        Ok(GVal::Scalar(p)) if p.is_constant() => Ok(p),
                        Ok(_) => Err(Error::Invalid(format!("value of `{name}` must be a number"))),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| at(d.line, e))?,
            };
            c.objects.insert(name.clone(), (*kind, params));
        }
        for r in prog.requirements.iter().chain(&prog.goal) {
            c.relation(&r.node, false).map_err(|e| at(r.line, e))?;
        }
        for r in &prog.forbids {
            c.relation(&r.node, true).map_err(|e| at(r.line, e))?;
        }
        Ok(c)
    }

    fn object(&self, name: &str) -> Result<(Kind, &[MPoly])> {
        self.objects
            .get(name)
            .map(|(k, p)| (*k, p.as_slice()))
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn eval(&self, e: &Expr) -> Result<GVal> {
        let scalar = |q: Rational| GVal::Scalar(MPoly::constant(self.vars.clone(), q));
        Ok(match e {
            Expr::Num(q) => scalar(q.clone()),
            Expr::Var(name) => match name.rsplit_once('.') {
                Some((obj, field)) => {
                    let (kind, params) = self.object(obj)?;
                    let i = kind.params().iter().position(|p| *p == field).ok_or_else(|| {
                        Error::Invalid(format!("a {kind} has no coordinate `{field}`"))
                    })?;
                    GVal::Scalar(params[i].clone())
                }
                None => {
                    let (kind, params) = self.object(name)?;
                    match kind {
                        Kind::Point => GVal::Vector(params[0].clone(), params[1].clone()),
                        _ => GVal::Object(kind, params.to_vec()),
                    }
                }
            },
            Expr::Neg(a) => match self.eval(a)? {
                GVal::Scalar(p) => GVal::Scalar(-&p),
                GVal::Vector(x, y) => GVal::Vector(-&x, -&y),
                GVal::Object(..) => return Err(object_arith()),
            },
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let sub = matches!(e, Expr::Sub(..));
                match (self.eval(a)?, self.eval(b)?) {
                    (GVal::Scalar(p), GVal::Scalar(q)) => GVal::Scalar(if sub { &p - &q } else { &p + &q }),
                    (GVal::Vector(x1, y1), GVal::Vector(x2, y2)) => {
                        if sub {
                            GVal::Vector(&x1 - &x2, &y1 - &y2)
                        } else {
                            GVal::Vector(&x1 + &x2, &y1 + &y2)
                        }
                    }
                    (GVal::Object(..), _) | (_, GVal::Object(..)) => return Err(object_arith()),
                    _ => return Err(Error::Invalid("cannot add a number and a point".into())),
                }
            }
            Expr::Mul(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (GVal::Scalar(p), GVal::Scalar(q)) => GVal::Scalar(&p * &q),
                (GVal::Scalar(s), GVal::Vector(x, y)) | (GVal::Vector(x, y), GVal::Scalar(s)) => {
                    GVal::Vector(&s * &x, &s * &y)
                }
                (GVal::Vector(..), GVal::Vector(..)) => {
                    return Err(Error::Invalid("use dot(U, V) to multiply two points".into()))
                }
                _ => return Err(object_arith()),
            },
            Expr::Pow(a, k) => match self.eval(a)? {
                GVal::Scalar(p) => GVal::Scalar(p.pow(*k)),
                _ => return Err(Error::Invalid("only numbers can be raised to a power".into())),
            },
            Expr::Call(name, args) if name == "dot" => match args.as_slice() {
                [u, v] => match (self.eval(u)?, self.eval(v)?) {
                    (GVal::Vector(x1, y1), GVal::Vector(x2, y2)) => GVal::Scalar(&(&x1 * &x2) + &(&y1 * &y2)),
                    _ => return Err(Error::Invalid("dot takes two points".into())),
                },
                _ => return Err(Error::Invalid("dot takes two arguments".into())),
            },
            Expr::Call(name, _) => return Err(Error::Invalid(format!("unknown function `{name}`"))),
        })
    }

    fn scalar(&self, e: &Expr) -> Result<MPoly> {
        match self.eval(e)? {
            GVal::Scalar(p) => Ok(p),
            _ => Err(Error::Invalid(format!("`{e}` is not a number"))),
        }
    }

    /// The polynomial a relation asserts to vanish.
    fn relation(&self, r: &Relation, forbid: bool) -> Result<MPoly> {
        let (name, args) = match r {
            Relation::Equal(l, r) => return Ok(&self.scalar(l)? - &self.scalar(r)?),
            Relation::Builtin(name, args) => (name.as_str(), args),
        };
        let kinds = BUILTINS.iter().find(|(b, _)| *b == name).map(|(_, k)| *k).expect("parser filters");
        if name == "distinct" && !forbid {
            return Err(Error::Invalid("distinct is only meaningful in `forbid`".into()));
        }
        if args.len() != kinds.len() {
            return Err(Error::Invalid(format!("{name} takes {} arguments", kinds.len())));
        }
        let mut ps: Vec<Vec<MPoly>> = Vec::new();
        for (a, want) in args.iter().zip(kinds) {
            let got = match self.eval(a)? {
                GVal::Vector(x, y) => (Kind::Point, vec![x, y]),
                GVal::Object(k, p) => (k, p),
                GVal::Scalar(_) => return Err(Error::Invalid(format!("{name} expects a {want}, got `{a}`"))),
            };
            if got.0 != *want {
                return Err(Error::Invalid(format!("{name} expects a {want}, got a {}", got.0)));
            }
            ps.push(got.1);
        }
        let one = MPoly::constant(self.vars.clone(), Rational::one());
        Ok(match name {
            "on_line" => {
                let (pt, l) = (&ps[0], &ps[1]);
                &pt[1] - &(&(&l[0] * &pt[0]) + &l[1])
            }
            "on_circle" => {
                let (pt, k) = (&ps[0], &ps[1]);
                &(&(&pt[0] - &k[0]).pow(2) + &(&pt[1] - &k[1]).pow(2)) - &k[2].pow(2)
            }
            "on_conic" => {
                let (x, y, c) = (&ps[0][0], &ps[0][1], &ps[1]);
                let terms = [x.pow(2), x * y, y.pow(2), x.clone(), y.clone()];
                terms.iter().zip(c).fold(one, |acc, (t, c)| &acc + &(c * t))
            }
            "parallel" => &ps[0][0] - &ps[1][0],
            "perpendicular" => &(&ps[0][0] * &ps[1][0]) + &one,
            "tangent" => {
                let (a, b) = (&ps[0][0], &ps[0][1]);
                let (ka, kb, r) = (&ps[1][0], &ps[1][1], &ps[1][2]);
                let dist = &(&(a * ka) - kb) + b;
                &dist.pow(2) - &(&r.pow(2) * &(&one + &a.pow(2)))
            }
            "angle_eq" => {
                let s: Vec<&MPoly> = ps.iter().map(|l| &l[0]).collect();
                let left = &(s[1] - s[0]) * &(&one + &(s[2] * s[3]));
                let right = &(s[3] - s[2]) * &(&one + &(s[0] * s[1]));
                &left - &right
            }
            "distinct" => &(&ps[0][0] - &ps[1][0]).pow(2) + &(&ps[0][1] - &ps[1][1]).pow(2),
            _ => unreachable!("builtin table"),
        })
    }
}

fn at(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        Error::UnknownVariable(v) => Error::parse(line, 1, format!("unknown object `{v}`")),
        other => Error::parse(line, 1, other.to_string()),
    }
}

fn object_arith() -> Error {
    Error::Invalid("lines, circles and conics cannot be used in arithmetic".into())
}

/// Number of top-level summands, with `dot(U, V)` counting two.
fn summands(e: &Expr) -> u64 {
    match e {
        Expr::Add(a, b) | Expr::Sub(a, b) => summands(a) + summands(b),
        Expr::Neg(a) => summands(a),
        Expr::Num(q) if q.is_zero() => 0,
        Expr::Call(name, _) if name == "dot" => 2,
        _ => 1,
    }
}

/// Rewrites `p` over `to`, where variable `i` of `p` becomes `perm[i]`.
fn rename(p: &MPoly, to: &Arc<Vec<String>>, perm: &[usize]) -> MPoly {
    MPoly::from_terms(
        to.clone(),
        p.terms().map(|(e, c)| {
            let mut ne = vec![0; to.len()];
            for (i, &k) in e.iter().enumerate() {
                ne[perm[i]] = k;
            }
            (ne, c.clone())
        }),
    )
}

/// Compiles to `f` (requirements, then one `1 + z h` per forbid), the goal
/// `g`, and a solving recipe when the construction is triangular. Variables
/// are renamed `x1, x2, ...` with free parameters first.
pub fn compile(prog: &GeoProgram) -> Result<CompiledSystem> {
    let c = Compiler::new(prog)?;
    let vars = c.vars.clone();
    let n = vars.len();
    let n_f = c.n_f;
    let mut f = Vec::new();
    for r in &prog.requirements {
        f.push(c.relation(&r.node, false).map_err(|e| at(r.line, e))?);
    }
    let n_e = f.len();
    for (k, r) in prog.forbids.iter().enumerate() {
        let h = c.relation(&r.node, true).map_err(|e| at(r.line, e))?;
        if h.is_zero() {
            return Err(Error::parse(r.line, 1, "forbidden condition holds identically"));
        }
        let z = MPoly::var(vars.clone(), n_f + k);
        f.push(&MPoly::constant(vars.clone(), Rational::one()) + &(&z * &h));
    }
    let n_i = prog.forbids.len();
    let (g, bound) = match &prog.goal {
        Some(r) => {
            let g = c.relation(&r.node, false).map_err(|e| at(r.line, e))?;
            let m = match &r.node {
                Relation::Equal(l, rhs) => summands(l) + summands(rhs),
                Relation::Builtin(..) => 0,
            };
            (g, (m > 0).then_some(m))
        }
        None => (MPoly::zero(vars.clone()), None),
    };

    let m = n_e + n_i;
    let dim_guess = (m <= n).then(|| n - m);
    let dim = prog.dim.or(dim_guess).unwrap_or(0);
    if dim > n {
        return Err(Error::Invalid(format!("assumed dimension {dim} exceeds {n} parameters")));
    }
    let plan = triangular_plan(&f, n, &[], |v| v < n_f);
    let order: Vec<usize> = plan
        .free
        .iter()
        .copied()
        .chain(plan.steps.iter().map(|&(_, v)| v))
        .chain((0..n).filter(|v| !plan.free.contains(v) && !plan.steps.iter().any(|s| s.1 == *v)))
        .collect();
    let mut perm = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new;
    }
    let new_vars: Arc<Vec<String>> = Arc::new((1..=n).map(|i| format!("x{i}")).collect());
    let labels = order.iter().enumerate().map(|(i, &old)| format!("x{} = {}", i + 1, vars[old])).collect();
    let f: Vec<MPoly> = f.iter().map(|p| rename(p, &new_vars, &perm)).collect();
    let g = rename(&g, &new_vars, &perm);

    let triangular = plan.complete && plan.unused.is_empty() && plan.free.len() == dim;
    let renamed = TriangularPlan {
        free: plan.free.iter().map(|&v| perm[v]).collect(),
        steps: plan.steps.iter().map(|&(e, v)| (e, perm[v])).collect(),
        unused: plan.unused.clone(),
        complete: plan.complete,
    };
    let dummies: Vec<usize> = (n_f..n).map(|v| perm[v]).collect();
    let recipe = if triangular {
        Some(recipe_from_plan(&f, &renamed, &dummies)?)
    } else {
        None
    };
    let selection = if triangular {
        plan.steps.iter().map(|&(e, _)| e).collect()
    } else {
        Vec::new()
    };

    let mut system = PolySystem::new(new_vars, f, g, dim)?;
    system.irreducible = if prog.irreducible {
        Irreducibility::Asserted
    } else {
        Irreducibility::Unknown
    };
    system.g_height_bound = bound;
    system.recipe = recipe;
    system.labels = labels;
    Ok(CompiledSystem {
        system,
        n_f,
        n_e,
        n_i,
        dim_guess,
        selection,
    })
}

/// Outcome of checking the dimension guess.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DimensionCheck {
    Confirmed(usize, Box<Certificate>),
    Inconclusive(String, Option<Box<Certificate>>),
}

/// Certifies `dim X = d` through [`dimension_by_example`], using the
/// solving order as the selection when there is one.
pub fn dimension_guess_check(
    cs: &CompiledSystem,
    opts: &Options,
    source: &WitnessSource,
) -> Result<DimensionCheck> {
    let s = &cs.system;
    if cs.dim_guess.is_none() && s.dim == 0 && s.m() > s.n() {
        return Ok(DimensionCheck::Inconclusive(
            format!("{} equations in {} unknowns: no dimension guess", s.m(), s.n()),
            None,
        ));
    }
    let need = s.n() - s.dim;
    if s.m() < need {
        return Ok(DimensionCheck::Inconclusive(
            format!("{} equations cannot cut out codimension {need}", s.m()),
            None,
        ));
    }
    let selection = if cs.selection.len() == need {
        Selection::Indices(cs.selection.clone())
    } else {
        Selection::AllPermutations
    };
    let cert = dimension_by_example(s, opts, source, &selection)?;
    Ok(match cert.verdict {
        Verdict::DimConfirmed(d) => DimensionCheck::Confirmed(d, Box::new(cert)),
        _ => DimensionCheck::Inconclusive(
            cert.reason.clone().unwrap_or_else(|| "not confirmed".into()),
            Some(Box::new(cert)),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::certify_identity;
    use crate::witness::RecipeStep;
    use proptest::prelude::*;

    pub(crate) const THALES: &str = "\
const A = point(-1, 0)
const B = point(1, 0)
const unit = circle(0, 0, 1)
free C : point
require on_circle(C, unit)
goal dot(C - A, C - B) = 0
assume irreducible
";

    fn compiled(src: &str) -> CompiledSystem {
        compile(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn thales_compiles_to_the_circle() {
        let cs = compiled(THALES);
        let s = &cs.system;
        assert_eq!(s.f.len(), 1);
        assert_eq!(s.f[0].to_string(), "x1^2 + x2^2 - 1");
        let expected = MPoly::parse("(x1 - 1)*(x1 + 1) + x2^2", s.vars.clone()).unwrap();
        assert_eq!(s.g, expected);
        assert_eq!((cs.n(), cs.m(), cs.dim_guess), (2, 1, Some(1)));
        assert_eq!(s.labels, vec!["x1 = C.x", "x2 = C.y"]);
        assert_eq!(s.g_height_bound, Some(2));
        assert_eq!(s.irreducible, Irreducibility::Asserted);
        assert!(matches!(&s.recipe.as_ref().unwrap().steps[..], [RecipeStep::Quadratic { var, .. }] if var == "x2"));
        assert_eq!(cs.selection, vec![0]);
    }

    #[test]
    fn empty_program() {
        let p = parse_program("\n# nothing\n").unwrap();
        assert_eq!(p, GeoProgram::default());
        let cs = compile(&p).unwrap();
        assert_eq!((cs.n(), cs.m(), cs.dim_guess), (0, 0, Some(0)));
    }

    #[test]
    fn errors_carry_positions() {
        let dup = "free P : point\nfree P : line\n";
        assert!(matches!(parse_program(dup), Err(Error::Parse { line: 2, .. })));
        let unknown = "free P : point\ngoal Q.x = 0\n";
        assert!(matches!(parse_program(unknown), Err(Error::Parse { line: 2, .. })));
        let kind = "free P : point\nfree l : line\nrequire on_circle(P, l)\n";
        assert!(matches!(parse_program(kind), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_program("free P : blob"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_program("goal 1 = 0\ngoal 2 = 0"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_program("free P : point\nrequire distinct(P, P)").is_err());
        assert!(parse_program("free P : point\nrequire P.x").is_err());
        assert!(parse_program("free l : line\nrequire l.x = 0").is_err());
    }

    #[test]
    fn forbid_adds_one_variable_and_one_equation() {
        let base = "free P : point\nfree Q : point\nrequire P.x = Q.y\n";
        let a = compiled(base);
        let b = compiled(&format!("{base}forbid distinct(P, Q)\n"));
        assert_eq!(b.n(), a.n() + 1);
        assert_eq!(b.m(), a.m() + 1);
        assert_eq!(b.dim_guess, a.dim_guess);
        assert_eq!(b.n_i, 1);
        assert!(b.system.labels.last().unwrap().ends_with("_z1"));
        let steps = &b.system.recipe.as_ref().unwrap().steps;
        assert!(matches!(steps.last().unwrap(), RecipeStep::RabinowitschInverse { .. }));
    }

    #[test]
    fn angle_equality_is_cubic() {
        let src = "free l1 : line\nfree l2 : line\nfree l3 : line\nfree l4 : line\nrequire angle_eq(l1, l2, l3, l4)\n";
        let cs = compiled(src);
        let f = &cs.system.f[0];
        assert_eq!(f.degree(), Some(3));
        // With slopes s1..s4 the relation is (s2 - s1)(1 + s3 s4) - (s4 - s3)(1 + s1 s2).
        let v: Vec<String> = cs.system.labels.iter().map(|l| l.split(" = ").nth(1).unwrap().to_string()).collect();
        let slope = |k: usize| v.iter().position(|n| *n == format!("l{k}.a")).unwrap();
        let mut pt = vec![Rational::zero(); cs.n()];
        let s = [2, 3, 5, 7];
        for (k, val) in s.iter().enumerate() {
            pt[slope(k + 1)] = Rational::from_integer((*val).into());
        }
        let want = (3 - 2) * (1 + 5 * 7) - (7 - 5) * (1 + 2 * 3);
        assert_eq!(f.eval_exact(&pt), Rational::from_integer(want.into()));
    }

    #[test]
    fn builtin_encodings() {
        let src = "const k = circle(1, 2, 3)\nfree l : line\nrequire tangent(l, k)\n";
        let cs = compiled(src);
        let f = &cs.system.f[0];
        let at = |a: i64, b: i64| f.eval_exact(&[Rational::from_integer(a.into()), Rational::from_integer(b.into())]);
        // y = -1 lies at distance 3 from (1, 2).
        assert_eq!(at(0, -1), Rational::zero());
        assert_ne!(at(0, 0), Rational::zero());
        let conic = compiled("free P : point\nconst q = conic(1, 0, 1, 0, 0)\nrequire on_conic(P, q)\n");
        assert_eq!(conic.system.f[0].to_string(), "x1^2 + x2^2 + 1");
        let perp = compiled("free l : line\nconst m = line(2, 0)\nrequire perpendicular(l, m)\n");
        assert_eq!(perp.system.f[0].to_string(), "2*x2 + 1");
    }

    #[test]
    fn compile_is_deterministic() {
        let a = compiled(THALES).system.to_json();
        let b = compiled(THALES).system.to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn thales_runs_end_to_end() {
        let cs = compiled(THALES);
        let cert = certify_identity(&cs.system, &Options::default(), &WitnessSource::Auto).unwrap();
        assert_eq!(cert.verdict, Verdict::Proved);
    }

    #[test]
    fn dimension_guess_cases() {
        let opts = Options::default();
        match dimension_guess_check(&compiled(THALES), &opts, &WitnessSource::Auto).unwrap() {
            DimensionCheck::Confirmed(1, _) => {}
            other => panic!("{other:?}"),
        }
        let free_only = compiled("free P : point\nfree l : line\n");
        match dimension_guess_check(&free_only, &opts, &WitnessSource::Auto).unwrap() {
            DimensionCheck::Confirmed(4, _) => {}
            other => panic!("{other:?}"),
        }
        let pinned = compiled("free P : point\nrequire P.x = 0\nrequire P.y = 0\nrequire P.x + P.y = 0\n");
        assert_eq!(pinned.dim_guess, None);
        assert!(pinned.system.recipe.is_none());
        assert!(matches!(
            dimension_guess_check(&pinned, &opts, &WitnessSource::Auto).unwrap(),
            DimensionCheck::Inconclusive(..)
        ));
    }

    proptest! {
        #[test]
        fn rabinowitsch_value_zeroes_the_dummy_equation(a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
            prop_assume!((a, b) != (c, d));
            let cs = compiled("free P : point\nfree Q : point\nforbid distinct(P, Q)\n");
            let s = &cs.system;
            let recipe = s.recipe.as_ref().unwrap();
            let mut pt: Vec<Rational> = [a, b, c, d].iter().map(|&v| Rational::from_integer(v.into())).collect();
            let RecipeStep::RabinowitschInverse { expr, .. } = &recipe.steps[0] else { panic!() };
            let h = MPoly::parse(expr, s.vars.clone()).unwrap();
            pt.push(Rational::zero());
            let hv = h.eval_exact(&pt);
            *pt.last_mut().unwrap() = -Rational::one() / hv;
            prop_assert!(s.f[0].eval_exact(&pt).is_zero());
        }

        #[test]
        fn pretty_print_reparses(a in -9i64..9, b in 1i64..9, k in 0u32..4, pick in 0usize..4) {
            let goals = ["dot(C - A, C - B)", "C.x^K*A.x - C.y", "-(C.x + A.y)*C.y", "(C - A).x"];
            let goal = goals[pick].replace('K', &k.to_string());
            let src = format!(
                "free C : point\nconst A = point({a}, {b}/3)\nconst B = point(-{b}, 0)\nrequire C.x*C.x = -C.y + {b}\nforbid C.x = 0\ngoal {goal} = 0\nassume dim 1\n"
            );
            match parse_program(&src) {
                Ok(p) => {
                    let again = parse_program(&p.to_string()).unwrap();
                    prop_assert_eq!(again, p);
                }
                Err(_) => prop_assert_eq!(pick, 3),
            }
        }
    }
}
