//! `pbe`: certify polynomial identities on varieties from one example point.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pbe_core::bounds::{self, BoundContext, NssVariant};
use pbe_core::exactnum::{parse_rational, LogBound, DEFAULT_REFINEMENT_CAP};
use pbe_core::geometry::{compile, dimension_guess_check, parse_program, CompiledSystem, DimensionCheck};
use pbe_core::mpoly::{height_of_polys, parse_expr, MPoly};
use pbe_core::pipeline::{
    certify_identity, dichotomy_decide, dimension_by_example, prove_zero_ambient, threshold_report,
    verify_certificate_capped, Certificate, Options, PolySystem, Procedure, Selection, Verdict,
    VerifyOutcome, WitnessSource,
};
use pbe_core::valuations::Place;
use pbe_core::witness::WitnessSpec;
use pbe_core::{ChainKind, Error, Rational};

#[derive(Parser)]
#[command(name = "pbe", version, about = "Certified proof by example for polynomial identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the genericity threshold and tolerances of a system.
    Bounds {
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Proc::Certify)]
        procedure: Proc,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Certify that g vanishes on X.
    Certify {
        system: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        witness: WitnessArgs,
    },
    /// Decide whether g vanishes on X (CASE1) or not (CASE2).
    Dichotomy {
        system: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        witness: WitnessArgs,
    },
    /// Confirm the asserted dimension of X.
    Dimension {
        system: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        witness: WitnessArgs,
        #[command(flatten)]
        select: SelectArgs,
    },
    /// Decide g = 0 in Q[x] by one exact evaluation.
    Kronecker {
        /// The polynomial, e.g. "14*x^2 + 4*x + 4".
        poly: String,
        /// Variable order; defaults to order of appearance.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a construction program and run a procedure on it.
    Geom {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Proc::Certify)]
        procedure: Proc,
        /// Also write the compiled system as JSON.
        #[arg(long)]
        system_out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        witness: WitnessArgs,
        #[command(flatten)]
        select: SelectArgs,
    },
    /// Recompute a certificate and compare.
    Verify { certificate: PathBuf },
    /// Degree and height bounds for Nullstellensatz combiners.
    NssBounds {
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Nss::Bezout)]
        variant: Nss,
        #[arg(long, default_value = "2")]
        radius: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Proc {
    Certify,
    Dichotomy,
    Dimension,
}

#[derive(Clone, Copy, ValueEnum)]
enum Nss {
    Bezout,
    General,
}

#[derive(Args)]
struct RunArgs {
    /// `inf` or an odd prime.
    #[arg(long, default_value = "inf")]
    place: String,
    /// Radius R >= 1 of the ball holding the witness.
    #[arg(long, default_value = "2")]
    radius: String,
    #[arg(long, conflicts_with = "main_chain")]
    weak_chain: bool,
    #[arg(long)]
    main_chain: bool,
    /// Retries at doubled precision while a comparison is undecided.
    #[arg(long, default_value_t = 2)]
    escalations: u32,
    /// Starting precision in bits (real) or digits (p-adic).
    #[arg(long)]
    precision: Option<u32>,
    /// Where to write the certificate.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Choose free coordinates automatically (the default).
    #[arg(long, conflicts_with = "witness")]
    auto_witness: bool,
    /// JSON file with `free` values and optional `recipe`, or an exact `point`.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Try every (n - d)-subset of the constraints.
    #[arg(long, conflicts_with = "select")]
    all_permutations: bool,
    /// 1-based constraint numbers whose gradients enter the determinant.
    #[arg(long, value_delimiter = ',')]
    select: Option<Vec<usize>>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, text: &str) -> Res<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Failure::Usage(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.write_all(b"\n").map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn log_cap() -> Res<u32> {
    match std::env::var("PBE_LOG_PRECISION_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("PBE_LOG_PRECISION_CAP must be a bit count, got `{v}`"))),
        Err(_) => Ok(DEFAULT_REFINEMENT_CAP),
    }
}

fn radius(text: &str) -> Res<Rational> {
    let r = parse_rational(text)?;
    if r < Rational::from_integer(1.into()) {
        return Err(Failure::Usage(format!("radius must be at least 1, got {text}")));
    }
    Ok(r)
}

impl RunArgs {
    fn options(&self) -> Res<Options> {
        Ok(Options {
            place: self.place.parse::<Place>()?,
            radius: radius(&self.radius)?,
            chain: if self.main_chain { ChainKind::Main } else { ChainKind::Weak },
            log_cap: log_cap()?,
            escalations: self.escalations,
            precision: self.precision,
        })
    }
}

impl WitnessArgs {
    fn source(&self) -> Res<WitnessSource> {
        match &self.witness {
            Some(path) => {
                let spec: WitnessSpec = serde_json::from_str(&read(path)?).map_err(Error::from)?;
                Ok(WitnessSource::Spec(spec))
            }
            None => Ok(WitnessSource::Auto),
        }
    }
}

impl SelectArgs {
    fn selection(&self, system: &PolySystem, compiled: Option<&CompiledSystem>) -> Res<Selection> {
        if self.all_permutations {
            return Ok(Selection::AllPermutations);
        }
        if let Some(ix) = &self.select {
            if ix.contains(&0) {
                return Err(Failure::Usage("--select numbers constraints from 1".into()));
            }
            return Ok(Selection::Indices(ix.iter().map(|i| i - 1).collect()));
        }
        let need = system.n() - system.dim;
        match compiled {
            Some(c) if c.selection.len() == need => Ok(Selection::Indices(c.selection.clone())),
            _ if system.m() == need => Ok(Selection::Indices((0..need).collect())),
            _ => Ok(Selection::AllPermutations),
        }
    }
}

fn load_system(path: &Path) -> Res<PolySystem> {
    Ok(PolySystem::from_json(&read(path)?)?)
}

fn print_report(cert: &Certificate) {
    println!("verdict: {}", cert.verdict);
    if let Some(r) = &cert.reason {
        println!("reason: {r}");
    }
    println!("place: {}  precision: {}", cert.place, cert.precision);
    if let Some(w) = &cert.witness {
        let free: Vec<String> = w.free.iter().map(pbe_core::exactnum::rational_to_string).collect();
        println!("free coordinates: [{}]", free.join(", "));
    }
    if let Some(t) = &cert.thresholds {
        for line in t.text_lines() {
            println!("  {line}");
        }
    }
    for c in &cert.checks {
        let status = serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(String::from));
        println!(
            "  [{}] {}{}",
            status.unwrap_or_default(),
            c.name,
            c.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default()
        );
    }
}

fn finish(cert: &Certificate, out: Option<&Path>) -> Res<ExitCode> {
    print_report(cert);
    if let Some(path) = out {
        write_atomic(path, &cert.to_json())?;
        println!("certificate written to {}", path.display());
    }
    Ok(if cert.verdict.is_definitive() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn run_procedure(
    proc_: Proc,
    system: &PolySystem,
    compiled: Option<&CompiledSystem>,
    run: &RunArgs,
    witness: &WitnessArgs,
    select: Option<&SelectArgs>,
) -> Res<ExitCode> {
    let opts = run.options()?;
    let source = witness.source()?;
    let cert = match proc_ {
        Proc::Certify => certify_identity(system, &opts, &source)?,
        Proc::Dichotomy => dichotomy_decide(system, &opts, &source)?,
        Proc::Dimension => {
            let default = SelectArgs {
                all_permutations: false,
                select: None,
            };
            let sel = select.unwrap_or(&default);
            if let (Some(c), false, None) = (compiled, sel.all_permutations, &sel.select) {
                return match dimension_guess_check(c, &opts, &source)? {
                    DimensionCheck::Confirmed(_, cert) => finish(&cert, run.out.as_deref()),
                    DimensionCheck::Inconclusive(_, Some(cert)) => finish(&cert, run.out.as_deref()),
                    DimensionCheck::Inconclusive(reason, None) => {
                        println!("verdict: {}", Verdict::Inconclusive);
                        println!("reason: {reason}");
                        Ok(ExitCode::from(2))
                    }
                };
            }
            dimension_by_example(system, &opts, &source, &sel.selection(system, compiled)?)?
        }
    };
    finish(&cert, run.out.as_deref())
}

fn fmt_log(b: &LogBound) -> String {
    let x = b.midpoint_f64();
    format!("{x:.4} nats (log10 {:.4})", x / std::f64::consts::LN_10)
}

fn run(cli: Cli) -> Res<ExitCode> {
    match cli.command {
        Command::Bounds { system, procedure, run } => {
            let s = load_system(&system)?;
            let p = match procedure {
                Proc::Certify => Procedure::Identity,
                Proc::Dichotomy => Procedure::Dichotomy,
                Proc::Dimension => Procedure::Dimension,
            };
            let report = threshold_report(&s, &run.options()?, p)?;
            println!("n = {}, m = {}, d = {}, deg f = {:?}, deg g = {}", s.n(), s.m(), s.dim, s.degrees(), s.deg_g());
            for line in report.text_lines() {
                println!("{line}");
            }
            println!("(eps uses the heights of f and g only; a certificate adds the witness height)");
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { system, run, witness } => {
            run_procedure(Proc::Certify, &load_system(&system)?, None, &run, &witness, None)
        }
        Command::Dichotomy { system, run, witness } => {
            run_procedure(Proc::Dichotomy, &load_system(&system)?, None, &run, &witness, None)
        }
        Command::Dimension { system, run, witness, select } => {
            run_procedure(Proc::Dimension, &load_system(&system)?, None, &run, &witness, Some(&select))
        }
        Command::Kronecker { poly, vars, out } => {
            let vars = if vars.is_empty() { parse_expr(&poly)?.identifiers() } else { vars };
            let g = MPoly::parse(&poly, MPoly::var_list(&vars))?;
            let cert = prove_zero_ambient(&g)?;
            if let Some(e) = cert.evaluations.first() {
                println!("{} = {}", e.name, serde_json::to_value(&e.value).map_err(Error::from)?);
            }
            finish(&cert, out.as_deref())
        }
        Command::Geom { program, procedure, system_out, run, witness, select } => {
            let compiled = compile(&parse_program(&read(&program)?)?)?;
            let s = &compiled.system;
            println!(
                "compiled: n = {} (n_f = {}, n_i = {}), m = {} (n_e = {}), d = {}",
                compiled.n(),
                compiled.n_f,
                compiled.n_i,
                compiled.m(),
                compiled.n_e,
                s.dim
            );
            for l in &s.labels {
                println!("  {l}");
            }
            for (i, f) in s.f.iter().enumerate() {
                println!("  f{} = {f}", i + 1);
            }
            println!("  g = {}", s.g);
            if s.recipe.is_none() {
                println!("  no triangular recipe; supply --witness with a point or recipe");
            }
            if let Some(path) = system_out {
                write_atomic(&path, &s.to_json())?;
            }
            run_procedure(procedure, s, Some(&compiled), &run, &witness, Some(&select))
        }
        Command::Verify { certificate } => {
            let cert = Certificate::from_json(&read(&certificate)?)?;
            let outcome = verify_certificate_capped(&cert, log_cap()?)?;
            println!("{outcome}");
            if outcome == VerifyOutcome::Valid {
                println!("verdict: {}", cert.verdict);
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
        Command::NssBounds { system, variant, radius: r } => {
            let s = load_system(&system)?;
            let ctx = BoundContext::new(s.n(), s.dim, s.degrees(), s.deg_g(), &radius(&r)?, Place::Infinity)?;
            let h = height_of_polys(s.f.iter().chain([&s.g])).enclose(ctx.bits);
            let variant = match variant {
                Nss::Bezout => NssVariant::Bezout,
                Nss::General => NssVariant::General,
            };
            let b = bounds::nullstellensatz_size_bounds(&ctx, &h, variant);
            println!("variant: {variant:?}");
            if let Some(n) = &b.big_n {
                println!("exponent N of g: {n}");
            }
            println!("deg lambda_i <= {}", b.deg_lambda_max);
            println!("h(lambda_i) <= {}", fmt_log(&b.h_lambda_max));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
