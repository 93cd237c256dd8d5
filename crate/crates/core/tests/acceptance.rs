//! Acceptance criteria, one report line each. Runs without the libtest
//! harness so the lines are always visible; exits non-zero on any failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pbe_core::bounds::{self, BoundContext};
use pbe_core::exactnum::{ln_enclosure, ln_int, rational_to_string, LogBound, Rational};
use pbe_core::geometry::{compile, parse_program};
use pbe_core::mpoly::{height_of_values, MPoly};
use pbe_core::pipeline::{
    certify_identity, dichotomy_decide, dimension_by_example, membership_oracle, prove_zero_ambient,
    verify_certificate, Certificate, CheckStatus, Membership, Options, Parametrization, PolySystem,
    Selection, Verdict, VerifyOutcome, WitnessSource,
};
use pbe_core::valuations::{Backend, CertifiedValue, Coordinate, Place, RealBall};
use pbe_core::witness::{solve_fiber, WitnessSpec};

const THALES: &str = include_str!("data/thales.geo");

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn ten_pow(k: u32) -> Rational {
    Rational::from_integer(BigInt::from(10).pow(k))
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn thales_system() -> PolySystem {
    compile(&parse_program(THALES).unwrap()).unwrap().system
}

fn fixed_p1() -> Rational {
    Rational::new(BigInt::from(1234567890123u64), BigInt::from(10).pow(13))
}

fn free_spec(p1: &Rational) -> WitnessSource {
    WitnessSource::Spec(WitnessSpec {
        free: vec![rational_to_string(p1)],
        recipe: None,
        point: None,
    })
}

fn constant(cert: &Certificate, name: &str) -> LogBound {
    cert.thresholds.as_ref().unwrap().constants.get(name).cloned().unwrap()
}

fn nats(l: &LogBound) -> f64 {
    l.midpoint_f64()
}

fn log10(l: &LogBound) -> f64 {
    l.midpoint_f64() / std::f64::consts::LN_10
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let s = thales_system();
    ensure(s.f.len() == 1 && s.f[0].to_string() == "x1^2 + x2^2 - 1", format!("f = {:?}", s.f))?;
    let g = MPoly::parse("(x1 - 1)*(x1 + 1) + x2^2", s.vars.clone()).unwrap();
    ensure(s.g == g, format!("g = {}", s.g))?;
    let hf = height_of_values(s.f[0].coefficients());
    ensure(hf.arg().is_one(), "h(f) != 0")?;
    let hg = s.g_height();
    ensure(hg.arg() == &2u32.into(), format!("h(g) bound is ln {}", hg.arg()))?;

    let cert = certify_identity(&s, &Options::default(), &WitnessSource::Auto).map_err(|e| e.to_string())?;
    let t = cert.thresholds.as_ref().unwrap();
    let h = &t.genericity[0];
    let thirteen_ln10 = ln_enclosure(&ten_pow(13), 128).unwrap();
    ensure(h.hi().unwrap() <= thirteen_ln10.lo().unwrap(), "H > 13 ln 10")?;
    ensure(
        h.lo().unwrap() >= &q(27, 1) && h.hi().unwrap() <= &q(30, 1),
        format!("H = {:.3} outside [27, 30]", nats(h)),
    )?;
    let w = cert.witness.as_ref().unwrap();
    ensure(w.free == vec![fixed_p1()], format!("p1 = {}", rational_to_string(&w.free[0])))?;
    ensure(cert.check("genericity p1").unwrap().status == CheckStatus::Pass, "genericity failed")?;
    ensure(cert.verdict == Verdict::Proved, format!("verdict {}", cert.verdict))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "H = {:.3} nats = {:.3} decimal digits, p1 = {}, PROVED in {secs:.2} s",
        nats(h),
        log10(h),
        rational_to_string(&w.free[0])
    ))
}

fn criterion_2() -> Outcome {
    let cert = certify_identity(&thales_system(), &Options::default(), &free_spec(&fixed_p1()))
        .map_err(|e| e.to_string())?;
    let eps = &cert.thresholds.as_ref().unwrap().log_eps;
    let (lo, hi) = (
        eps.lo().unwrap().to_f64().unwrap() / std::f64::consts::LN_10,
        eps.hi().unwrap().to_f64().unwrap() / std::f64::consts::LN_10,
    );
    ensure(lo >= -3500.0 && hi <= -1300.0, format!("log10 eps in [{lo:.1}, {hi:.1}]"))?;
    Ok(format!("log10 eps = {:.1} ({:.1} nats), stricter than 10^-1300", log10(eps), nats(eps)))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let opts = Options {
        place: Place::Prime(7),
        ..Options::default()
    };
    let cert = certify_identity(&thales_system(), &opts, &WitnessSource::Auto).map_err(|e| e.to_string())?;
    let w = cert.witness.as_ref().unwrap();
    let p1 = Rational::from_integer(BigInt::from(7u64 * 1234567890123u64));
    ensure(w.free == vec![p1], format!("p1 = {}", rational_to_string(&w.free[0])))?;
    let x2 = match &w.coordinates[1] {
        Coordinate::Certified(CertifiedValue::Padic(a)) => a.clone(),
        other => return Err(format!("x2 = {other:?}")),
    };
    let digits = x2.digits(4);
    ensure(digits == vec![1, 0, 3, 5], format!("digits {digits:?}"))?;
    let n = cert.precision;
    ensure((1525..=4000).contains(&n), format!("N = {n}"))?;
    for name in ["f1", "g"] {
        let e = cert.evaluation(name).unwrap();
        let zero = match &e.value {
            Coordinate::Exact(v) => v.is_zero(),
            Coordinate::Certified(CertifiedValue::Padic(a)) => a.valuation().is_none() && a.precision() >= n,
            _ => false,
        };
        ensure(zero, format!("{name}(P) is not 0 mod 7^{n}"))?;
    }
    ensure(cert.verdict == Verdict::Proved, format!("verdict {}", cert.verdict))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("took {secs:.1} s"))?;
    Ok(format!("p2 digits {digits:?}, f(P) = g(P) = 0 mod 7^{n}, PROVED in {secs:.2} s"))
}

fn criterion_4() -> Outcome {
    let s = thales_system();
    let w = solve_fiber(&s.f, &s.vars, &[fixed_p1()], s.recipe.as_ref().unwrap(), Place::Infinity, 4330)
        .map_err(|e| e.to_string())?;
    let be = Backend::new(Place::Infinity, 4330);
    let ball = match be.eval(&s.g, &w.coordinates).map_err(|e| e.to_string())? {
        Coordinate::Certified(CertifiedValue::Real(b)) => b,
        other => return Err(format!("g(P) = {other:?}")),
    };
    let bound = q(11, 10) / ten_pow(1303);
    ensure(
        ball.lo_q() >= -bound.clone() && ball.hi_q() <= bound,
        format!("enclosure width {:e}", ball.width().to_f64().unwrap_or(f64::NAN)),
    )?;
    let mag = ball.lo_q().abs().max(ball.hi_q().abs());
    let digits = mag.numer().to_string().len() as i64 - mag.denom().to_string().len() as i64;
    Ok(format!("g(p1, p2) enclosed in [-b, b] with b ~ 10^{digits}, inside 1.1e-1303"))
}

/// Random polynomial in `n` variables of total degree at most `deg`.
fn random_poly(rng: &mut ChaCha8Rng, vars: &Arc<Vec<String>>, deg: u32, terms: usize, c: i64) -> MPoly {
    let n = vars.len();
    let ts: Vec<(Vec<u32>, Rational)> = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; n];
            let mut left = rng.gen_range(0..=deg);
            for slot in e.iter_mut() {
                let k = rng.gen_range(0..=left);
                *slot = k;
                left -= k;
            }
            (e, Rational::from_integer(rng.gen_range(-c..=c).into()))
        })
        .collect();
    MPoly::from_terms(vars.clone(), ts)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let x = MPoly::var_list(&["x"]);
    let g = MPoly::parse("14*x^2 + 4*x + 4", x).unwrap();
    let cert = prove_zero_ambient(&g).map_err(|e| e.to_string())?;
    let e = &cert.evaluations[0];
    ensure(
        e.name == "g_kr(100)" && e.value == Coordinate::Exact(Rational::from_integer(140404.into())),
        format!("{} = {:?}", e.name, e.value),
    )?;
    ensure(cert.verdict == Verdict::Disproved, "14x^2 + 4x + 4 not disproved")?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut agree, mut zeros) = (0, 0);
    for i in 0..500 {
        let n = rng.gen_range(1..=4);
        let names: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        let vars = MPoly::var_list(&names);
        let g = match i % 3 {
            0 => {
                let t = rng.gen_range(1..8);
                random_poly(&mut rng, &vars, 5, t, 50)
            }
            // (a b) - (b a) expanded in two orders, optionally perturbed.
            _ => {
                let a = random_poly(&mut rng, &vars, 2, 3, 50);
                let b = random_poly(&mut rng, &vars, 3, 3, 50);
                let mut d = &(&a * &b) - &(&b * &a);
                if i % 3 == 2 {
                    d = &d + &random_poly(&mut rng, &vars, 5, 1, 50);
                }
                d
            }
        };
        zeros += g.is_zero() as usize;
        let cert = prove_zero_ambient(&g).map_err(|e| e.to_string())?;
        agree += ((cert.verdict == Verdict::Proved) == g.is_zero()) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(agree == 500, format!("{agree}/500 agree"))?;
    ensure(secs <= 30.0, format!("took {secs:.1} s"))?;
    Ok(format!("g(100) = 140404 DISPROVED; {agree}/500 agree ({zeros} zero) in {secs:.2} s"))
}

/// Small varieties with a polynomial parametrization or a rational one
/// (shifted circles).
fn random_variety(rng: &mut ChaCha8Rng) -> PolySystem {
    let c = |rng: &mut ChaCha8Rng| rng.gen_range(-3i64..=3);
    match rng.gen_range(0..3) {
        0 => {
            let q = format!("{}*x1^2 + {}*x1 + {}", c(rng), c(rng), c(rng));
            let mut s = PolySystem::parse(&["x1", "x2"], &[&format!("x2 - ({q})")], "x1", 1).unwrap();
            let qt = q.replace("x1", "t");
            s.parametrization = Some(Parametrization::new(&["t"], &[("t", "1"), (&qt, "1")]).unwrap());
            s
        }
        1 => {
            let (a, b, r) = (rng.gen_range(-1i64..=1), c(rng), rng.gen_range(2i64..=3));
            let f = format!("(x1 - ({a}))^2 + (x2 - ({b}))^2 - {}", r * r);
            let mut s = PolySystem::parse(&["x1", "x2"], &[&f], "x1", 1).unwrap();
            let x = format!("{a}*(1 + t^2) + {r}*(1 - t^2)");
            let y = format!("{b}*(1 + t^2) + {}*t", 2 * r);
            s.parametrization =
                Some(Parametrization::new(&["t"], &[(&x, "1 + t^2"), (&y, "1 + t^2")]).unwrap());
            s
        }
        _ => {
            let q1 = format!("{}*x1^2 + {}", c(rng), c(rng));
            let q2 = format!("{}*x1*x2 + {}*x2 + {}", c(rng), c(rng), c(rng));
            let f = [format!("x2 - ({q1})"), format!("x3 - ({q2})")];
            let mut s = PolySystem::parse(&["x1", "x2", "x3"], &[&f[0], &f[1]], "x1", 1).unwrap();
            let p2 = q1.replace("x1", "t");
            let p3 = q2.replace("x2", &format!("({p2})")).replace("x1", "t");
            s.parametrization =
                Some(Parametrization::new(&["t"], &[("t", "1"), (&p2, "1"), (&p3, "1")]).unwrap());
            s
        }
    }
}

fn random_goal(rng: &mut ChaCha8Rng, s: &PolySystem) -> MPoly {
    let mut g = MPoly::zero(s.vars.clone());
    for f in &s.f {
        let h = random_poly(rng, &s.vars, 1, 3, 2);
        g = &g + &(&h * f);
    }
    if rng.gen_bool(0.5) {
        g = &g + &random_poly(rng, &s.vars, 2, 2, 3);
    }
    g
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = Options {
        radius: Rational::from_integer(256.into()),
        ..Options::default()
    };
    let (mut runs, mut members, mut proved, mut cases) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    while runs < 120 {
        let s = random_variety(&mut rng);
        let g = random_goal(&mut rng, &s);
        if g.degree().unwrap_or(0) == 0 {
            continue;
        }
        let s = s.with_g(g.clone()).unwrap();
        runs += 1;
        let member = membership_oracle(&s, &g).map_err(|e| e.to_string())? == Membership::Member;
        members += member as usize;
        let cert = certify_identity(&s, &opts, &WitnessSource::Auto).map_err(|e| e.to_string())?;
        if cert.verdict == Verdict::Proved {
            proved += 1;
            if !member {
                bad.push(format!("false PROVED for {}", s.to_json()));
            }
        }
        let d = dichotomy_decide(&s, &opts, &WitnessSource::Auto).map_err(|e| e.to_string())?;
        match d.verdict {
            Verdict::Case1 | Verdict::Case2 => {
                cases += 1;
                if (d.verdict == Verdict::Case1) != member {
                    bad.push(format!("{} contradicts the oracle for {}", d.verdict, s.to_json()));
                }
            }
            _ => {}
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(bad.is_empty(), bad.join("; "))?;
    ensure(secs <= 600.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "{runs} varieties, {members} member goals, {proved} PROVED, {cases} CASE verdicts, 0 contradictions in {secs:.1} s"
    ))
}

/// The tolerance pair recomputed with a rational witness field (`K = 1`).
fn k1_context(s: &PolySystem) -> BoundContext {
    let mut ctx = BoundContext::new(s.n(), s.dim, s.degrees(), s.deg_g(), &q(2, 1), Place::Infinity).unwrap();
    ctx.k_degree = 1;
    ctx
}

fn criterion_7() -> Outcome {
    let base = thales_system();
    let vars = base.vars.clone();
    let opts = Options::default();
    let s2 = base.with_g(MPoly::var(vars.clone(), 0)).unwrap();
    let c2 = dichotomy_decide(&s2, &opts, &free_spec(&fixed_p1())).map_err(|e| e.to_string())?;
    ensure(c2.verdict == Verdict::Case2, format!("g = x1 gave {}", c2.verdict))?;
    let gval = match &c2.evaluation("g").unwrap().value {
        Coordinate::Exact(v) => v.to_f64().unwrap(),
        other => return Err(format!("g(P) = {other:?}")),
    };
    ensure((gval - 0.1234).abs() < 1e-4, format!("|g(P)| = {gval}"))?;
    let eps_g = constant(&c2, "log_eps_g");
    let (_, eps_g1) = bounds::dichotomy_thresholds(&k1_context(&s2), &constant(&c2, "h_full")).unwrap();
    ensure((nats(&eps_g1) + 1098.0).abs() <= 0.02 * 1098.0, format!("K = 1 eps_g = {:.1}", nats(&eps_g1)))?;

    let s1 = base.with_g(base.f[0].clone()).unwrap();
    let c1 = dichotomy_decide(&s1, &opts, &free_spec(&fixed_p1())).map_err(|e| e.to_string())?;
    ensure(c1.verdict == Verdict::Case1, format!("g = f gave {}", c1.verdict))?;
    Ok(format!(
        "g = x1: CASE2 with |g(P)| = {gval:.6}, ln eps_g = {:.1} (K = 2; {:.1} at K = 1); g = f: CASE1",
        nats(&eps_g),
        nats(&eps_g1)
    ))
}

fn criterion_8() -> Outcome {
    let s = thales_system().with_g(MPoly::var(thales_system().vars.clone(), 0)).unwrap();
    let opts = Options::default();
    let cert = dimension_by_example(&s, &opts, &free_spec(&fixed_p1()), &Selection::Indices(vec![0]))
        .map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::DimConfirmed(1), format!("verdict {}", cert.verdict))?;
    let det = match &cert.evaluation("det").unwrap().value {
        Coordinate::Certified(CertifiedValue::Real(b)) => b.clone(),
        other => return Err(format!("det = {other:?}")),
    };
    ensure((det.approx_f64() - 1.9847).abs() < 1e-4, format!("det = {}", det.approx_f64()))?;
    let eps_det = constant(&cert, "log_eps_det");
    let (_, eps_det1) = bounds::dimension_thresholds(&k1_context(&s), &constant(&cert, "h_full"));
    ensure(
        (nats(&eps_det1) + 4394.0).abs() <= 0.02 * 4394.0,
        format!("K = 1 eps_det = {:.1}", nats(&eps_det1)),
    )?;

    let dup = PolySystem::parse(&["x1", "x2"], &["x1^2 + x2^2 - 1", "x1^2 + x2^2 - 1"], "x1", 0).unwrap();
    let spec = WitnessSpec {
        free: vec![],
        recipe: None,
        point: Some(vec!["3/5".into(), "4/5".into()]),
    };
    let c = dimension_by_example(&dup, &opts, &WitnessSource::Spec(spec), &Selection::Indices(vec![0, 1]))
        .map_err(|e| e.to_string())?;
    ensure(c.verdict == Verdict::Inconclusive, format!("duplicate gave {}", c.verdict))?;
    Ok(format!(
        "DIM_CONFIRMED(1) with det = {:.5} > 2 eps_det, ln eps_det = {:.1} (K = 2; {:.1} at K = 1); duplicate: INCONCLUSIVE",
        det.approx_f64(),
        nats(&eps_det),
        nats(&eps_det1)
    ))
}

/// `lcm(denominators) * max(1, |a_i|)` computed from prime factorizations.
fn height_by_factorization(values: &[Rational]) -> Rational {
    let mut exps: Vec<(u64, u32)> = Vec::new();
    for v in values {
        let mut d = v.denom().to_u64().unwrap();
        let mut p = 2;
        while d > 1 {
            let mut e = 0;
            while d % p == 0 {
                d /= p;
                e += 1;
            }
            if e > 0 {
                match exps.iter_mut().find(|(q, _)| *q == p) {
                    Some((_, k)) => *k = (*k).max(e),
                    None => exps.push((p, e)),
                }
            }
            p += 1;
        }
    }
    let lcm: u64 = exps.iter().map(|(p, e)| p.pow(*e)).product();
    let top = values.iter().map(|v| v.abs()).fold(Rational::one(), |a, b| if b > a { b } else { a });
    Rational::from_integer(lcm.into()) * top
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vars = MPoly::var_list(&["x1", "x2", "x3"]);
    for case in 0..1000 {
        let t = rng.gen_range(1..6);
        let f = random_poly(&mut rng, &vars, 4, t, 9);
        let bits = rng.gen_range(20..200);
        let pt: Vec<Rational> = (0..3).map(|_| q(rng.gen_range(-999..=999), rng.gen_range(1..=999))).collect();
        let coords: Vec<Coordinate> = pt
            .iter()
            .map(|v| Coordinate::Certified(CertifiedValue::Real(RealBall::around(v, bits))))
            .collect();
        let exact = f.eval_exact(&pt);
        let ok = match Backend::new(Place::Infinity, bits).eval(&f, &coords).map_err(|e| e.to_string())? {
            Coordinate::Exact(v) => v == exact,
            Coordinate::Certified(CertifiedValue::Real(b)) => b.contains(&exact),
            _ => false,
        };
        ensure(ok, format!("containment case {case}: {f} at {pt:?}"))?;
    }

    for case in 0..200 {
        let values: Vec<Rational> = (0..rng.gen_range(1..6))
            .map(|_| q(rng.gen_range(-5000..=5000), rng.gen_range(1..=5000)))
            .collect();
        let h = height_of_values(&values);
        let oracle = height_by_factorization(&values);
        ensure(
            Rational::from_integer(BigInt::from(h.arg().clone())) == oracle,
            format!("height case {case}: {values:?}"),
        )?;
    }

    let mut worst = 0.0f64;
    for _ in 0..60 {
        let x = q(rng.gen_range(1..1_000_000), rng.gen_range(1..1_000_000));
        let mut prev: Option<LogBound> = None;
        for bits in [32u32, 64, 128, 256] {
            let l = ln_enclosure(&x, bits).unwrap();
            let (lo, hi) = (l.lo().unwrap().clone(), l.hi().unwrap().clone());
            let width = (&hi - &lo).to_f64().unwrap() * 2f64.powi(bits as i32);
            worst = worst.max(width);
            ensure(width <= 64.0, format!("ln({x}) at {bits} bits has width {width} ulp"))?;
            let xf = x.to_f64().unwrap().ln();
            ensure(
                lo.to_f64().unwrap() <= xf + 1e-9 && xf - 1e-9 <= hi.to_f64().unwrap(),
                format!("ln({x}) misses {xf}"),
            )?;
            if let Some(p) = &prev {
                ensure(p.lo().unwrap() <= &lo && &hi <= p.hi().unwrap(), format!("ln({x}) not monotone at {bits}"))?;
            }
            prev = Some(l);
        }
    }
    let ln2 = ln_int(2, 200);
    ensure(
        ln2.lo().unwrap().to_f64().unwrap() <= std::f64::consts::LN_2
            && std::f64::consts::LN_2 <= ln2.hi().unwrap().to_f64().unwrap(),
        "ln 2 enclosure",
    )?;

    let opts = Options::default();
    let cert = certify_identity(&thales_system(), &opts, &free_spec(&fixed_p1())).map_err(|e| e.to_string())?;
    let parsed = Certificate::from_json(&cert.to_json()).map_err(|e| e.to_string())?;
    ensure(verify_certificate(&parsed).unwrap() == VerifyOutcome::Valid, "round trip rejected")?;
    let mut t1 = parsed.clone();
    t1.witness.as_mut().unwrap().free[0] = fixed_p1() + q(1, 10_000_000);
    let r1 = verify_certificate(&t1).unwrap();
    ensure(matches!(r1, VerifyOutcome::Invalid(_)), "tampered witness accepted")?;
    let s2 = thales_system().with_g(MPoly::var(thales_system().vars.clone(), 0)).unwrap();
    let mut t2 = certify_identity(&s2, &opts, &free_spec(&fixed_p1())).map_err(|e| e.to_string())?;
    t2.verdict = Verdict::Proved;
    let r2 = verify_certificate(&t2).unwrap();
    ensure(matches!(r2, VerifyOutcome::Invalid(_)), "forged verdict accepted")?;
    Ok(format!(
        "1000 containments, 200 heights, ln widths <= {worst:.3} ulp and nested, verify VALID; tampering: {r1}; {r2}"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Thales real golden run", criterion_1),
        ("tolerance conservativity", criterion_2),
        ("Thales 7-adic golden run", criterion_3),
        ("evaluation interval at 4330 bits", criterion_4),
        ("Kronecker substitution and Cauchy bound", criterion_5),
        ("soundness fuzz", criterion_6),
        ("dichotomy on the circle", criterion_7),
        ("dimension by example on the circle", criterion_8),
        ("numerical kernel invariants", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("{id} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
