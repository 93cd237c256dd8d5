use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use pbe_core::exactnum::parse_rational;
use pbe_core::pipeline::{certify_identity, dimension_by_example, prove_zero_ambient, Options, Selection, WitnessSource};
use pbe_core::valuations::{eval_certified, Backend};
use pbe_core::{compile, parse_program, CertifiedValue, Coordinate, MPoly, Place};

const THALES: &str = include_str!("../../core/tests/data/thales.geo");

fn dense(vars: &[&str], degree: u32) -> MPoly {
    let text = (0..vars.len())
        .map(|i| format!("({} + {}/5)", vars[i], i + 2))
        .collect::<Vec<_>>()
        .join(" * ");
    MPoly::parse_in(&format!("({text})^{degree} - 3"), vars).unwrap()
}

fn ball_point(n: usize, place: Place, bits: u32) -> Vec<CertifiedValue> {
    let be = Backend::new(place, bits);
    (0..n)
        .map(|i| {
            let q = parse_rational(&format!("{}/{}", 1234567 + 31 * i, 10_000_000)).unwrap();
            be.certify(&Coordinate::Exact(q)).unwrap()
        })
        .collect()
}

fn evaluation(c: &mut Criterion) {
    let f = dense(&["x", "y", "z"], 6);
    for (name, place) in [("real", Place::Infinity), ("7-adic", Place::prime(7).unwrap())] {
        let point = ball_point(3, place, 4096);
        c.bench_function(&format!("eval {name} deg18 @4096"), |b| {
            b.iter(|| eval_certified(black_box(&f), black_box(&point), place, 4096).unwrap())
        });
    }
}

fn procedures(c: &mut Criterion) {
    let compiled = compile(&parse_program(THALES).unwrap()).unwrap();
    let sys = compiled.system.clone();
    let opts = Options::default();
    c.bench_function("certify thales", |b| {
        b.iter(|| certify_identity(black_box(&sys), &opts, &WitnessSource::Auto).unwrap())
    });
    let sel = Selection::Indices(compiled.selection.clone());
    c.bench_function("dimension thales", |b| {
        b.iter(|| dimension_by_example(black_box(&sys), &opts, &WitnessSource::Auto, &sel).unwrap())
    });
    let g = MPoly::parse_in("(x + y + z)^4 - (x^2 + y^2 + z^2)^2 + 1", &["x", "y", "z"]).unwrap();
    c.bench_function("kronecker quartic", |b| b.iter(|| prove_zero_ambient(black_box(&g)).unwrap()));
}

criterion_group!(benches, evaluation, procedures);
criterion_main!(benches);
