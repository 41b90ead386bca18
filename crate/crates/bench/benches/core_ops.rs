use criterion::{black_box, criterion_group, criterion_main, Criterion};

use wlab_bench::fixture;
use wlab_core::complex::{AutElement, Move, WhiteheadAuto};
use wlab_core::fixed::{self, FSubgroup, FixedContext};
use wlab_core::topology::SimplicialComplex;
use wlab_core::*;

fn trees(c: &mut Criterion) {
    c.bench_function("enumerate_pointed_trees n=5", |b| {
        b.iter(|| enumerate_pointed_trees(black_box(5)).unwrap())
    });
}

fn ball(c: &mut Criterion) {
    let lab = Complex::new(fixture(&[2, 2, 2])).unwrap();
    c.bench_function("enumerate_ball Z2^3 R=7", |b| {
        b.iter(|| lab.enumerate_ball(black_box(7)).unwrap())
    });
    let ball = lab.enumerate_ball(7).unwrap();
    let far = ball.frames.last().unwrap().clone();
    c.bench_function("reduce_to_minimal Z2^3", |b| {
        b.iter(|| lab.reduce_to_minimal(black_box(&far), NormKind::Zg).unwrap())
    });
    c.bench_function("reductive_star Z2^3", |b| {
        b.iter(|| lab.reductive_star(black_box(&far)).unwrap())
    });
}

fn homology_bench(c: &mut Criterion) {
    let s = SimplicialComplex::sphere(7);
    c.bench_function("homology S^5", |b| b.iter(|| homology(black_box(&s)).unwrap()));
    c.bench_function("certify_contractible simplex", |b| {
        let d = SimplicialComplex::simplex(7);
        b.iter(|| certify_contractible(black_box(&d)).unwrap())
    });
}

fn retraction(c: &mut Criterion) {
    let lab = Complex::new(fixture(&[2, 2, 2, 2])).unwrap();
    let fp = lab.fp();
    let m = WhiteheadAuto::new(Basis::standard(fp), 1, vec![0, 0, 1, 1]).unwrap();
    let e = AutElement::from_moves(fp, vec![Move::Whitehead(m)]).unwrap();
    let tree = fixed::reduced_base_trees(&lab, std::slice::from_ref(&e)).unwrap()[0].clone();
    let ctx = FixedContext::new(&lab, FSubgroup::new(&lab, vec![e], tree).unwrap()).unwrap();
    let reps = ctx.reduced_representatives(2, 20).unwrap();
    let r = reps.last().unwrap().clone();
    c.bench_function("retraction_chain Z2^4", |b| {
        b.iter(|| ctx.retraction_chain(black_box(&r)).unwrap())
    });
    c.bench_function("minimize_representative Z2^4", |b| {
        b.iter(|| ctx.minimize_representative(black_box(&r)).unwrap())
    });
}

criterion_group!(benches, trees, ball, homology_bench, retraction);
criterion_main!(benches);
