use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use svine_core::inference::{fit_copula, pseudo_observations};
use svine_core::process::{convergence_experiment, simulate};
use svine_core::rosenblatt::log_joint_density;
use svine_core::{Family, KpacfSpec, NegativeRule, PairCopula, SVineModel};

fn arma11(p: usize, family: Family) -> SVineModel {
    SVineModel::from_kpacf(KpacfSpec::arma(&[0.95], &[-0.85], p).unwrap(), family, NegativeRule::default(), p).unwrap()
}

fn h_inverse(c: &mut Criterion) {
    let mut g = c.benchmark_group("h1_inverse");
    for (name, pc) in [
        ("gauss", PairCopula::gauss(0.6).unwrap()),
        ("frank", PairCopula::frank(5.0).unwrap()),
        ("clayton", PairCopula::clayton(2.0).unwrap()),
        ("gumbel", PairCopula::gumbel(2.0).unwrap()),
        ("joe", PairCopula::joe(2.5).unwrap()),
    ] {
        g.bench_function(name, |b| b.iter(|| pc.h1_inverse(black_box(0.3), black_box(0.7)).unwrap()));
    }
    g.finish();
}

fn density_and_simulation(c: &mut Criterion) {
    let model = arma11(30, Family::Gumbel);
    let u = simulate(&model, 2000, 1).unwrap().u;
    c.bench_function("log_joint_density gumbel p=30 n=2000", |b| {
        b.iter(|| log_joint_density(&model.seq, black_box(&u)).unwrap())
    });
    c.bench_function("simulate gumbel p=30 n=2000", |b| b.iter(|| simulate(&model, 2000, black_box(3)).unwrap()));
    let joe = arma11(200, Family::Joe);
    c.bench_function("experiment joe n=201", |b| {
        b.iter(|| convergence_experiment(&joe.seq, 201, black_box(1)).unwrap())
    });
}

fn fitting(c: &mut Criterion) {
    let model = arma11(10, Family::Gauss);
    let u = pseudo_observations(&simulate(&model, 500, 2).unwrap().u);
    let template = KpacfSpec::arma(&[0.5], &[0.0], 10).unwrap();
    let mut g = c.benchmark_group("fit");
    g.sample_size(10);
    g.bench_function("gauss arma(1,1) p=10 n=500", |b| {
        b.iter(|| fit_copula(black_box(&u), &template, Family::Gauss, NegativeRule::default(), 10))
    });
    g.finish();
}

criterion_group!(benches, h_inverse, density_and_simulation, fitting);
criterion_main!(benches);
