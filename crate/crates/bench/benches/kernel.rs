//! Kernel and compiler benchmarks at desk scale.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};

use flexgrid_core::bilevel::{build_ll_lp, compile, derive_kkt};
use flexgrid_core::milp::{solve_lp, solve_milp, MilpOptions};
use flexgrid_core::model::{load_case, CaseConfig};
use flexgrid_core::scenario::load_scenarios;
use flexgrid_core::synthetic::{random_microgrid, random_prices};

fn config(t: usize) -> CaseConfig {
    CaseConfig {
        horizon_t: t,
        ..CaseConfig::default()
    }
}

fn bench_ll_lp(c: &mut Criterion) {
    let t = 4;
    let mg = random_microgrid(7, t);
    let lp = build_ll_lp(&mg, &config(t)).unwrap();
    let prices = random_prices(7, t, 10.0, 60.0);
    let model = lp.to_milp(&prices);
    c.bench_function("ll_lp_t4", |b| b.iter(|| solve_lp(&model)));
}

fn bench_kkt_derivation(c: &mut Criterion) {
    let t = 24;
    let mg = random_microgrid(7, t);
    let lp = build_ll_lp(&mg, &config(t)).unwrap();
    c.bench_function("kkt_derive_t24", |b| b.iter(|| derive_kkt(&lp).unwrap()));
}

fn bench_toy_milp(c: &mut Criterion) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/toy");
    let case = load_case(&dir).unwrap();
    let scen = load_scenarios(&dir.join("scenarios.dat"), case.config.horizon_t).unwrap();
    let cm = compile(&case, &scen).unwrap();
    c.bench_function("toy_case_milp", |b| {
        b.iter(|| solve_milp(&cm.milp, &MilpOptions::default()))
    });
}

fn bench_feeder_compile(c: &mut Criterion) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ieee33");
    let case = load_case(&dir).unwrap();
    let scen = load_scenarios(&dir.join("scenarios.dat"), case.config.horizon_t).unwrap();
    c.bench_function("feeder_compile", |b| b.iter(|| compile(&case, &scen).unwrap()));
}

criterion_group!(
    benches,
    bench_ll_lp,
    bench_kkt_derivation,
    bench_toy_milp,
    bench_feeder_compile
);
criterion_main!(benches);
