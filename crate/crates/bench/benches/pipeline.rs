use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dirnet_bench::{grid_network, single_source_demands};
use dirnet_core::binsim::{dsbs_shared_rates, run_power_binning, BinModel, BinSimConfig};
use dirnet_core::netgraph::effective_costs;
use dirnet_core::probkit::hb;
use dirnet_core::regions::{power_binning_region, theorem1_region};
use dirnet_core::{minimize, DemandMap, JointPmf, LinearProgram, RateVar, SinkSet, Variable};

fn steiner(c: &mut Criterion) {
    let mut g = c.benchmark_group("effective_costs");
    for sinks in [2, 3, 4] {
        let net = grid_network(8, sinks);
        let demands = single_source_demands(sinks);
        g.bench_with_input(BenchmarkId::from_parameter(sinks), &sinks, |b, _| {
            b.iter(|| effective_costs(black_box(&net), &demands, true).unwrap())
        });
    }
    g.finish();
}

/// Three binary sources with a shared auxiliary on source 0.
fn aux_pmf() -> JointPmf {
    let flip = |p: f64, a: usize, b: usize| if a == b { 1.0 - p } else { p };
    let vars = vec![
        Variable::source("X0", 0, 2),
        Variable::source("X1", 1, 2),
        Variable::source("X2", 2, 2),
        Variable::auxiliary("U", 0, SinkSet::full(2), 2),
    ];
    JointPmf::from_fn(vars, |d| {
        0.5 * flip(0.1, d[0], d[1]) * flip(0.2, d[0], d[2]) * flip(0.3, d[0], d[3])
    })
    .unwrap()
}

fn regions(c: &mut Criterion) {
    let pmf = aux_pmf();
    let demands = DemandMap::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
    c.bench_function("theorem1_region", |b| {
        b.iter(|| theorem1_region(black_box(&pmf), &demands).unwrap())
    });
    let src = JointPmf::dsbs_star(0.1, 0.2).unwrap();
    c.bench_function("power_binning_region", |b| {
        b.iter(|| power_binning_region(black_box(&src), &demands).unwrap())
    });
}

fn simplex(c: &mut Criterion) {
    let region = theorem1_region(&aux_pmf(), &DemandMap::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap()).unwrap();
    let objective = region
        .vars()
        .iter()
        .filter(|v| matches!(v, RateVar::Packet(_)))
        .map(|&v| (v, 1.0 + v.source() as f64))
        .collect();
    let lp = LinearProgram::new(region, objective).unwrap();
    c.bench_function("minimize_theorem1", |b| b.iter(|| minimize(black_box(&lp)).unwrap()));
}

fn binsim(c: &mut Criterion) {
    let mut g = c.benchmark_group("power_binning_1000_trials");
    g.sample_size(10);
    let (h1, h2) = (hb(0.1).unwrap(), hb(0.2).unwrap());
    for n in [8, 12, 16] {
        let cfg = BinSimConfig {
            n,
            model: BinModel::DsbsStar { p1: 0.1, p2: 0.2 },
            rates: dsbs_shared_rates(h1, h2, 0.15),
            trials: 1000,
            seed: 7,
        };
        g.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| run_power_binning(cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, steiner, regions, simplex, binsim);
criterion_main!(benches);
