use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ffmwrc::capacity::{parse_rational, RateTuple, RegionSlice};
use ffmwrc::channel::{DownlinkSpec, UplinkSpec};
use ffmwrc::gf::Field;
use ffmwrc::schedule::SymbolLengths;
use ffmwrc::sim::{run_relay_trials, run_trials, Load, TrialConfig};
use ffmwrc::{Execution, MessageId};

fn q(s: &str) -> num_rational::BigRational {
    parse_rational(s).unwrap()
}

fn counterexample() -> (UplinkSpec, DownlinkSpec) {
    let f = Field::gf(4).unwrap();
    let up = UplinkSpec::new(f, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
    (up, DownlinkSpec::noiseless(2, 3))
}

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn trials(c: &mut Criterion) {
    let (up, down) = counterexample();
    let k = SymbolLengths::from_vec(3, vec![2, 1, 1, 1, 1, 2]).unwrap();
    let cfg = TrialConfig {
        up,
        down,
        load: Load::Lengths(k),
        n: 12,
        n_dl: Some(24),
        trials: 64,
        seed: 1,
        input: None,
    };
    let mut g = c.benchmark_group("scheme_trials");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_trials(black_box(&cfg), exec).unwrap()));
    }
    g.finish();

    let bsc = UplinkSpec::new(Field::gf(2).unwrap(), vec![0.89, 0.11]).unwrap();
    let mut g = c.benchmark_group("relay_trials");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_relay_trials(&bsc, 8, 24, 256, black_box(3), exec).unwrap())
        });
    }
    g.finish();
}

fn region_grid(c: &mut Criterion) {
    let (up, down) = counterexample();
    let mut base = RateTuple::zeros(3);
    for (m, r) in [(MessageId::Private(0), "0.39"), (MessageId::Private(1), "0.39"), (MessageId::Common(0, 2), "0.14")] {
        base.set(m, q(r)).unwrap();
    }
    let slice = RegionSlice {
        base,
        x: MessageId::Common(0, 1),
        y: MessageId::Private(2),
        x_max: q("0.6"),
        y_max: q("0.6"),
        step: q("0.02"),
    };
    let mut g = c.benchmark_group("region_grid");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| slice.evaluate(&up, &down, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, trials, region_grid);
criterion_main!(benches);
