//! Full-scheme Monte Carlo trends at desk scale.

use ffmwrc::capacity::{parse_rational, RateTuple};
use ffmwrc::channel::{DownlinkSpec, UplinkSpec};
use ffmwrc::gf::Field;
use ffmwrc::schedule::SymbolLengths;
use ffmwrc::sim::{run_trials, sweep, Axis, Load, TrialConfig};
use ffmwrc::{Execution, MessageId};

fn bsc_uplink() -> UplinkSpec {
    UplinkSpec::new(Field::gf(2).unwrap(), vec![0.89, 0.11]).unwrap()
}

fn config(load: Load, n: usize, n_dl: usize, trials: usize, seed: u64) -> TrialConfig {
    TrialConfig {
        up: bsc_uplink(),
        down: DownlinkSpec::noiseless(2, 3),
        load,
        n,
        n_dl: Some(n_dl),
        trials,
        seed,
        input: None,
    }
}

#[test]
fn error_rate_falls_with_block_length() {
    // k^S_1 = 3 symbols, so the rate at n = 8 is 0.375 < 0.5
    let k = SymbolLengths::from_vec(3, vec![0, 1, 1, 0, 0, 1]).unwrap();
    let mut p = Vec::new();
    for n in [8, 16, 32] {
        let s = run_trials(&config(Load::Lengths(k.clone()), n, 32, 1000, 21), Execution::Parallel).unwrap();
        p.push(s);
    }
    let f: Vec<usize> = p.iter().map(|s| s.failures).collect();
    assert!(f[0] > f[1] && f[1] >= f[2], "failures {f:?}");
    assert!(p[2].hi95 < p[0].lo95, "{:?}", p);
}

#[test]
fn rates_above_the_uplink_bound_fail_often() {
    // R^S_1 = 3/4, 1.5 times the uplink bound
    let q = |s: &str| parse_rational(s).unwrap();
    let mut r = RateTuple::zeros(3);
    for m in [MessageId::Private(1), MessageId::Private(2), MessageId::Common(1, 2)] {
        r.set(m, q("1/4")).unwrap();
    }
    for n in [8, 12, 16] {
        let s = run_trials(&config(Load::Rates(r.clone()), n, 2 * n + 16, 400, 22), Execution::Parallel).unwrap();
        assert!(s.lo95 > 0.05, "n = {n}: {s:?}");
    }
}

#[test]
fn rate_scale_sweep_is_monotone_across_the_threshold() {
    let q = |s: &str| parse_rational(s).unwrap();
    let mut r = RateTuple::zeros(3);
    for m in [MessageId::Private(1), MessageId::Private(2), MessageId::Common(1, 2)] {
        r.set(m, q("1/6")).unwrap();
    }
    // R^S_1 = 0.5 * scale against a bound of 0.5
    let scales: Vec<_> = ["1/2", "1", "3/2"].iter().map(|s| q(s)).collect();
    let rows = sweep(&config(Load::Rates(r), 12, 40, 300, 23), &Axis::RateScale(scales), Execution::Parallel).unwrap();
    let p: Vec<f64> = rows.iter().map(|r| r.stats.p_hat).collect();
    assert!(p.windows(2).all(|w| w[0] <= w[1]), "{p:?}");
    assert!(rows[2].stats.lo95 > rows[0].stats.hi95, "{rows:?}");
}
