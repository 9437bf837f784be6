//! Monte Carlo estimates of the block error probability.
//!
//! Every trial draws from its own stream `(seed, trial index)`, so results
//! do not depend on how trials are spread over threads.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::capacity::{max_min_downlink, RateTuple};
use crate::channel::{sample_downlink, sample_uplink_noise, DownlinkSpec, InputDist, UplinkSpec};
use crate::codec::{
    encode_uplink, relay_decode_sum, user_decode_u, BlockCode, CandidateSpace, DownlinkCodebook, DownlinkDecision,
    MessageSet, Scheme,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gf::{random_vec, Field};
use crate::rng::Stream;
use crate::schedule::{reindex_users, SymbolLengths};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Codebook draws per trial before a deterministic downlink gives up on
/// separating candidates.
pub const MAX_CODEBOOK_DRAWS: usize = 16;

/// Failure count with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub trials: usize,
    pub failures: usize,
    pub p_hat: f64,
    pub lo95: f64,
    pub hi95: f64,
    /// Discarded random draws (rank-deficient generators, colliding
    /// downlink codewords).
    pub redraws: usize,
}

impl ErrorStats {
    pub fn new(trials: usize, failures: usize, redraws: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::usage("at least one trial is required"));
        }
        if failures > trials {
            return Err(Error::usage("more failures than trials"));
        }
        let (lo95, hi95) = wilson(failures, trials);
        Ok(ErrorStats {
            trials,
            failures,
            p_hat: failures as f64 / trials as f64,
            lo95,
            hi95,
            redraws,
        })
    }
}

/// 95% Wilson score interval for `failures` out of `trials`.
pub fn wilson(failures: usize, trials: usize) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// What the users send: rates (quantized per block length) or fixed
/// symbol lengths.
#[derive(Debug, Clone, PartialEq)]
pub enum Load {
    Rates(RateTuple),
    Lengths(SymbolLengths),
}

/// `k_I = floor(n R_I / log2 F)`.
pub fn quantize(rates: &RateTuple, n: usize, field: &Field) -> SymbolLengths {
    let mut k = SymbolLengths::zeros(rates.users());
    for (m, r) in rates.iter() {
        k.set(m, symbols_for(r, n, field)).expect("same users");
    }
    k
}

/// Symbols a rate of `r` bits per use fills in `n` uses; exact when the
/// field order is a power of two.
pub fn symbols_for(r: &BigRational, n: usize, field: &Field) -> usize {
    let q = field.order();
    if q.is_power_of_two() {
        let bits = BigInt::from(q.trailing_zeros());
        let x = r * BigRational::from_integer(BigInt::from(n)) / BigRational::from_integer(bits);
        x.floor().to_integer().to_usize().unwrap_or(usize::MAX)
    } else {
        let x = r.to_f64().unwrap_or(0.0) * n as f64 / field.bits_per_symbol();
        (x + 1e-9).floor().max(0.0) as usize
    }
}

/// Rates actually carried by lengths `k` over `n` uses, per message.
pub fn realized_rates(k: &SymbolLengths, n: usize, field: &Field) -> Vec<f64> {
    k.iter().map(|(_, len)| len as f64 * field.bits_per_symbol() / n as f64).collect()
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub up: UplinkSpec,
    pub down: DownlinkSpec,
    pub load: Load,
    /// Uplink block length.
    pub n: usize,
    /// Downlink block length; defaults to `n`.
    pub n_dl: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Relay input distribution; defaults to the max-min optimizer's choice.
    pub input: Option<InputDist>,
}

impl TrialConfig {
    pub fn downlink_length(&self) -> usize {
        self.n_dl.unwrap_or(self.n)
    }

    pub fn lengths(&self) -> SymbolLengths {
        match &self.load {
            Load::Rates(r) => quantize(r, self.n, self.up.field()),
            Load::Lengths(k) => k.clone(),
        }
    }
}

struct Prepared {
    scheme: Scheme,
    down: DownlinkSpec,
    spaces: Vec<CandidateSpace>,
    input: InputDist,
    n: usize,
    n_dl: usize,
    deterministic_downlink: bool,
}

fn prepare(c: &TrialConfig) -> Result<Prepared> {
    if c.trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    if c.n == 0 {
        return Err(Error::usage("uplink block length must be positive"));
    }
    let k = c.lengths();
    if k.users() != c.down.users() {
        return Err(Error::usage(format!(
            "{} users in the load, {} downlink channels",
            k.users(),
            c.down.users()
        )));
    }
    let field = c.up.field();
    let (perm, k) = reindex_users(&k);
    let down = c.down.permuted(&perm);
    let scheme = Scheme::new(field, &k)?;
    let spaces = (0..k.users()).map(|a| scheme.candidate_space(a)).collect::<Result<Vec<_>>>()?;
    let n_dl = c.downlink_length();
    if n_dl == 0 {
        return Err(Error::usage("downlink block length must be positive"));
    }
    let input = match &c.input {
        Some(d) if d.probs().len() != down.input_size() => {
            return Err(Error::usage(format!(
                "input distribution over {} symbols, downlink has {}",
                d.probs().len(),
                down.input_size()
            )))
        }
        Some(d) => d.clone(),
        None => {
            let sums: Vec<f64> = k.sums().iter().map(|&s| s as f64 * field.bits_per_symbol() / n_dl as f64).collect();
            max_min_downlink(&down, &sums)?.argmax
        }
    };
    let deterministic_downlink = down
        .channels()
        .iter()
        .all(|w| w.rows().iter().all(|r| r.contains(&1.0)));
    Ok(Prepared {
        scheme,
        down,
        spaces,
        input,
        n: c.n,
        n_dl,
        deterministic_downlink,
    })
}

/// Outcome of one trial: failed, and how many draws were discarded.
fn one_trial(p: &Prepared, up: &UplinkSpec, stream: Stream) -> Result<(bool, usize)> {
    let s = &p.scheme;
    let field = s.field();
    let msgs = MessageSet::random(field, s.lengths(), &mut stream.child(1).rng());
    let (codes, mut redraws) = s.random_codes(p.n, &mut stream.child(2).rng());
    let u_hat = s.uplink_round(&msgs, &codes, up, &mut stream.child(3).rng())?;

    let users = s.users();
    let knowns: Vec<_> = (0..users).map(|a| msgs.known_to(a)).collect();
    let offsets = (0..users).map(|a| s.offset(a, &knowns[a])).collect::<Result<Vec<_>>>()?;
    let mut decisions: Vec<DownlinkDecision> = Vec::new();
    for attempt in 0..MAX_CODEBOOK_DRAWS {
        let book = DownlinkCodebook::new(p.n_dl, &p.input, stream.child(4).named("codebook", attempt as u64))?;
        let x0 = book.codeword(field, u_hat.as_slice())?;
        decisions = (0..users)
            .map(|a| {
                let y = sample_downlink(&p.down, a, &x0, &mut stream.child(5).named("user", a as u64).rng())?;
                user_decode_u(&y, &book, &p.spaces[a], &offsets[a], &p.down, a)
            })
            .collect::<Result<Vec<_>>>()?;
        if !(p.deterministic_downlink && decisions.iter().any(|d| d.tied)) || attempt + 1 == MAX_CODEBOOK_DRAWS {
            break;
        }
        redraws += 1;
    }

    for (a, d) in decisions.iter().enumerate() {
        let got = s.recover_messages(a, &d.u, &knowns[a])?;
        if got.iter().any(|(m, w)| w != msgs.get(*m)) {
            return Ok((true, redraws));
        }
    }
    Ok((false, redraws))
}

/// Runs `c.trials` independent exchanges of the full scheme.
pub fn run_trials(c: &TrialConfig, exec: Execution) -> Result<ErrorStats> {
    let p = prepare(c)?;
    let master = Stream::new(c.seed);
    let outcomes = exec.map_indexed(c.trials, |t| one_trial(&p, &c.up, master.named("trial", t as u64)));
    let mut failures = 0;
    let mut redraws = 0;
    for o in outcomes {
        let (f, r) = o?;
        failures += f as usize;
        redraws += r;
    }
    ErrorStats::new(c.trials, failures, redraws)
}

/// Two transmitters, one shared `k x n` code: the relay decodes the sum
/// of their messages.
pub fn run_relay_trials(up: &UplinkSpec, k: usize, n: usize, trials: usize, seed: u64, exec: Execution) -> Result<ErrorStats> {
    if trials == 0 {
        return Err(Error::usage("trials must be positive"));
    }
    if n == 0 {
        return Err(Error::usage("block length must be positive"));
    }
    let field = up.field().clone();
    let master = Stream::new(seed);
    let outcomes = exec.map_indexed(trials, |t| -> Result<(bool, usize)> {
        let mut rng = master.named("relay-trial", t as u64).rng();
        let (code, redraws) = BlockCode::random(&field, k, n, &mut rng);
        let w = random_vec(&field, k, &mut rng);
        let v = random_vec(&field, k, &mut rng);
        let y = encode_uplink(&w, &code, 0)?
            .add(&encode_uplink(&v, &code, 1)?)?
            .add(&sample_uplink_noise(up, n, &mut rng))?;
        let s = relay_decode_sum(&y, &code, &code.dither_sum(), up)?;
        Ok((s != w.add(&v)?, redraws))
    });
    let mut failures = 0;
    let mut redraws = 0;
    for o in outcomes {
        let (f, r) = o?;
        failures += f as usize;
        redraws += r;
    }
    ErrorStats::new(trials, failures, redraws)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// Uplink block length (the downlink follows unless fixed).
    N(Vec<usize>),
    /// Multiplier applied to every rate.
    RateScale(Vec<BigRational>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: String,
    pub stats: ErrorStats,
}

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.stats;
        write!(
            f,
            "{},{},{},{:.6},{:.6},{:.6},{}",
            self.axis_value, s.trials, s.failures, s.p_hat, s.lo95, s.hi95, s.redraws
        )
    }
}

pub const SWEEP_HEADER: &str = "axis_value,trials,failures,p_hat,lo95,hi95,redraws";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

/// One [`run_trials`] per axis value, all with the same master seed.
pub fn sweep(c: &TrialConfig, axis: &Axis, exec: Execution) -> Result<Vec<SweepRow>> {
    let points: Vec<(String, TrialConfig)> = match axis {
        Axis::N(ns) => ns
            .iter()
            .map(|&n| (n.to_string(), TrialConfig { n, ..c.clone() }))
            .collect(),
        Axis::RateScale(scales) => {
            let Load::Rates(r) = &c.load else {
                return Err(Error::usage("a rate-scale sweep needs rates, not symbol lengths"));
            };
            scales
                .iter()
                .map(|x| {
                    Ok((
                        crate::capacity::format_rate(x),
                        TrialConfig {
                            load: Load::Rates(r.scaled(x)?),
                            ..c.clone()
                        },
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    if points.is_empty() {
        return Err(Error::usage("sweep needs at least one axis value"));
    }
    points
        .into_iter()
        .map(|(v, cfg)| {
            Ok(SweepRow {
                axis_value: v,
                stats: run_trials(&cfg, exec)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::parse_rational;
    use crate::channel::Dmc;
    use crate::message::MessageId;

    fn zero_noise_config(trials: usize) -> TrialConfig {
        let f = Field::gf(2).unwrap();
        TrialConfig {
            up: UplinkSpec::noiseless(f),
            down: DownlinkSpec::noiseless(2, 3),
            load: Load::Lengths(SymbolLengths::from_vec(3, vec![2, 1, 2, 1, 0, 1]).unwrap()),
            n: 12,
            n_dl: Some(40),
            trials,
            seed: 1,
            input: None,
        }
    }

    #[test]
    fn wilson_contains_estimate() {
        for (f, n) in [(0, 10), (3, 10), (10, 10), (50, 2000)] {
            let s = ErrorStats::new(n, f, 0).unwrap();
            assert!(s.lo95 <= s.p_hat && s.p_hat <= s.hi95);
        }
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_994).abs() < 1e-5);
        assert!(ErrorStats::new(0, 0, 0).is_err());
    }

    #[test]
    fn wilson_coverage() {
        use rand::Rng;
        let p = 0.2;
        let mut rng = Stream::new(99).rng();
        let mut covered = 0;
        for _ in 0..1000 {
            let f = (0..200).filter(|_| rng.random_bool(p)).count();
            let (lo, hi) = wilson(f, 200);
            covered += (lo <= p && p <= hi) as usize;
        }
        assert!(covered >= 930, "{covered}");
    }

    #[test]
    fn zero_noise_never_fails() {
        let s = run_trials(&zero_noise_config(40), Execution::Parallel).unwrap();
        assert_eq!(s.failures, 0);
    }

    #[test]
    fn reproducible_across_policies() {
        let mut c = zero_noise_config(30);
        c.up = UplinkSpec::new(Field::gf(2).unwrap(), vec![0.9, 0.1]).unwrap();
        c.down = DownlinkSpec::new(2, vec![Dmc::bsc(0.05).unwrap(); 3]).unwrap();
        let a = run_trials(&c, Execution::Parallel).unwrap();
        let b = run_trials(&c, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.failures > 0);
    }

    #[test]
    fn quantization_floors() {
        let f = Field::gf(4).unwrap();
        let mut r = RateTuple::zeros(3);
        r.set(MessageId::Private(0), parse_rational("39/100").unwrap()).unwrap();
        r.set(MessageId::Common(0, 1), parse_rational("19/100").unwrap()).unwrap();
        let k = quantize(&r, 24, &f);
        assert_eq!(k.get(MessageId::Private(0)), 4);
        assert_eq!(k.get(MessageId::Common(0, 1)), 2);
        let f3 = Field::gf(3).unwrap();
        // 10 * 1 / log2(3) = 6.3
        let one = RateTuple::zeros(2).with(MessageId::Private(1), parse_rational("1").unwrap()).unwrap();
        assert_eq!(quantize(&one, 10, &f3).get(MessageId::Private(1)), 6);
    }

    #[test]
    fn sweep_single_value_matches_run() {
        let c = zero_noise_config(10);
        let rows = sweep(&c, &Axis::N(vec![12]), Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].stats, run_trials(&c, Execution::Sequential).unwrap());
        assert!(sweep(&c, &Axis::N(vec![]), Execution::Sequential).is_err());
        assert!(sweep(&c, &Axis::RateScale(vec![]), Execution::Sequential).is_err());
        assert!(run_trials(&zero_noise_config(0), Execution::Sequential).is_err());
    }

    #[test]
    fn relay_trials_noiseless() {
        let up = UplinkSpec::noiseless(Field::gf(2).unwrap());
        let s = run_relay_trials(&up, 4, 8, 50, 3, Execution::Parallel).unwrap();
        assert_eq!(s.failures, 0);
    }
}
