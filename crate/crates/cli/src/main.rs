//! `ffmwrc` command-line front end.
//!
//! Exit status: 0 success or affirmative verdict, 1 negative verdict,
//! 2 config or usage error, 3 capability bound exceeded, 4 internal error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ffmwrc::capacity::{
    caps_from_channel, fdfp_feasible, format_rate, FdfpVerdict, InnerVerdict, OuterVerdict, RegionReport,
};
use ffmwrc::config::{RunConfig, SimMode};
use ffmwrc::schedule::{build_table, reindex_users, verify_props, SymbolLengths};
use ffmwrc::shuffle::{apply_to_table, decode_matrix, run_shuffle, simplify};
use ffmwrc::sim::{quantize, run_relay_trials, symbols_for, sweep, sweep_csv, Axis, SweepRow};
use ffmwrc::{Error, Execution};

#[derive(Parser)]
#[command(name = "ffmwrc", version, about = "Finite-field multi-way relay channel: region checks, schedules and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a rate tuple against the achievable region and the outer bound.
    RegionCheck(Common),
    /// Evaluate both region tests over a 2-D grid of rates; CSV output.
    RegionSweep(Common),
    /// Decide whether the private-message-only scheme supports the rates.
    FdfpCheck(Common),
    /// Build the uplink message table, check it and run the shuffle.
    ScheduleBuild(Common),
    /// Monte Carlo block error rate; CSV output.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write data here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

/// Verdict carried back to `main`.
enum Outcome {
    Yes,
    No,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Domain(_) | Error::Config { .. } | Error::Construction(_) => 2,
        Error::Capability { .. } => 3,
        Error::Internal(_) => 4,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| Error::Config { field: "<file>".into(), message: format!("{}: {e}", c.config.display()) })?;
    RunConfig::from_json(&text)
}

fn region_check(c: &Common) -> Result<Outcome, Error> {
    let cfg = load(c)?;
    let (ch, r) = cfg.rates_for_channel()?;
    let rep = RegionReport::evaluate(r, &ch.up, &ch.down)?;
    let mut s = String::new();
    writeln!(s, "rates: {r}").unwrap();
    for (a, sum) in rep.sums.iter().enumerate() {
        writeln!(s, "sum rate R^S_{} = {}", a + 1, format_rate(sum)).unwrap();
    }
    writeln!(s, "uplink bound log2 F - H(N0) = {:.9}", rep.uplink_bound).unwrap();
    let d = &rep.downlink;
    writeln!(s, "downlink margin min_a I(X0;Y_a) - R^S_a = {:.9}", d.margin).unwrap();
    match d.gap {
        Some(g) => writeln!(s, "  optimality gap <= {g:.3e} ({} iterations)", d.iterations).unwrap(),
        None => writeln!(s, "  optimality gap not certified ({} iterations)", d.iterations).unwrap(),
    }
    let p: Vec<String> = d.argmax.probs().iter().map(|x| format!("{x:.6}")).collect();
    writeln!(s, "  argmax p(x0) = ({})", p.join(", ")).unwrap();
    let inner = match rep.inner {
        InnerVerdict::Achievable => "Achievable",
        InnerVerdict::NotShown => "NotShown",
    };
    let outer = match rep.outer {
        OuterVerdict::InsideOrBoundary => "InsideOrBoundary",
        OuterVerdict::Outside => "Outside",
    };
    writeln!(s, "inner: {inner}").unwrap();
    writeln!(s, "outer: {outer}").unwrap();
    emit(&c.out, &s)?;
    Ok(if rep.inner == InnerVerdict::Achievable { Outcome::Yes } else { Outcome::No })
}

fn region_sweep(c: &Common) -> Result<Outcome, Error> {
    let cfg = load(c)?;
    let ch = cfg.require_channel()?;
    let slice = cfg.region_slice()?;
    eprintln!("region-sweep: {} x {} step {}", slice.x, slice.y, format_rate(&slice.step));
    let rows = slice.evaluate(&ch.up, &ch.down, Execution::Parallel)?;
    emit(&c.out, &slice.to_csv(&rows))?;
    Ok(Outcome::Yes)
}

fn fdfp_check(c: &Common) -> Result<Outcome, Error> {
    let cfg = load(c)?;
    let r = cfg.require_rates()?;
    let caps = match &cfg.caps {
        Some(caps) => caps.clone(),
        None => {
            let (ch, _) = cfg.rates_for_channel()?;
            caps_from_channel(&ch.up, &ch.down)?
        }
    };
    let mut s = String::new();
    let caps_text: Vec<String> = caps.iter().map(format_rate).collect();
    writeln!(s, "caps C_a: ({})", caps_text.join(", ")).unwrap();
    let verdict = fdfp_feasible(r, &caps)?;
    let outcome = match &verdict {
        FdfpVerdict::Feasible { splits, effective } => {
            writeln!(s, "Feasible").unwrap();
            for sp in splits {
                let (i, j) = sp.pair;
                writeln!(
                    s,
                    "  R{}_{} = {} (to user {}) + {} (to user {})",
                    i + 1,
                    j + 1,
                    format_rate(&sp.to_first),
                    i + 1,
                    format_rate(&sp.to_second),
                    j + 1
                )
                .unwrap();
            }
            let eff: Vec<String> = effective.iter().map(format_rate).collect();
            writeln!(s, "  effective private rates r = ({})", eff.join(", ")).unwrap();
            Outcome::Yes
        }
        FdfpVerdict::Infeasible(cert) => {
            writeln!(s, "Infeasible").unwrap();
            write!(s, "{cert}").unwrap();
            Outcome::No
        }
    };
    emit(&c.out, &s)?;
    Ok(outcome)
}

fn schedule_lengths(cfg: &RunConfig) -> Result<SymbolLengths, Error> {
    if let Some(k) = &cfg.lengths {
        return Ok(k.clone());
    }
    let r = cfg.require_rates()?;
    let ch = cfg.require_channel()?;
    let n = cfg
        .simulate
        .as_ref()
        .and_then(|s| s.n)
        .ok_or_else(|| Error::Config { field: "simulate.n".into(), message: "needed to quantize rates into lengths".into() })?;
    Ok(quantize(r, n, ch.up.field()))
}

/// Human-readable dump to stdout (or `--out`); the table JSON goes to
/// `<out>.json` when `--out` is given.
fn schedule_build(c: &Common) -> Result<Outcome, Error> {
    let cfg = load(c)?;
    let k = schedule_lengths(&cfg)?;
    let (perm, k) = reindex_users(&k);
    let table = build_table(&k)?;
    let report = verify_props(&table);
    let mut s = String::new();
    let perm_text: Vec<String> = perm.iter().map(|p| (p + 1).to_string()).collect();
    writeln!(s, "user order (new -> old): {}", perm_text.join(" ")).unwrap();
    let sums: Vec<String> = k.sums().iter().map(usize::to_string).collect();
    writeln!(s, "sum lengths k^S: ({})", sums.join(", ")).unwrap();
    writeln!(s).unwrap();
    write!(s, "{table}").unwrap();
    writeln!(s).unwrap();
    write!(s, "{report}").unwrap();
    if !report.is_ok() {
        emit(&c.out, &s)?;
        return Ok(Outcome::No);
    }
    let cols = simplify(&table);
    let shuffled = run_shuffle(&cols, k.users())?;
    writeln!(s).unwrap();
    writeln!(s, "shuffle: {} swaps in {} cycles", shuffled.log.len(), shuffled.cycles).unwrap();
    write!(s, "{}", shuffled.log_text()).unwrap();
    let final_table = apply_to_table(&table, &shuffled.columns);
    writeln!(s).unwrap();
    writeln!(s, "after shuffle:").unwrap();
    write!(s, "{final_table}").unwrap();
    let field_order = cfg.channel.as_ref().map(|ch| ch.up.field().clone());
    let field = match field_order {
        Some(f) => f,
        None => ffmwrc::gf::Field::gf(2)?,
    };
    writeln!(s).unwrap();
    let mut all_full = true;
    writeln!(s, "user 1: reads every column's row-1 symbol directly").unwrap();
    for a in 1..k.users() {
        let sys = decode_matrix(&shuffled.columns, a, &final_table)?;
        let rank = sys.matrix(&field).rank();
        let want = sys.unknowns.len();
        all_full &= rank == want;
        writeln!(s, "user {}: {} equations, {} unknowns, rank {}", a + 1, sys.equations.len(), want, rank).unwrap();
    }
    emit(&c.out, &s)?;
    if let Some(p) = &c.out {
        let mut jp = p.clone().into_os_string();
        jp.push(".json");
        std::fs::write(&jp, final_table.to_json())
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", PathBuf::from(&jp).display())))?;
    }
    Ok(if all_full { Outcome::Yes } else { Outcome::No })
}

fn simulate(c: &Common) -> Result<Outcome, Error> {
    let cfg = load(c)?;
    let s = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config { field: "simulate".into(), message: "required for this command".into() })?;
    let exec = Execution::Parallel;
    let mut rows = Vec::new();
    match s.mode {
        SimMode::Relay => {
            let up = &cfg.require_channel()?.up;
            if s.k.is_some() == s.rate.is_some() {
                return Err(Error::Config { field: "simulate.k".into(), message: "relay mode needs exactly one of k and rate".into() });
            }
            let ns = match (&s.axis, s.n) {
                (Some(Axis::N(ns)), _) => ns.clone(),
                (Some(Axis::RateScale(_)), _) => {
                    return Err(Error::Config {
                        field: "simulate.axis".into(),
                        message: "relay mode sweeps n only".into(),
                    })
                }
                (None, Some(n)) => vec![n],
                (None, None) => {
                    return Err(Error::Config { field: "simulate.n".into(), message: "required".into() })
                }
            };
            let seed = c.seed.or(cfg.seed).unwrap_or(0);
            for n in ns {
                let k = match &s.rate {
                    Some(r) => symbols_for(r, n, up.field()),
                    None => s.k.unwrap_or(0),
                };
                eprintln!("simulate: relay k={k} n={n} trials={}", s.trials);
                let stats = run_relay_trials(up, k, n, s.trials, seed, exec)?;
                rows.push(SweepRow { axis_value: n.to_string(), stats });
            }
        }
        SimMode::Scheme => {
            let tc = cfg.trial_config(c.seed)?;
            let points: Vec<(String, Axis)> = match &s.axis {
                Some(Axis::N(ns)) => ns.iter().map(|&n| (format!("n={n}"), Axis::N(vec![n]))).collect(),
                Some(Axis::RateScale(xs)) => xs
                    .iter()
                    .map(|x| (format!("rate scale {}", format_rate(x)), Axis::RateScale(vec![x.clone()])))
                    .collect(),
                None => vec![(format!("n={}", tc.n), Axis::N(vec![tc.n]))],
            };
            for (label, axis) in points {
                eprintln!("simulate: {label} trials={}", tc.trials);
                rows.extend(sweep(&tc, &axis, exec)?);
            }
        }
    }
    emit(&c.out, &sweep_csv(&rows))?;
    Ok(Outcome::Yes)
}

fn dispatch(cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::RegionCheck(c) => region_check(c),
        Command::RegionSweep(c) => region_sweep(c),
        Command::FdfpCheck(c) => fdfp_check(c),
        Command::ScheduleBuild(c) => schedule_build(c),
        Command::Simulate(c) => simulate(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::RegionCheck(c)
        | Command::RegionSweep(c)
        | Command::FdfpCheck(c)
        | Command::ScheduleBuild(c)
        | Command::Simulate(c) => c,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(4);
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
