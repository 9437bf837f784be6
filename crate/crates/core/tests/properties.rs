use ffmwrc::capacity::{fdfp_feasible, parse_rational, RateTuple};
use ffmwrc::channel::{mutual_info, DownlinkSpec, Dmc, InputDist, UplinkSpec};
use ffmwrc::codec::{MessageSet, Scheme};
use ffmwrc::config::RunConfig;
use ffmwrc::gf::{Fe, FeMatrix, FeVec, Field, Solution};
use ffmwrc::rng::Stream;
use ffmwrc::schedule::{build_table, reindex_users, verify_props, MessageTable, SymbolLengths};
use ffmwrc::shuffle::{chain_audit, decode_matrix, run_shuffle, simplify};
use ffmwrc::sim::{run_trials, wilson, Load, TrialConfig};
use ffmwrc::{Execution, MessageId};
use proptest::prelude::*;

const ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

fn field_and_elems() -> impl Strategy<Value = (Field, u32, u32, u32)> {
    prop::sample::select(ORDERS.to_vec()).prop_flat_map(|q| (Just(Field::gf(q).unwrap()), 0..q, 0..q, 0..q))
}

fn lengths(max_users: usize, max_k: usize) -> impl Strategy<Value = SymbolLengths> {
    (2..=max_users).prop_flat_map(move |users| {
        prop::collection::vec(0..=max_k, users * (users + 1) / 2)
            .prop_map(move |k| SymbolLengths::from_vec(users, k).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms((f, a, b, c) in field_and_elems()) {
        let (a, b, c) = (f.elem(a).unwrap(), f.elem(b).unwrap(), f.elem(c).unwrap());
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
        }
    }

    #[test]
    fn solve_recovers_planted_solution(q in prop::sample::select(ORDERS.to_vec()), n in 1usize..6, seed: u64) {
        let f = Field::gf(q).unwrap();
        let mut rng = Stream::new(seed).rng();
        let m = ffmwrc::gf::random_matrix(&f, n, n, &mut rng);
        let x = ffmwrc::gf::random_vec(&f, n, &mut rng);
        let b = FeVec::new(&f, (0..n).map(|r| {
            m.row(r).iter().zip(x.as_slice()).fold(Fe::ZERO, |acc, (&g, &v)| f.add(acc, f.mul(g, v)))
        }).collect()).unwrap();
        prop_assert!(m.rank() <= n);
        match m.solve(&b).unwrap() {
            Solution::Unique(y) => { prop_assert_eq!(m.rank(), n); prop_assert_eq!(y, x); }
            Solution::Underdetermined => prop_assert!(m.rank() < n),
            Solution::Inconsistent => prop_assert!(false, "planted system reported inconsistent"),
        }
    }

    #[test]
    fn rank_of_identity_blocks(q in prop::sample::select(ORDERS.to_vec()), n in 1usize..8) {
        let f = Field::gf(q).unwrap();
        prop_assert_eq!(FeMatrix::identity(&f, n).rank(), n);
        prop_assert_eq!(FeMatrix::zeros(&f, n, n + 1).rank(), 0);
    }

    #[test]
    fn mutual_info_bounded_by_input_entropy(p in 0.0f64..1.0, q in 0.0f64..0.5) {
        let d = InputDist::new(vec![p, 1.0 - p]).unwrap();
        let i = mutual_info(&d, &Dmc::bsc(q).unwrap()).unwrap();
        let h = ffmwrc::channel::binary_entropy(p);
        prop_assert!(i >= -1e-12 && i <= h + 1e-12);
    }

    #[test]
    fn sum_rates_add_up(k in prop::collection::vec(0u32..100, 6)) {
        let mut r = RateTuple::zeros(3);
        for (m, v) in MessageId::all(3).into_iter().zip(&k) {
            r.set(m, parse_rational(&format!("{v}/100")).unwrap()).unwrap();
        }
        for a in 0..3 {
            let want: u32 = MessageId::all(3).into_iter().zip(&k).filter(|(m, _)| !m.contains(a)).map(|(_, v)| v).sum();
            prop_assert_eq!(r.sum_rate(a).unwrap(), parse_rational(&format!("{want}/100")).unwrap());
        }
    }

    #[test]
    fn fdfp_feasible_under_generous_caps(k in prop::collection::vec(0u32..100, 6)) {
        let mut r = RateTuple::zeros(3);
        let mut total = 0;
        for (m, v) in MessageId::all(3).into_iter().zip(&k) {
            r.set(m, parse_rational(&format!("{v}/100")).unwrap()).unwrap();
            total += v;
        }
        let caps = vec![parse_rational(&format!("{total}/100")).unwrap(); 3];
        prop_assert!(fdfp_feasible(&r, &caps).unwrap().is_feasible());
    }

    #[test]
    fn reindex_puts_a_largest_sum_first(k in lengths(6, 6)) {
        let (perm, r) = reindex_users(&k);
        let mut sorted = perm.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..k.users()).collect::<Vec<_>>());
        let sums = r.sums();
        prop_assert!(sums.iter().all(|&s| s <= sums[0]));
        prop_assert_eq!(sums[0], *k.sums().iter().max().unwrap());
    }

    #[test]
    fn tables_satisfy_props_and_round_trip(k in lengths(5, 6)) {
        let (_, k) = reindex_users(&k);
        let t = build_table(&k).unwrap();
        let rep = verify_props(&t);
        prop_assert!(rep.is_ok(), "{}", rep);
        let carried = |k: &SymbolLengths| -> Vec<usize> {
            k.iter().filter(|(m, _)| (0..k.users()).any(|a| !m.contains(a))).map(|(_, v)| v).collect()
        };
        prop_assert_eq!(carried(&t.lengths()), carried(&k));
        prop_assert_eq!(MessageTable::from_json(&t.to_json()).unwrap(), t.clone());
        let w: usize = t.blocks.iter().map(|b| b.width).sum();
        prop_assert_eq!(w, k.sum(0));
    }

    #[test]
    fn shuffle_makes_every_system_solvable(k in lengths(5, 6)) {
        let (_, k) = reindex_users(&k);
        let t = build_table(&k).unwrap();
        let out = run_shuffle(&simplify(&t), k.users()).unwrap();
        prop_assert!(out.cycles <= k.sum(0) + 1);
        let f = Field::gf(2).unwrap();
        for a in 1..k.users() {
            let sys = decode_matrix(&out.columns, a, &t).unwrap();
            prop_assert_eq!(sys.matrix(&f).rank(), sys.unknowns.len());
            prop_assert!(chain_audit(&out.columns, a).is_ok());
        }
    }

    #[test]
    fn wilson_interval_brackets_estimate(trials in 1usize..5000, frac in 0.0f64..=1.0) {
        let failures = ((trials as f64) * frac).round() as usize;
        let (lo, hi) = wilson(failures, trials);
        let p = failures as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noiseless_recovery_is_exact(k in lengths(4, 2), q in prop::sample::select(vec![2u32, 3]), seed: u64) {
        let (_, k) = reindex_users(&k);
        let f = Field::gf(q).unwrap();
        let s = Scheme::new(&f, &k).unwrap();
        let msgs = MessageSet::random(&f, &k, &mut Stream::new(seed).rng());
        let u = s.relay_word(&msgs);
        for a in 0..k.users() {
            let got = s.recover_messages(a, &u, &msgs.known_to(a)).unwrap();
            for (m, w) in &got {
                prop_assert_eq!(w, msgs.get(*m));
            }
            prop_assert_eq!(got.len(), k.iter().filter(|(m, _)| !m.contains(a)).count());
        }
    }

    #[test]
    fn trials_ignore_execution_policy(k in lengths(3, 2), seed: u64) {
        let f = Field::gf(2).unwrap();
        let c = TrialConfig {
            up: UplinkSpec::new(f, vec![0.9, 0.1]).unwrap(),
            down: DownlinkSpec::new(2, vec![Dmc::bsc(0.05).unwrap(); k.users()]).unwrap(),
            load: Load::Lengths(k.clone()),
            n: 3 * k.sum(0).max(1),
            n_dl: Some(4 * k.sum(0).max(1) + 8),
            trials: 6,
            seed,
            input: None,
        };
        let a = run_trials(&c, Execution::Sequential).unwrap();
        let b = run_trials(&c, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn config_rejects_unknown_sections() {
    let err = RunConfig::from_json(r#"{"rates": {"users": 2}, "plot": true}"#).unwrap_err();
    assert!(err.to_string().contains("plot"), "{err}");
}
