mod common;

use tcer_core::cea::{eval_cea_oracle, is_deterministic};
use tcer_core::determinize::{check_sync, determinize, size_bound, SyncVerdict};
use rand::Rng;
use tcer_core::gen::{conflicting_automaton, random_stream, random_sync_automaton, rng};
use tcer_core::samples::{hot_then_dry_automaton, two_pairs_automaton};

#[test]
fn random_synchronous_automata_determinize_soundly() {
    for seed in 0..50u64 {
        let mut r = rng(1000 + seed);
        let a = random_sync_automaton(&mut r);
        let d = determinize(&a).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(is_deterministic(&d), "seed {seed}");
        assert!((d.size() as u128) <= size_bound(&a), "seed {seed}");
        assert_eq!(check_sync(&d), SyncVerdict::Yes, "seed {seed}");
        for _ in 0..10 {
            let n = r.gen_range(1..=8);
            let s = random_stream(&mut r, n);
            assert_eq!(eval_cea_oracle(&d, &s).unwrap(), eval_cea_oracle(&a, &s).unwrap(), "seed {seed}");
        }
    }
}

#[test]
fn sample_automata_are_synchronous() {
    assert_eq!(check_sync(&hot_then_dry_automaton()), SyncVerdict::Yes);
    assert_eq!(check_sync(&two_pairs_automaton()), SyncVerdict::Yes);
}

#[test]
fn conflicting_family_yields_valid_witnesses() {
    for seed in 0..20u64 {
        let a = conflicting_automaton(&mut rng(seed));
        match check_sync(&a) {
            SyncVerdict::No(w) => assert!(common::witness_is_valid(&a, &w), "seed {seed}: {w:?}"),
            v => panic!("seed {seed}: {v:?}"),
        }
    }
}
