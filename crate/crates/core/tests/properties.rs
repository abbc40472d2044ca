//! Property tests for the model, the logic, the automata and the streaming
//! structures. Complex inputs come from the seeded generators, so each case
//! is reproducible from its seed.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use tcer_core::cea::{eval_cea_oracle, guard_sat, Monotonicity};
use tcer_core::cel::{eval_cel_oracle, parse_query};
use tcer_core::compiler::compile;
use tcer_core::determinize::{predicate_of_type, predicate_types, RegionSpace};
use tcer_core::gen::{random_formula, random_monotonic_automaton, random_stream, random_value_predicate, rng};
use tcer_core::model::{ComplexEvent, Event, Interval, Value, VarSet};
use tcer_core::predicate::Predicate;
use tcer_core::streaming::{merge_gadgets, Direction, Evaluator, Gadget};
use tcer_core::{ClockCondition, ClockValuation, Cmp, Rational};

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..1000, 1i64..50).prop_map(|(n, d)| Rational::new(n, d))
}

fn complex_event() -> impl Strategy<Value = ComplexEvent> {
    (1usize..6, 0usize..6, proptest::collection::vec((0usize..3, 0usize..6), 0..6)).prop_map(|(start, len, binds)| {
        let mut c = ComplexEvent::new(start, start + len);
        for (x, off) in binds {
            c.bind(["X", "Y", "Z"][x], start + off.min(len));
        }
        c
    })
}

fn var_set() -> impl Strategy<Value = VarSet> {
    proptest::sample::subsequence(vec!["X", "Y", "Z"], 0..=3)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn event() -> impl Strategy<Value = Event> {
    (0usize..3, -3i64..8).prop_map(|(t, v)| Event::new(["A", "B", "C"][t]).with("v", Value::Int(v)))
}

proptest! {
    #[test]
    fn rational_add_sub_roundtrip(a in rational(), b in rational()) {
        prop_assert_eq!((a + b) - b, a);
    }

    #[test]
    fn union_is_commutative_associative_idempotent(a in complex_event(), b in complex_event(), c in complex_event()) {
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        prop_assert_eq!(a.union(&a), a);
    }

    #[test]
    fn nested_projection_is_intersection(c in complex_event(), l in var_set(), m in var_set()) {
        let both: VarSet = l.intersection(&m).cloned().collect();
        prop_assert_eq!(c.project(&l).project(&m), c.project(&both));
    }

    #[test]
    fn predicate_connectives(seed in any::<u64>(), e in event()) {
        let mut r = rng(seed);
        let (p, q) = (random_value_predicate(&mut r), random_value_predicate(&mut r));
        prop_assert_eq!(Predicate::negate(p.clone()).sat(&e), !p.sat(&e));
        prop_assert_eq!(Predicate::and(p.clone(), q.clone()).sat(&e), p.sat(&e) && q.sat(&e));
    }

    #[test]
    fn predicate_types_partition_events(seed in any::<u64>(), e in event()) {
        let mut r = rng(seed);
        let preds: Vec<Predicate> = (0..3).map(|_| random_value_predicate(&mut r)).collect();
        let refs: Vec<&Predicate> = preds.iter().collect();
        let holding = predicate_types(&refs)
            .iter()
            .filter(|signs| predicate_of_type(&refs, signs).sat(&e))
            .count();
        prop_assert_eq!(holding, 1);
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let phi = random_formula(&mut rng(seed), 4);
        prop_assert_eq!(parse_query(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn or_grows_and_intersects(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (random_formula(&mut r, 2), random_formula(&mut r, 2));
        let s = random_stream(&mut r, 6);
        let (sf, sg) = (eval_cel_oracle(&f, &s).unwrap(), eval_cel_oracle(&g, &s).unwrap());
        let or = eval_cel_oracle(&f.clone().or(g.clone()), &s).unwrap();
        let and = eval_cel_oracle(&f.and(g), &s).unwrap();
        prop_assert!(sf.is_subset(&or) && sg.is_subset(&or));
        prop_assert_eq!(and, sf.intersection(&sg).cloned().collect::<BTreeSet<_>>());
    }

    #[test]
    fn unbounded_time_operators_are_untimed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (random_formula(&mut r, 2), random_formula(&mut r, 2));
        let s = random_stream(&mut r, 6);
        let all = Interval::unbounded();
        prop_assert_eq!(
            eval_cel_oracle(&f.clone().within(all.clone()), &s).unwrap(),
            eval_cel_oracle(&f, &s).unwrap()
        );
        prop_assert_eq!(
            eval_cel_oracle(&f.clone().timed_seq(all, g.clone()), &s).unwrap(),
            eval_cel_oracle(&f.seq(g), &s).unwrap()
        );
    }

    #[test]
    fn oracle_outputs_are_well_formed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 3);
        let s = random_stream(&mut r, 7);
        for c in eval_cel_oracle(&f, &s).unwrap() {
            prop_assert!(1 <= c.start && c.start <= c.end && c.end <= s.len());
            prop_assert!(c.all_indices().iter().all(|&i| c.start <= i && i <= c.end));
        }
    }

    #[test]
    fn compiled_automata_are_well_formed_and_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_formula(&mut r, 3);
        let a = compile(&f);
        prop_assert!(a.check_structure().is_ok());
        let s = random_stream(&mut r, 6);
        prop_assert_eq!(eval_cea_oracle(&a, &s).unwrap(), eval_cel_oracle(&f, &s).unwrap());
    }

    #[test]
    fn reset_zeroes_and_extends_domain(vals in proptest::collection::vec(proptest::option::of(rational()), 1..5), mask in any::<u8>()) {
        let nu = ClockValuation(vals.clone());
        let zs: BTreeSet<usize> = (0..vals.len()).filter(|z| mask & (1 << z) != 0).collect();
        let out = nu.reset(&zs);
        for z in 0..vals.len() {
            if zs.contains(&z) {
                prop_assert_eq!(out.get(z), Some(Rational::ZERO));
            } else {
                prop_assert_eq!(out.get(z), nu.get(z));
            }
        }
        prop_assert!(nu.domain().is_subset(&out.domain()));
    }

    #[test]
    fn uninitialized_clocks_fail_guards(c in rational()) {
        let g = ClockCondition::or(
            ClockCondition::atom(0, Cmp::Le, c),
            ClockCondition::atom(0, Cmp::Gt, c),
        );
        prop_assert!(!guard_sat(&ClockValuation::empty(1), &g));
        prop_assert!(guard_sat(&ClockValuation(vec![Some(Rational::ZERO)]), &g));
    }

    #[test]
    fn valuations_in_one_region_agree_on_guards(a in 0i64..40, b in 0i64..40, c in 0i64..40, d in 0i64..40) {
        let k = Rational::new(5, 2);
        let guards = [
            ClockCondition::atom(0, Cmp::Le, k),
            ClockCondition::atom(1, Cmp::Gt, Rational::ONE),
            ClockCondition::atom(0, Cmp::Eq, Rational::new(3, 2)),
        ];
        let space = RegionSpace::for_guards(2, &guards.iter().collect::<Vec<_>>());
        let q = |n: i64| Rational::new(n, 4);
        let (u, v) = (
            ClockValuation(vec![Some(q(a)), Some(q(b))]),
            ClockValuation(vec![Some(q(c)), Some(q(d))]),
        );
        let scaled = |nu: &ClockValuation| ClockValuation(nu.0.iter().map(|x| x.map(|x| space.scaled(x))).collect());
        if space.region_of(&scaled(&u)) == space.region_of(&scaled(&v)) {
            for g in &guards {
                prop_assert_eq!(guard_sat(&u, g), guard_sat(&v, g));
            }
        }
    }

    #[test]
    fn merged_gadgets_act_like_their_composition(
        t1 in 0i64..20, t2 in 0i64..20, c1 in 0i64..12, c2 in 0i64..12,
        resets in proptest::collection::btree_set(0i64..20, 1..5), ge in any::<bool>(),
    ) {
        let dir = if ge { Direction::Ge } else { Direction::Le };
        let h = |n: i64| Rational::new(n, 2);
        let items: Vec<Rational> = resets.into_iter().map(h).collect();
        let apply = |g: Gadget, xs: &[Rational]| -> Vec<Rational> {
            let check = |t0, c, xs: &[Rational]| xs.iter().copied().filter(|&r| dir.passes(t0, c, r)).collect::<Vec<_>>();
            match g {
                Gadget::Void => xs.to_vec(),
                Gadget::Empty => Vec::new(),
                Gadget::Reset(t) => xs.iter().map(|_| t).collect(),
                Gadget::Check { t0, c } => check(t0, c, xs),
                Gadget::Composed { t, t0, c } => check(t0, c, xs).iter().map(|_| t).collect(),
            }
        };
        let exit_max = items.iter().map(|&r| dir.rank(r)).max().unwrap();
        let outers = [Gadget::Reset(h(t1)), Gadget::Check { t0: h(t1), c: h(c1) }, Gadget::Composed { t: h(t1), t0: h(t2), c: h(c1) }];
        let inners = [Gadget::Void, Gadget::Reset(h(t2)), Gadget::Check { t0: h(t2), c: h(c2) }, Gadget::Composed { t: h(t2), t0: h(t1), c: h(c2) }];
        for o in outers {
            for i in inners {
                let merged = merge_gadgets(o, i, exit_max, dir);
                prop_assert_eq!(apply(merged, &items), apply(o, &apply(i, &items)), "{:?} ∘ {:?}", o, i);
            }
        }
    }

    #[test]
    fn streaming_agrees_with_the_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mode = if r.gen_bool(0.5) { Monotonicity::Le } else { Monotonicity::Ge };
        let a = random_monotonic_automaton(&mut r, mode);
        let n = r.gen_range(1..=12);
        let s = random_stream(&mut r, n);
        let want = eval_cea_oracle(&a, &s).unwrap();
        let mut ev = Evaluator::new(&a).unwrap();
        let mut got = BTreeSet::new();
        for (e, t) in s.iter() {
            ev.push(e, *t).unwrap();
            ev.for_each_output(|c| { got.insert(c); });
        }
        prop_assert_eq!(got, want);
        if mode == Monotonicity::Le {
            prop_assert!(ev.stats().max_list_len <= a.num_states + 2);
        }
        prop_assert!(ev.stats().max_odepth <= 11);
    }
}
