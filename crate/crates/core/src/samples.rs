//! Small worked inputs: a sensor stream, two hand-built automata and the
//! queries that go with them. Used by tests, the CLI and the benchmarks.

use crate::cea::{ClockCondition, TimedCea, Transition};
use crate::cel::CelFormula;
use crate::model::{Event, TimedStream, Value, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;

/// Temperature/humidity readings with decimal timestamps.
pub fn sensor_stream() -> TimedStream {
    let rows: [(&str, &str, i64, &str); 9] = [
        ("H", "hum", 25, "1.2"),
        ("T", "temp", 45, "1.33"),
        ("H", "hum", 20, "2.5"),
        ("H", "hum", 25, "3.7"),
        ("T", "temp", 40, "4.5"),
        ("T", "temp", 42, "5.3"),
        ("T", "temp", 25, "5.9"),
        ("H", "hum", 70, "6.1"),
        ("H", "hum", 18, "7.2"),
    ];
    TimedStream::from_items(
        rows.iter()
            .map(|(ty, a, v, t)| {
                let ts = Rational::parse_decimal(t).expect("fixture timestamp");
                (Event::new(*ty).with(*a, Value::Int(*v)), ts)
            })
            .collect(),
    )
    .expect("fixture timestamps increase")
}

/// A low humidity reading, a burst of temperatures and a high humidity
/// reading, each step within one time unit.
pub const HUMIDITY_BURST: &str = "PROJECT[X, Y, T]((H AS X :[0,1] (T (+)[0,1]) :[0,1] H AS Y) \
                                  FILTER (X[hum < 30] AND Y[hum > 30]))";

/// Two hot readings at most one unit apart followed by a dry reading, all
/// within five units.
pub const HOT_THEN_DRY: &str = "PROJECT[X, Y](((T AS X ;<=1 T ; H AS Y) WITHIN <=5) \
                                FILTER (T[temp > 40] AND H[hum < 25]))";

/// Rewrites every `temp > 40` filter to `temp >= 40`, so a reading of
/// exactly 40 counts as hot.
pub fn hot_at_least_40(phi: &CelFormula) -> CelFormula {
    phi.map_predicates(&|p| match p {
        Predicate::Basic { attr, cmp: Cmp::Gt, value: Value::Int(40) } if attr == "temp" => {
            Predicate::basic("temp", Cmp::Ge, Value::Int(40))
        }
        other => other.clone(),
    })
}

fn hot() -> Predicate {
    Predicate::basic("temp", Cmp::Gt, Value::Int(40))
}

fn dry() -> Predicate {
    Predicate::basic("hum", Cmp::Lt, Value::Int(25))
}

fn tr(
    from: usize,
    pred: Predicate,
    guard: ClockCondition,
    label: &[&str],
    resets: &[usize],
    to: usize,
) -> Transition {
    Transition {
        from,
        pred,
        guard,
        label: label.iter().map(|s| s.to_string()).collect::<VarSet>(),
        resets: resets.iter().copied().collect(),
        to,
    }
}

fn le(z: usize, c: i64) -> ClockCondition {
    ClockCondition::atom(z, Cmp::Le, Rational::from_integer(c))
}

/// One clock: a hot reading starts the clock, a second hot reading follows
/// within one unit and a dry reading within five; equivalent to
/// [`HOT_THEN_DRY`].
pub fn hot_then_dry_automaton() -> TimedCea {
    let mut a = TimedCea::new();
    for _ in 1..4 {
        a.add_state();
    }
    a.add_clock("z");
    let t = ClockCondition::True;
    a.add_transition(tr(0, hot(), t.clone(), &["X"], &[0], 1));
    a.add_transition(tr(1, Predicate::True, t.clone(), &[], &[], 1));
    a.add_transition(tr(1, hot(), le(0, 1), &[], &[], 2));
    a.add_transition(tr(2, Predicate::True, t, &[], &[], 2));
    a.add_transition(tr(2, dry(), le(0, 5), &["Y"], &[], 3));
    a.finals.insert(3);
    a
}

/// Two clocks: two hot readings, then two dry readings, where the first
/// dry reading is within five units of the first hot one and the second
/// within five of the second.
pub fn two_pairs_automaton() -> TimedCea {
    let mut a = TimedCea::new();
    for _ in 1..5 {
        a.add_state();
    }
    a.add_clock("z1");
    a.add_clock("z2");
    let t = ClockCondition::True;
    a.add_transition(tr(0, hot(), t.clone(), &["X"], &[0], 1));
    a.add_transition(tr(1, Predicate::True, t.clone(), &[], &[], 1));
    a.add_transition(tr(1, hot(), t.clone(), &["X"], &[1], 2));
    a.add_transition(tr(2, Predicate::True, t.clone(), &[], &[], 2));
    a.add_transition(tr(2, dry(), le(0, 5), &["Y"], &[], 3));
    a.add_transition(tr(3, Predicate::True, t, &[], &[], 3));
    a.add_transition(tr(3, dry(), le(1, 5), &["Y"], &[], 4));
    a.finals.insert(4);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::eval_cea_oracle;
    use crate::cel::{eval_cel_oracle, parse_query};
    use crate::model::ComplexEvent;

    #[test]
    fn hot_threshold_rewrite_admits_forty() {
        let phi = parse_query(HOT_THEN_DRY).unwrap();
        let relaxed = hot_at_least_40(&phi);
        assert_ne!(relaxed, phi);
        assert!(relaxed.to_string().contains("temp >= 40"));
        assert_eq!(hot_at_least_40(&relaxed), relaxed);
    }

    #[test]
    fn burst_query_finds_the_documented_match() {
        let phi = parse_query(HUMIDITY_BURST).unwrap();
        let out = eval_cel_oracle(&phi, &sensor_stream()).unwrap();
        let mut c = ComplexEvent::new(4, 8);
        c.bind("X", 4);
        c.bind("Y", 8);
        for i in 5..=7 {
            c.bind("T", i);
        }
        assert!(out.contains(&c), "{out:?}");
    }

    #[test]
    fn hot_then_dry_automaton_matches_its_query() {
        let phi = parse_query(HOT_THEN_DRY).unwrap();
        let s = sensor_stream();
        let a = hot_then_dry_automaton();
        a.validate().unwrap();
        assert_eq!(eval_cea_oracle(&a, &s).unwrap(), eval_cel_oracle(&phi, &s).unwrap());
    }
}
