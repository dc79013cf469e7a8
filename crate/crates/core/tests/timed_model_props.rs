use ctimer_core::{
    apply_event, path_duration, DurationMap, ExecutionPath, TimedEvent, TimerId, TimerValuation, TimerWidth,
};
use proptest::prelude::*;

const FUNCTIONS: [&str; 5] = ["f1", "f2", "f3", "f4", "f5"];

fn timers(n: usize) -> Vec<TimerId> {
    (0..n).map(|i| TimerId::new(format!("t{i}"), i)).collect()
}

fn durations(ds: &[u64]) -> DurationMap {
    FUNCTIONS.iter().zip(ds).map(|(f, d)| (*f, *d)).collect()
}

fn call(f: usize, ds: &[u64]) -> TimedEvent {
    TimedEvent::call(FUNCTIONS[f], ds[f])
}

#[derive(Debug, Clone)]
enum Ev {
    Call(usize),
    Reset(usize),
    Check,
}

fn event(e: &Ev, ds: &[u64], ts: &[TimerId]) -> TimedEvent {
    match e {
        Ev::Call(f) => call(*f, ds),
        Ev::Reset(t) => TimedEvent::Reset { timer: ts[*t].clone() },
        Ev::Check => TimedEvent::AssertCheck {
            expr: "t0 < 100".into(),
            outcome: true,
        },
    }
}

fn arb_durations() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..1_000_000, 5)
}

fn arb_events(timers: usize) -> impl Strategy<Value = Vec<Ev>> {
    prop::collection::vec(
        prop_oneof![
            4 => (0..5usize).prop_map(Ev::Call),
            1 => (0..timers).prop_map(Ev::Reset),
            1 => Just(Ev::Check),
        ],
        0..40,
    )
}

fn arb_calls() -> impl Strategy<Value = Vec<Ev>> {
    prop::collection::vec(
        prop_oneof![4 => (0..5usize).prop_map(Ev::Call), 1 => Just(Ev::Check)],
        0..40,
    )
}

fn path(evs: &[Ev], ds: &[u64], ts: &[TimerId]) -> ExecutionPath {
    ExecutionPath::new(evs.iter().map(|e| event(e, ds, ts)).collect())
}

/// Timer values computed directly: each timer sums the call durations seen
/// since its last reset.
fn oracle(evs: &[Ev], ds: &[u64], n: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    for e in evs {
        match e {
            Ev::Call(f) => v.iter_mut().for_each(|x| *x += ds[*f]),
            Ev::Reset(t) => v[*t] = 0,
            Ev::Check => {}
        }
    }
    v
}

fn run(evs: &[Ev], ds: &[u64], ts: &[TimerId], start: &TimerValuation) -> TimerValuation {
    evs.iter()
        .fold(start.clone(), |v, e| apply_event(&v, &event(e, ds, ts)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn duration_is_additive(ds in arb_durations(), a in arb_events(3), b in arb_events(3)) {
        let ts = timers(3);
        let d = durations(&ds);
        let (p1, p2) = (path(&a, &ds, &ts), path(&b, &ds, &ts));
        prop_assert_eq!(
            path_duration(&p1.concat(&p2), &d).unwrap(),
            path_duration(&p1, &d).unwrap() + path_duration(&p2, &d).unwrap()
        );
    }

    #[test]
    fn reset_touches_only_its_timer(
        values in prop::collection::vec(0u64..u64::MAX / 2, 1..6),
        pick in any::<prop::sample::Index>(),
    ) {
        let ts = timers(values.len());
        let t = pick.index(values.len());
        let before = TimerValuation::from_values(&ts, &values, TimerWidth::W64);
        let after = apply_event(&before, &TimedEvent::Reset { timer: ts[t].clone() }).unwrap();
        for i in 0..values.len() {
            let want = if i == t { 0 } else { values[i] };
            prop_assert_eq!(after.get(i), Some(want));
        }
    }

    #[test]
    fn calls_advance_all_timers_uniformly(
        ds in arb_durations(),
        values in prop::collection::vec(0u64..1u64 << 40, 2..6),
        evs in arb_calls(),
    ) {
        let ts = timers(values.len());
        let start = TimerValuation::from_values(&ts, &values, TimerWidth::W64);
        let end = run(&evs, &ds, &ts, &start);
        for i in 0..values.len() {
            for j in 0..values.len() {
                prop_assert_eq!(
                    end.get(i).unwrap() as i128 - end.get(j).unwrap() as i128,
                    values[i] as i128 - values[j] as i128
                );
            }
        }
    }

    #[test]
    fn without_resets_every_timer_holds_the_path_duration(
        ds in arb_durations(),
        n in 1usize..5,
        evs in arb_calls(),
    ) {
        let ts = timers(n);
        let end = run(&evs, &ds, &ts, &TimerValuation::zero(&ts, TimerWidth::W64));
        let total = path_duration(&path(&evs, &ds, &ts), &durations(&ds)).unwrap();
        prop_assert!(end.values().iter().all(|&v| v == total));
    }

    #[test]
    fn valuation_matches_direct_summation(ds in arb_durations(), evs in arb_events(3)) {
        let ts = timers(3);
        let end = run(&evs, &ds, &ts, &TimerValuation::zero(&ts, TimerWidth::W64));
        prop_assert_eq!(end.values(), &oracle(&evs, &ds, 3)[..]);
    }
}

/// Two timers, three resets, three checks and five calls: the path's
/// duration is the sum of the five call durations.
#[test]
fn worked_path_sums_the_five_calls() {
    let ds = [3u64, 5, 7, 11, 13];
    let d = durations(&ds);
    let ts = timers(2);
    let (t1, t2) = (ts[0].clone(), ts[1].clone());
    let reset = |t: &TimerId| TimedEvent::Reset { timer: t.clone() };
    let check = |e: &str| TimedEvent::AssertCheck {
        expr: e.into(),
        outcome: true,
    };
    let events = vec![
        reset(&t1),
        reset(&t2),
        call(0, &ds),
        call(2, &ds),
        check("a1(t1)"),
        reset(&t1),
        call(4, &ds),
        call(1, &ds),
        check("a2(t1)"),
        call(3, &ds),
        check("a3(t2)"),
    ];
    let p = ExecutionPath::new(events.clone());
    assert_eq!(p.end(), 11);
    let expected = ds[0] + ds[2] + ds[4] + ds[1] + ds[3];
    assert_eq!(path_duration(&p, &d).unwrap(), expected);

    let mut v = TimerValuation::zero(&ts, TimerWidth::W64);
    let mut seen = Vec::new();
    for e in &events {
        v = apply_event(&v, e).unwrap();
        if let TimedEvent::AssertCheck { .. } = e {
            seen.push(v.values().to_vec());
        }
    }
    // t1 is reset after f3, so a2 sees f5 + f2 only; t2 runs the whole way
    assert_eq!(seen[0], [ds[0] + ds[2], ds[0] + ds[2]]);
    assert_eq!(seen[1][0], ds[4] + ds[1]);
    assert_eq!(seen[2][1], expected);
}

#[test]
fn overflow_is_an_error_not_a_wrap() {
    let ts = timers(1);
    let v = TimerValuation::from_values(&ts, &[u32::MAX as u64 - 1], TimerWidth::W32);
    assert!(apply_event(&v, &TimedEvent::call("f1", 2)).is_err());
    assert!(apply_event(&v, &TimedEvent::call("f1", 1)).is_ok());
}
