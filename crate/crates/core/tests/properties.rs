mod common;

use moldsched::classifier::{classify, interval_check, partition_check};
use moldsched::makespan_oms::{default_epsilon, makespan_lower_bound, oms};
use moldsched::oracle::{brute_makespan, brute_welfare, OracleLimits};
use moldsched::params::{search_params, search_params_exact, theta_bound};
use moldsched::rational::{q, Rational};
use moldsched::scheduler::{
    group_accounting_check, min_workload_check, unit_algo, unit_algo_with, utilization, validate_schedule,
    width_check, UnitAlgoOptions,
};
use moldsched::task_model::{canonical_processors, SpeedupProfile, Task, TaskSet};
use moldsched::welfare_greedy::{gen_greedy, marginal_order};
use moldsched::workbench::io::{instance_to_json, parse_instance};
use proptest::prelude::*;

fn rational(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_num, 1..=max_den).prop_map(|(n, d)| q(n, d))
}

/// A valid table profile: constant on `[1, delta]`, non-decreasing after.
fn profile(delta: usize, k: usize) -> impl Strategy<Value = SpeedupProfile> {
    (rational(200, 8), prop::collection::vec(0i64..6, k - delta.min(k))).prop_map(move |(base, steps)| {
        let mut ws = vec![base.clone(); delta.min(k)];
        let mut w = base;
        for s in steps {
            w = &w + &q(s, 4);
            ws.push(w.clone());
        }
        SpeedupProfile::table(ws)
    })
}

fn instance(max_n: usize) -> impl Strategy<Value = TaskSet> {
    (1usize..=12, 0usize..=6, 1usize..=3)
        .prop_flat_map(move |(delta, extra, m_mult)| {
            let k = delta + extra;
            (Just((delta, k, k * m_mult)), prop::collection::vec(profile(delta, k), 1..=max_n))
        })
        .prop_map(|((delta, k, m), profiles)| {
            let tasks = profiles.into_iter().enumerate().map(|(i, p)| Task::new(i as u64, p)).collect();
            TaskSet::new(delta, k, m, tasks).unwrap()
        })
}

/// Instance plus a deadline no task misses.
fn instance_with_deadline(max_n: usize) -> impl Strategy<Value = (TaskSet, Rational)> {
    (instance(max_n), 0i64..=40).prop_map(|(ts, u)| {
        let d = &common::slowest_fastest_time(&ts) * &(q(1, 1) + q(u, 10));
        (ts, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_time_sits_in_the_last_slot((ts, d) in instance_with_deadline(6), shrink in 1i64..=20) {
        // shrink the deadline too, so some tasks become infeasible
        let d = &d * &q(shrink, 10);
        for t in ts.tasks() {
            if let Some(g) = canonical_processors(t, &d, ts.k()) {
                let time = ts.exec_time(t, g).unwrap();
                prop_assert!(time <= d);
                prop_assert!(time > d.scale(g - 1).div_int(g));
            } else {
                prop_assert!(t.profile.fastest_time(ts.k()) > d);
            }
        }
    }

    #[test]
    fn speedup_is_linear_then_workload_grows(ts in instance(4)) {
        for t in ts.tasks() {
            let t1 = ts.exec_time(t, 1).unwrap();
            for p in 1..=ts.delta() {
                prop_assert_eq!(ts.exec_time(t, p).unwrap(), t1.div_int(p));
            }
            for p in 1..ts.k() {
                prop_assert!(ts.workload(t, p).unwrap() <= ts.workload(t, p + 1).unwrap());
            }
        }
    }

    #[test]
    fn canonical_count_shrinks_as_deadline_grows(ts in instance(4), a in rational(400, 16), b in rational(400, 16)) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for t in ts.tasks() {
            if let (Some(g_lo), Some(g_hi)) = (canonical_processors(t, &lo, ts.k()), canonical_processors(t, &hi, ts.k())) {
                prop_assert!(g_lo >= g_hi);
            }
        }
    }

    #[test]
    fn classification_is_a_partition_with_class_bounds((ts, d) in instance_with_deadline(20)) {
        let params = search_params(ts.delta()).unwrap();
        let cls = classify(&ts, &d, &params);
        prop_assert!(partition_check(&cls, &ts).is_valid());
        let report = interval_check(&cls, &ts, &params);
        prop_assert!(report.is_valid(), "{}", report);
    }

    #[test]
    fn classification_ignores_order_and_scale((ts, d) in instance_with_deadline(12), factor in rational(50, 7)) {
        let params = search_params(ts.delta()).unwrap();
        let cls = classify(&ts, &d, &params);

        let mut reversed: Vec<Task> = ts.tasks().to_vec();
        reversed.reverse();
        let reordered = TaskSet::new(ts.delta(), ts.k(), ts.m(), reversed).unwrap();
        prop_assert_eq!(&classify(&reordered, &d, &params), &cls);

        let scaled_tasks = ts.tasks().iter().map(|t| {
            let ws = (1..=ts.k()).map(|p| &ts.workload(t, p).unwrap() * &factor).collect();
            Task::new(t.id, SpeedupProfile::table(ws))
        }).collect();
        let scaled = TaskSet::new(ts.delta(), ts.k(), ts.m(), scaled_tasks).unwrap();
        let scaled_cls = classify(&scaled, &(&d * &factor), &params);
        prop_assert_eq!(scaled_cls.dedicated, cls.dedicated);
        prop_assert_eq!(scaled_cls.classes, cls.classes);
        prop_assert_eq!(scaled_cls.short, cls.short);
    }

    #[test]
    fn schedules_are_valid_and_meet_the_bound_when_rejecting(
        (ts, d) in instance_with_deadline(40),
        shuffle in prop::option::of(any::<u64>()),
    ) {
        let params = search_params(ts.delta()).unwrap();
        let options = UnitAlgoOptions { shuffle_seed: shuffle };
        let (s, trace) = unit_algo_with(&ts, &d, &params, &options).unwrap();
        let report = validate_schedule(&s, &ts);
        prop_assert!(report.is_valid(), "{}", report);
        prop_assert!(width_check(&s, &ts, &params).is_valid());
        prop_assert!(min_workload_check(&s, &ts, &d).is_valid());
        let groups = group_accounting_check(&trace, &params, &d);
        prop_assert!(groups.is_valid(), "{}", groups);
        prop_assert!(trace.examinations <= 2 * ts.len() + 1);
        if !s.rejected.is_empty() {
            let theta = theta_bound(&params, ts.k()).theta(ts.m());
            prop_assert!(utilization(&s) >= theta, "{} < {}", utilization(&s), theta);
        }
        if shuffle.is_none() {
            prop_assert_eq!(unit_algo(&ts, &d, &params).unwrap(), s);
        }
    }

    #[test]
    fn oms_result_is_feasible_and_converged(ts in instance(10)) {
        let params = search_params(ts.delta()).unwrap();
        let group_fits = ts.m() >= params.group_width;
        match oms(&ts, &params, &default_epsilon()) {
            Ok(res) => {
                prop_assert!(res.converged());
                prop_assert!(res.schedule.is_complete());
                prop_assert_eq!(&res.schedule.d, &res.upper);
                prop_assert!(validate_schedule(&res.schedule, &ts).is_valid());
                prop_assert!(res.upper >= makespan_lower_bound(&ts));
                if !res.fast_exit {
                    prop_assert!(!unit_algo(&ts, &res.lower, &params).unwrap().is_complete());
                }
            }
            Err(e) => prop_assert!(!group_fits, "{}", e),
        }
    }

    #[test]
    fn greedy_accepts_a_prefix_at_full_efficiency(seed in any::<u64>()) {
        let ts = common::tiny(seed, true);
        let tau = common::tight_deadline(seed, &ts);
        let params = search_params(ts.delta()).unwrap();
        let res = gen_greedy(&ts, &tau, &params).unwrap();
        let order: Vec<u64> = marginal_order(&ts, &tau).unwrap().candidates.iter().map(|c| c.id).collect();
        prop_assert_eq!(&res.accepted[..], &order[..res.accepted_prefix_len]);
        prop_assert!(res.scheduler_runs <= ts.len());
        prop_assert_eq!(&res.alpha, &Rational::one());
        prop_assert!(res.welfare <= res.upper_bound);
        let opt = brute_welfare(&ts, &tau, &OracleLimits::default()).unwrap();
        prop_assert!(res.welfare <= opt && opt <= res.upper_bound);
    }

    #[test]
    fn oracle_never_beats_lower_bound_nor_loses_to_oms(seed in any::<u64>()) {
        let ts = common::tiny(seed, false);
        let params = search_params(ts.delta()).unwrap();
        let opt = brute_makespan(&ts, &OracleLimits::default()).unwrap();
        prop_assert!(opt >= makespan_lower_bound(&ts));
        let res = oms(&ts, &params, &default_epsilon()).unwrap();
        prop_assert!(opt <= res.upper);
    }

    #[test]
    fn instance_files_round_trip(ts in instance(6)) {
        prop_assert_eq!(parse_instance(&instance_to_json(&ts)).unwrap(), ts);
    }
}

#[test]
fn parameters_satisfy_every_constraint_exactly() {
    for delta in 1..=120 {
        let p = search_params(delta).unwrap();
        assert!(p.check().is_valid(), "delta {delta}: {}", p.check());
        assert_eq!(search_params(delta).unwrap(), p);
        assert!(p.group_width <= delta);
    }
    for delta in 1..=40 {
        let exact = search_params_exact(delta).unwrap();
        assert!(exact.check().is_valid());
        assert!(exact.class_limit >= search_params(delta).unwrap().class_limit);
    }
}

// Bisection assumes success at d implies success at every larger d. It does
// not hold for this scheduler (a task can move from a narrow dedicated block
// to a full-width group as d grows); this measures how often it bites.
#[test]
fn deadline_monotonicity_is_measured_not_assumed() {
    let mut broken = 0;
    let instances = 200;
    for seed in 0..instances {
        let ts = common::tiny(seed, false);
        let params = search_params(ts.delta()).unwrap();
        let lb = makespan_lower_bound(&ts);
        let mut seen_success = false;
        for i in 0..=40 {
            let ok = unit_algo(&ts, &(&lb * &(q(1, 1) + q(i, 10))), &params).unwrap().is_complete();
            if seen_success && !ok {
                broken += 1;
                break;
            }
            seen_success |= ok;
        }
    }
    eprintln!("feasibility not monotone in the deadline on {broken} of {instances} tiny instances");
    assert!(broken < instances);
}
