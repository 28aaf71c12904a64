use agv_sched::exact::{solve_bnb, BnbConfig};
use agv_sched::ilp::{build_ilp, build_ilp_with, eval_assignment, BuildOptions};
use agv_sched::instance::{generate_instance, load_instance, save_instance, Instance};
use agv_sched::preprocess::{compute_time_windows, find_conflicts, Side};
use agv_sched::qubo::{bits_to_spins, decode_sample, default_penalty, lp_to_qubo, qubo_to_ising};
use agv_sched::verify::{check_schedule, objective_value, Schedule};
use num_rational::Rational64;
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize, i64, u64)> {
    (1usize..=5, 2usize..=6, prop::sample::select(vec![1i64, 3, 10, 40]), 0u64..1000)
}

fn instance((j, s, d, seed): (usize, usize, i64, u64)) -> Instance {
    generate_instance(j, s, d, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn saved_instances_load_back_identically(sh in shape()) {
        let inst = instance(sh);
        let text = save_instance(&inst);
        prop_assert_eq!(save_instance(&load_instance(text.as_bytes()).unwrap()), text);
    }

    #[test]
    fn every_vehicle_alone_meets_its_windows(sh in shape()) {
        let inst = instance(sh);
        let earliest = Schedule::earliest(&inst);
        let win = compute_time_windows(&inst);
        for j in 0..inst.n_agvs() {
            for k in 0..inst.path(j).len() {
                prop_assert_eq!(earliest.t_in[j][k], win.lower(j, k, Side::In));
                prop_assert_eq!(earliest.t_out[j][k], win.lower(j, k, Side::Out));
            }
        }
        if inst.n_agvs() == 1 {
            prop_assert!(check_schedule(&inst, &earliest).unwrap().is_empty());
        }
    }

    #[test]
    fn exact_schedules_pass_both_checkers(sh in shape()) {
        let inst = instance(sh);
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let rep = solve_bnb(&lp, &BnbConfig::default()).unwrap();
        if let Some(best) = &rep.best {
            prop_assert!(check_schedule(&inst, best).unwrap().is_empty());
            prop_assert!(eval_assignment(&lp, &best.to_lp_values(&inst, &lp)).unwrap().is_empty());
            prop_assert!(rep.objective.unwrap() >= objective_value(&inst, &Schedule::earliest(&inst)));
        }
    }

    #[test]
    fn compact_and_explicit_agree_on_the_optimum(sh in shape()) {
        let inst = instance(sh);
        let (win, conf) = (compute_time_windows(&inst), find_conflicts(&inst));
        let solve = |compact| {
            let lp = build_ilp_with(&inst, &win, &conf, &BuildOptions { compact, big_m_scale: Rational64::from_integer(1) });
            solve_bnb(&lp, &BnbConfig::default()).unwrap().objective
        };
        prop_assert_eq!(solve(false), solve(true));
    }

    #[test]
    fn encoding_round_trips_in_range_values(sh in (1usize..=3, 2usize..=4, 1i64..=10, 0u64..1000), pick in any::<u64>()) {
        let inst = instance(sh);
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (_, enc) = lp_to_qubo(&lp, default_penalty(&lp)).unwrap();
        let x: Vec<i64> = lp
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| v.lo + (pick.rotate_left(i as u32 * 7) % (v.hi - v.lo + 1) as u64) as i64)
            .collect();
        prop_assert_eq!(decode_sample(&enc.encode(&lp, &x), &enc).unwrap().values, x);
    }

    #[test]
    fn ising_and_qubo_energies_coincide(sh in (1usize..=3, 2usize..=4, 1i64..=10, 0u64..1000), seed in any::<u64>()) {
        let inst = instance(sh);
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (q, _) = lp_to_qubo(&lp, default_penalty(&lp)).unwrap();
        let m = qubo_to_ising(&q);
        let x: Vec<u8> = (0..q.n_bits).map(|i| (seed.rotate_left(i as u32) & 1) as u8).collect();
        prop_assert_eq!(q.energy(&x), m.energy(&bits_to_spins(&x)));
    }

    #[test]
    fn doubling_weights_doubles_the_objective(sh in shape()) {
        let inst = instance(sh);
        let mut doc: serde_json::Value = serde_json::from_str(&save_instance(&inst)).unwrap();
        for agv in doc["agvs"].as_array_mut().unwrap() {
            let w = agv["weight"].as_f64().unwrap();
            agv["weight"] = serde_json::json!(2.0 * w);
        }
        let heavy = load_instance(doc.to_string().as_bytes()).unwrap();
        let sch = Schedule::earliest(&inst);
        prop_assert_eq!(objective_value(&heavy, &sch), objective_value(&inst, &sch) * 2);
    }
}
