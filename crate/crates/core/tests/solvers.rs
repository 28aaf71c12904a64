use agv_sched::anneal::{sbm_solve, SbmConfig, SbmVariant};
use agv_sched::exact::{brute_force_oracle, solve_bnb, BnbConfig};
use agv_sched::ilp::build_ilp;
use agv_sched::instance::{appendix_instance, load_instance, Instance};
use agv_sched::preprocess::{compute_time_windows, find_conflicts};
use agv_sched::suite::{ising_ground_state, random_ising};
use num_rational::Rational64;

fn shared_zone(w_a: f64, w_b: f64) -> Instance {
    let doc = format!(
        r#"{{
          "zones": ["s0", "s1", "s2"],
          "lanes": [{{"a": "s0", "b": "s1", "bidirectional": false}}, {{"a": "s1", "b": "s2", "bidirectional": false}}],
          "agvs": [
            {{"id": "a", "path": ["s0", "s1"], "release": 0, "weight": {w_a},
             "zone_time": {{"s0": 2, "s1": 2}}, "pass_time": {{"s0,s1": 0}}}},
            {{"id": "b", "path": ["s2", "s1"], "release": 0, "weight": {w_b},
             "zone_time": {{"s2": 2, "s1": 2}}, "pass_time": {{"s2,s1": 0}}}}
          ],
          "d_max": 10,
          "headway_default": 2,
          "headway_overrides": []
        }}"#
    );
    load_instance(doc.as_bytes()).unwrap()
}

#[test]
fn lower_weight_vehicle_waits() {
    for (w_a, w_b, waiter) in [(1.0, 3.0, 0), (3.0, 1.0, 1)] {
        let inst = shared_zone(w_a, w_b);
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let rep = brute_force_oracle(&lp).unwrap();
        let best = rep.best.unwrap();
        assert_eq!(best.t_in[waiter][1], 4, "{best:?}");
        assert_eq!(best.t_in[1 - waiter][1], 2, "{best:?}");
        assert_eq!(solve_bnb(&lp, &BnbConfig::default()).unwrap().objective, rep.objective);
    }
}

#[test]
fn appendix_optimum_is_certified() {
    let inst = appendix_instance();
    let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
    let rep = solve_bnb(&lp, &BnbConfig::default()).unwrap();
    assert!(rep.certified);
    assert_eq!(rep.objective, Some(Rational64::new(43, 10)));
}

#[test]
fn discrete_sbm_finds_twelve_spin_ground_states() {
    for k in 0..10 {
        let m = random_ising(12, 500 + k);
        let (_, ground) = ising_ground_state(&m).unwrap();
        let pool = sbm_solve(&m, &SbmConfig { seed: k, ..SbmConfig::default() });
        assert_eq!(pool.best_sample().unwrap().energy, ground, "model {k}");
    }
}

#[test]
fn ballistic_sbm_mostly_finds_twelve_spin_ground_states() {
    let mut hits = 0;
    for k in 0..20 {
        let m = random_ising(12, 500 + k);
        let (_, ground) = ising_ground_state(&m).unwrap();
        let pool = sbm_solve(&m, &SbmConfig { variant: SbmVariant::Ballistic, seed: k, ..SbmConfig::default() });
        let best = pool.best_sample().unwrap().energy;
        assert!(best >= ground);
        hits += (best == ground) as usize;
    }
    assert!(hits >= 16, "{hits}/20");
}
