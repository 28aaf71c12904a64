//! Anneals the QUBO of a two-vehicle toy instance, decodes the best sample
//! into a schedule and checks it against the exact QUBO minimum.

use agv_sched::anneal::{default_beta_range, simulated_annealing};
use agv_sched::ilp::build_ilp;
use agv_sched::instance::generate_instance;
use agv_sched::preprocess::{compute_time_windows, find_conflicts};
use agv_sched::qubo::{decode_sample, default_penalty, exhaustive_minimum, lp_to_qubo};
use agv_sched::verify::{check_schedule, objective_value, Schedule};

fn main() {
    let inst = generate_instance(2, 4, 1, 1).unwrap();
    let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
    let (q, enc) = lp_to_qubo(&lp, default_penalty(&lp)).unwrap();
    let (_, optimum) = exhaustive_minimum(&q).unwrap();
    println!("{} bits, exhaustive minimum {optimum}", q.n_bits);

    let pool = simulated_annealing(&q, 2000, default_beta_range(&q), 32, 0);
    let best = pool.best_sample().unwrap();
    let hits = pool.samples.iter().filter(|s| s.energy == optimum).count();
    println!("best energy {} ({hits}/{} restarts at the minimum)", best.energy, pool.samples.len());

    let d = decode_sample(&best.bits, &enc).unwrap();
    let sch = Schedule { t_in: d.t_in, t_out: d.t_out };
    let violations = check_schedule(&inst, &sch).unwrap();
    println!("objective {}, {} violations", objective_value(&inst, &sch), violations.len());
    for j in 0..inst.n_agvs() {
        println!("  {} in {:?} out {:?}", inst.agv_id(j), sch.t_in[j], sch.t_out[j]);
    }
}
