//! Transcribes the reference 7-AGV instance into a QUBO and an Ising model
//! and prints their sizes.

use agv_sched::ilp::build_ilp;
use agv_sched::instance::appendix_instance;
use agv_sched::preprocess::{compute_time_windows, find_conflicts};
use agv_sched::qubo::{bits_to_spins, default_penalty, lp_to_qubo, qubo_stats, qubo_to_ising};

fn main() {
    let inst = appendix_instance();
    let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
    let penalty = default_penalty(&lp);
    let (q, enc) = lp_to_qubo(&lp, penalty).expect("appendix constraints fit their windows");
    let ising = qubo_to_ising(&q);
    let stats = qubo_stats(&q);

    println!("penalty         {penalty}");
    println!("bits            {}", enc.n_bits);
    println!("vertices        {}", stats.vertices);
    println!("couplings       {}", stats.edges);
    println!("edge density    {:.4}", stats.edge_density);
    println!("linear fields   {}", stats.linear_fields);

    let zeros = vec![0u8; enc.n_bits];
    assert_eq!(q.energy(&zeros), ising.energy(&bits_to_spins(&zeros)));
    println!("energy at x=0   {}", q.energy(&zeros));
}
