//! Builds the reference 7-AGV model, solves it to certified optimality with
//! branch-and-bound, re-checks the schedule against the instance and writes
//! a space-time diagram.

use agv_sched::exact::{free_order_classes, solve_bnb, BnbConfig};
use agv_sched::ilp::{build_ilp, size_report};
use agv_sched::instance::appendix_instance;
use agv_sched::preprocess::{compute_time_windows, find_conflicts};
use agv_sched::verify::{check_schedule, render_diagram};

fn main() {
    let inst = appendix_instance();
    let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
    let size = size_report(&inst, &lp);
    println!(
        "model: {} int, {} bin, {} eq, {} ineq ({} free order classes)",
        size.n_int,
        size.n_bin,
        size.n_eq,
        size.n_ineq,
        free_order_classes(&lp).unwrap()
    );

    let mut report = solve_bnb(&lp, &BnbConfig::default()).expect("model is a difference system");
    report.revalidate(&inst);
    let objective = report.objective.expect("appendix is feasible");
    println!(
        "objective {objective} ({:.4}), certified {}, {} nodes, {:.3} s",
        *objective.numer() as f64 / *objective.denom() as f64,
        report.certified,
        report.nodes,
        report.wall_time
    );

    let best = report.best.as_ref().unwrap();
    for j in 0..inst.n_agvs() {
        let visits: Vec<String> = inst
            .path(j)
            .iter()
            .enumerate()
            .map(|(k, &s)| format!("{}[{},{}]", inst.zone_name(s), best.t_in[j][k], best.t_out[j][k]))
            .collect();
        println!("  {:<5} {}", inst.agv_id(j), visits.join(" "));
    }
    assert!(check_schedule(&inst, best).unwrap().is_empty());

    let path = std::env::temp_dir().join("appendix_schedule.svg");
    std::fs::write(&path, render_diagram(&inst, best)).unwrap();
    println!("diagram written to {}", path.display());
}
