//! Validates schedules for the reference instance: the unconstrained earliest
//! times collide, the branch-and-bound schedule does not.

use agv_sched::exact::{solve_bnb, BnbConfig};
use agv_sched::ilp::build_ilp;
use agv_sched::instance::appendix_instance;
use agv_sched::preprocess::{compute_time_windows, find_conflicts};
use agv_sched::verify::{check_schedule, Schedule};

fn main() {
    let inst = appendix_instance();
    let earliest = Schedule::earliest(&inst);
    let violations = check_schedule(&inst, &earliest).unwrap();
    println!("earliest times: {} violations", violations.len());
    for v in &violations {
        println!("  {:<3} {:?} {:?} {}", v.code.as_str(), v.agvs, v.zones, v.message);
    }

    let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
    let rep = solve_bnb(&lp, &BnbConfig::default()).unwrap();
    let best = rep.best.unwrap();
    println!("branch-and-bound: {} violations", check_schedule(&inst, &best).unwrap().len());
    println!("{}", serde_json::to_string_pretty(&best.to_json(&inst)).unwrap());
}
