//! Generates corridor instances, prints their model sizes next to the
//! analytic bounds, and round-trips one through JSON.

use agv_sched::ilp::{build_ilp, size_report};
use agv_sched::instance::{generate_instance, load_instance, save_instance};
use agv_sched::preprocess::{compute_time_windows, find_conflicts};

fn main() {
    println!(
        "{:>9} {:>5} {:>5} {:>5} {:>6} {:>11} {:>9}",
        "J/S/d", "int", "bin", "eq", "ineq", "vars bound", "opposing"
    );
    for (n, s, d) in [(2, 4, 10), (4, 4, 40), (7, 7, 40), (15, 7, 40), (21, 7, 40)] {
        let inst = generate_instance(n, s, d, 0).unwrap();
        let conf = find_conflicts(&inst);
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &conf);
        let r = size_report(&inst, &lp);
        println!(
            "{:>9} {:>5} {:>5} {:>5} {:>6} {:>11} {:>9}",
            format!("{n}/{s}/{d}"),
            r.n_int,
            r.n_bin,
            r.n_eq,
            r.n_ineq,
            r.bound_vars,
            conf.opposing.len()
        );
    }

    let inst = generate_instance(3, 5, 20, 7).unwrap();
    let text = save_instance(&inst);
    let back = load_instance(text.as_bytes()).unwrap();
    assert_eq!(save_instance(&back), text);
    println!("\n{text}");
}
