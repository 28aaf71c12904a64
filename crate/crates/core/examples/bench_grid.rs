//! Benchmarks branch-and-bound and simulated annealing over a small grid of
//! generated instances and prints the CSV.

use std::time::Duration;

use agv_sched::cli::{bench_csv, run_bench, BenchSpec, Params};

fn main() {
    let params = Params::parse("grid=2x4x10:4x4x10:7x7x40,seeds=3,solvers=bnb:sa,sweeps=500,restarts=4").unwrap();
    let spec = BenchSpec::from_params(&params, 0, Some(Duration::from_secs(10))).unwrap();
    let rows = run_bench(&spec).unwrap();
    print!("{}", bench_csv(&rows).unwrap());
}
