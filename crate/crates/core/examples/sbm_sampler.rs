//! Runs ballistic and discrete simulated bifurcation on random 8-spin Ising
//! models and compares the best replica with the exhaustive ground state.

use agv_sched::anneal::{estimate_lambda_max, sbm_solve, SbmConfig, SbmVariant};
use agv_sched::suite::{ising_ground_state, random_ising};

fn main() {
    println!("{:>5} {:>8} {:>10} {:>10} {:>10}", "model", "lambda", "ground", "ballistic", "discrete");
    for k in 0..8 {
        let m = random_ising(8, k);
        let (_, ground) = ising_ground_state(&m).unwrap();
        let best = |variant| {
            let cfg = SbmConfig { variant, seed: k, ..SbmConfig::default() };
            sbm_solve(&m, &cfg).best_sample().unwrap().energy
        };
        println!(
            "{:>5} {:>8.3} {:>10} {:>10} {:>10}",
            k,
            estimate_lambda_max(&m).value,
            ground,
            best(SbmVariant::Ballistic),
            best(SbmVariant::Discrete)
        );
    }
}
