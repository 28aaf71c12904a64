use std::fs;
use std::process::Command;

use agv_sched::cli::{self, BenchSpec, Params, SolveOptions, Solver, BENCH_COLUMNS};
use agv_sched::instance::{appendix_instance, load_instance};
use agv_sched::verify::{objective_value, Schedule, ViolationCode};
use num_rational::Rational64;
use serde_json::Value;

fn opposing_pair() -> &'static str {
    r#"{
      "zones": ["s0", "s1"],
      "lanes": [{"a": "s0", "b": "s1", "bidirectional": true}],
      "agvs": [
        {"id": "a", "path": ["s0", "s1"], "release": 0, "weight": 1.0,
         "zone_time": {"s0": 2, "s1": 2}, "pass_time": {"s0,s1": 0}},
        {"id": "b", "path": ["s1", "s0"], "release": 0, "weight": 1.0,
         "zone_time": {"s0": 2, "s1": 2}, "pass_time": {"s1,s0": 0}}
      ],
      "d_max": 20,
      "headway_default": 2,
      "headway_overrides": []
    }"#
}

fn opts(solver: Solver, params: &str) -> SolveOptions {
    SolveOptions { solver, seed: 0, time_limit: None, params: Params::parse(params).unwrap() }
}

#[test]
fn build_writes_model_and_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let rep = cli::cmd_build(&appendix_instance(), dir.path(), &Params::default()).unwrap();
    assert_eq!((rep.n_int + rep.n_bin, rep.n_eq, rep.n_ineq), (118, 55, 127));
    let sizes: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sizes.json")).unwrap()).unwrap();
    assert_eq!(sizes["n_bin"], 70);
    let back = load_instance(&fs::read(dir.path().join("instance.json")).unwrap()).unwrap();
    assert_eq!(back.n_agvs(), 7);
    assert!(fs::read_to_string(dir.path().join("model.lp")).unwrap().len() > 1000);
}

#[test]
fn generated_fifteen_by_seven_reports_closed_form_limits() {
    let dir = tempfile::tempdir().unwrap();
    let inst = cli::load_instance_arg("gen:15x7x40:0").unwrap();
    let rep = cli::cmd_build(&inst, dir.path(), &Params::default()).unwrap();
    assert_eq!((rep.bound_vars, rep.bound_eq, rep.bound_ineq), (945, 788, 4725));
}

#[test]
fn convert_writes_matching_qubo_and_ising() {
    let dir = tempfile::tempdir().unwrap();
    let stats = cli::cmd_convert(&appendix_instance(), dir.path(), &Params::default()).unwrap();
    let q = agv_sched::qubo::Qubo::from_coo_text(&fs::read_to_string(dir.path().join("model.qubo")).unwrap()).unwrap();
    let m = agv_sched::qubo::IsingModel::from_coo_text(&fs::read_to_string(dir.path().join("model.ising")).unwrap())
        .unwrap();
    assert_eq!(q.n_bits, stats.vertices);
    let x: Vec<u8> = (0..q.n_bits).map(|i| (i % 3 == 0) as u8).collect();
    assert_eq!(q.energy(&x), m.energy(&agv_sched::qubo::bits_to_spins(&x)));
}

#[test]
fn solve_check_and_diagram_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = appendix_instance();
    let report = dir.path().join("solve.json");
    let svg = dir.path().join("diagram.svg");
    let rep = cli::cmd_solve(&inst, &opts(Solver::Bnb, &format!("diagram={}", svg.display())), &report).unwrap();
    assert!(rep.feasible && rep.certified);
    assert_eq!(rep.objective, Some(Rational64::new(43, 10)));
    assert_eq!(cli::exit_code(&rep), cli::EXIT_FEASIBLE);
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));

    assert!(cli::cmd_check(&inst, &report).unwrap().is_empty());
    let out = dir.path().join("again.svg");
    cli::cmd_diagram(&inst, &report, &out).unwrap();
    assert_eq!(fs::read(&out).unwrap(), fs::read(&svg).unwrap());
}

#[test]
fn sbm_report_carries_feasibility_and_pool_stats() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sbm.json");
    let rep = cli::cmd_solve(&appendix_instance(), &opts(Solver::Sbm, "steps=200,replicas=4"), &path).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["feasible"], rep.feasible);
    assert!(v.get("pool_stats").is_some());
    assert!(!rep.certified);
}

#[test]
fn conflict_free_instance_solves_to_its_window_bound() {
    for arg in ["gen:1x4x1:3", "gen:1x3x1:0"] {
        let inst = cli::load_instance_arg(arg).unwrap();
        let earliest = objective_value(&inst, &Schedule::earliest(&inst));
        for solver in [Solver::Bnb, Solver::Oracle, Solver::Sa, Solver::Sbm] {
            let rep = cli::solve(&inst, &opts(solver, "")).unwrap();
            assert!(rep.feasible, "{arg} {solver:?}");
            assert_eq!(rep.objective, Some(earliest), "{arg} {solver:?}");
        }
    }
}

#[test]
fn heuristics_never_beat_the_window_bound() {
    let inst = cli::load_instance_arg("gen:1x4x10:3").unwrap();
    let earliest = objective_value(&inst, &Schedule::earliest(&inst));
    for solver in [Solver::Bnb, Solver::Oracle] {
        assert_eq!(cli::solve(&inst, &opts(solver, "")).unwrap().objective, Some(earliest));
    }
    for solver in [Solver::Sa, Solver::Sbm] {
        let rep = cli::solve(&inst, &opts(solver, "")).unwrap();
        if rep.feasible {
            assert!(rep.objective.unwrap() >= earliest, "{solver:?}");
        } else {
            assert_ne!(cli::exit_code(&rep), cli::EXIT_FEASIBLE);
        }
    }
}

#[test]
fn opposing_vehicles_on_a_single_lane_are_a_deadlock() {
    let dir = tempfile::tempdir().unwrap();
    let inst = load_instance(opposing_pair().as_bytes()).unwrap();
    let sch = dir.path().join("crossing.json");
    fs::write(
        &sch,
        r#"{"a": [{"zone": "s0", "t_in": 0, "t_out": 2}, {"zone": "s1", "t_in": 4, "t_out": 6}],
            "b": [{"zone": "s1", "t_in": 0, "t_out": 2}, {"zone": "s0", "t_in": 4, "t_out": 6}]}"#,
    )
    .unwrap();
    let v = cli::cmd_check(&inst, &sch).unwrap();
    assert!(v.iter().any(|v| v.code == ViolationCode::D), "{v:?}");

    let rep = cli::solve(&inst, &opts(Solver::Bnb, "")).unwrap();
    assert!(rep.feasible);
    let best = rep.best.unwrap();
    let (a_done, b_start) = (best.t_out[0][1], best.t_in[1][0]);
    let (b_done, a_start) = (best.t_out[1][1], best.t_in[0][0]);
    assert!(a_done <= b_start || b_done <= a_start, "{best:?}");
}

#[test]
fn bench_grows_with_the_fleet() {
    let params = Params::parse("grid=2x4x10:4x4x10:7x7x40").unwrap();
    let rows = cli::run_bench(&BenchSpec::from_params(&params, 0, None).unwrap()).unwrap();
    let vars: Vec<usize> = rows.iter().map(|r| r.n_int + r.n_bin).collect();
    assert!(vars.windows(2).all(|w| w[0] < w[1]), "{vars:?}");
    let csv = cli::bench_csv(&rows).unwrap();
    assert_eq!(csv.lines().next().unwrap(), BENCH_COLUMNS.join(","));

    let one = Params::parse("grid=2x4x10").unwrap();
    assert_eq!(cli::run_bench(&BenchSpec::from_params(&one, 5, None).unwrap()).unwrap().len(), 1);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let agv = env!("CARGO_BIN_EXE_agv");
    let out = dir.path().join("r.json");
    let status = Command::new(agv)
        .args(["solve", "--instance", "appendix", "--solver", "bnb", "--out"])
        .arg(&out)
        .env("AGV_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_FEASIBLE));

    let status = Command::new(agv).args(["check", "--instance", "appendix", "--schedule"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_FEASIBLE));

    let missing = dir.path().join("nope.json");
    let status = Command::new(agv).arg("build").arg("--instance").arg(&missing).status().unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_INPUT));

    let status =
        Command::new(agv).args(["build", "--instance", "appendix"]).env("AGV_THREADS", "zero").status().unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_INPUT));
}

#[test]
fn usage_errors_are_input_errors() {
    let agv = env!("CARGO_BIN_EXE_agv");
    let status = Command::new(agv).args(["frobnicate"]).stderr(std::process::Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(cli::EXIT_INPUT));
    let status = Command::new(agv).arg("--help").stdout(std::process::Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(0));
}
