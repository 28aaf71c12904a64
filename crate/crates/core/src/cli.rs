//! Subcommand implementations behind the `agv` binary.
//!
//! Exit codes: 0 feasible, 2 infeasible (or no feasible sample), 3 limit hit
//! without incumbent, 4 input error, 1 anything else.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::anneal::{default_beta_range, sbm_solve, simulated_annealing, C0Mode, SamplePool, SbmConfig, SbmVariant};
use crate::exact::{brute_force_oracle, solve_bnb, BnbConfig, ExactError};
use crate::ilp::{build_ilp_with, size_report, BuildOptions, LinearProgram, SizeReport};
use crate::instance::{appendix_instance, generate_instance, load_instance, save_instance, Instance, Ticks};
use crate::preprocess::{compute_time_windows, find_conflicts};
use crate::qubo::{decode_sample, default_penalty, lp_to_qubo, qubo_stats, qubo_to_ising, Encoding, QuboStats};
use crate::verify::{check_schedule, objective_value, render_diagram, Schedule, SolveReport, SolveStatus, Violation};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

fn input<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{ctx}: {e}"))
}

fn io<E: std::fmt::Display>(ctx: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Other(format!("{}: {e}", ctx.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Bnb,
    Oracle,
    Sa,
    Sbm,
}

impl FromStr for Solver {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "bnb" => Ok(Solver::Bnb),
            "oracle" => Ok(Solver::Oracle),
            "sa" => Ok(Solver::Sa),
            "sbm" => Ok(Solver::Sbm),
            _ => Err(CliError::Input(format!("unknown solver {s:?} (bnb, oracle, sa, sbm)"))),
        }
    }
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Bnb => "bnb",
            Solver::Oracle => "oracle",
            Solver::Sa => "sa",
            Solver::Sbm => "sbm",
        }
    }
}

/// `k=v,k=v` solver and command parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) =
                item.split_once('=').ok_or_else(|| CliError::Input(format!("parameter {item:?} is not k=v")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| CliError::Input(format!("parameter {key}={v:?} has the wrong type")))
            }
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Caps rayon's global pool at `AGV_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("AGV_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("AGV_THREADS={v:?} must be a positive integer")))?;
        // A second call in one process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Reads an instance from a path, `appendix`, or `gen:JxSxD:seed`.
pub fn load_instance_arg(arg: &str) -> Result<Instance, CliError> {
    if arg == "appendix" {
        return Ok(appendix_instance());
    }
    if let Some(spec) = arg.strip_prefix("gen:") {
        let (dims, seed) = spec.split_once(':').unwrap_or((spec, "0"));
        let cell = parse_cell(dims)?;
        let seed: u64 = seed.parse().map_err(input("instance seed"))?;
        return generate_instance(cell.0, cell.1, cell.2, seed).map_err(input("generated instance"));
    }
    let bytes = fs::read(arg).map_err(input(arg))?;
    load_instance(&bytes).map_err(input(arg))
}

fn parse_cell(s: &str) -> Result<(usize, usize, Ticks), CliError> {
    let parts: Vec<&str> = s.split('x').collect();
    let bad = || CliError::Input(format!("grid cell {s:?} must look like 7x7x40"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn build_options(params: &Params) -> Result<BuildOptions, CliError> {
    let mut opts = BuildOptions { compact: params.get_or("compact", false)?, ..Default::default() };
    if let Some(s) = params.raw("big_m_scale") {
        opts.big_m_scale = parse_rational(s)?;
    }
    Ok(opts)
}

fn parse_rational(s: &str) -> Result<Rational64, CliError> {
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (i64, i64) = (n.parse().map_err(input("numerator"))?, d.parse().map_err(input("denominator"))?);
        if d == 0 {
            return Err(CliError::Input("zero denominator".into()));
        }
        return Ok(Rational64::new(n, d));
    }
    s.parse::<f64>()
        .ok()
        .and_then(Rational64::approximate_float)
        .ok_or_else(|| CliError::Input(format!("{s:?} is not a number")))
}

pub fn build_model(inst: &Instance, params: &Params) -> Result<LinearProgram, CliError> {
    let opts = build_options(params)?;
    Ok(build_ilp_with(inst, &compute_time_windows(inst), &find_conflicts(inst), &opts))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, contents).map_err(io(path))
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes `model.lp`, `sizes.json` and `instance.json` into `out`.
pub fn cmd_build(inst: &Instance, out: &Path, params: &Params) -> Result<SizeReport, CliError> {
    let lp = build_model(inst, params)?;
    let report = size_report(inst, &lp);
    write(&out.join("model.lp"), &lp.to_lp_text())?;
    write(&out.join("sizes.json"), &pretty(&report))?;
    write(&out.join("instance.json"), &save_instance(inst))?;
    Ok(report)
}

fn penalty_of(lp: &LinearProgram, params: &Params) -> Result<Rational64, CliError> {
    match params.raw("penalty") {
        Some(s) => parse_rational(s),
        None => Ok(default_penalty(lp)),
    }
}

/// Writes `model.qubo`, `model.ising` (COO text) and `qubo_stats.json` into `out`.
pub fn cmd_convert(inst: &Instance, out: &Path, params: &Params) -> Result<QuboStats, CliError> {
    let lp = build_model(inst, params)?;
    let (q, _) = lp_to_qubo(&lp, penalty_of(&lp, params)?).map_err(|e| CliError::Input(e.to_string()))?;
    let stats = qubo_stats(&q);
    write(&out.join("model.qubo"), &q.to_coo_text())?;
    write(&out.join("model.ising"), &qubo_to_ising(&q).to_coo_text())?;
    write(&out.join("qubo_stats.json"), &pretty(&json!({"n_bits": q.n_bits, "stats": stats})))?;
    Ok(stats)
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub solver: Solver,
    pub seed: u64,
    pub time_limit: Option<Duration>,
    pub params: Params,
}

fn exact_error(e: ExactError) -> CliError {
    match e {
        ExactError::TooManyOrderVariables { .. } => CliError::Input(e.to_string()),
        _ => CliError::Other(e.to_string()),
    }
}

fn heuristic_report(inst: &Instance, enc: &Encoding, pool: &SamplePool, name: &str) -> SolveReport {
    let mut decoded: Vec<(Schedule, Vec<Violation>, Rational64)> = Vec::new();
    for s in &pool.samples {
        let d = decode_sample(&s.bits, enc).expect("samples match the encoding");
        let sch = Schedule { t_in: d.t_in, t_out: d.t_out };
        let viol = check_schedule(inst, &sch).expect("decoded schedules are complete");
        decoded.push((sch, viol, s.energy));
    }
    let mut rep = SolveReport::empty(name, SolveStatus::Infeasible);
    let mut feasible: Vec<(Schedule, Rational64)> =
        decoded.iter().filter(|d| d.1.is_empty()).map(|d| (d.0.clone(), objective_value(inst, &d.0))).collect();
    feasible.sort_by_key(|a| a.1);
    feasible.dedup_by(|a, b| a.0 == b.0);
    if let Some((best, _)) = feasible.first() {
        rep.best = Some(best.clone());
        rep.status = SolveStatus::Feasible;
    } else if let Some(i) = pool.best {
        rep.best = Some(decoded[i].0.clone());
    }
    rep.pool = feasible;
    rep
}

pub fn solve(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, CliError> {
    let start = Instant::now();
    let lp = build_model(inst, &opts.params)?;
    let mut rep = match opts.solver {
        Solver::Bnb => {
            let cfg = BnbConfig {
                time_limit: opts.time_limit.or(BnbConfig::default().time_limit),
                node_limit: opts.params.get("node_limit")?.or(BnbConfig::default().node_limit),
            };
            solve_bnb(&lp, &cfg).map_err(exact_error)?
        }
        Solver::Oracle => brute_force_oracle(&lp).map_err(exact_error)?,
        Solver::Sa | Solver::Sbm => {
            let (q, enc) =
                lp_to_qubo(&lp, penalty_of(&lp, &opts.params)?).map_err(|e| CliError::Input(e.to_string()))?;
            let p = &opts.params;
            let pool = if opts.solver == Solver::Sa {
                let (b0, b1) = default_beta_range(&q);
                let beta = (p.get_or("beta0", b0)?, p.get_or("beta1", b1)?);
                simulated_annealing(&q, p.get_or("sweeps", 1000)?, beta, p.get_or("restarts", 16)?, opts.seed)
            } else {
                let ising = qubo_to_ising(&q);
                let variant = match p.raw("variant").unwrap_or("discrete") {
                    "discrete" => SbmVariant::Discrete,
                    "ballistic" => SbmVariant::Ballistic,
                    v => return Err(CliError::Input(format!("unknown SBM variant {v:?}"))),
                };
                let cfg = SbmConfig {
                    a0: p.get_or("a0", 1.0)?,
                    c0: p.get::<f64>("c0")?.map(C0Mode::Fixed).unwrap_or(C0Mode::Auto),
                    steps: p.get_or("steps", 1000)?,
                    dt: p.get_or("dt", 0.5)?,
                    replicas: p.get_or("replicas", 16)?,
                    seed: opts.seed,
                    variant,
                };
                if cfg.steps == 0 || cfg.replicas == 0 || cfg.dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
                {
                    return Err(CliError::Input("SBM needs steps >= 1, replicas >= 1, dt > 0".into()));
                }
                sbm_solve(&ising, &cfg)
            };
            heuristic_report(inst, &enc, &pool, opts.solver.name())
        }
    };
    rep.revalidate(inst);
    if !rep.feasible && matches!(rep.status, SolveStatus::Feasible | SolveStatus::Optimal) {
        rep.status = SolveStatus::Infeasible;
    }
    rep.wall_time = start.elapsed().as_secs_f64();
    Ok(rep)
}

pub fn exit_code(rep: &SolveReport) -> i32 {
    if rep.feasible {
        EXIT_FEASIBLE
    } else if rep.status == SolveStatus::LimitNoIncumbent {
        EXIT_LIMIT
    } else {
        EXIT_INFEASIBLE
    }
}

/// Solves and writes the report JSON (and a diagram when `diagram=path` is given).
pub fn cmd_solve(inst: &Instance, opts: &SolveOptions, out: &Path) -> Result<SolveReport, CliError> {
    let rep = solve(inst, opts)?;
    write(out, &pretty(&rep.to_json(inst)))?;
    if let (Some(path), Some(best)) = (opts.params.raw("diagram"), &rep.best) {
        write(Path::new(path), &render_diagram(inst, best))?;
    }
    Ok(rep)
}

/// Accepts either a solve report (uses its `best`) or a bare schedule.
pub fn load_schedule(inst: &Instance, path: &Path) -> Result<Schedule, CliError> {
    let text = fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
    let v: Value = serde_json::from_str(&text).map_err(input("schedule"))?;
    let body = match v.get("best") {
        Some(Value::Null) => return Err(CliError::Input("report has no schedule".into())),
        Some(b) => b.clone(),
        None => v,
    };
    Schedule::from_json(inst, &body).map_err(input("schedule"))
}

pub fn cmd_check(inst: &Instance, schedule: &Path) -> Result<Vec<Violation>, CliError> {
    let sch = load_schedule(inst, schedule)?;
    check_schedule(inst, &sch).map_err(input("schedule"))
}

pub fn cmd_diagram(inst: &Instance, schedule: &Path, out: &Path) -> Result<(), CliError> {
    let sch = load_schedule(inst, schedule)?;
    check_schedule(inst, &sch).map_err(input("schedule"))?;
    write(out, &render_diagram(inst, &sch))
}

pub const BENCH_COLUMNS: [&str; 16] = [
    "n_agvs",
    "n_zones",
    "d_max",
    "n_int",
    "n_bin",
    "n_eq",
    "n_ineq",
    "bound_vars",
    "bound_eq",
    "bound_ineq",
    "solver",
    "seed",
    "wall_s",
    "objective",
    "feasible",
    "certified",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_agvs: usize,
    pub n_zones: usize,
    pub d_max: Ticks,
    pub n_int: usize,
    pub n_bin: usize,
    pub n_eq: usize,
    pub n_ineq: usize,
    pub bound_vars: usize,
    pub bound_eq: usize,
    pub bound_ineq: usize,
    pub solver: String,
    pub seed: u64,
    pub wall_s: f64,
    pub objective: Option<f64>,
    pub feasible: bool,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub cells: Vec<(usize, usize, Ticks)>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<Solver>,
    pub time_limit: Option<Duration>,
    pub params: Params,
}

impl BenchSpec {
    /// `grid=2x4x10:7x7x40`, `seeds=3`, `solvers=bnb:sa` from the parameters.
    pub fn from_params(params: &Params, seed: u64, time_limit: Option<Duration>) -> Result<Self, CliError> {
        let cells = params
            .raw("grid")
            .unwrap_or("2x4x10:4x4x10:7x7x40")
            .split(':')
            .map(parse_cell)
            .collect::<Result<Vec<_>, _>>()?;
        let n_seeds: u64 = params.get_or("seeds", 1)?;
        let solvers =
            params.raw("solvers").unwrap_or("bnb").split(':').map(Solver::from_str).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { cells, seeds: (seed..seed + n_seeds).collect(), solvers, time_limit, params: params.clone() })
    }
}

pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, CliError> {
    let jobs: Vec<((usize, usize, Ticks), u64)> =
        spec.cells.iter().flat_map(|&c| spec.seeds.iter().map(move |&s| (c, s))).collect();
    let rows: Vec<Result<Vec<BenchRow>, CliError>> = jobs
        .par_iter()
        .map(|&((n, s, d), seed)| {
            let inst = generate_instance(n, s, d, seed).map_err(input("bench instance"))?;
            let lp = build_model(&inst, &spec.params)?;
            let size = size_report(&inst, &lp);
            let mut out = Vec::new();
            for &solver in &spec.solvers {
                let opts = SolveOptions { solver, seed, time_limit: spec.time_limit, params: spec.params.clone() };
                let (wall_s, objective, feasible, certified) = match solve(&inst, &opts) {
                    Ok(r) => (
                        r.wall_time,
                        r.objective.filter(|_| r.feasible).and_then(|o| o.to_f64()),
                        r.feasible,
                        r.certified,
                    ),
                    // Oracle refusing a large cell is recorded as an empty row.
                    Err(CliError::Input(_)) if solver == Solver::Oracle => (0.0, None, false, false),
                    Err(e) => return Err(e),
                };
                out.push(BenchRow {
                    n_agvs: n,
                    n_zones: s,
                    d_max: d,
                    n_int: size.n_int,
                    n_bin: size.n_bin,
                    n_eq: size.n_eq,
                    n_ineq: size.n_ineq,
                    bound_vars: size.bound_vars,
                    bound_eq: size.bound_eq,
                    bound_ineq: size.bound_ineq,
                    solver: solver.name().to_string(),
                    seed,
                    wall_s,
                    objective,
                    feasible,
                    certified,
                });
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    Ok(all)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Other(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(BENCH_COLUMNS).map_err(|e| CliError::Other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

pub fn cmd_bench(spec: &BenchSpec, out: &Path) -> Result<Vec<BenchRow>, CliError> {
    let rows = run_bench(spec)?;
    write(out, &bench_csv(&rows)?)?;
    Ok(rows)
}

/// Default output location for a subcommand when `--out` is absent.
pub fn default_out(cmd: &str) -> PathBuf {
    match cmd {
        "build" | "convert" => PathBuf::from("out"),
        "solve" => PathBuf::from("report.json"),
        "bench" => PathBuf::from("bench.csv"),
        "diagram" => PathBuf::from("schedule.svg"),
        _ => PathBuf::from("out"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse() {
        let p = Params::parse("sweeps=10, penalty=3/2,compact=true").unwrap();
        assert_eq!(p.get::<usize>("sweeps").unwrap(), Some(10));
        assert!(p.get_or("compact", false).unwrap());
        assert_eq!(parse_rational(p.raw("penalty").unwrap()).unwrap(), Rational64::new(3, 2));
        assert!(Params::parse("oops").is_err());
        assert!(p.get::<usize>("compact").is_err());
    }

    #[test]
    fn instance_arguments() {
        assert_eq!(load_instance_arg("appendix").unwrap().n_agvs(), 7);
        assert_eq!(load_instance_arg("gen:3x5x10:4").unwrap().n_zones(), 5);
        assert!(matches!(load_instance_arg("/nonexistent.json"), Err(CliError::Input(_))));
    }

    #[test]
    fn bench_schema() {
        let spec = BenchSpec::from_params(&Params::parse("grid=2x4x10,seeds=1,solvers=bnb").unwrap(), 0, None).unwrap();
        let rows = run_bench(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let csv = bench_csv(&rows).unwrap();
        assert_eq!(csv.lines().next().unwrap(), BENCH_COLUMNS.join(","));
    }
}
