//! Cross-module property and oracle checks, runnable as one named suite.
//!
//! Every case is reproducible from its [`CaseSpec`]. Faults can be injected
//! into the system under test (currently the big-M scale of the model
//! builder); oracles always work on the unmodified model or on the checker.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::anneal::{
    default_beta_range, sbm_solve, sbm_trajectory, simulated_annealing, SbmConfig, SBM_RECOVERY_THRESHOLD,
};
use crate::cli::{self, Params, SolveOptions, Solver};
use crate::exact::{
    brute_force_oracle, fixed_order_times, free_order_classes, solve_bnb, BnbConfig, OrderAssignment,
    ORACLE_MAX_CLASSES,
};
use crate::ilp::{
    build_ilp_with, eval_assignment, size_report, BuildOptions, ConstraintKind, EvalError, LinearProgram, VarKind,
};
use crate::instance::{generate_instance, load_instance, save_instance, Instance, Ticks};
use crate::preprocess::{compute_time_windows, find_conflicts, Side};
use crate::qubo::{
    bits_to_spins, decode_sample, default_penalty, exhaustive_minimum, lp_to_qubo, qubo_bit_bound, qubo_to_ising,
    IsingModel, Qubo,
};
use crate::verify::{check_schedule, objective_value, Schedule, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Deliberate defects applied to the models under test.
#[derive(Debug, Clone, PartialEq)]
pub struct Faults {
    pub big_m_scale: Rational64,
}

impl Default for Faults {
    fn default() -> Self {
        Self { big_m_scale: Rational64::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    InstanceRoundTrip,
    ZeroAgvRejected,
    WindowsMinimal,
    ConflictSymmetry,
    SizeBounds,
    Antisymmetry,
    CheckerAgreement,
    ObjectiveLowerBound,
    ObjectiveEndOnly,
    PenaltyExactness,
    QuboBitBound,
    QuboExhaustive,
    IsingEquivalence,
    IsingExhaustive,
    BnbMatchesOracle,
    FixedOrderFeasible,
    DmaxMonotone,
    Determinism,
    SamplerPurity,
    WallContract,
    EnergyNoDrift,
    SbmRecovery,
    SbmTrivialCases,
    SaToy,
    CliRevalidated,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::InstanceRoundTrip => "instance_round_trip",
            Property::ZeroAgvRejected => "zero_agv_rejected",
            Property::WindowsMinimal => "windows_minimal",
            Property::ConflictSymmetry => "conflict_symmetry",
            Property::SizeBounds => "size_bounds",
            Property::Antisymmetry => "antisymmetry",
            Property::CheckerAgreement => "checker_agreement",
            Property::ObjectiveLowerBound => "objective_lower_bound",
            Property::ObjectiveEndOnly => "objective_end_only",
            Property::PenaltyExactness => "penalty_exactness",
            Property::QuboBitBound => "qubo_bit_bound",
            Property::QuboExhaustive => "qubo_exhaustive",
            Property::IsingEquivalence => "ising_equivalence",
            Property::IsingExhaustive => "ising_exhaustive",
            Property::BnbMatchesOracle => "bnb_matches_oracle",
            Property::FixedOrderFeasible => "fixed_order_feasible",
            Property::DmaxMonotone => "d_max_monotone",
            Property::Determinism => "determinism",
            Property::SamplerPurity => "sampler_purity",
            Property::WallContract => "wall_contract",
            Property::EnergyNoDrift => "energy_no_drift",
            Property::SbmRecovery => "sbm_recovery",
            Property::SbmTrivialCases => "sbm_trivial_cases",
            Property::SaToy => "sa_toy",
            Property::CliRevalidated => "cli_revalidated",
        }
    }

    pub fn module(self) -> &'static str {
        use Property::*;
        match self {
            InstanceRoundTrip | ZeroAgvRejected => "instance",
            WindowsMinimal | ConflictSymmetry => "preprocess",
            SizeBounds | Antisymmetry | ObjectiveLowerBound => "ilp",
            CheckerAgreement | ObjectiveEndOnly => "verify",
            PenaltyExactness | QuboBitBound | QuboExhaustive | IsingEquivalence | IsingExhaustive => "qubo",
            BnbMatchesOracle | FixedOrderFeasible | DmaxMonotone | Determinism => "exact",
            SamplerPurity | WallContract | EnergyNoDrift | SbmRecovery | SbmTrivialCases | SaToy => "anneal",
            CliRevalidated => "cli",
        }
    }
}

/// What a case compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    /// Closed-form value or structural fact.
    Analytic,
    /// Independent schedule checker.
    Checker,
    /// Exhaustive enumeration of order classes.
    BruteForce,
    /// Exhaustive enumeration of QUBO bits or Ising spins.
    Exhaustive,
    /// Re-running the same computation.
    Replay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub property: Property,
    pub n_agvs: usize,
    pub n_zones: usize,
    pub d_max: Ticks,
    pub seed: u64,
    pub oracle: Oracle,
}

impl CaseSpec {
    pub fn label(&self) -> String {
        format!("{}[{}x{}x{} seed={}]", self.property.name(), self.n_agvs, self.n_zones, self.d_max, self.seed)
    }

    fn instance(&self) -> Result<Instance, String> {
        generate_instance(self.n_agvs, self.n_zones, self.d_max, self.seed).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub spec: CaseSpec,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub level: Level,
    pub cases: Vec<CaseResult>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| !c.passed)
    }

    pub fn failed_properties(&self) -> Vec<Property> {
        let mut out: Vec<Property> = Vec::new();
        for c in self.failures() {
            if !out.contains(&c.spec.property) {
                out.push(c.spec.property);
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let failed = self.failures().count();
        format!(
            "{} cases, {} passed, {} failed in {:.2}s",
            self.cases.len(),
            self.cases.len() - failed,
            failed,
            self.elapsed.as_secs_f64()
        )
    }

    pub fn to_junit_xml(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let failures = self.failures().count();
        let _ = writeln!(
            out,
            "<testsuite name=\"agv-sched-{}\" tests=\"{}\" failures=\"{}\" time=\"{:.3}\">",
            match self.level {
                Level::Quick => "quick",
                Level::Full => "full",
            },
            self.cases.len(),
            failures,
            self.elapsed.as_secs_f64()
        );
        for c in &self.cases {
            let _ = write!(
                out,
                "  <testcase classname=\"{}\" name=\"{}\" time=\"{:.3}\"",
                c.spec.property.module(),
                xml_escape(&c.spec.label()),
                c.elapsed.as_secs_f64()
            );
            if c.passed {
                out.push_str("/>\n");
            } else {
                let _ = writeln!(out, ">\n    <failure message=\"{}\"/>\n  </testcase>", xml_escape(&c.detail));
            }
        }
        out.push_str("</testsuite>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn run_suite(level: Level) -> SuiteReport {
    run_suite_with(level, &Faults::default())
}

pub fn run_suite_with(level: Level, faults: &Faults) -> SuiteReport {
    run_cases(level, &cases(level), faults)
}

pub fn run_cases(level: Level, specs: &[CaseSpec], faults: &Faults) -> SuiteReport {
    let start = Instant::now();
    let cases = specs
        .par_iter()
        .map(|spec| {
            let t = Instant::now();
            let outcome = std::panic::catch_unwind(|| run_case(spec, faults))
                .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CaseResult { spec: spec.clone(), passed, detail, elapsed: t.elapsed() }
        })
        .collect();
    SuiteReport { level, cases, elapsed: start.elapsed() }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default()
}

/// The case list for a level, in a fixed order.
pub fn cases(level: Level) -> Vec<CaseSpec> {
    let full = level == Level::Full;
    let scale = if full { 4 } else { 1 };
    let max_agvs = if full { 7 } else { 6 };
    let mut out = Vec::new();
    let mut push = |property, n_agvs, n_zones, d_max, seed, oracle| {
        out.push(CaseSpec { property, n_agvs, n_zones, d_max, seed, oracle })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let random_shape = |rng: &mut ChaCha8Rng, max_j: usize| {
        (rng.gen_range(1..=max_j), rng.gen_range(2..=7), *[1, 2, 3, 5, 10, 40].choose(rng).unwrap())
    };

    for seed in 0..10 * scale as u64 {
        let (j, s, d) = random_shape(&mut rng, max_agvs);
        push(Property::InstanceRoundTrip, j, s, d, seed, Oracle::Replay);
        push(Property::WindowsMinimal, j, s, d, seed, Oracle::Analytic);
        push(Property::ConflictSymmetry, j.max(2), s, d, seed, Oracle::Analytic);
        push(Property::Antisymmetry, j.max(2), s, d, seed, Oracle::Analytic);
        push(Property::ObjectiveEndOnly, j, s, d, seed, Oracle::Analytic);
        push(Property::QuboBitBound, j, s, d, seed, Oracle::Analytic);
        push(Property::IsingEquivalence, j.min(4), s, d, seed, Oracle::Replay);
    }
    push(Property::ZeroAgvRejected, 0, 4, 10, 0, Oracle::Analytic);
    let agv_grid: &[usize] = if full { &[1, 2, 3, 4, 6, 7, 12, 15, 21] } else { &[1, 2, 6, 7, 15, 21] };
    let size_dmax: &[Ticks] = if full { &[10, 40] } else { &[10] };
    for &j in agv_grid {
        for s in [4, 7] {
            for &d in size_dmax {
                let seeds = if full { 0..3 } else { j as u64..j as u64 + 1 };
                for seed in seeds {
                    push(Property::SizeBounds, j, s, d, seed, Oracle::Analytic);
                }
            }
        }
    }
    for seed in 0..20 * scale as u64 {
        let (j, s, d) = random_shape(&mut rng, max_agvs);
        push(Property::CheckerAgreement, j.max(2), s, d, seed, Oracle::Checker);
        push(Property::PenaltyExactness, j.clamp(2, 4), s, d, seed, Oracle::Checker);
    }
    for seed in 0..15 * scale as u64 {
        let (j, s, d) = random_shape(&mut rng, 4);
        push(Property::FixedOrderFeasible, j.max(2), s, d, seed, Oracle::Checker);
        push(Property::ObjectiveLowerBound, j.max(2), s, d, seed, Oracle::Analytic);
    }
    for seed in 0..20 * scale as u64 {
        let (j, s, d) = (rng.gen_range(4..=6), rng.gen_range(3..=5), *[5, 10, 20, 40].choose(&mut rng).unwrap());
        push(Property::BnbMatchesOracle, j, s, d, seed, Oracle::BruteForce);
    }
    for seed in 0..5 * scale as u64 {
        push(Property::DmaxMonotone, 3, 5, 2, seed, Oracle::BruteForce);
        push(Property::Determinism, 4, 6, 10, seed, Oracle::Replay);
        push(Property::QuboExhaustive, 2, 3, 1, seed, Oracle::Exhaustive);
        push(Property::QuboExhaustive, 2, 4, 1, seed, Oracle::Exhaustive);
        push(Property::IsingExhaustive, 1, 4, 1, seed, Oracle::Exhaustive);
        push(Property::SamplerPurity, 2, 4, 2, seed, Oracle::Replay);
        push(Property::WallContract, 2, 4, 2, seed, Oracle::Analytic);
        push(Property::EnergyNoDrift, 2, 4, 2, seed, Oracle::Analytic);
    }
    push(Property::SbmRecovery, 8, 0, 0, 0, Oracle::Exhaustive);
    push(Property::SbmTrivialCases, 2, 0, 0, 0, Oracle::Analytic);
    for seed in SA_TOY_SEEDS.iter().take(if full { 4 } else { 2 }) {
        push(Property::SaToy, 2, 4, 1, *seed, Oracle::BruteForce);
    }
    for seed in 0..3 {
        push(Property::CliRevalidated, 2, 4, 1, seed, Oracle::Checker);
    }
    out
}

/// Seeds of `generate_instance(2, 4, 1, seed)` with feasible schedules and at
/// least one order variable.
pub const SA_TOY_SEEDS: [u64; 4] = [1, 2, 6, 7];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn run_case(spec: &CaseSpec, faults: &Faults) -> Outcome {
    match spec.property {
        Property::InstanceRoundTrip => instance_round_trip(spec),
        Property::ZeroAgvRejected => zero_agv_rejected(spec),
        Property::WindowsMinimal => windows_minimal(spec),
        Property::ConflictSymmetry => conflict_symmetry(spec),
        Property::SizeBounds => size_bounds(spec),
        Property::Antisymmetry => antisymmetry(spec),
        Property::CheckerAgreement => checker_agreement(spec, faults),
        Property::ObjectiveLowerBound => objective_lower_bound(spec, faults),
        Property::ObjectiveEndOnly => objective_end_only(spec),
        Property::PenaltyExactness => penalty_exactness(spec, faults),
        Property::QuboBitBound => qubo_bit_bound_case(spec, faults),
        Property::QuboExhaustive => qubo_exhaustive(spec, faults),
        Property::IsingEquivalence => ising_equivalence(spec, faults),
        Property::IsingExhaustive => ising_exhaustive(spec, faults),
        Property::BnbMatchesOracle => bnb_matches_oracle(spec, faults),
        Property::FixedOrderFeasible => fixed_order_feasible(spec, faults),
        Property::DmaxMonotone => d_max_monotone(spec, faults),
        Property::Determinism => determinism(spec, faults),
        Property::SamplerPurity => sampler_purity(spec),
        Property::WallContract => wall_contract(spec),
        Property::EnergyNoDrift => energy_no_drift(spec),
        Property::SbmRecovery => sbm_recovery(spec),
        Property::SbmTrivialCases => sbm_trivial_cases(),
        Property::SaToy => sa_toy(spec, faults),
        Property::CliRevalidated => cli_revalidated(spec),
    }
}

fn build(inst: &Instance, compact: bool, big_m_scale: Rational64) -> LinearProgram {
    let opts = BuildOptions { compact, big_m_scale };
    build_ilp_with(inst, &compute_time_windows(inst), &find_conflicts(inst), &opts)
}

/// Model under test: faults applied; the seed picks the variable layout.
fn build_tested(inst: &Instance, seed: u64, faults: &Faults) -> LinearProgram {
    build(inst, seed % 2 == 1, faults.big_m_scale)
}

fn build_reference(inst: &Instance, seed: u64) -> LinearProgram {
    build(inst, seed % 2 == 1, Rational64::one())
}

fn instance_round_trip(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    let text = save_instance(&inst);
    let back = load_instance(text.as_bytes()).map_err(|e| format!("reload failed: {e}"))?;
    ensure(back == inst, || "load(save(x)) != x".into())?;
    ensure(save_instance(&back) == text, || "serialization is not canonical".into())?;
    ensure(spec.instance()? == inst, || "generator is not pure".into())?;
    Ok(format!("{} bytes", text.len()))
}

fn zero_agv_rejected(spec: &CaseSpec) -> Outcome {
    ensure(generate_instance(0, spec.n_zones, spec.d_max, spec.seed).is_err(), || {
        "generator accepted zero AGVs".into()
    })?;
    let inst = generate_instance(1, spec.n_zones, spec.d_max, spec.seed).map_err(|e| e.to_string())?;
    let mut doc: Value = serde_json::from_str(&save_instance(&inst)).map_err(|e| e.to_string())?;
    doc["agvs"] = Value::Array(Vec::new());
    match load_instance(doc.to_string().as_bytes()) {
        Ok(_) => Err("loader accepted zero AGVs".into()),
        Err(e) => Ok(e.to_string()),
    }
}

fn windows_minimal(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    let win = compute_time_windows(&inst);
    for j in 0..inst.n_agvs() {
        let len = inst.path(j).len();
        for k in 0..len {
            let t_in = win.lower(j, k, Side::In);
            let t_out = win.lower(j, k, Side::Out);
            // Each lower time is forced by exactly one chain constraint of the lone AGV.
            let in_forced = if k == 0 {
                t_in - 1 < inst.release(j)
            } else {
                t_in - 1 < win.lower(j, k - 1, Side::Out) + inst.pass_time(j, k - 1)
            };
            let out_forced = t_out - 1 < t_in + inst.zone_time(j, k);
            ensure(in_forced && out_forced, || format!("agv {j} position {k}: window is not minimal"))?;
            ensure(win.upper(j, k, Side::In) - t_in == inst.d_max(), || "upper bound is not lower + d_max".into())?;
        }
    }
    let sch = Schedule::earliest(&inst);
    for j in 0..inst.n_agvs() {
        let lone = lone_agv(&inst, j)?;
        let lone_sch = Schedule { t_in: vec![sch.t_in[j].clone()], t_out: vec![sch.t_out[j].clone()] };
        let v = check_schedule(&lone, &lone_sch).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), || format!("earliest times of agv {j} are rejected alone: {v:?}"))?;
    }
    Ok(String::new())
}

/// Instance holding only AGV `j` of `inst`.
fn lone_agv(inst: &Instance, j: usize) -> Result<Instance, String> {
    let mut doc: Value = serde_json::from_str(&save_instance(inst)).map_err(|e| e.to_string())?;
    let id = inst.agv_id(j).to_string();
    if let Some(agvs) = doc["agvs"].as_array_mut() {
        agvs.retain(|a| a["id"] == id.as_str());
    }
    load_instance(doc.to_string().as_bytes()).map_err(|e| e.to_string())
}

fn conflict_symmetry(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    if inst.n_agvs() < 2 {
        return Ok("single AGV".into());
    }
    // Swap the ids of the first two AGVs; their indices swap with them.
    let (a, b) = (inst.agv_id(0).to_string(), inst.agv_id(1).to_string());
    let mut doc: Value = serde_json::from_str(&save_instance(&inst)).map_err(|e| e.to_string())?;
    for agv in doc["agvs"].as_array_mut().into_iter().flatten() {
        if agv["id"] == a.as_str() {
            agv["id"] = Value::from(b.clone());
        } else if agv["id"] == b.as_str() {
            agv["id"] = Value::from(a.clone());
        }
    }
    let swapped = load_instance(doc.to_string().as_bytes()).map_err(|e| e.to_string())?;
    let perm = |j: usize| match j {
        0 => 1,
        1 => 0,
        j => j,
    };
    let (c, cs) = (find_conflicts(&inst), find_conflicts(&swapped));
    for j in 0..inst.n_agvs() {
        for jp in j + 1..inst.n_agvs() {
            let x = c.for_pair(j, jp);
            let y = cs.for_pair(perm(j), perm(jp));
            let mut zx = x.zones.clone();
            let mut zy = y.zones.clone();
            zx.sort_unstable();
            zy.sort_unstable();
            ensure(zx == zy, || format!("pair ({j},{jp}): shared zones differ"))?;
            let mut rx: Vec<_> = x.runs.iter().map(|r| r.zones.clone()).collect();
            let mut ry: Vec<_> = y.runs.iter().map(|r| r.zones.clone()).collect();
            rx.sort();
            ry.sort();
            ensure(rx == ry, || format!("pair ({j},{jp}): shared runs differ"))?;
            // Lanes as (traveller, from, to) triples in original indices.
            let lanes = |ls: &[&crate::preprocess::OpposingLane], map: &dyn Fn(usize) -> usize| {
                let mut v: Vec<(usize, usize, usize)> =
                    ls.iter().flat_map(|o| [(map(o.j), o.s, o.sp), (map(o.jp), o.sp, o.s)]).collect();
                v.sort_unstable();
                v
            };
            ensure(lanes(&x.opposing, &|j| j) == lanes(&y.opposing, &perm), || {
                format!("pair ({j},{jp}): opposing lanes differ")
            })?;
        }
    }
    Ok(String::new())
}

fn size_bounds(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    let mut detail = String::new();
    for compact in [false, true] {
        let lp = build(&inst, compact, Rational64::one());
        let r = size_report(&inst, &lp);
        ensure(r.within_bounds(), || format!("compact={compact}: {r:?} exceeds its bounds"))?;
        let _ = write!(detail, "{}/{}/{}/{} ", r.n_int, r.n_bin, r.n_eq, r.n_ineq);
    }
    Ok(detail)
}

fn antisymmetry(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    for compact in [false, true] {
        let lp = build(&inst, compact, Rational64::one());
        for (v, var) in lp.vars().iter().enumerate() {
            let VarKind::Y { agv, other, zone } = var.kind else { continue };
            let rev = lp.var_index(&VarKind::Y { agv: other, other: agv, zone });
            match (compact, rev) {
                (true, Some(_)) => return Err(format!("compact model has both orders of {}", lp.var_name(v))),
                (false, None) => return Err(format!("explicit model lacks the reverse of {}", lp.var_name(v))),
                (false, Some(r)) => {
                    let linked = lp.eqs().iter().any(|c| {
                        c.kind == ConstraintKind::Antisymmetry
                            && c.rhs == 1
                            && c.terms.len() == 2
                            && c.terms.contains(&(v, 1))
                            && c.terms.contains(&(r, 1))
                    });
                    ensure(linked, || format!("{} has no antisymmetry row", lp.var_name(v)))?;
                }
                (true, None) => {}
            }
        }
    }
    Ok(String::new())
}

/// Random schedule inside the windows; a quarter of the draws are moved to a
/// known feasible schedule with one time shifted by one tick.
fn random_schedule(inst: &Instance, rng: &mut ChaCha8Rng, feasible: Option<&Schedule>) -> Schedule {
    let win = compute_time_windows(inst);
    if let (Some(f), true) = (feasible, rng.gen_bool(0.25)) {
        let mut s = f.clone();
        let j = rng.gen_range(0..inst.n_agvs());
        let k = rng.gen_range(0..inst.path(j).len());
        let delta = if rng.gen_bool(0.5) { 1 } else { -1 };
        let row = if rng.gen_bool(0.5) { &mut s.t_in[j] } else { &mut s.t_out[j] };
        row[k] += delta;
        return s;
    }
    let mut t_in = Vec::new();
    let mut t_out = Vec::new();
    for j in 0..inst.n_agvs() {
        let len = inst.path(j).len();
        t_in.push((0..len).map(|k| rng.gen_range(win.lower(j, k, Side::In)..=win.upper(j, k, Side::In))).collect());
        t_out.push((0..len).map(|k| rng.gen_range(win.lower(j, k, Side::Out)..=win.upper(j, k, Side::Out))).collect());
    }
    Schedule { t_in, t_out }
}

/// Feasible schedules found by fixing random orders on the reference model.
fn feasible_schedules(lp: &LinearProgram, rng: &mut ChaCha8Rng, tries: usize) -> Vec<Schedule> {
    let mut out = Vec::new();
    for _ in 0..tries {
        let x: Vec<i64> =
            lp.vars().iter().map(|v| if v.kind.is_order() { rng.gen_range(0..=1) } else { v.lo }).collect();
        if let Ok(Ok(ft)) = fixed_order_times(lp, &OrderAssignment::from_values(lp, &x)) {
            out.push(ft.schedule(lp));
        }
    }
    if let Ok(rep) = brute_force_oracle(lp) {
        out.extend(rep.best);
    }
    out
}

fn checker_agreement(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let reference = build_reference(&inst, spec.seed);
    let lp = build_tested(&inst, spec.seed, faults);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pool = if free_order_classes(&reference).map(|n| n <= 12).unwrap_or(false) {
        feasible_schedules(&reference, &mut rng, 16)
    } else {
        Vec::new()
    };
    let (mut agree_feasible, mut agree_infeasible) = (0, 0);
    let mut draws: Vec<Schedule> = pool.clone();
    for _ in 0..200 {
        let anchor = pool.choose(&mut rng);
        draws.push(random_schedule(&inst, &mut rng, anchor));
    }
    for sch in draws {
        let checker = check_schedule(&inst, &sch).map_err(|e| e.to_string())?;
        let x = sch.to_lp_values(&inst, &lp);
        let lp_viol = match eval_assignment(&lp, &x) {
            Ok(v) => v.iter().map(|v| v.name.clone()).collect(),
            Err(e @ EvalError::OutOfBounds { .. }) => vec![e.to_string()],
            Err(e) => return Err(e.to_string()),
        };
        if checker.is_empty() != lp_viol.is_empty() {
            return Err(format!(
                "checker {} but model {}; checker {:?}, model {:?}",
                if checker.is_empty() { "accepts" } else { "rejects" },
                if lp_viol.is_empty() { "accepts" } else { "rejects" },
                checker.iter().map(|v| v.message.clone()).collect::<Vec<_>>(),
                lp_viol
            ));
        }
        if checker.is_empty() {
            agree_feasible += 1;
        } else {
            agree_infeasible += 1;
        }
    }
    Ok(format!("{agree_feasible} feasible, {agree_infeasible} infeasible"))
}

fn objective_lower_bound(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let lp = build_tested(&inst, spec.seed, faults);
    let floor = objective_value(&inst, &Schedule::earliest(&inst));
    let rep = solve_bnb(&lp, &BnbConfig::default()).map_err(|e| e.to_string())?;
    match rep.objective {
        Some(obj) => {
            ensure(obj >= floor, || format!("objective {obj} below window bound {floor}"))?;
            Ok(format!("{obj} >= {floor}"))
        }
        None => Ok("infeasible".into()),
    }
}

fn objective_end_only(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base = random_schedule(&inst, &mut rng, None);
    let obj = objective_value(&inst, &base);
    let mut moved = base.clone();
    for j in 0..inst.n_agvs() {
        let last = inst.path(j).len() - 1;
        for k in 0..=last {
            moved.t_in[j][k] += rng.gen_range(-3..=3);
            if k < last {
                moved.t_out[j][k] += rng.gen_range(-3..=3);
            }
        }
    }
    ensure(objective_value(&inst, &moved) == obj, || "objective depends on non-final times".into())?;
    let j = rng.gen_range(0..inst.n_agvs());
    *moved.t_out[j].last_mut().unwrap() += 1;
    let w = Rational64::approximate_float(inst.weight(j)).unwrap();
    let expected = obj + w / Rational64::from_integer(inst.d_max());
    ensure(objective_value(&inst, &moved) == expected, || "final time does not enter as w/d_max".into())?;
    Ok(String::new())
}

fn penalty_exactness(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let reference = build_reference(&inst, spec.seed);
    if free_order_classes(&reference).map(|n| n > 12).unwrap_or(true) {
        return Ok("skipped: too many order classes for the feasible pool".into());
    }
    let lp = build_tested(&inst, spec.seed, faults);
    let p = default_penalty(&lp);
    let (q, enc) = lp_to_qubo(&lp, p).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let feasible = feasible_schedules(&reference, &mut rng, 16);
    for sch in &feasible {
        ensure(check_schedule(&inst, sch).map(|v| v.is_empty()).unwrap_or(false), || {
            "reference produced an unchecked schedule".into()
        })?;
        let x = sch.to_lp_values(&inst, &lp);
        let e = q.energy(&enc.encode(&lp, &x));
        let obj = objective_value(&inst, sch);
        ensure(e == obj, || format!("feasible schedule: energy {e} != objective {obj}"))?;
    }
    let floor = lp.objective_value(&lp.vars().iter().map(|v| v.lo).collect::<Vec<_>>());
    let mut violated = 0;
    for _ in 0..200 {
        let bits: Vec<u8> = (0..q.n_bits).map(|_| rng.gen_range(0..=1)).collect();
        let d = decode_sample(&bits, &enc).map_err(|e| e.to_string())?;
        let e = q.energy(&bits);
        let obj = lp.objective_value(&d.values);
        ensure(e >= obj, || format!("energy {e} below objective {obj}"))?;
        let infeasible = eval_assignment(&lp, &d.values).map(|v| !v.is_empty()).unwrap_or(true);
        if infeasible {
            violated += 1;
            ensure(e >= floor + p, || format!("violated assignment energy {e} < {floor} + {p}"))?;
        }
    }
    Ok(format!("{} feasible, {violated} violated", feasible.len()))
}

fn qubo_bit_bound_case(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let lp = build_tested(&inst, spec.seed, faults);
    let (q, _) = lp_to_qubo(&lp, Rational64::one()).map_err(|e| e.to_string())?;
    let bound = qubo_bit_bound(&lp, inst.d_max());
    ensure(q.n_bits <= bound, || format!("{} bits > bound {bound}", q.n_bits))?;
    Ok(format!("{} <= {bound}", q.n_bits))
}

/// First seed from `seed * 50` on whose QUBO fits `max_bits`.
fn small_qubo_instance(spec: &CaseSpec, max_bits: usize) -> Result<(Instance, u64), String> {
    for seed in spec.seed * 50..spec.seed * 50 + 500 {
        let inst = generate_instance(spec.n_agvs, spec.n_zones, spec.d_max, seed).map_err(|e| e.to_string())?;
        let lp = build_reference(&inst, seed);
        if let Ok((q, _)) = lp_to_qubo(&lp, Rational64::one()) {
            if q.n_bits <= max_bits && (spec.n_agvs == 1 || lp.n_bin() > 0) {
                return Ok((inst, seed));
            }
        }
    }
    Err(format!("no instance with <= {max_bits} bits near seed {}", spec.seed))
}

fn qubo_exhaustive(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let (inst, seed) = small_qubo_instance(spec, 20)?;
    let reference = build_reference(&inst, seed);
    let lp = build_tested(&inst, seed, faults);
    let (q, enc) = lp_to_qubo(&lp, default_penalty(&lp)).map_err(|e| e.to_string())?;
    let (bits, energy) = exhaustive_minimum(&q).ok_or("too many bits")?;
    let d = decode_sample(&bits, &enc).map_err(|e| e.to_string())?;
    let sch = Schedule { t_in: d.t_in, t_out: d.t_out };
    let checked = check_schedule(&inst, &sch).map_err(|e| e.to_string())?;
    let oracle = brute_force_oracle(&reference).map_err(|e| e.to_string())?;
    match oracle.objective {
        Some(opt) => {
            ensure(checked.is_empty(), || format!("argmin decodes to an infeasible schedule: {checked:?}"))?;
            ensure(energy == opt, || format!("min energy {energy} != optimum {opt}"))?;
            ensure(objective_value(&inst, &sch) == opt, || "decoded objective differs from optimum".into())?;
            Ok(format!("seed {seed}: {} bits, optimum {opt}", q.n_bits))
        }
        None => {
            ensure(!checked.is_empty(), || "argmin feasible on an infeasible instance".into())?;
            Ok(format!("seed {seed}: {} bits, infeasible", q.n_bits))
        }
    }
}

fn ising_equivalence(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let lp = build_tested(&inst, spec.seed, faults);
    let (q, _) = lp_to_qubo(&lp, default_penalty(&lp)).map_err(|e| e.to_string())?;
    let m = qubo_to_ising(&q);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..100 {
        let bits: Vec<u8> = (0..q.n_bits).map(|_| rng.gen_range(0..=1)).collect();
        let (eq, ei) = (q.energy(&bits), m.energy(&bits_to_spins(&bits)));
        ensure(eq == ei, || format!("QUBO {eq} != Ising {ei}"))?;
    }
    let back = IsingModel::from_coo_text(&m.to_coo_text()).map_err(|e| e.to_string())?;
    ensure(back == m, || "Ising COO round trip differs".into())?;
    let back = Qubo::from_coo_text(&q.to_coo_text()).map_err(|e| e.to_string())?;
    ensure(back == q, || "QUBO COO round trip differs".into())?;
    Ok(format!("{} bits", q.n_bits))
}

/// Exhaustive Ising ground state; ties go to the smallest spin-up mask.
pub fn ising_ground_state(m: &IsingModel) -> Option<(Vec<i8>, Rational64)> {
    if m.n_spins > 24 {
        return None;
    }
    (0u32..1 << m.n_spins)
        .map(|mask| {
            let s: Vec<i8> = (0..m.n_spins).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            let e = m.energy(&s);
            (s, e)
        })
        .min_by(|a, b| a.1.cmp(&b.1))
}

fn ising_exhaustive(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let (inst, seed) = small_qubo_instance(spec, 12)?;
    let lp = build_tested(&inst, seed, faults);
    let (q, _) = lp_to_qubo(&lp, default_penalty(&lp)).map_err(|e| e.to_string())?;
    let m = qubo_to_ising(&q);
    let (_, eq) = exhaustive_minimum(&q).ok_or("too many bits")?;
    let (_, ei) = ising_ground_state(&m).ok_or("too many spins")?;
    ensure(eq == ei, || format!("QUBO minimum {eq} != Ising ground {ei}"))?;
    let r = random_ising(8, spec.seed);
    let (_, er) = ising_ground_state(&r).ok_or("too many spins")?;
    let rq = ising_as_qubo(&r);
    let (_, eqr) = exhaustive_minimum(&rq).ok_or("too many bits")?;
    ensure(er == eqr, || format!("random model: Ising ground {er} != QUBO minimum {eqr}"))?;
    Ok(format!("{} spins, ground {ei}", m.n_spins))
}

/// The QUBO whose Ising transform is `m` (via `s = 2x - 1`).
fn ising_as_qubo(m: &IsingModel) -> Qubo {
    let two = Rational64::from_integer(2);
    let mut q = Qubo { n_bits: m.n_spins, offset: m.offset, ..Default::default() };
    for (&i, &h) in &m.h {
        *q.linear.entry(i).or_insert_with(Rational64::zero) += two * h;
        q.offset -= h;
    }
    for (&(i, j), &c) in &m.j {
        q.quadratic.insert((i, j), two * two * c);
        *q.linear.entry(i).or_insert_with(Rational64::zero) -= two * c;
        *q.linear.entry(j).or_insert_with(Rational64::zero) -= two * c;
        q.offset += c;
    }
    q
}

/// Dense random Ising model with integer couplings in `[-3, 3]` and fields in `[-2, 2]`.
pub fn random_ising(n: usize, seed: u64) -> IsingModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = IsingModel { n_spins: n, ..Default::default() };
    for i in 0..n {
        let h = rng.gen_range(-2..=2);
        if h != 0 {
            m.h.insert(i, Rational64::from_integer(h));
        }
        for j in i + 1..n {
            let c = rng.gen_range(-3..=3);
            if c != 0 {
                m.j.insert((i, j), Rational64::from_integer(c));
            }
        }
    }
    m
}

/// First instance from `seed * 1000` on whose free order classes lie in `classes`.
pub fn oracle_sized(
    spec: &CaseSpec,
    classes: std::ops::RangeInclusive<usize>,
) -> Result<(Instance, u64, usize), String> {
    for seed in spec.seed * 1000..spec.seed * 1000 + 500 {
        let inst = generate_instance(spec.n_agvs, spec.n_zones, spec.d_max, seed).map_err(|e| e.to_string())?;
        if let Ok(n) = free_order_classes(&build_reference(&inst, seed)) {
            if classes.contains(&n) {
                return Ok((inst, seed, n));
            }
        }
    }
    Err(format!("no instance with {classes:?} free order classes"))
}

fn bnb_matches_oracle(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let (inst, seed, classes) = oracle_sized(spec, 4..=ORACLE_MAX_CLASSES)?;
    let oracle = brute_force_oracle(&build_reference(&inst, seed)).map_err(|e| e.to_string())?;
    let lp = build_tested(&inst, seed, faults);
    let bnb = solve_bnb(&lp, &BnbConfig { time_limit: None, node_limit: None }).map_err(|e| e.to_string())?;
    ensure(bnb.objective == oracle.objective, || {
        format!(
            "bnb {:?} != oracle {:?}",
            bnb.objective.map(|r| r.to_string()),
            oracle.objective.map(|r| r.to_string())
        )
    })?;
    if let Some(best) = &bnb.best {
        let v = check_schedule(&inst, best).map_err(|e| e.to_string())?;
        ensure(v.is_empty() && bnb.certified, || "bnb optimum is not certified and checked".into())?;
    }
    let opt = oracle.objective.map_or("infeasible".to_string(), |r| r.to_string());
    Ok(format!("seed {seed}: {classes} classes, {opt} in {} nodes", bnb.nodes))
}

fn fixed_order_feasible(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let lp = build_tested(&inst, spec.seed, faults);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut feasible = 0;
    for _ in 0..50 {
        let x: Vec<i64> =
            lp.vars().iter().map(|v| if v.kind.is_order() { rng.gen_range(0..=1) } else { v.lo }).collect();
        if let Ok(ft) = fixed_order_times(&lp, &OrderAssignment::from_values(&lp, &x)).map_err(|e| e.to_string())? {
            let v = eval_assignment(&lp, &ft.values).map_err(|e| e.to_string())?;
            ensure(v.is_empty(), || format!("fixed-order times violate {:?}", v[0].name))?;
            ensure(lp.objective_value(&ft.values) == ft.objective, || "objective mismatch".into())?;
            feasible += 1;
        }
    }
    Ok(format!("{feasible}/50 orderings feasible"))
}

fn d_max_monotone(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let (inst, seed, _) = oracle_sized(spec, 1..=ORACLE_MAX_CLASSES)?;
    let mut prev: Option<Rational64> = None;
    for d in [spec.d_max, spec.d_max + 1, spec.d_max + 3, spec.d_max * 4] {
        let wider = inst.with_d_max(d).map_err(|e| e.to_string())?;
        let lp = build_tested(&wider, seed, faults);
        let rep = solve_bnb(&lp, &BnbConfig { time_limit: None, node_limit: None }).map_err(|e| e.to_string())?;
        // Compare weighted completion times, which do not depend on d_max.
        let total = rep.objective.map(|o| o * Rational64::from_integer(d));
        if let Some(p) = prev {
            match total {
                Some(t) => ensure(t <= p, || format!("d_max {d}: {t} > {p}"))?,
                None => return Err(format!("d_max {d} lost feasibility")),
            }
        }
        prev = total.or(prev);
    }
    Ok(String::new())
}

fn strip_wall_time(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("wall_time");
    }
    v
}

fn same_report(inst: &Instance, a: &SolveReport, b: &SolveReport) -> bool {
    strip_wall_time(a.to_json(inst)) == strip_wall_time(b.to_json(inst))
}

fn determinism(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let lp = build_tested(&inst, spec.seed, faults);
    let cfg = BnbConfig { time_limit: None, node_limit: Some(200_000) };
    let a = solve_bnb(&lp, &cfg).map_err(|e| e.to_string())?;
    let b = solve_bnb(&lp, &cfg).map_err(|e| e.to_string())?;
    ensure(same_report(&inst, &a, &b) && a.nodes == b.nodes, || "bnb reports differ between runs".into())?;
    ensure(build_tested(&inst, spec.seed, faults).to_lp_text() == lp.to_lp_text(), || "model text differs".into())?;
    Ok(format!("{} nodes", a.nodes))
}

/// Sampler inputs come from the reference model so builder faults stay out of sampler checks.
fn toy_qubo(spec: &CaseSpec) -> Result<(Qubo, IsingModel), String> {
    let inst = spec.instance()?;
    let lp = build_reference(&inst, spec.seed);
    let (q, _) = lp_to_qubo(&lp, default_penalty(&lp)).map_err(|e| e.to_string())?;
    let m = qubo_to_ising(&q);
    Ok((q, m))
}

fn small_sbm(seed: u64) -> SbmConfig {
    SbmConfig { steps: 200, replicas: 8, seed, ..SbmConfig::default() }
}

fn sampler_purity(spec: &CaseSpec) -> Outcome {
    let (q, m) = toy_qubo(spec)?;
    let cfg = small_sbm(spec.seed);
    let a = sbm_solve(&m, &cfg);
    ensure(a == sbm_solve(&m, &cfg), || "SBM pools differ between runs".into())?;
    for s in &a.samples {
        let end = sbm_trajectory(&m, &cfg, s.replica)?;
        let spins: Vec<i8> = end.q.iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect();
        ensure(spins == s.spins(), || format!("replica {} depends on execution order", s.replica))?;
    }
    let beta = default_beta_range(&q);
    let sa = simulated_annealing(&q, 50, beta, 4, spec.seed);
    ensure(sa == simulated_annealing(&q, 50, beta, 4, spec.seed), || "SA pools differ between runs".into())?;
    Ok(String::new())
}

fn wall_contract(spec: &CaseSpec) -> Outcome {
    let (_, m) = toy_qubo(spec)?;
    let cfg = small_sbm(spec.seed);
    for r in 0..cfg.replicas {
        let end = sbm_trajectory(&m, &cfg, r)?;
        for (i, (&q, &p)) in end.q.iter().zip(&end.p).enumerate() {
            ensure(q.abs() <= 1.0, || format!("replica {r} spin {i}: |q| = {} > 1", q.abs()))?;
            ensure(q.abs() < 1.0 || p == 0.0, || format!("replica {r} spin {i}: clamped with p = {p}"))?;
        }
    }
    Ok(String::new())
}

fn energy_no_drift(spec: &CaseSpec) -> Outcome {
    let (q, m) = toy_qubo(spec)?;
    let pool = sbm_solve(&m, &small_sbm(spec.seed));
    for s in &pool.samples {
        ensure(s.energy == m.energy(&s.spins()), || format!("SBM replica {} energy drifted", s.replica))?;
    }
    let sa = simulated_annealing(&q, 50, default_beta_range(&q), 4, spec.seed);
    for s in &sa.samples {
        ensure(s.energy == q.energy(&s.bits), || format!("SA restart {} energy drifted", s.replica))?;
    }
    Ok(String::new())
}

/// Fraction of the 20 seeded 8-spin models whose ground energy the best of
/// 100 discrete-SBM replicas reaches.
pub fn sbm_recovery_rate(seed: u64) -> (usize, usize) {
    let mut hits = 0;
    for k in 0..20u64 {
        let m = random_ising(8, seed * 1000 + k);
        let (_, ground) = ising_ground_state(&m).expect("8 spins");
        let cfg = SbmConfig { replicas: 100, seed: k, ..SbmConfig::default() };
        if sbm_solve(&m, &cfg).best_sample().map(|s| s.energy) == Some(ground) {
            hits += 1;
        }
    }
    (hits, 20)
}

fn sbm_recovery(spec: &CaseSpec) -> Outcome {
    let (hits, total) = sbm_recovery_rate(spec.seed);
    let rate = hits as f64 / total as f64;
    ensure(rate >= SBM_RECOVERY_THRESHOLD, || format!("{hits}/{total} below threshold {SBM_RECOVERY_THRESHOLD}"))?;
    Ok(format!("{hits}/{total}"))
}

fn sbm_trivial_cases() -> Outcome {
    let one = Rational64::one();
    let mut ferro = IsingModel { n_spins: 2, ..Default::default() };
    ferro.j.insert((0, 1), -one);
    let mut field = IsingModel { n_spins: 1, ..Default::default() };
    field.h.insert(0, one);
    for (name, m) in [("ferromagnet", &ferro), ("single spin", &field)] {
        let (_, ground) = ising_ground_state(m).unwrap();
        let pool = sbm_solve(m, &SbmConfig { replicas: 100, ..SbmConfig::default() });
        let hits = pool.samples.iter().filter(|s| s.energy == ground).count();
        ensure(hits == 100, || format!("{name}: {hits}/100 replicas at the ground state"))?;
    }
    Ok(String::new())
}

fn sa_toy(spec: &CaseSpec, faults: &Faults) -> Outcome {
    let inst = spec.instance()?;
    let oracle = brute_force_oracle(&build_reference(&inst, 0)).map_err(|e| e.to_string())?;
    let opt = oracle.objective.ok_or("toy instance is infeasible")?;
    let lp = build_tested(&inst, 0, faults);
    let (q, enc) = lp_to_qubo(&lp, default_penalty(&lp)).map_err(|e| e.to_string())?;
    let pool = simulated_annealing(&q, 2000, default_beta_range(&q), 32, spec.seed);
    let best = pool.best_sample().ok_or("empty pool")?;
    let d = decode_sample(&best.bits, &enc).map_err(|e| e.to_string())?;
    let sch = Schedule { t_in: d.t_in, t_out: d.t_out };
    let v = check_schedule(&inst, &sch).map_err(|e| e.to_string())?;
    ensure(v.is_empty(), || format!("SA best schedule violates {:?}", v[0].code))?;
    let obj = objective_value(&inst, &sch);
    ensure(obj == opt, || format!("SA objective {obj} != optimum {opt}"))?;
    Ok(format!("objective {obj}"))
}

fn cli_revalidated(spec: &CaseSpec) -> Outcome {
    let inst = spec.instance()?;
    for solver in [Solver::Bnb, Solver::Sa, Solver::Sbm] {
        let opts = SolveOptions {
            solver,
            seed: spec.seed,
            time_limit: None,
            params: Params::parse("sweeps=200,restarts=4,steps=200,replicas=8").map_err(|e| e.to_string())?,
        };
        let a = cli::solve(&inst, &opts).map_err(|e| e.to_string())?;
        let checked = match &a.best {
            Some(s) => check_schedule(&inst, s).map_err(|e| e.to_string())?.is_empty(),
            None => false,
        };
        ensure(a.feasible == checked, || format!("{}: feasible flag disagrees with the checker", solver.name()))?;
        for (s, _) in &a.pool {
            ensure(check_schedule(&inst, s).map(|v| v.is_empty()).unwrap_or(false), || {
                format!("{}: pool holds an infeasible schedule", solver.name())
            })?;
        }
        let b = cli::solve(&inst, &opts).map_err(|e| e.to_string())?;
        ensure(same_report(&inst, &a, &b), || format!("{}: reports differ between runs", solver.name()))?;
    }
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn junit_escapes_and_counts() {
        let spec = CaseSpec {
            property: Property::SizeBounds,
            n_agvs: 1,
            n_zones: 2,
            d_max: 1,
            seed: 0,
            oracle: Oracle::Analytic,
        };
        let report = SuiteReport {
            level: Level::Quick,
            cases: vec![CaseResult { spec, passed: false, detail: "a < b & \"c\"".into(), elapsed: Duration::ZERO }],
            elapsed: Duration::ZERO,
        };
        let xml = report.to_junit_xml();
        assert!(xml.contains("failures=\"1\""));
        assert!(xml.contains("a &lt; b &amp; &quot;c&quot;"));
        assert!(!report.passed());
    }

    #[test]
    fn ising_as_qubo_inverts_the_transform() {
        let m = random_ising(5, 3);
        let back = qubo_to_ising(&ising_as_qubo(&m));
        for mask in 0u32..32 {
            let s: Vec<i8> = (0..5).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            assert_eq!(back.energy(&s), m.energy(&s));
        }
    }

    #[test]
    fn case_list_is_stable() {
        assert_eq!(cases(Level::Quick), cases(Level::Quick));
        assert!(cases(Level::Full).len() > cases(Level::Quick).len());
    }
}
