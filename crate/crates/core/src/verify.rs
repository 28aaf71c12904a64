//! Schedule checking straight from the instance, objective evaluation, pool
//! statistics, solve reports, and space-time diagrams.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::ilp::LinearProgram;
use crate::instance::{Instance, Ticks};

/// Entering and leaving times per AGV and path position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub t_in: Vec<Vec<Ticks>>,
    pub t_out: Vec<Vec<Ticks>>,
}

impl Schedule {
    pub fn from_lp_values(lp: &LinearProgram, x: &[i64]) -> Self {
        let mut t_in = Vec::with_capacity(lp.n_agvs());
        let mut t_out = Vec::with_capacity(lp.n_agvs());
        for j in 0..lp.n_agvs() {
            t_in.push(lp.time_vars(j).iter().map(|&(a, _)| x[a]).collect());
            t_out.push(lp.time_vars(j).iter().map(|&(_, b)| x[b]).collect());
        }
        Self { t_in, t_out }
    }

    /// Earliest times of every AGV, ignoring all other vehicles.
    pub fn earliest(inst: &Instance) -> Self {
        let mut t_in = Vec::new();
        let mut t_out = Vec::new();
        for j in 0..inst.n_agvs() {
            let (ins, outs) = earliest_path_times(inst, j);
            t_in.push(ins);
            t_out.push(outs);
        }
        Self { t_in, t_out }
    }

    /// Assignment for `lp`: times from this schedule, orders from the
    /// realized entering order at each zone.
    pub fn to_lp_values(&self, inst: &Instance, lp: &LinearProgram) -> Vec<i64> {
        let first = |a: usize, b: usize, s: usize| {
            let (ka, kb) = (inst.position(a, s).unwrap_or(0), inst.position(b, s).unwrap_or(0));
            (self.t_in[a][ka], self.t_out[a][ka], a) < (self.t_in[b][kb], self.t_out[b][kb], b)
        };
        lp.assignment_from_times(&self.t_in, &self.t_out, &first)
    }

    pub fn to_json(&self, inst: &Instance) -> Value {
        let mut map = serde_json::Map::new();
        for j in 0..inst.n_agvs() {
            let visits: Vec<Value> = inst
                .path(j)
                .iter()
                .enumerate()
                .map(|(k, &s)| json!({"zone": inst.zone_name(s), "t_in": self.t_in[j][k], "t_out": self.t_out[j][k]}))
                .collect();
            map.insert(inst.agv_id(j).to_string(), Value::Array(visits));
        }
        Value::Object(map)
    }

    pub fn from_json(inst: &Instance, v: &Value) -> Result<Self, ScheduleError> {
        let obj = v.as_object().ok_or_else(|| ScheduleError::Malformed("schedule must be an object".into()))?;
        let mut t_in = Vec::new();
        let mut t_out = Vec::new();
        for j in 0..inst.n_agvs() {
            let id = inst.agv_id(j);
            let visits = obj
                .get(id)
                .and_then(Value::as_array)
                .ok_or_else(|| ScheduleError::Missing { agv: id.to_string(), zone: None })?;
            let mut ins = Vec::new();
            let mut outs = Vec::new();
            for &s in inst.path(j) {
                let zone = inst.zone_name(s);
                let visit = visits
                    .iter()
                    .find(|e| e.get("zone").and_then(Value::as_str) == Some(zone))
                    .ok_or_else(|| ScheduleError::Missing { agv: id.to_string(), zone: Some(zone.to_string()) })?;
                let get = |key: &str| {
                    visit
                        .get(key)
                        .and_then(Value::as_i64)
                        .ok_or_else(|| ScheduleError::Malformed(format!("{id}/{zone}: `{key}` must be an integer")))
                };
                ins.push(get("t_in")?);
                outs.push(get("t_out")?);
            }
            t_in.push(ins);
            t_out.push(outs);
        }
        Ok(Self { t_in, t_out })
    }
}

fn earliest_path_times(inst: &Instance, j: usize) -> (Vec<Ticks>, Vec<Ticks>) {
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    let mut t = inst.release(j);
    let len = inst.path(j).len();
    for k in 0..len {
        ins.push(t);
        t += inst.zone_time(j, k);
        outs.push(t);
        if k + 1 < len {
            t += inst.pass_time(j, k);
        }
    }
    (ins, outs)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule has no entry for {agv}{}", zone.as_ref().map(|z| format!(" at {z}")).unwrap_or_default())]
    Missing { agv: String, zone: Option<String> },
    #[error("malformed schedule: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationCode {
    Window,
    Mpt,
    Mh,
    D,
    Zc,
    No,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::Window => "window",
            ViolationCode::Mpt => "mpt",
            ViolationCode::Mh => "mh",
            ViolationCode::D => "d",
            ViolationCode::Zc => "zc",
            ViolationCode::No => "no",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub agvs: Vec<String>,
    pub zones: Vec<String>,
    pub message: String,
}

struct Checker<'a> {
    inst: &'a Instance,
    sch: &'a Schedule,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, code: ViolationCode, agvs: &[usize], zones: &[usize], message: String) {
        self.out.push(Violation {
            code,
            agvs: agvs.iter().map(|&j| self.inst.agv_id(j).to_string()).collect(),
            zones: zones.iter().map(|&s| self.inst.zone_name(s).to_string()).collect(),
            message,
        });
    }

    fn tin(&self, j: usize, s: usize) -> Ticks {
        self.sch.t_in[j][self.inst.position(j, s).expect("zone on path")]
    }

    fn tout(&self, j: usize, s: usize) -> Ticks {
        self.sch.t_out[j][self.inst.position(j, s).expect("zone on path")]
    }
}

/// Zones two AGVs share, grouped so that one order decision covers a group.
struct PairGroup {
    zones: Vec<usize>,
    /// `(s, s')` traversed by both AGVs in this direction.
    same_edges: Vec<(usize, usize)>,
    /// `(s, s')`: the lower-indexed AGV goes `s -> s'`, the other `s' -> s`, on a single track.
    opposing: Vec<(usize, usize)>,
}

fn pair_groups(inst: &Instance, j: usize, jp: usize) -> Vec<PairGroup> {
    let pj = inst.path(j);
    let pjp = inst.path(jp);
    let shared: Vec<usize> = pj.iter().copied().filter(|s| pjp.contains(s)).collect();
    let mut group_of: BTreeMap<usize, usize> = shared.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mut same_edges = Vec::new();
    let mut opposing = Vec::new();
    for w in pj.windows(2) {
        let (s, sp) = (w[0], w[1]);
        if pjp.windows(2).any(|v| v == [s, sp]) {
            same_edges.push((s, sp));
        } else if inst.is_single_lane(s, sp) && pjp.windows(2).any(|v| v == [sp, s]) {
            opposing.push((s, sp));
        }
    }
    for &(s, sp) in same_edges.iter().chain(&opposing) {
        let (ga, gb) = (group_of[&s], group_of[&sp]);
        if ga != gb {
            let (keep, drop) = (ga.min(gb), ga.max(gb));
            for g in group_of.values_mut() {
                if *g == drop {
                    *g = keep;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, PairGroup> = BTreeMap::new();
    for &s in &shared {
        groups
            .entry(group_of[&s])
            .or_insert_with(|| PairGroup { zones: Vec::new(), same_edges: Vec::new(), opposing: Vec::new() })
            .zones
            .push(s);
    }
    for e in same_edges {
        groups.get_mut(&group_of[&e.0]).expect("group exists").same_edges.push(e);
    }
    for e in opposing {
        groups.get_mut(&group_of[&e.0]).expect("group exists").opposing.push(e);
    }
    groups.into_values().collect()
}

impl Checker<'_> {
    /// Violations of the group when `a` goes first; `lower_first` tells
    /// whether `a` is the lower-indexed AGV of the pair.
    fn orientation(&self, g: &PairGroup, a: usize, b: usize, lower_first: bool) -> Vec<Violation> {
        let mut sub = Checker { inst: self.inst, sch: self.sch, out: Vec::new() };
        for &s in &g.zones {
            let (need, got) = (self.tout(a, s), self.tin(b, s));
            if got < need {
                sub.push(
                    ViolationCode::Zc,
                    &[a, b],
                    &[s],
                    format!("zone occupied twice: [{}, {}] and [{}, {}]", self.tin(a, s), need, got, self.tout(b, s)),
                );
            }
        }
        for &(s, sp) in &g.same_edges {
            let gap = self.inst.headway(a, b, s, sp);
            let (lead, follow) = (self.tout(a, s), self.tout(b, s));
            if follow < lead + gap {
                sub.push(
                    ViolationCode::Mh,
                    &[a, b],
                    &[s, sp],
                    format!("leaves {follow}, needs >= {lead} + headway {gap}"),
                );
            }
        }
        for &(s, sp) in &g.opposing {
            // `a` heads for `to`, `b` leaves from it.
            let to = if lower_first { sp } else { s };
            let (arrive, depart) = (self.tin(a, to), self.tout(b, to));
            if depart < arrive {
                sub.push(
                    ViolationCode::D,
                    &[a, b],
                    &[s, sp],
                    format!("single track used both ways: departs {depart} before arrival {arrive}"),
                );
            }
        }
        sub.out
    }
}

pub fn check_schedule(inst: &Instance, sch: &Schedule) -> Result<Vec<Violation>, ScheduleError> {
    if sch.t_in.len() != inst.n_agvs() || sch.t_out.len() != inst.n_agvs() {
        let j = sch.t_in.len().min(sch.t_out.len()).min(inst.n_agvs().saturating_sub(1));
        return Err(ScheduleError::Missing { agv: inst.agv_id(j).to_string(), zone: None });
    }
    for j in 0..inst.n_agvs() {
        let len = inst.path(j).len();
        if sch.t_in[j].len() != len || sch.t_out[j].len() != len {
            let k = sch.t_in[j].len().min(sch.t_out[j].len()).min(len - 1);
            return Err(ScheduleError::Missing {
                agv: inst.agv_id(j).to_string(),
                zone: Some(inst.zone_name(inst.path(j)[k]).to_string()),
            });
        }
    }
    let mut c = Checker { inst, sch, out: Vec::new() };
    let d = inst.d_max();
    for j in 0..inst.n_agvs() {
        let (lo_in, lo_out) = earliest_path_times(inst, j);
        let path = inst.path(j);
        for (k, &s) in path.iter().enumerate() {
            for (side, t, lo) in [("in", sch.t_in[j][k], lo_in[k]), ("out", sch.t_out[j][k], lo_out[k])] {
                if t < lo || t > lo + d {
                    c.push(ViolationCode::Window, &[j], &[s], format!("t_{side} = {t} outside [{lo}, {}]", lo + d));
                }
            }
            let stay = inst.zone_time(j, k);
            if sch.t_out[j][k] < sch.t_in[j][k] + stay {
                c.push(
                    ViolationCode::Zc,
                    &[j],
                    &[s],
                    format!("stays {} ticks, needs {stay}", sch.t_out[j][k] - sch.t_in[j][k]),
                );
            }
            if k + 1 < path.len() {
                let pass = inst.pass_time(j, k);
                if sch.t_in[j][k + 1] < sch.t_out[j][k] + pass {
                    c.push(
                        ViolationCode::Mpt,
                        &[j],
                        &[s, path[k + 1]],
                        format!("passage takes {} ticks, needs {pass}", sch.t_in[j][k + 1] - sch.t_out[j][k]),
                    );
                }
            }
        }
    }
    for j in 0..inst.n_agvs() {
        for jp in j + 1..inst.n_agvs() {
            for g in pair_groups(inst, j, jp) {
                let fwd = c.orientation(&g, j, jp, true);
                if fwd.is_empty() {
                    continue;
                }
                let bwd = c.orientation(&g, jp, j, false);
                if bwd.is_empty() {
                    continue;
                }
                let first = |s: usize| (c.tin(j, s), c.tout(j, s), j) < (c.tin(jp, s), c.tout(jp, s), jp);
                let realized: Vec<bool> = g.zones.iter().map(|&s| first(s)).collect();
                if realized.iter().all(|&f| f == realized[0]) {
                    c.out.extend(if realized[0] { fwd } else { bwd });
                } else {
                    let code = if g.same_edges.is_empty() { ViolationCode::D } else { ViolationCode::No };
                    c.push(code, &[j, jp], &g.zones, "order changes between linked zones".into());
                }
            }
        }
    }
    Ok(c.out)
}

pub fn objective_value(inst: &Instance, sch: &Schedule) -> Rational64 {
    let d = Rational64::from_integer(inst.d_max());
    (0..inst.n_agvs()).fold(Rational64::zero(), |acc, j| {
        let w = Rational64::approximate_float(inst.weight(j)).expect("weights are validated");
        acc + w * *sch.t_out[j].last().expect("paths are non-empty") / d
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoolStats {
    pub count: usize,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("pool is empty")]
pub struct EmptyPool;

/// Population statistics of pool objectives.
pub fn pool_stats(objectives: &[f64]) -> Result<PoolStats, EmptyPool> {
    if objectives.is_empty() {
        return Err(EmptyPool);
    }
    let n = objectives.len() as f64;
    let mean = objectives.iter().sum::<f64>() / n;
    let var = objectives.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let best = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PoolStats { count: objectives.len(), best, mean, std: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    LimitNoIncumbent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub status: SolveStatus,
    pub best: Option<Schedule>,
    pub objective: Option<Rational64>,
    pub feasible: bool,
    pub certified: bool,
    pub violations: Vec<Violation>,
    /// Distinct schedules with their objectives, ascending.
    pub pool: Vec<(Schedule, Rational64)>,
    pub wall_time: f64,
    pub nodes: u64,
}

impl SolveReport {
    pub fn empty(solver: &str, status: SolveStatus) -> Self {
        Self {
            solver: solver.to_string(),
            status,
            best: None,
            objective: None,
            feasible: false,
            certified: false,
            violations: Vec::new(),
            pool: Vec::new(),
            wall_time: 0.0,
            nodes: 0,
        }
    }

    /// Re-checks the best schedule and every pool entry against the instance.
    /// Infeasible pool entries are dropped; `feasible` reflects the checker only.
    pub fn revalidate(&mut self, inst: &Instance) {
        self.violations = match &self.best {
            Some(s) => check_schedule(inst, s).unwrap_or_else(|e| {
                vec![Violation { code: ViolationCode::Window, agvs: vec![], zones: vec![], message: e.to_string() }]
            }),
            None => Vec::new(),
        };
        self.feasible = self.best.is_some() && self.violations.is_empty();
        if !self.feasible {
            self.certified = false;
        }
        if let Some(s) = &self.best {
            self.objective = Some(objective_value(inst, s));
        }
        self.pool.retain(|(s, _)| check_schedule(inst, s).map(|v| v.is_empty()).unwrap_or(false));
        for (s, obj) in &mut self.pool {
            *obj = objective_value(inst, s);
        }
        self.pool.sort_by_key(|a| a.1);
    }

    pub fn to_json(&self, inst: &Instance) -> Value {
        let rat = |r: &Rational64| json!({"value": r.to_f64(), "exact": r.to_string()});
        let objs: Vec<f64> = self.pool.iter().filter_map(|(_, o)| o.to_f64()).collect();
        json!({
            "solver": self.solver,
            "status": self.status,
            "feasible": self.feasible,
            "certified": self.certified,
            "objective": self.objective.as_ref().map(rat),
            "wall_time": self.wall_time,
            "nodes": self.nodes,
            "violations": self.violations,
            "best": self.best.as_ref().map(|s| s.to_json(inst)),
            "pool_stats": pool_stats(&objs).ok(),
            "pool": self.pool.iter().map(|(s, o)| json!({"objective": rat(o), "schedule": s.to_json(inst)})).collect::<Vec<_>>(),
        })
    }
}

const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// Space-time diagram: time runs left to right, one horizontal band per zone.
pub fn render_diagram(inst: &Instance, sch: &Schedule) -> String {
    let violations = check_schedule(inst, sch).unwrap_or_default();
    let (left, top, band, scale) = (70.0, 30.0, 40.0, 8.0);
    let t_max = sch.t_out.iter().flatten().chain(sch.t_in.iter().flatten()).copied().max().unwrap_or(0).max(1);
    let width = left + t_max as f64 * scale + 120.0;
    let height = top + band * inst.n_zones() as f64 + 40.0 + 14.0 * violations.len() as f64;
    let y = |s: usize| top + band * (s as f64 + 0.5);
    let x = |t: Ticks| left + t as f64 * scale;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    for s in 0..inst.n_zones() {
        let fill = if s % 2 == 0 { "#f4f4f4" } else { "#ffffff" };
        let _ = writeln!(
            out,
            r#"<rect x="{left}" y="{}" width="{}" height="{band}" fill="{fill}"/>"#,
            top + band * s as f64,
            t_max as f64 * scale
        );
        let _ = writeln!(out, r#"<text x="8" y="{}">{}</text>"#, y(s) + 4.0, inst.zone_name(s));
    }
    let axis_y = top + band * inst.n_zones() as f64;
    let _ = writeln!(out, r#"<line x1="{left}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#, x(t_max));
    let step = ((t_max / 10).max(1) as f64 / 5.0).ceil() as i64 * 5;
    let mut t = 0;
    while t <= t_max {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{t}</text>"#, x(t), axis_y + 14.0);
        t += step;
    }
    for j in 0..inst.n_agvs() {
        let color = PALETTE[j % PALETTE.len()];
        let mut pts = String::new();
        for (k, &s) in inst.path(j).iter().enumerate() {
            let _ = write!(pts, "{},{} {},{} ", x(sch.t_in[j][k]), y(s), x(sch.t_out[j][k]), y(s));
        }
        let _ = writeln!(
            out,
            r#"<polyline id="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            inst.agv_id(j),
            pts.trim_end()
        );
        let (k, &s) = inst.path(j).iter().enumerate().next_back().expect("paths are non-empty");
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            x(sch.t_out[j][k]) + 4.0,
            y(s) - 4.0,
            inst.agv_id(j)
        );
    }
    for (i, v) in violations.iter().enumerate() {
        for z in &v.zones {
            if let Some(s) = inst.zone_index(z) {
                let _ = writeln!(
                    out,
                    r#"<rect x="{left}" y="{}" width="{}" height="{band}" fill="red" fill-opacity="0.15"/>"#,
                    top + band * s as f64,
                    t_max as f64 * scale
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{left}" y="{}" fill="red">{}: {} {}</text>"#,
            axis_y + 32.0 + 14.0 * i as f64,
            v.code.as_str(),
            v.agvs.join(","),
            xml_escape(&v.message)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{appendix_instance, AgvSpec, Lane, Topology};

    fn lone() -> Instance {
        let topo = Topology::new(
            vec!["s0".into(), "s1".into()],
            vec![Lane { a: "s0".into(), b: "s1".into(), bidirectional: false }],
        )
        .unwrap();
        let agv = AgvSpec {
            id: "a".into(),
            path: vec!["s0".into(), "s1".into()],
            release: 0,
            weight: 1.0,
            pass_time: [(("s0".to_string(), "s1".to_string()), 16)].into_iter().collect(),
            zone_time: [("s0".to_string(), 2), ("s1".to_string(), 2)].into_iter().collect(),
        };
        Instance::new(topo, vec![agv], 40, 2, vec![]).unwrap()
    }

    #[test]
    fn lone_agv_objective() {
        let inst = lone();
        let sch = Schedule::earliest(&inst);
        assert_eq!(sch.t_out[0], [2, 20]);
        assert_eq!(objective_value(&inst, &sch), Rational64::new(1, 2));
        assert!(check_schedule(&inst, &sch).unwrap().is_empty());
    }

    #[test]
    fn pool_statistics() {
        let s = pool_stats(&[1.0, 3.0]).unwrap();
        assert_eq!((s.count, s.best, s.mean, s.std), (2, 1.0, 2.0, 1.0));
        assert_eq!(pool_stats(&[4.0; 5]).unwrap().std, 0.0);
        assert_eq!(pool_stats(&[]), Err(EmptyPool));
    }

    #[test]
    fn overlap_in_a_zone_is_named() {
        let inst = appendix_instance();
        let sch = Schedule::earliest(&inst);
        let v = check_schedule(&inst, &sch).unwrap();
        // agv0 and agv1 both start in s0 at time 0.
        assert!(v.iter().any(|v| v.code == ViolationCode::Zc && v.agvs == ["agv0", "agv1"] && v.zones == ["s0"]));
    }

    #[test]
    fn missing_entries_are_errors() {
        let inst = lone();
        let sch = Schedule { t_in: vec![vec![0]], t_out: vec![vec![2]] };
        assert!(matches!(check_schedule(&inst, &sch), Err(ScheduleError::Missing { .. })));
    }

    #[test]
    fn window_violation() {
        let inst = lone();
        let mut sch = Schedule::earliest(&inst);
        sch.t_in[0][1] = 70;
        sch.t_out[0][1] = 72;
        let v = check_schedule(&inst, &sch).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.code == ViolationCode::Window));
    }

    #[test]
    fn json_round_trip_and_diagram_determinism() {
        let inst = appendix_instance();
        let sch = Schedule::earliest(&inst);
        assert_eq!(Schedule::from_json(&inst, &sch.to_json(&inst)).unwrap(), sch);
        let a = render_diagram(&inst, &sch);
        assert_eq!(a, render_diagram(&inst, &sch));
        assert_eq!(a.matches("<polyline").count(), 7);
    }
}
