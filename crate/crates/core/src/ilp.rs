//! Integer linear program for zone scheduling.
//!
//! Decision variables are the entering/leaving times `t_in(j,s)`, `t_out(j,s)`
//! (bounded by the time windows) and binary order variables: `y(j,j',s) = 1`
//! iff `j` passes zone `s` before `j'`, and `z(j,j',s,s') = 1` iff `j` enters
//! the single track between `s` and `s'` before `j'`.
//!
//! Constraint families, all canonicalized to `sum(c * v) >= rhs` or `= rhs`:
//!
//! | code | form |
//! |------|------|
//! | mpt  | `t_in(j,s') >= t_out(j,s) + pass(j,s,s')` |
//! | mh   | `t_out(j',s) + M y(j',j,s) >= t_out(j,s) + headway(j,j',s,s')` for every shared same-direction edge |
//! | d    | `t_out(j',s') + M z(j',j,s',s) >= t_in(j,s')` for opposing traffic on a single track |
//! | zc   | `t_in(j',s) + M y(j',j,s) >= t_out(j,s)` and `t_out(j,s) >= t_in(j,s) + stay(j,s)` |
//! | no   | `y(j,j',s) = y(j,j',s')` along a shared same-direction run |
//!
//! Every big-M is the tightest value that deactivates its inequality inside
//! the time windows.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, Ticks};
use crate::preprocess::{ConflictSets, Side, TimeWindows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    TIn {
        agv: usize,
        zone: usize,
    },
    TOut {
        agv: usize,
        zone: usize,
    },
    /// `agv` passes `zone` before `other`.
    Y {
        agv: usize,
        other: usize,
        zone: usize,
    },
    /// `agv` enters the track `from -> to` before `other` enters it from the far end.
    Z {
        agv: usize,
        other: usize,
        from: usize,
        to: usize,
    },
}

impl VarKind {
    pub fn is_order(&self) -> bool {
        matches!(self, VarKind::Y { .. } | VarKind::Z { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableRef {
    pub kind: VarKind,
    pub lo: Ticks,
    pub hi: Ticks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Mpt,
    Headway,
    Deadlock,
    Zone,
    Stay,
    Antisymmetry,
    NoOvertake,
    LaneLink,
}

impl ConstraintKind {
    /// Short code of the constraint family the row belongs to.
    pub fn code(&self) -> &'static str {
        match self {
            ConstraintKind::Mpt => "mpt",
            ConstraintKind::Headway => "mh",
            ConstraintKind::Deadlock | ConstraintKind::LaneLink => "d",
            ConstraintKind::Zone | ConstraintKind::Stay | ConstraintKind::Antisymmetry => "zc",
            ConstraintKind::NoOvertake => "no",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub kind: ConstraintKind,
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub rhs: i64,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[i64]) -> i64 {
        self.terms.iter().map(|&(v, c)| c * x[v]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// One order variable per pair and linked zone group instead of the
    /// explicit ordered variables with antisymmetry/no-overtake equalities.
    pub compact: bool,
    /// Multiplies every big-M before rounding down; 1 gives the tight value.
    pub big_m_scale: Rational64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { compact: false, big_m_scale: Rational64::from_integer(1) }
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    vars: Vec<VariableRef>,
    eqs: Vec<LinearConstraint>,
    ineqs: Vec<LinearConstraint>,
    objective: Vec<(usize, Rational64)>,
    index: HashMap<VarKind, usize>,
    times: Vec<Vec<(usize, usize)>>,
    agv_ids: Vec<String>,
    zone_names: Vec<String>,
}

impl LinearProgram {
    pub fn vars(&self) -> &[VariableRef] {
        &self.vars
    }

    pub fn eqs(&self) -> &[LinearConstraint] {
        &self.eqs
    }

    pub fn ineqs(&self) -> &[LinearConstraint] {
        &self.ineqs
    }

    pub fn objective(&self) -> &[(usize, Rational64)] {
        &self.objective
    }

    pub fn var_index(&self, kind: &VarKind) -> Option<usize> {
        self.index.get(kind).copied()
    }

    /// `(t_in, t_out)` variable indices per AGV and path position.
    pub fn time_vars(&self, agv: usize) -> &[(usize, usize)] {
        &self.times[agv]
    }

    pub fn n_agvs(&self) -> usize {
        self.times.len()
    }

    pub fn n_int(&self) -> usize {
        self.vars.iter().filter(|v| !v.kind.is_order()).count()
    }

    pub fn n_bin(&self) -> usize {
        self.vars.iter().filter(|v| v.kind.is_order()).count()
    }

    pub fn objective_value(&self, x: &[i64]) -> Rational64 {
        self.objective.iter().fold(Rational64::zero(), |acc, &(v, c)| acc + c * x[v])
    }

    pub fn var_name(&self, v: usize) -> String {
        let a = |j: usize| &self.agv_ids[j];
        let z = |s: usize| &self.zone_names[s];
        match self.vars[v].kind {
            VarKind::TIn { agv, zone } => format!("tin_{}_{}", a(agv), z(zone)),
            VarKind::TOut { agv, zone } => format!("tout_{}_{}", a(agv), z(zone)),
            VarKind::Y { agv, other, zone } => format!("y_{}_{}_{}", a(agv), a(other), z(zone)),
            VarKind::Z { agv, other, from, to } => {
                format!("z_{}_{}_{}_{}", a(agv), a(other), z(from), z(to))
            }
        }
    }

    /// Full assignment from times plus an order oracle `first(a, b, s)`
    /// answering whether `a` passes zone `s` before `b`.
    pub fn assignment_from_times(
        &self,
        t_in: &[Vec<Ticks>],
        t_out: &[Vec<Ticks>],
        first: &dyn Fn(usize, usize, usize) -> bool,
    ) -> Vec<i64> {
        let mut x = vec![0; self.vars.len()];
        for (j, row) in self.times.iter().enumerate() {
            for (k, &(vin, vout)) in row.iter().enumerate() {
                x[vin] = t_in[j][k];
                x[vout] = t_out[j][k];
            }
        }
        for (v, var) in self.vars.iter().enumerate() {
            match var.kind {
                VarKind::Y { agv, other, zone } => x[v] = first(agv, other, zone) as i64,
                VarKind::Z { agv, other, from, .. } => x[v] = first(agv, other, from) as i64,
                _ => {}
            }
        }
        x
    }

    /// Plain-text export in the common LP file layout.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ AGV zone scheduling model\nMinimize\n obj:");
        if self.objective.is_empty() {
            out.push_str(" 0");
        }
        for (i, &(v, c)) in self.objective.iter().enumerate() {
            let c = c.to_f64().unwrap_or(0.0);
            let sign = if i == 0 { "" } else { " +" };
            let _ = write!(out, "{sign} {c} {}", self.var_name(v));
        }
        out.push_str("\nSubject To\n");
        let row = |out: &mut String, c: &LinearConstraint, op: &str| {
            let _ = write!(out, " {}:", c.name);
            for (i, &(v, coef)) in c.terms.iter().enumerate() {
                let sign = if coef < 0 {
                    "-"
                } else if i == 0 {
                    ""
                } else {
                    "+"
                };
                let mag = coef.abs();
                if mag == 1 {
                    let _ = write!(out, " {sign} {}", self.var_name(v));
                } else {
                    let _ = write!(out, " {sign} {mag} {}", self.var_name(v));
                }
            }
            if c.terms.is_empty() {
                out.push_str(" 0");
            }
            let _ = writeln!(out, " {op} {}", c.rhs);
        };
        for c in &self.ineqs {
            row(&mut out, c, ">=");
        }
        for c in &self.eqs {
            row(&mut out, c, "=");
        }
        out.push_str("Bounds\n");
        for (v, var) in self.vars.iter().enumerate() {
            if !var.kind.is_order() {
                let _ = writeln!(out, " {} <= {} <= {}", var.lo, self.var_name(v), var.hi);
            }
        }
        out.push_str("Generals\n");
        for (v, var) in self.vars.iter().enumerate() {
            if !var.kind.is_order() {
                let _ = writeln!(out, " {}", self.var_name(v));
            }
        }
        out.push_str("Binaries\n");
        for (v, var) in self.vars.iter().enumerate() {
            if var.kind.is_order() {
                let _ = writeln!(out, " {}", self.var_name(v));
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Lit {
    var: usize,
    negated: bool,
}

struct Builder<'a> {
    inst: &'a Instance,
    opts: &'a BuildOptions,
    lp: LinearProgram,
    /// Compact mode: literal for `y(a, b, s)`.
    compact_lits: HashMap<(usize, usize, usize), Lit>,
}

impl<'a> Builder<'a> {
    fn add_var(&mut self, kind: VarKind, lo: Ticks, hi: Ticks) -> usize {
        let v = self.lp.vars.len();
        self.lp.vars.push(VariableRef { kind, lo, hi });
        self.lp.index.insert(kind, v);
        v
    }

    fn t(&self, agv: usize, zone: usize, side: Side) -> usize {
        let kind = match side {
            Side::In => VarKind::TIn { agv, zone },
            Side::Out => VarKind::TOut { agv, zone },
        };
        self.lp.index[&kind]
    }

    fn y(&self, a: usize, b: usize, s: usize) -> Lit {
        if self.opts.compact {
            self.compact_lits[&(a, b, s)]
        } else {
            Lit { var: self.lp.index[&VarKind::Y { agv: a, other: b, zone: s }], negated: false }
        }
    }

    fn z(&self, a: usize, b: usize, s: usize, sp: usize) -> Lit {
        if self.opts.compact {
            self.y(a, b, s)
        } else {
            Lit { var: self.lp.index[&VarKind::Z { agv: a, other: b, from: s, to: sp }], negated: false }
        }
    }

    fn name(&self, prefix: &str, agvs: &[usize], zones: &[usize]) -> String {
        let mut s = prefix.to_string();
        for &j in agvs {
            s.push('_');
            s.push_str(self.inst.agv_id(j));
        }
        for &z in zones {
            s.push('_');
            s.push_str(self.inst.zone_name(z));
        }
        s
    }

    /// Emits `t[plus] + M * lit >= t[minus] + c` with the tightest big-M.
    fn ge_with_order(
        &mut self,
        kind: ConstraintKind,
        name: String,
        plus: usize,
        minus: usize,
        c: i64,
        lit: Option<Lit>,
    ) {
        let mut terms = vec![(plus, 1), (minus, -1)];
        let mut rhs = c;
        if let Some(lit) = lit {
            let tight = (self.lp.vars[minus].hi + c - self.lp.vars[plus].lo).max(0);
            let m = (self.opts.big_m_scale * tight).floor().to_integer().max(0);
            if m > 0 {
                if lit.negated {
                    terms.push((lit.var, -m));
                    rhs -= m;
                } else {
                    terms.push((lit.var, m));
                }
            }
        }
        self.lp.ineqs.push(LinearConstraint { kind, name, terms, rhs });
    }

    fn eq(&mut self, kind: ConstraintKind, name: String, terms: Vec<(usize, i64)>, rhs: i64) {
        self.lp.eqs.push(LinearConstraint { kind, name, terms, rhs });
    }
}

/// Disjoint-set over shared zones of one pair, used to group linked orders.
fn pair_groups(shared: &[usize], links: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..shared.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let pos = |z: usize| shared.iter().position(|&s| s == z).expect("linked zone is shared");
    for &(a, b) in links {
        let (ra, rb) = (find(&mut parent, pos(a)), find(&mut parent, pos(b)));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &z) in shared.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(z);
    }
    groups.into_values().collect()
}

pub fn build_ilp(inst: &Instance, win: &TimeWindows, conf: &ConflictSets) -> LinearProgram {
    build_ilp_with(inst, win, conf, &BuildOptions::default())
}

pub fn build_ilp_with(inst: &Instance, win: &TimeWindows, conf: &ConflictSets, opts: &BuildOptions) -> LinearProgram {
    let n = inst.n_agvs();
    let mut b = Builder {
        inst,
        opts,
        lp: LinearProgram {
            vars: Vec::new(),
            eqs: Vec::new(),
            ineqs: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
            times: Vec::with_capacity(n),
            agv_ids: inst.agvs().iter().map(|a| a.id.clone()).collect(),
            zone_names: inst.topology().zones().to_vec(),
        },
        compact_lits: HashMap::new(),
    };

    for j in 0..n {
        let mut row = Vec::with_capacity(inst.path(j).len());
        for (k, &s) in inst.path(j).iter().enumerate() {
            let vin = b.add_var(VarKind::TIn { agv: j, zone: s }, win.lower(j, k, Side::In), win.upper(j, k, Side::In));
            let vout =
                b.add_var(VarKind::TOut { agv: j, zone: s }, win.lower(j, k, Side::Out), win.upper(j, k, Side::Out));
            row.push((vin, vout));
        }
        b.lp.times.push(row);
    }

    // Shared zones per unordered pair, in the lower-indexed AGV's travel order.
    let mut shared: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for zp in &conf.zone_pairs {
        shared.entry((zp.j, zp.jp)).or_default().push(zp.s);
    }

    if opts.compact {
        for (&(j, jp), zones) in &shared {
            let pc = conf.for_pair(j, jp);
            let mut links = Vec::new();
            for run in &pc.runs {
                links.extend(run.zones.windows(2).map(|w| (w[0], w[1])));
            }
            links.extend(pc.opposing.iter().map(|o| (o.s, o.sp)));
            for group in pair_groups(zones, &links) {
                let v = b.add_var(VarKind::Y { agv: j, other: jp, zone: group[0] }, 0, 1);
                for &s in &group {
                    b.compact_lits.insert((j, jp, s), Lit { var: v, negated: false });
                    b.compact_lits.insert((jp, j, s), Lit { var: v, negated: true });
                }
            }
        }
    } else {
        for a in 0..n {
            for bb in 0..n {
                if a == bb {
                    continue;
                }
                let key = (a.min(bb), a.max(bb));
                if let Some(zones) = shared.get(&key) {
                    // Keep creation order keyed by `a`'s own travel order.
                    let mut zs = zones.clone();
                    zs.sort_by_key(|&s| inst.position(a, s));
                    for s in zs {
                        b.add_var(VarKind::Y { agv: a, other: bb, zone: s }, 0, 1);
                    }
                }
            }
        }
        for o in &conf.opposing {
            b.add_var(VarKind::Z { agv: o.j, other: o.jp, from: o.s, to: o.sp }, 0, 1);
            b.add_var(VarKind::Z { agv: o.jp, other: o.j, from: o.sp, to: o.s }, 0, 1);
        }
    }

    // mpt
    for j in 0..n {
        let path = inst.path(j);
        for k in 0..path.len().saturating_sub(1) {
            let (s, sp) = (path[k], path[k + 1]);
            let name = b.name("mpt", &[j], &[s, sp]);
            let (plus, minus) = (b.t(j, sp, Side::In), b.t(j, s, Side::Out));
            b.ge_with_order(ConstraintKind::Mpt, name, plus, minus, inst.pass_time(j, k), None);
        }
    }

    // mh: j leaves s first, j' follows on the shared edge (s, s').
    for a in 0..n {
        for bb in 0..n {
            if a == bb {
                continue;
            }
            let pc = conf.for_pair(a, bb);
            for run in &pc.runs {
                for w in run.zones.windows(2) {
                    let (s, sp) = (w[0], w[1]);
                    let name = b.name("mh", &[a, bb], &[s, sp]);
                    let lit = b.y(bb, a, s);
                    let (plus, minus) = (b.t(bb, s, Side::Out), b.t(a, s, Side::Out));
                    b.ge_with_order(ConstraintKind::Headway, name, plus, minus, inst.headway(a, bb, s, sp), Some(lit));
                }
            }
        }
    }

    // d: opposing traffic on a single track.
    for o in &conf.opposing {
        let (j, jp, s, sp) = (o.j, o.jp, o.s, o.sp);
        let name = b.name("d", &[j, jp], &[s, sp]);
        let lit = b.z(j, jp, s, sp);
        let (plus, minus) = (b.t(j, s, Side::Out), b.t(jp, s, Side::In));
        b.ge_with_order(ConstraintKind::Deadlock, name, plus, minus, 0, Some(lit));
        let name = b.name("d", &[jp, j], &[sp, s]);
        let lit = b.z(jp, j, sp, s);
        let (plus, minus) = (b.t(jp, sp, Side::Out), b.t(j, sp, Side::In));
        b.ge_with_order(ConstraintKind::Deadlock, name, plus, minus, 0, Some(lit));
    }

    // zc: a leaves s before b enters, unless b goes first.
    for a in 0..n {
        for bb in 0..n {
            if a == bb {
                continue;
            }
            if let Some(zones) = shared.get(&(a.min(bb), a.max(bb))) {
                let mut zs = zones.clone();
                zs.sort_by_key(|&s| inst.position(a, s));
                for s in zs {
                    let name = b.name("zc", &[a, bb], &[s]);
                    let lit = b.y(bb, a, s);
                    let (plus, minus) = (b.t(bb, s, Side::In), b.t(a, s, Side::Out));
                    b.ge_with_order(ConstraintKind::Zone, name, plus, minus, 0, Some(lit));
                }
            }
        }
    }

    for j in 0..n {
        for (k, &s) in inst.path(j).iter().enumerate() {
            let name = b.name("stay", &[j], &[s]);
            let (plus, minus) = (b.t(j, s, Side::Out), b.t(j, s, Side::In));
            b.ge_with_order(ConstraintKind::Stay, name, plus, minus, inst.zone_time(j, k), None);
        }
    }

    if !opts.compact {
        for (&(j, jp), zones) in &shared {
            for &s in zones {
                let (l1, l2) = (b.y(j, jp, s), b.y(jp, j, s));
                let name = b.name("anti", &[j, jp], &[s]);
                b.eq(ConstraintKind::Antisymmetry, name, vec![(l1.var, 1), (l2.var, 1)], 1);
            }
        }
        for o in &conf.opposing {
            let (l1, l2) = (b.z(o.j, o.jp, o.s, o.sp), b.z(o.jp, o.j, o.sp, o.s));
            let name = b.name("anti", &[o.j, o.jp], &[o.s, o.sp]);
            b.eq(ConstraintKind::Antisymmetry, name, vec![(l1.var, 1), (l2.var, 1)], 1);
        }
        for a in 0..n {
            for bb in 0..n {
                if a == bb {
                    continue;
                }
                let pc = conf.for_pair(a, bb);
                for run in &pc.runs {
                    for w in run.zones.windows(2) {
                        let (l1, l2) = (b.y(a, bb, w[0]), b.y(a, bb, w[1]));
                        let name = b.name("no", &[a, bb], &[w[0], w[1]]);
                        b.eq(ConstraintKind::NoOvertake, name, vec![(l1.var, 1), (l2.var, -1)], 0);
                    }
                }
            }
        }
        for o in &conf.opposing {
            for (a, bb, s, sp) in [(o.j, o.jp, o.s, o.sp), (o.jp, o.j, o.sp, o.s)] {
                let zl = b.z(a, bb, s, sp);
                for zone in [s, sp] {
                    let yl = b.y(a, bb, zone);
                    let name = b.name("link", &[a, bb], &[s, sp, zone]);
                    b.eq(ConstraintKind::LaneLink, name, vec![(zl.var, 1), (yl.var, -1)], 0);
                }
            }
        }
    }

    let d_max = Rational64::from_integer(inst.d_max());
    for j in 0..n {
        let &(_, vout) = b.lp.times[j].last().expect("paths are non-empty");
        let w = Rational64::approximate_float(inst.weight(j)).expect("weights are validated");
        if !w.is_zero() {
            b.lp.objective.push((vout, w / d_max));
        }
    }
    b.lp
}

/// Actual model size next to the analytic upper limits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
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
    /// Row counts per constraint family.
    pub by_kind: BTreeMap<String, usize>,
}

impl SizeReport {
    pub fn n_vars(&self) -> usize {
        self.n_int + self.n_bin
    }

    pub fn within_bounds(&self) -> bool {
        self.n_vars() <= self.bound_vars && self.n_eq <= self.bound_eq && self.n_ineq <= self.bound_ineq
    }
}

/// `(vars, eqs, ineqs)` upper limits for `|J|` AGVs on `|S|` zones.
pub fn analytic_bounds(n_agvs: usize, n_zones: usize) -> (usize, usize, usize) {
    let (j, s) = (n_agvs, n_zones);
    let vars = j * (j.saturating_sub(1)) * s / 2 + 2 * j * s;
    let eqs = (j * j * s).div_ceil(2);
    let ineqs = 3 * j * j * s;
    (vars, eqs, ineqs)
}

pub fn size_report(inst: &Instance, lp: &LinearProgram) -> SizeReport {
    let (bound_vars, bound_eq, bound_ineq) = analytic_bounds(inst.n_agvs(), inst.n_zones());
    let mut by_kind = BTreeMap::new();
    for c in lp.ineqs.iter().chain(&lp.eqs) {
        let key = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        *by_kind.entry(key).or_insert(0) += 1;
    }
    SizeReport {
        n_agvs: inst.n_agvs(),
        n_zones: inst.n_zones(),
        d_max: inst.d_max(),
        n_int: lp.n_int(),
        n_bin: lp.n_bin(),
        n_eq: lp.eqs.len(),
        n_ineq: lp.ineqs.len(),
        bound_vars,
        bound_eq,
        bound_ineq,
        by_kind,
    }
}

/// Builds the default model and reports its size against the analytic limits.
pub fn size_bounds(inst: &Instance) -> SizeReport {
    let win = crate::preprocess::compute_time_windows(inst);
    let conf = crate::preprocess::find_conflicts(inst);
    let lp = build_ilp(inst, &win, &conf);
    size_report(inst, &lp)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpViolation {
    pub kind: ConstraintKind,
    pub name: String,
    pub equality: bool,
    pub lhs: i64,
    pub rhs: i64,
    /// `rhs - lhs` for inequalities, `|lhs - rhs|` for equalities.
    pub amount: i64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("assignment has {got} values, model has {expected} variables")]
    MissingVariable { expected: usize, got: usize },
    #[error("variable {name} = {value} outside [{lo}, {hi}]")]
    OutOfBounds { name: String, value: i64, lo: i64, hi: i64 },
}

pub fn eval_assignment(lp: &LinearProgram, x: &[i64]) -> Result<Vec<LpViolation>, EvalError> {
    if x.len() != lp.vars.len() {
        return Err(EvalError::MissingVariable { expected: lp.vars.len(), got: x.len() });
    }
    for (v, var) in lp.vars.iter().enumerate() {
        if x[v] < var.lo || x[v] > var.hi {
            return Err(EvalError::OutOfBounds { name: lp.var_name(v), value: x[v], lo: var.lo, hi: var.hi });
        }
    }
    let mut out = Vec::new();
    for c in &lp.ineqs {
        let lhs = c.lhs(x);
        if lhs < c.rhs {
            out.push(LpViolation {
                kind: c.kind,
                name: c.name.clone(),
                equality: false,
                lhs,
                rhs: c.rhs,
                amount: c.rhs - lhs,
            });
        }
    }
    for c in &lp.eqs {
        let lhs = c.lhs(x);
        if lhs != c.rhs {
            out.push(LpViolation {
                kind: c.kind,
                name: c.name.clone(),
                equality: true,
                lhs,
                rhs: c.rhs,
                amount: (lhs - c.rhs).abs(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{appendix_instance, AgvSpec, Instance, Lane, Topology};
    use crate::preprocess::{compute_time_windows, find_conflicts};

    fn build(inst: &Instance, opts: &BuildOptions) -> LinearProgram {
        build_ilp_with(inst, &compute_time_windows(inst), &find_conflicts(inst), opts)
    }

    fn corridor(n_zones: usize, single: &[usize]) -> Topology {
        Topology::new(
            (0..n_zones).map(|i| format!("s{i}")).collect(),
            (0..n_zones - 1)
                .map(|i| Lane { a: format!("s{i}"), b: format!("s{}", i + 1), bidirectional: single.contains(&i) })
                .collect(),
        )
        .unwrap()
    }

    pub(crate) fn agv(id: &str, path: &[usize], release: i64) -> AgvSpec {
        let names: Vec<String> = path.iter().map(|z| format!("s{z}")).collect();
        AgvSpec {
            id: id.into(),
            path: names.clone(),
            release,
            weight: 1.0,
            pass_time: names.windows(2).map(|w| ((w[0].clone(), w[1].clone()), 3)).collect(),
            zone_time: names.iter().map(|z| (z.clone(), 2)).collect(),
        }
    }

    #[test]
    fn appendix_counts_are_exact() {
        let inst = appendix_instance();
        let lp = build(&inst, &BuildOptions::default());
        assert_eq!((lp.n_int(), lp.n_bin()), (48, 70));
        assert_eq!(lp.eqs().len(), 55);
        assert_eq!(lp.ineqs().len(), 127);
        let rep = size_report(&inst, &lp);
        assert_eq!((rep.bound_vars, rep.bound_eq, rep.bound_ineq), (245, 172, 1029));
        assert!(rep.within_bounds());
    }

    #[test]
    fn closed_form_upper_limits() {
        assert_eq!(analytic_bounds(15, 7), (945, 788, 4725));
        assert_eq!(analytic_bounds(2, 4), (20, 8, 48));
        assert_eq!(analytic_bounds(21, 7), (1764, 1544, 9261));
        let (_, e, i) = analytic_bounds(15, 7);
        assert_eq!(e + i, 5513);
    }

    #[test]
    fn single_agv_has_no_order_variables() {
        let inst = Instance::new(corridor(2, &[]), vec![agv("a", &[0, 1], 0)], 10, 2, vec![]).unwrap();
        let lp = build(&inst, &BuildOptions::default());
        assert_eq!(lp.n_int(), 4);
        assert_eq!(lp.n_bin(), 0);
        assert_eq!(lp.eqs().len(), 0);
        let kinds: Vec<_> = lp.ineqs().iter().map(|c| c.kind).collect();
        assert_eq!(kinds, [ConstraintKind::Mpt, ConstraintKind::Stay, ConstraintKind::Stay]);
    }

    #[test]
    fn single_shared_zone_pair() {
        let inst = Instance::new(corridor(3, &[]), vec![agv("a", &[1], 0), agv("b", &[1], 0)], 10, 2, vec![]).unwrap();
        let explicit = build(&inst, &BuildOptions::default());
        assert_eq!(explicit.n_bin(), 2);
        assert_eq!(explicit.eqs().len(), 1);
        let compact = build(&inst, &BuildOptions { compact: true, ..Default::default() });
        assert_eq!(compact.n_bin(), 1);
        assert!(compact.eqs().is_empty());
        for lp in [&explicit, &compact] {
            let count = |k| lp.ineqs().iter().filter(|c| c.kind == k).count();
            assert_eq!(count(ConstraintKind::Zone), 2);
            assert_eq!(count(ConstraintKind::Stay), 2);
            assert_eq!(lp.ineqs().len(), 4);
        }
    }

    #[test]
    fn big_m_is_tight() {
        let inst = Instance::new(corridor(3, &[]), vec![agv("a", &[1], 0), agv("b", &[1], 5)], 10, 2, vec![]).unwrap();
        let lp = build(&inst, &BuildOptions::default());
        // zc a->b: t_in(b) + M y(b,a) >= t_out(a); M = hi(t_out a) - lo(t_in b) = 12 - 5.
        let c = lp.ineqs().iter().find(|c| c.name == "zc_a_b_s1").unwrap();
        let m = c.terms.iter().find(|&&(v, _)| lp.vars()[v].kind.is_order()).unwrap().1;
        assert_eq!(m, 7);
    }

    #[test]
    fn earliest_times_are_feasible_for_a_lone_agv() {
        let inst = Instance::new(corridor(4, &[]), vec![agv("a", &[0, 1, 2, 3], 4)], 10, 2, vec![]).unwrap();
        let lp = build(&inst, &BuildOptions::default());
        let x: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
        assert!(eval_assignment(&lp, &x).unwrap().is_empty());
    }

    #[test]
    fn eval_rejects_bad_assignments() {
        let inst = Instance::new(corridor(2, &[]), vec![agv("a", &[0, 1], 0)], 10, 2, vec![]).unwrap();
        let lp = build(&inst, &BuildOptions::default());
        assert!(matches!(eval_assignment(&lp, &[0, 2]), Err(EvalError::MissingVariable { .. })));
        let mut x: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
        x[0] = 99;
        assert!(matches!(eval_assignment(&lp, &x), Err(EvalError::OutOfBounds { .. })));
        let mut x: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
        x[2] = lp.vars()[2].lo; // t_in(s1) at its lower bound
        x[1] = lp.vars()[1].lo + 1; // leave s0 late -> mpt broken
        let viol = eval_assignment(&lp, &x).unwrap();
        assert_eq!(viol.len(), 1);
        assert_eq!(viol[0].kind, ConstraintKind::Mpt);
        assert_eq!(viol[0].amount, 1);
    }

    #[test]
    fn all_lower_bounds_conflict_on_the_appendix() {
        let inst = appendix_instance();
        let lp = build(&inst, &BuildOptions::default());
        let x: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
        let viol = eval_assignment(&lp, &x).unwrap();
        assert!(viol.iter().any(|v| v.kind == ConstraintKind::Zone));
    }

    #[test]
    fn lp_text_names_variables() {
        let inst = appendix_instance();
        let lp = build(&inst, &BuildOptions::default());
        let text = lp.to_lp_text();
        assert!(text.contains("tin_agv0_s0"));
        assert!(text.contains("y_agv0_agv1_s0"));
        assert!(text.contains("z_agv5_agv6_s6_s5"));
        assert!(text.trim_end().ends_with("End"));
    }
}
