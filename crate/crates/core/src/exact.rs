//! Exact optimization over the order variables.
//!
//! Once every order variable is fixed, each inequality of the model is a
//! difference constraint `t_a - t_b >= c` (or a plain bound), so the minimal
//! feasible times follow from a longest-path computation starting at the
//! window lower bounds. The objective is nondecreasing in every time, hence
//! those minimal times are optimal for the ordering. Branch-and-bound searches
//! the orderings; open order variables are relaxed to whichever value
//! deactivates their constraint, which gives a valid lower bound.

use std::time::{Duration, Instant};

use num_rational::Rational64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ilp::{eval_assignment, LinearProgram, VarKind};
use crate::verify::{Schedule, SolveReport, SolveStatus};

/// Order decisions: one entry per LP variable, `None` for times and open orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderAssignment {
    pub values: Vec<Option<bool>>,
}

impl OrderAssignment {
    pub fn open(lp: &LinearProgram) -> Self {
        Self { values: vec![None; lp.vars().len()] }
    }

    /// Order values taken from a full LP assignment.
    pub fn from_values(lp: &LinearProgram, x: &[i64]) -> Self {
        let values = lp.vars().iter().zip(x).map(|(v, &val)| v.kind.is_order().then_some(val != 0)).collect();
        Self { values }
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var] = Some(value);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self { time_limit: Some(Duration::from_secs(60)), node_limit: Some(5_000_000) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasible {
    #[error("{var} would have to be >= {needed}, above its bound {hi}")]
    Window { var: String, needed: i64, hi: i64 },
    #[error("cyclic precedence through {var}")]
    Cycle { var: String },
    #[error("order variables contradict equality {name}")]
    Equality { name: String },
    #[error("constraint {name} cannot hold")]
    Row { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("ordering is incomplete: {var} is unassigned")]
    Incomplete { var: String },
    #[error("{count} free order classes; the oracle enumerates at most {max}")]
    TooManyOrderVariables { count: usize, max: usize },
    #[error("constraint {name} is not a difference constraint once orders are fixed")]
    Unsupported { name: String },
}

/// Minimal times for a fixed ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedTimes {
    /// Full LP assignment.
    pub values: Vec<i64>,
    pub objective: Rational64,
}

impl FixedTimes {
    pub fn schedule(&self, lp: &LinearProgram) -> Schedule {
        Schedule::from_lp_values(lp, &self.values)
    }
}

pub const ORACLE_MAX_CLASSES: usize = 20;

struct Row {
    name: String,
    plus: Option<usize>,
    minus: Option<usize>,
    rhs: i64,
    orders: Vec<(usize, i64)>,
}

/// Order variables tied together by the equalities: `value(v) = value(rep) ^ parity`.
#[derive(Debug, Clone)]
struct Class {
    rep: usize,
    name: String,
}

struct Prepared<'a> {
    lp: &'a LinearProgram,
    rows: Vec<Row>,
    classes: Vec<Class>,
    class_of: Vec<Option<(usize, bool)>>,
    /// Contradictory parities among the equalities.
    contradiction: Option<String>,
}

fn find(parent: &mut [usize], parity: &mut [bool], x: usize) -> (usize, bool) {
    if parent[x] == x {
        return (x, false);
    }
    let (r, p) = find(parent, parity, parent[x]);
    parity[x] ^= p;
    parent[x] = r;
    (r, parity[x])
}

impl<'a> Prepared<'a> {
    fn new(lp: &'a LinearProgram) -> Result<Self, ExactError> {
        let n = lp.vars().len();
        let is_order: Vec<bool> = lp.vars().iter().map(|v| v.kind.is_order()).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        let mut parity = vec![false; n];
        let mut contradiction = None;
        for c in lp.eqs() {
            let link = match c.terms.as_slice() {
                &[(a, 1), (b, 1)] if c.rhs == 1 && is_order[a] && is_order[b] => Some((a, b, true)),
                &[(a, 1), (b, -1)] | &[(a, -1), (b, 1)] if c.rhs == 0 && is_order[a] && is_order[b] => {
                    Some((a, b, false))
                }
                _ => None,
            };
            let Some((a, b, p)) = link else {
                return Err(ExactError::Unsupported { name: c.name.clone() });
            };
            let (ra, pa) = find(&mut parent, &mut parity, a);
            let (rb, pb) = find(&mut parent, &mut parity, b);
            if ra == rb {
                if pa ^ pb != p && contradiction.is_none() {
                    contradiction = Some(c.name.clone());
                }
            } else {
                // Keep the smaller index as root so representatives are stable.
                let (root, child) = (ra.min(rb), ra.max(rb));
                parent[child] = root;
                parity[child] = pa ^ pb ^ p;
            }
        }
        let mut classes = Vec::new();
        let mut class_id = vec![usize::MAX; n];
        let mut class_of = vec![None; n];
        for v in 0..n {
            if !is_order[v] {
                continue;
            }
            let (r, p) = find(&mut parent, &mut parity, v);
            if class_id[r] == usize::MAX {
                class_id[r] = classes.len();
                classes.push(Class { rep: r, name: lp.var_name(r) });
            }
            class_of[v] = Some((class_id[r], p));
        }
        let mut rows = Vec::with_capacity(lp.ineqs().len());
        for c in lp.ineqs() {
            let mut row = Row { name: c.name.clone(), plus: None, minus: None, rhs: c.rhs, orders: Vec::new() };
            for &(v, coef) in &c.terms {
                if is_order[v] {
                    row.orders.push((v, coef));
                } else if coef == 1 && row.plus.is_none() {
                    row.plus = Some(v);
                } else if coef == -1 && row.minus.is_none() {
                    row.minus = Some(v);
                } else {
                    return Err(ExactError::Unsupported { name: c.name.clone() });
                }
            }
            rows.push(row);
        }
        Ok(Self { lp, rows, classes, class_of, contradiction })
    }

    fn order_value(&self, v: usize, classes: &[Option<bool>]) -> Option<bool> {
        let (c, p) = self.class_of[v]?;
        classes[c].map(|b| b ^ p)
    }

    /// Minimal times under the class values; open classes are relaxed.
    fn propagate(&self, classes: &[Option<bool>]) -> Result<Vec<i64>, Infeasible> {
        if let Some(name) = &self.contradiction {
            return Err(Infeasible::Equality { name: name.clone() });
        }
        let vars = self.lp.vars();
        let mut dist: Vec<i64> = vars.iter().map(|v| v.lo).collect();
        let mut ub: Vec<i64> = vars.iter().map(|v| v.hi).collect();
        let mut edges = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let mut rhs = row.rhs;
            for &(v, coef) in &row.orders {
                rhs -= match self.order_value(v, classes) {
                    Some(b) => coef * b as i64,
                    None => coef.max(0),
                };
            }
            match (row.plus, row.minus) {
                (Some(p), Some(m)) => edges.push((m, p, rhs)),
                (Some(p), None) => dist[p] = dist[p].max(rhs),
                (None, Some(m)) => ub[m] = ub[m].min(-rhs),
                (None, None) => {
                    if rhs > 0 {
                        return Err(Infeasible::Row { name: row.name.clone() });
                    }
                }
            }
        }
        let check = |dist: &[i64], v: usize| -> Result<(), Infeasible> {
            if dist[v] > ub[v] {
                Err(Infeasible::Window { var: self.lp.var_name(v), needed: dist[v], hi: ub[v] })
            } else {
                Ok(())
            }
        };
        for v in 0..dist.len() {
            check(&dist, v)?;
        }
        let rounds = dist.len() + 1;
        for _ in 0..rounds {
            let mut changed = None;
            for &(u, v, w) in &edges {
                if dist[u] + w > dist[v] {
                    dist[v] = dist[u] + w;
                    check(&dist, v)?;
                    changed = Some(v);
                }
            }
            if changed.is_none() {
                return Ok(dist);
            }
        }
        let v = edges.iter().find(|&&(u, v, w)| dist[u] + w > dist[v]).map(|e| e.1).unwrap_or(0);
        Err(Infeasible::Cycle { var: self.lp.var_name(v) })
    }

    fn objective(&self, dist: &[i64]) -> Rational64 {
        self.lp.objective_value(dist)
    }

    fn complete(&self, mut dist: Vec<i64>, classes: &[Option<bool>]) -> Vec<i64> {
        for (v, d) in dist.iter_mut().enumerate() {
            if let Some(b) = self.order_value(v, classes) {
                *d = b as i64;
            }
        }
        dist
    }

    /// Class values that put the earlier vehicle first, judged by `times`.
    fn orient_by(&self, times: &[i64]) -> Vec<Option<bool>> {
        self.classes
            .iter()
            .map(|c| {
                let first = match self.lp.vars()[c.rep].kind {
                    VarKind::Y { agv, other, zone } => {
                        let t = |j: usize| self.lp.var_index(&VarKind::TIn { agv: j, zone }).map(|v| times[v]);
                        (t(agv), agv) < (t(other), other)
                    }
                    VarKind::Z { agv, other, from, to } => {
                        let a = self.lp.var_index(&VarKind::TOut { agv, zone: from }).map(|v| times[v]);
                        let b = self.lp.var_index(&VarKind::TOut { agv: other, zone: to }).map(|v| times[v]);
                        (a, agv) < (b, other)
                    }
                    _ => false,
                };
                Some(first)
            })
            .collect()
    }

    fn leaf(&self, classes: &[Option<bool>]) -> Option<FixedTimes> {
        let dist = self.propagate(classes).ok()?;
        let values = self.complete(dist, classes);
        if !eval_assignment(self.lp, &values).map(|v| v.is_empty()).unwrap_or(false) {
            return None;
        }
        let objective = self.objective(&values);
        Some(FixedTimes { values, objective })
    }
}

pub fn fixed_order_times(
    lp: &LinearProgram,
    ord: &OrderAssignment,
) -> Result<Result<FixedTimes, Infeasible>, ExactError> {
    let prep = Prepared::new(lp)?;
    let mut classes = vec![None; prep.classes.len()];
    for (v, var) in lp.vars().iter().enumerate() {
        if !var.kind.is_order() {
            continue;
        }
        let value = ord.values[v].ok_or_else(|| ExactError::Incomplete { var: lp.var_name(v) })?;
        let (c, p) = prep.class_of[v].expect("order variables have classes");
        match classes[c] {
            None => classes[c] = Some(value ^ p),
            Some(b) if b != value ^ p => {
                let name = lp
                    .eqs()
                    .iter()
                    .find(|e| e.terms.iter().any(|&(t, _)| t == v))
                    .map(|e| e.name.clone())
                    .unwrap_or_default();
                return Ok(Err(Infeasible::Equality { name }));
            }
            _ => {}
        }
    }
    Ok(prep.propagate(&classes).map(|dist| {
        let values = prep.complete(dist, &classes);
        let objective = prep.objective(&values);
        FixedTimes { values, objective }
    }))
}

/// Number of independent order decisions after linking.
pub fn free_order_classes(lp: &LinearProgram) -> Result<usize, ExactError> {
    Ok(Prepared::new(lp)?.classes.len())
}

fn report(
    lp: &LinearProgram,
    solver: &str,
    best: Option<FixedTimes>,
    pool: Vec<FixedTimes>,
    complete: bool,
    nodes: u64,
    start: Instant,
) -> SolveReport {
    let status = match (&best, complete) {
        (Some(_), true) => SolveStatus::Optimal,
        (Some(_), false) => SolveStatus::Feasible,
        (None, true) => SolveStatus::Infeasible,
        (None, false) => SolveStatus::LimitNoIncumbent,
    };
    let mut rep = SolveReport::empty(solver, status);
    rep.certified = complete && best.is_some();
    rep.feasible = best.is_some();
    rep.objective = best.as_ref().map(|b| b.objective);
    rep.best = best.as_ref().map(|b| b.schedule(lp));
    let mut pool: Vec<(Schedule, Rational64)> = pool.iter().map(|f| (f.schedule(lp), f.objective)).collect();
    pool.sort_by_key(|a| a.1);
    pool.dedup_by(|a, b| a.0 == b.0);
    rep.pool = pool;
    rep.nodes = nodes;
    rep.wall_time = start.elapsed().as_secs_f64();
    rep
}

struct Search<'p, 'a> {
    prep: &'p Prepared<'a>,
    cfg: &'p BnbConfig,
    start: Instant,
    nodes: u64,
    hit_limit: bool,
    best: Option<FixedTimes>,
    pool: Vec<FixedTimes>,
}

impl Search<'_, '_> {
    fn offer(&mut self, cand: FixedTimes) {
        if self.best.as_ref().is_none_or(|b| cand.objective < b.objective) {
            self.pool.push(cand.clone());
            self.best = Some(cand);
        }
    }

    fn out_of_budget(&mut self) -> bool {
        let over_nodes = self.cfg.node_limit.is_some_and(|n| self.nodes >= n);
        let over_time = self.cfg.time_limit.is_some_and(|t| self.start.elapsed() >= t);
        if over_nodes || over_time {
            self.hit_limit = true;
        }
        self.hit_limit
    }

    fn bound(&self, classes: &[Option<bool>]) -> Option<Rational64> {
        self.prep.propagate(classes).ok().map(|d| self.prep.objective(&d))
    }

    fn prunable(&self, bound: Rational64) -> bool {
        self.best.as_ref().is_some_and(|b| bound >= b.objective)
    }

    fn dive(&mut self, mut classes: Vec<Option<bool>>) {
        if self.out_of_budget() {
            return;
        }
        self.nodes += 1;
        loop {
            let Some(bound) = self.bound(&classes) else { return };
            if self.prunable(bound) {
                return;
            }
            let open: Vec<usize> = (0..classes.len()).filter(|&c| classes[c].is_none()).collect();
            if open.is_empty() {
                if let Some(leaf) = self.prep.leaf(&classes) {
                    self.offer(leaf);
                }
                return;
            }
            // Strong branching with implications from infeasible children.
            let mut forced = false;
            let mut pick: Option<(Rational64, &str, usize, [Option<Rational64>; 2])> = None;
            for &c in &open {
                let mut child = [None, None];
                for (i, val) in [false, true].into_iter().enumerate() {
                    classes[c] = Some(val);
                    child[i] = self.bound(&classes).filter(|&b| !self.prunable(b));
                    classes[c] = None;
                }
                match child {
                    [None, None] => return,
                    [None, Some(_)] => {
                        classes[c] = Some(true);
                        forced = true;
                    }
                    [Some(_), None] => {
                        classes[c] = Some(false);
                        forced = true;
                    }
                    [Some(a), Some(b)] => {
                        let score = a.min(b);
                        let name = self.prep.classes[c].name.as_str();
                        let better = pick.as_ref().is_none_or(|p| score > p.0 || (score == p.0 && name < p.1));
                        if better {
                            pick = Some((score, name, c, child));
                        }
                    }
                }
                if forced {
                    break;
                }
            }
            if forced {
                continue;
            }
            let (_, _, c, child) = pick.expect("some open class has two children");
            let (a, b) = (child[0].expect("set"), child[1].expect("set"));
            let order = if b < a { [true, false] } else { [false, true] };
            for val in order {
                let mut next = classes.clone();
                next[c] = Some(val);
                self.dive(next);
                if self.hit_limit {
                    return;
                }
            }
            return;
        }
    }
}

pub fn solve_bnb(lp: &LinearProgram, cfg: &BnbConfig) -> Result<SolveReport, ExactError> {
    let start = Instant::now();
    let prep = Prepared::new(lp)?;
    let mut search = Search { prep: &prep, cfg, start, nodes: 0, hit_limit: false, best: None, pool: Vec::new() };
    let lower: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
    if let Some(f) = prep.leaf(&prep.orient_by(&lower)) {
        search.offer(f);
    }
    let open = vec![None; prep.classes.len()];
    if let Ok(relaxed) = prep.propagate(&open) {
        if let Some(f) = prep.leaf(&prep.orient_by(&relaxed)) {
            search.offer(f);
        }
    }
    search.dive(open);
    let complete = !search.hit_limit;
    Ok(report(lp, "bnb", search.best, search.pool, complete, search.nodes, start))
}

/// Enumerates every ordering of the free order classes.
pub fn brute_force_oracle(lp: &LinearProgram) -> Result<SolveReport, ExactError> {
    let start = Instant::now();
    let prep = Prepared::new(lp)?;
    let k = prep.classes.len();
    if k > ORACLE_MAX_CLASSES {
        return Err(ExactError::TooManyOrderVariables { count: k, max: ORACLE_MAX_CLASSES });
    }
    let best = (0u64..1 << k)
        .into_par_iter()
        .filter_map(|mask| {
            let classes: Vec<Option<bool>> = (0..k).map(|i| Some(mask >> i & 1 == 1)).collect();
            prep.leaf(&classes).map(|f| (mask, f))
        })
        .min_by(|a, b| a.1.objective.cmp(&b.1.objective).then(a.0.cmp(&b.0)))
        .map(|(_, f)| f);
    let pool = best.iter().cloned().collect();
    Ok(report(lp, "oracle", best, pool, true, 1 << k, start))
}

/// Objective lower bound of the fully relaxed ordering.
pub fn root_bound(lp: &LinearProgram) -> Result<Option<Rational64>, ExactError> {
    let prep = Prepared::new(lp)?;
    Ok(prep.propagate(&vec![None; prep.classes.len()]).ok().map(|d| prep.objective(&d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{build_ilp, build_ilp_with, BuildOptions};
    use crate::instance::{appendix_instance, generate_instance, Instance};
    use crate::preprocess::{compute_time_windows, find_conflicts};

    fn lp_of(inst: &Instance) -> LinearProgram {
        build_ilp(inst, &compute_time_windows(inst), &find_conflicts(inst))
    }

    #[test]
    fn lone_agv_gets_its_earliest_times() {
        let inst = generate_instance(1, 4, 10, 2).unwrap();
        let lp = lp_of(&inst);
        let f = fixed_order_times(&lp, &OrderAssignment::open(&lp)).unwrap().unwrap();
        assert_eq!(f.schedule(&lp), Schedule::earliest(&inst));
        let rep = solve_bnb(&lp, &BnbConfig::default()).unwrap();
        assert!(rep.certified);
        let w = compute_time_windows(&inst);
        assert_eq!(rep.objective.unwrap(), Rational64::new(w.completion(0), 10));
    }

    #[test]
    fn incomplete_ordering_is_an_error() {
        let lp = lp_of(&appendix_instance());
        assert!(matches!(fixed_order_times(&lp, &OrderAssignment::open(&lp)), Err(ExactError::Incomplete { .. })));
    }

    #[test]
    fn swapping_on_a_shared_corridor_is_infeasible() {
        let inst = appendix_instance();
        let lp = lp_of(&inst);
        let x: Vec<i64> = lp.vars().iter().map(|v| v.lo).collect();
        let mut ord = OrderAssignment::from_values(&lp, &x);
        // agv0 first at s0 but agv1 first at s1, with antisymmetry respected.
        for (a, b, zone, val) in [(0, 1, 0, true), (1, 0, 0, false), (0, 1, 1, false), (1, 0, 1, true)] {
            let v = lp.var_index(&VarKind::Y { agv: a, other: b, zone }).unwrap();
            ord.set(v, val);
        }
        assert!(fixed_order_times(&lp, &ord).unwrap().is_err());
    }

    #[test]
    fn bnb_matches_oracle_on_small_instances() {
        let mut checked = 0;
        for seed in 0..30 {
            let inst = generate_instance(3, 5, 8, seed).unwrap();
            let lp = lp_of(&inst);
            if free_order_classes(&lp).unwrap() > 12 {
                continue;
            }
            let oracle = brute_force_oracle(&lp).unwrap();
            let bnb = solve_bnb(&lp, &BnbConfig::default()).unwrap();
            assert_eq!(bnb.objective, oracle.objective, "seed {seed}");
            assert_eq!(bnb.status == SolveStatus::Infeasible, oracle.status == SolveStatus::Infeasible);
            checked += 1;
        }
        assert!(checked >= 10);
    }

    #[test]
    fn compact_and_explicit_models_agree() {
        for seed in 0..10 {
            let inst = generate_instance(3, 5, 8, seed).unwrap();
            let (w, c) = (compute_time_windows(&inst), find_conflicts(&inst));
            let a = solve_bnb(&build_ilp(&inst, &w, &c), &BnbConfig::default()).unwrap();
            let opts = BuildOptions { compact: true, ..Default::default() };
            let b = solve_bnb(&build_ilp_with(&inst, &w, &c, &opts), &BnbConfig::default()).unwrap();
            assert_eq!(a.objective, b.objective, "seed {seed}");
        }
    }

    #[test]
    fn node_limit_drops_certification() {
        let lp = lp_of(&appendix_instance());
        let rep = solve_bnb(&lp, &BnbConfig { time_limit: None, node_limit: Some(1) }).unwrap();
        assert!(!rep.certified);
        assert!(matches!(rep.status, SolveStatus::Feasible | SolveStatus::LimitNoIncumbent));
    }
}
