//! Penalty transcription of a [`LinearProgram`] into a QUBO, the equivalent
//! Ising model, decoding of samples, and model statistics.
//!
//! Every inequality `sum(c v) >= rhs` receives a slack `xi` in `[0, xi_max]`
//! with `xi_max = max(sum(c v)) - rhs` over the variable bounds, and
//! contributes `p * (sum(c v) - xi - rhs)^2`. Equalities contribute
//! `p * (sum(c v) - rhs)^2`. Bounded integers are expanded into bits with
//! weights `1, 2, 4, ...` where the last weight is truncated so that the
//! encoded range is exactly `[lo, hi]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ilp::{LinearConstraint, LinearProgram};
use crate::instance::Ticks;

/// Bit expansion of one bounded integer: `value = offset + sum(weight * bit)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVar {
    pub bits: Vec<(usize, i64)>,
    pub offset: i64,
}

impl BitVar {
    pub fn value(&self, x: &[u8]) -> i64 {
        self.offset + self.bits.iter().map(|&(b, w)| w * x[b] as i64).sum::<i64>()
    }

    fn write(&self, value: i64, x: &mut [u8]) {
        let mut u = value - self.offset;
        let prefix: i64 = self.bits.iter().rev().skip(1).map(|&(_, w)| w).sum();
        if let Some(&(last, w)) = self.bits.last() {
            if u > prefix {
                x[last] = 1;
                u -= w;
            }
        }
        for &(b, w) in self.bits.iter().rev().skip(1) {
            if u >= w {
                x[b] = 1;
                u -= w;
            }
        }
        debug_assert_eq!(u, 0);
    }
}

/// Range-exact weights for `[0, range]`.
pub fn range_weights(range: i64) -> Vec<i64> {
    let mut weights = Vec::new();
    let mut covered = 0i64;
    let mut next = 1i64;
    while covered < range {
        let w = next.min(range - covered);
        weights.push(w);
        covered += w;
        next *= 2;
    }
    weights
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    /// One entry per LP variable, in LP order.
    pub vars: Vec<BitVar>,
    /// One slack per LP inequality, in LP order; empty when the bound is zero.
    pub slacks: Vec<BitVar>,
    pub n_bits: usize,
    times: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    pub n_bits: usize,
    pub linear: BTreeMap<usize, Rational64>,
    /// Keys have `i < j`.
    pub quadratic: BTreeMap<(usize, usize), Rational64>,
    pub offset: Rational64,
}

impl Qubo {
    pub fn energy(&self, x: &[u8]) -> Rational64 {
        let mut e = self.offset;
        for (&i, &a) in &self.linear {
            if x[i] != 0 {
                e += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if x[i] != 0 && x[j] != 0 {
                e += b;
            }
        }
        e
    }

    pub fn to_coo_text(&self) -> String {
        coo_text(self.n_bits, &self.linear, &self.quadratic, self.offset)
    }

    pub fn from_coo_text(text: &str) -> Result<Self, CooError> {
        let (n_bits, linear, quadratic, offset) = parse_coo(text)?;
        Ok(Self { n_bits, linear, quadratic, offset })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingModel {
    pub n_spins: usize,
    pub h: BTreeMap<usize, Rational64>,
    /// Keys have `i < j`; energy uses each pair once.
    pub j: BTreeMap<(usize, usize), Rational64>,
    pub offset: Rational64,
}

impl IsingModel {
    /// `offset + sum(h s) + sum(J s s)` for spins in `{-1, +1}`.
    pub fn energy(&self, s: &[i8]) -> Rational64 {
        let mut e = self.offset;
        for (&i, &h) in &self.h {
            e += h * s[i] as i64;
        }
        for (&(i, j), &c) in &self.j {
            e += c * (s[i] as i64 * s[j] as i64);
        }
        e
    }

    pub fn to_coo_text(&self) -> String {
        coo_text(self.n_spins, &self.h, &self.j, self.offset)
    }

    pub fn from_coo_text(text: &str) -> Result<Self, CooError> {
        let (n_spins, h, j, offset) = parse_coo(text)?;
        Ok(Self { n_spins, h, j, offset })
    }
}

fn coo_text(
    n: usize,
    linear: &BTreeMap<usize, Rational64>,
    quadratic: &BTreeMap<(usize, usize), Rational64>,
    offset: Rational64,
) -> String {
    let mut out = String::new();
    let f = |r: &Rational64| r.to_f64().unwrap_or(f64::NAN);
    let _ = writeln!(out, "#offset {}", f(&offset));
    let _ = writeln!(out, "#n {n}");
    for (i, a) in linear {
        let _ = writeln!(out, "{i} {i} {}", f(a));
    }
    for ((i, j), b) in quadratic {
        let _ = writeln!(out, "{i} {j} {}", f(b));
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct CooError {
    pub line: usize,
    pub msg: String,
}

type Coo = (usize, BTreeMap<usize, Rational64>, BTreeMap<(usize, usize), Rational64>, Rational64);

fn parse_coo(text: &str) -> Result<Coo, CooError> {
    let mut n = 0usize;
    let mut linear = BTreeMap::new();
    let mut quadratic = BTreeMap::new();
    let mut offset = Rational64::zero();
    let num = |line: usize, s: &str| -> Result<Rational64, CooError> {
        s.parse::<f64>()
            .ok()
            .and_then(Rational64::approximate_float)
            .ok_or_else(|| CooError { line, msg: format!("bad number {s:?}") })
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if let Some(rest) = raw.strip_prefix("#offset") {
            offset = num(line, rest.trim())?;
            continue;
        }
        if let Some(rest) = raw.strip_prefix("#n") {
            n = n.max(rest.trim().parse().map_err(|_| CooError { line, msg: "bad size".into() })?);
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CooError { line, msg: "expected `i j value`".into() });
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| CooError { line, msg: format!("bad index {s:?}") });
        let (i, j, v) = (idx(parts[0])?, idx(parts[1])?, num(line, parts[2])?);
        n = n.max(i.max(j) + 1);
        if i == j {
            *linear.entry(i).or_insert_with(Rational64::zero) += v;
        } else {
            *quadratic.entry((i.min(j), i.max(j))).or_insert_with(Rational64::zero) += v;
        }
    }
    Ok((n, linear, quadratic, offset))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuboError {
    #[error("penalty must be positive")]
    NonPositivePenalty,
    #[error("constraint {name} cannot hold inside the variable bounds (slack bound {bound})")]
    InfeasibleBound { name: String, bound: i64 },
}

/// `1 + sum(c * hi)` over the objective: exceeds the objective's full range.
pub fn default_penalty(lp: &LinearProgram) -> Rational64 {
    lp.objective().iter().fold(Rational64::one(), |acc, &(v, c)| acc + c.abs() * lp.vars()[v].hi)
}

#[derive(Default)]
struct Accum {
    linear: BTreeMap<usize, i64>,
    quadratic: BTreeMap<(usize, usize), i64>,
    offset: i64,
}

impl Accum {
    /// Adds `(sum(a_i b_i) + k)^2` for a bit expression.
    fn add_square(&mut self, expr: &BTreeMap<usize, i64>, k: i64) {
        let terms: Vec<(usize, i64)> = expr.iter().filter(|(_, &a)| a != 0).map(|(&b, &a)| (b, a)).collect();
        for (idx, &(bi, ai)) in terms.iter().enumerate() {
            *self.linear.entry(bi).or_insert(0) += ai * ai + 2 * k * ai;
            for &(bj, aj) in &terms[idx + 1..] {
                *self.quadratic.entry((bi.min(bj), bi.max(bj))).or_insert(0) += 2 * ai * aj;
            }
        }
        self.offset += k * k;
    }
}

fn slack_bound(lp: &LinearProgram, c: &LinearConstraint) -> i64 {
    let max_lhs: i64 =
        c.terms.iter().map(|&(v, a)| if a > 0 { a * lp.vars()[v].hi } else { a * lp.vars()[v].lo }).sum();
    max_lhs - c.rhs
}

fn bits_for(range: i64) -> usize {
    (64 - range.max(0).leading_zeros()) as usize
}

/// Closed-form bit budget: `#t * bits(d_max) + m * bits(d_max + max slack) + #order`.
pub fn qubo_bit_bound(lp: &LinearProgram, d_max: Ticks) -> usize {
    let max_slack = lp.ineqs().iter().map(|c| slack_bound(lp, c)).max().unwrap_or(0);
    lp.n_int() * bits_for(d_max) + lp.ineqs().len() * bits_for(d_max + max_slack) + lp.n_bin()
}

pub fn lp_to_qubo(lp: &LinearProgram, penalty: Rational64) -> Result<(Qubo, Encoding), QuboError> {
    if penalty <= Rational64::zero() {
        return Err(QuboError::NonPositivePenalty);
    }
    let mut n_bits = 0usize;
    let mut alloc = |lo: i64, hi: i64| {
        let bits = range_weights(hi - lo)
            .into_iter()
            .map(|w| {
                n_bits += 1;
                (n_bits - 1, w)
            })
            .collect();
        BitVar { bits, offset: lo }
    };
    let vars: Vec<BitVar> = lp.vars().iter().map(|v| alloc(v.lo, v.hi)).collect();
    let mut slacks = Vec::with_capacity(lp.ineqs().len());
    for c in lp.ineqs() {
        let bound = slack_bound(lp, c);
        if bound < 0 {
            return Err(QuboError::InfeasibleBound { name: c.name.clone(), bound });
        }
        slacks.push(alloc(0, bound));
    }

    let expand = |terms: &[(usize, i64)], expr: &mut BTreeMap<usize, i64>| -> i64 {
        let mut k = 0;
        for &(v, a) in terms {
            k += a * vars[v].offset;
            for &(b, w) in &vars[v].bits {
                *expr.entry(b).or_insert(0) += a * w;
            }
        }
        k
    };

    let mut acc = Accum::default();
    for (c, slack) in lp.ineqs().iter().zip(&slacks) {
        let mut expr = BTreeMap::new();
        let k = expand(&c.terms, &mut expr) - c.rhs;
        for &(b, w) in &slack.bits {
            *expr.entry(b).or_insert(0) -= w;
        }
        acc.add_square(&expr, k);
    }
    for c in lp.eqs() {
        let mut expr = BTreeMap::new();
        let k = expand(&c.terms, &mut expr) - c.rhs;
        acc.add_square(&expr, k);
    }

    let mut q = Qubo { n_bits, linear: BTreeMap::new(), quadratic: BTreeMap::new(), offset: penalty * acc.offset };
    for (b, a) in acc.linear {
        if a != 0 {
            q.linear.insert(b, penalty * a);
        }
    }
    for (p, a) in acc.quadratic {
        if a != 0 {
            q.quadratic.insert(p, penalty * a);
        }
    }
    for &(v, c) in lp.objective() {
        q.offset += c * vars[v].offset;
        for &(b, w) in &vars[v].bits {
            let e = q.linear.entry(b).or_insert_with(Rational64::zero);
            *e += c * w;
        }
    }
    q.linear.retain(|_, a| !a.is_zero());

    let times = (0..lp.n_agvs()).map(|j| lp.time_vars(j).to_vec()).collect();
    Ok((q, Encoding { vars, slacks, n_bits, times }))
}

pub fn qubo_to_ising(q: &Qubo) -> IsingModel {
    let half = Rational64::new(1, 2);
    let quarter = Rational64::new(1, 4);
    let mut h: BTreeMap<usize, Rational64> = BTreeMap::new();
    let mut j = BTreeMap::new();
    let mut offset = q.offset;
    for (&i, &a) in &q.linear {
        *h.entry(i).or_insert_with(Rational64::zero) += a * half;
        offset += a * half;
    }
    for (&(a, b), &c) in &q.quadratic {
        let c4 = c * quarter;
        *h.entry(a).or_insert_with(Rational64::zero) += c4;
        *h.entry(b).or_insert_with(Rational64::zero) += c4;
        offset += c4;
        if !c4.is_zero() {
            j.insert((a, b), c4);
        }
    }
    h.retain(|_, v| !v.is_zero());
    IsingModel { n_spins: q.n_bits, h, j, offset }
}

/// Bits of a spin configuration: `x = (s + 1) / 2`.
pub fn spins_to_bits(s: &[i8]) -> Vec<u8> {
    s.iter().map(|&v| (v > 0) as u8).collect()
}

pub fn bits_to_spins(x: &[u8]) -> Vec<i8> {
    x.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Value of every LP variable, in LP order.
    pub values: Vec<i64>,
    pub t_in: Vec<Vec<Ticks>>,
    pub t_out: Vec<Vec<Ticks>>,
    /// `(LP variable, value)` for every order variable.
    pub orders: Vec<(usize, i64)>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("sample has {got} bits, encoding needs {expected}")]
pub struct DecodeError {
    pub expected: usize,
    pub got: usize,
}

impl Encoding {
    /// Bits for an LP assignment; slacks take `lhs - rhs` clamped into range.
    pub fn encode(&self, lp: &LinearProgram, x: &[i64]) -> Vec<u8> {
        let mut bits = vec![0u8; self.n_bits];
        for (var, &v) in self.vars.iter().zip(x) {
            var.write(v, &mut bits);
        }
        for (c, slack) in lp.ineqs().iter().zip(&self.slacks) {
            let hi: i64 = slack.bits.iter().map(|&(_, w)| w).sum();
            slack.write((c.lhs(x) - c.rhs).clamp(0, hi), &mut bits);
        }
        bits
    }
}

pub fn decode_sample(bits: &[u8], enc: &Encoding) -> Result<Decoded, DecodeError> {
    if bits.len() != enc.n_bits {
        return Err(DecodeError { expected: enc.n_bits, got: bits.len() });
    }
    let values: Vec<i64> = enc.vars.iter().map(|v| v.value(bits)).collect();
    let mut is_time = vec![false; values.len()];
    let mut t_in = Vec::with_capacity(enc.times.len());
    let mut t_out = Vec::with_capacity(enc.times.len());
    for row in &enc.times {
        t_in.push(row.iter().map(|&(a, _)| values[a]).collect());
        t_out.push(row.iter().map(|&(_, b)| values[b]).collect());
        for &(a, b) in row {
            is_time[a] = true;
            is_time[b] = true;
        }
    }
    let orders = (0..values.len()).filter(|&v| !is_time[v]).map(|v| (v, values[v])).collect();
    Ok(Decoded { values, t_in, t_out, orders })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuboStats {
    pub vertices: usize,
    pub edges: usize,
    pub edge_density: f64,
    pub linear_fields: usize,
}

pub fn qubo_stats(q: &Qubo) -> QuboStats {
    let mut seen = vec![false; q.n_bits];
    for (&i, a) in &q.linear {
        if !a.is_zero() {
            seen[i] = true;
        }
    }
    let mut edges = 0;
    for (&(i, j), b) in &q.quadratic {
        if !b.is_zero() {
            seen[i] = true;
            seen[j] = true;
            edges += 1;
        }
    }
    let vertices = seen.iter().filter(|&&s| s).count();
    let pairs = vertices * vertices.saturating_sub(1) / 2;
    let edge_density = if pairs == 0 { 0.0 } else { edges as f64 / pairs as f64 };
    let linear_fields = qubo_to_ising(q).h.len();
    QuboStats { vertices, edges, edge_density, linear_fields }
}

pub const EXHAUSTIVE_MAX_BITS: usize = 30;

/// Exact minimum over all `2^n` assignments by a Gray-code walk; ties go to
/// the assignment with the smallest bit mask.
pub fn exhaustive_minimum(q: &Qubo) -> Option<(Vec<u8>, Rational64)> {
    let n = q.n_bits;
    if n > EXHAUSTIVE_MAX_BITS {
        return None;
    }
    let denom = q.linear.values().chain(q.quadratic.values()).fold(1i64, |acc, c| num_integer::lcm(acc, *c.denom()));
    let scaled = |c: &Rational64| (c * denom).to_integer();
    let mut lin = vec![0i64; n];
    for (&i, a) in &q.linear {
        lin[i] = scaled(a);
    }
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for (&(i, j), b) in &q.quadratic {
        let b = scaled(b);
        adj[i].push((j, b));
        adj[j].push((i, b));
    }
    let mut x = vec![0u8; n];
    let mut field = lin.clone();
    let (mut energy, mut mask) = (0i64, 0u64);
    let (mut best, mut best_mask) = (0i64, 0u64);
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let sign = if x[i] == 0 { 1 } else { -1 };
        energy += sign * field[i];
        x[i] ^= 1;
        mask ^= 1 << i;
        for &(j, b) in &adj[i] {
            field[j] += sign * b;
        }
        if energy < best || (energy == best && mask < best_mask) {
            best = energy;
            best_mask = mask;
        }
    }
    let bits: Vec<u8> = (0..n).map(|i| (best_mask >> i & 1) as u8).collect();
    let e = q.energy(&bits);
    Some((bits, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{build_ilp, eval_assignment};
    use crate::instance::appendix_instance;
    use crate::preprocess::{compute_time_windows, find_conflicts};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_cover_the_range_exactly() {
        assert!(range_weights(0).is_empty());
        assert_eq!(range_weights(1), [1]);
        assert_eq!(range_weights(4), [1, 2, 1]);
        assert_eq!(range_weights(40), [1, 2, 4, 8, 16, 9]);
        for r in 0..300 {
            let w = range_weights(r);
            assert_eq!(w.iter().sum::<i64>(), r);
            let bv = BitVar { bits: w.iter().enumerate().map(|(i, &w)| (i, w)).collect(), offset: 3 };
            for v in 3..=3 + r {
                let mut x = vec![0; w.len()];
                bv.write(v, &mut x);
                assert_eq!(bv.value(&x), v);
            }
        }
    }

    #[test]
    fn single_bit_field() {
        let mut q = Qubo { n_bits: 1, ..Default::default() };
        q.linear.insert(0, Rational64::from_integer(3));
        let m = qubo_to_ising(&q);
        assert_eq!(m.h[&0], Rational64::new(3, 2));
        assert_eq!(m.offset, Rational64::new(3, 2));
        assert_eq!(m.energy(&[-1]), q.energy(&[0]));
        assert_eq!(m.energy(&[1]), q.energy(&[1]));
    }

    #[test]
    fn stats_of_trivial_models() {
        let q = Qubo::default();
        let s = qubo_stats(&q);
        assert_eq!((s.vertices, s.edges, s.edge_density, s.linear_fields), (0, 0, 0.0, 0));
        let mut q = Qubo { n_bits: 4, ..Default::default() };
        for i in 0..4 {
            for j in i + 1..4 {
                q.quadratic.insert((i, j), Rational64::one());
            }
        }
        assert_eq!(qubo_stats(&q).edge_density, 1.0);
    }

    #[test]
    fn appendix_round_trip_and_ising_agreement() {
        let inst = appendix_instance();
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (q, enc) = lp_to_qubo(&lp, default_penalty(&lp)).unwrap();
        let m = qubo_to_ising(&q);
        let zero = vec![0u8; enc.n_bits];
        assert_eq!(q.energy(&zero), m.energy(&bits_to_spins(&zero)));
        let dec = decode_sample(&zero, &enc).unwrap();
        assert!(dec.values.iter().zip(lp.vars()).all(|(&v, var)| v == var.lo));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x: Vec<i64> = lp.vars().iter().map(|v| rng.gen_range(v.lo..=v.hi)).collect();
            let bits = enc.encode(&lp, &x);
            assert_eq!(decode_sample(&bits, &enc).unwrap().values, x);
            assert_eq!(q.energy(&bits), m.energy(&bits_to_spins(&bits)));
        }
    }

    #[test]
    fn mpt_slack_spans_the_window() {
        let inst = appendix_instance();
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (_, enc) = lp_to_qubo(&lp, Rational64::one()).unwrap();
        let k = lp.ineqs().iter().position(|c| c.name.starts_with("mpt")).unwrap();
        let hi: i64 = enc.slacks[k].bits.iter().map(|&(_, w)| w).sum();
        assert_eq!(hi, 40);
    }

    #[test]
    fn bit_count_within_closed_form_bound() {
        for (n, z, d, seed) in [(2, 4, 10, 1), (4, 4, 10, 2), (7, 7, 40, 3)] {
            let inst = crate::instance::generate_instance(n, z, d, seed).unwrap();
            let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
            let (q, _) = lp_to_qubo(&lp, Rational64::one()).unwrap();
            assert!(q.n_bits <= qubo_bit_bound(&lp, d));
        }
        let inst = appendix_instance();
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (q, _) = lp_to_qubo(&lp, Rational64::one()).unwrap();
        assert!(q.n_bits <= qubo_bit_bound(&lp, inst.d_max()));
    }

    #[test]
    fn feasible_assignment_energy_equals_objective() {
        let inst = crate::instance::generate_instance(1, 3, 3, 3).unwrap();
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        let (q, enc) = lp_to_qubo(&lp, default_penalty(&lp)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = 0;
        for _ in 0..2000 {
            let x: Vec<i64> = lp.vars().iter().map(|v| rng.gen_range(v.lo..=v.hi)).collect();
            let bits = enc.encode(&lp, &x);
            let viol = eval_assignment(&lp, &x).unwrap();
            if viol.is_empty() {
                hits += 1;
                assert_eq!(q.energy(&bits), lp.objective_value(&x));
            } else {
                assert!(q.energy(&bits) >= lp.objective_value(&x) + default_penalty(&lp));
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn exhaustive_minimum_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 6;
            let mut q = Qubo { n_bits: n, offset: Rational64::new(1, 3), ..Default::default() };
            for i in 0..n {
                q.linear.insert(i, Rational64::new(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
                for j in i + 1..n {
                    q.quadratic.insert((i, j), Rational64::new(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
                }
            }
            let brute = (0u32..1 << n)
                .map(|m| {
                    let x: Vec<u8> = (0..n).map(|i| (m >> i & 1) as u8).collect();
                    q.energy(&x)
                })
                .min()
                .unwrap();
            assert_eq!(exhaustive_minimum(&q).unwrap().1, brute);
        }
        assert!(exhaustive_minimum(&Qubo { n_bits: 31, ..Default::default() }).is_none());
    }

    #[test]
    fn coo_round_trip() {
        let mut q = Qubo { n_bits: 3, ..Default::default() };
        q.linear.insert(0, Rational64::new(-3, 2));
        q.quadratic.insert((0, 2), Rational64::from_integer(4));
        q.offset = Rational64::new(1, 4);
        assert_eq!(Qubo::from_coo_text(&q.to_coo_text()).unwrap(), q);
        assert!(Qubo::from_coo_text("0 1").is_err());
    }

    #[test]
    fn non_positive_penalty_is_rejected() {
        let inst = appendix_instance();
        let lp = build_ilp(&inst, &compute_time_windows(&inst), &find_conflicts(&inst));
        assert_eq!(lp_to_qubo(&lp, Rational64::zero()).unwrap_err(), QuboError::NonPositivePenalty);
    }
}
