//! Factory topology, AGV tasks and the JSON instance format.
//!
//! An [`Instance`] is validated and normalized on construction: zones, lanes,
//! AGVs and headway overrides are kept in canonical (natural identifier)
//! order so that `load_instance(save_instance(x)) == x` holds byte for byte.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer time unit used everywhere in the crate.
pub type Ticks = i64;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid instance: {0}")]
    Invariant(String),
}

impl From<serde_json::Error> for InstanceError {
    fn from(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => InstanceError::Schema(err.to_string()),
            _ => InstanceError::Parse(err.to_string()),
        }
    }
}

fn invariant(msg: impl Into<String>) -> InstanceError {
    InstanceError::Invariant(msg.into())
}

/// Orders identifiers so that digit runs compare numerically (`s2 < s10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let mut ai = a.chars().peekable();
    let mut bi = b.chars().peekable();
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let mut da = String::new();
                while let Some(c) = ai.peek().copied().filter(char::is_ascii_digit) {
                    da.push(c);
                    ai.next();
                }
                let mut db = String::new();
                while let Some(c) = bi.peek().copied().filter(char::is_ascii_digit) {
                    db.push(c);
                    bi.next();
                }
                let ta = da.trim_start_matches('0');
                let tb = db.trim_start_matches('0');
                let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(&y);
                }
                ai.next();
                bi.next();
            }
        }
    }
}

/// Connection between two zones.
///
/// `bidirectional` marks a single shared track that vehicles use in both
/// directions; opposing vehicles on it can deadlock. A lane with the flag
/// unset is a pair of one-way tracks: it can be travelled either way and
/// opposing traffic never meets on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lane {
    pub a: String,
    pub b: String,
    pub bidirectional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    zones: Vec<String>,
    lanes: Vec<Lane>,
}

impl Topology {
    pub fn new(zones: Vec<String>, lanes: Vec<Lane>) -> Result<Self, InstanceError> {
        let mut zones = zones;
        let mut seen = HashSet::new();
        for z in &zones {
            if z.is_empty() || z.contains(',') {
                return Err(invariant(format!("zone identifier {z:?} must be non-empty and contain no ','")));
            }
            if !seen.insert(z.clone()) {
                return Err(invariant(format!("duplicate zone {z:?}")));
            }
        }
        zones.sort_by(|a, b| natural_cmp(a, b));
        let mut pairs = HashSet::new();
        let mut lanes = lanes;
        for lane in &mut lanes {
            for end in [&lane.a, &lane.b] {
                if !seen.contains(end) {
                    return Err(invariant(format!("lane {}-{} references unknown zone {end:?}", lane.a, lane.b)));
                }
            }
            if lane.a == lane.b {
                return Err(invariant(format!("lane {}-{} is a self loop", lane.a, lane.b)));
            }
            if natural_cmp(&lane.a, &lane.b) == Ordering::Greater {
                std::mem::swap(&mut lane.a, &mut lane.b);
            }
            if !pairs.insert((lane.a.clone(), lane.b.clone())) {
                return Err(invariant(format!("more than one lane between {} and {}", lane.a, lane.b)));
            }
        }
        lanes.sort_by(|x, y| natural_cmp(&x.a, &y.a).then_with(|| natural_cmp(&x.b, &y.b)));
        Ok(Self { zones, lanes })
    }

    pub fn zones(&self) -> &[String] {
        &self.zones
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }
}

/// One vehicle's task: a fixed path through zones with nominal durations.
#[derive(Debug, Clone, PartialEq)]
pub struct AgvSpec {
    pub id: String,
    pub path: Vec<String>,
    /// Earliest entry into the first zone.
    pub release: Ticks,
    pub weight: f64,
    /// Minimal passing time between consecutive zones, keyed by `(s, s')`.
    pub pass_time: BTreeMap<(String, String), Ticks>,
    /// Minimal stay inside each zone of the path.
    pub zone_time: BTreeMap<String, Ticks>,
}

/// Headway value for a specific `(j, j', s, s')` combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadwayOverride {
    pub j: String,
    pub jp: String,
    pub s: String,
    pub sp: String,
    pub value: Ticks,
}

/// A validated scheduling instance. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Instance {
    topology: Topology,
    agvs: Vec<AgvSpec>,
    d_max: Ticks,
    headway_default: Ticks,
    headway_overrides: Vec<HeadwayOverride>,
    // Resolved index views, derived from the fields above.
    zone_index: HashMap<String, usize>,
    paths: Vec<Vec<usize>>,
    pass: Vec<Vec<Ticks>>,
    stay: Vec<Vec<Ticks>>,
    single_lanes: HashSet<(usize, usize)>,
    headway_map: HashMap<(usize, usize, usize, usize), Ticks>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.topology == other.topology
            && self.agvs == other.agvs
            && self.d_max == other.d_max
            && self.headway_default == other.headway_default
            && self.headway_overrides == other.headway_overrides
    }
}

impl Instance {
    pub fn new(
        topology: Topology,
        agvs: Vec<AgvSpec>,
        d_max: Ticks,
        headway_default: Ticks,
        headway_overrides: Vec<HeadwayOverride>,
    ) -> Result<Self, InstanceError> {
        if d_max < 1 {
            return Err(invariant(format!("d_max must be >= 1, got {d_max}")));
        }
        if headway_default < 0 {
            return Err(invariant(format!("headway_default must be >= 0, got {headway_default}")));
        }
        if agvs.is_empty() {
            return Err(invariant("instance has no AGVs"));
        }
        let zone_index: HashMap<String, usize> =
            topology.zones.iter().enumerate().map(|(i, z)| (z.clone(), i)).collect();
        let mut lane_kind = HashMap::new();
        for lane in &topology.lanes {
            let (a, b) = (zone_index[&lane.a], zone_index[&lane.b]);
            lane_kind.insert((a.min(b), a.max(b)), lane.bidirectional);
        }

        let mut agvs = agvs;
        agvs.sort_by(|x, y| natural_cmp(&x.id, &y.id));
        for w in agvs.windows(2) {
            if w[0].id == w[1].id {
                return Err(invariant(format!("duplicate AGV id {:?}", w[0].id)));
            }
        }

        let mut paths = Vec::with_capacity(agvs.len());
        let mut pass = Vec::with_capacity(agvs.len());
        let mut stay = Vec::with_capacity(agvs.len());
        for agv in &agvs {
            let id = &agv.id;
            if id.is_empty() {
                return Err(invariant("AGV id must be non-empty"));
            }
            if agv.path.is_empty() {
                return Err(invariant(format!("AGV {id}: empty path")));
            }
            if agv.release < 0 {
                return Err(invariant(format!("AGV {id}: negative release {}", agv.release)));
            }
            if !agv.weight.is_finite()
                || agv.weight < 0.0
                || num_rational::Rational64::approximate_float(agv.weight).is_none()
            {
                return Err(invariant(format!("AGV {id}: weight must be finite and >= 0")));
            }
            let mut path = Vec::with_capacity(agv.path.len());
            let mut visited = HashSet::new();
            for z in &agv.path {
                let idx = *zone_index
                    .get(z)
                    .ok_or_else(|| invariant(format!("AGV {id}: path zone {z:?} is not declared")))?;
                if !visited.insert(idx) {
                    return Err(invariant(format!("AGV {id}: zone {z} repeats in path")));
                }
                path.push(idx);
            }
            let mut agv_pass = Vec::with_capacity(path.len().saturating_sub(1));
            for w in agv.path.windows(2) {
                let (a, b) = (zone_index[&w[0]], zone_index[&w[1]]);
                if !lane_kind.contains_key(&(a.min(b), a.max(b))) {
                    return Err(invariant(format!("AGV {id}: no lane joins {} and {}", w[0], w[1])));
                }
                let t = *agv
                    .pass_time
                    .get(&(w[0].clone(), w[1].clone()))
                    .ok_or_else(|| invariant(format!("AGV {id}: pass_time missing for {},{}", w[0], w[1])))?;
                if t < 0 {
                    return Err(invariant(format!("AGV {id}: negative pass_time {},{}", w[0], w[1])));
                }
                agv_pass.push(t);
            }
            if agv.pass_time.len() != agv_pass.len() {
                return Err(invariant(format!(
                    "AGV {id}: pass_time has entries for zone pairs that are not consecutive on the path"
                )));
            }
            let mut agv_stay = Vec::with_capacity(path.len());
            for z in &agv.path {
                let t =
                    *agv.zone_time.get(z).ok_or_else(|| invariant(format!("AGV {id}: zone_time missing for {z}")))?;
                if t < 0 {
                    return Err(invariant(format!("AGV {id}: negative zone_time for {z}")));
                }
                agv_stay.push(t);
            }
            if agv.zone_time.len() != path.len() {
                return Err(invariant(format!("AGV {id}: zone_time has entries for zones off the path")));
            }
            paths.push(path);
            pass.push(agv_pass);
            stay.push(agv_stay);
        }

        let agv_index: HashMap<&str, usize> = agvs.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
        let mut headway_overrides = headway_overrides;
        headway_overrides.sort_by(|x, y| {
            natural_cmp(&x.j, &y.j)
                .then_with(|| natural_cmp(&x.jp, &y.jp))
                .then_with(|| natural_cmp(&x.s, &y.s))
                .then_with(|| natural_cmp(&x.sp, &y.sp))
        });
        let mut headway_map = HashMap::new();
        for o in &headway_overrides {
            let j = *agv_index
                .get(o.j.as_str())
                .ok_or_else(|| invariant(format!("headway override references unknown AGV {:?}", o.j)))?;
            let jp = *agv_index
                .get(o.jp.as_str())
                .ok_or_else(|| invariant(format!("headway override references unknown AGV {:?}", o.jp)))?;
            let s = *zone_index
                .get(&o.s)
                .ok_or_else(|| invariant(format!("headway override references unknown zone {:?}", o.s)))?;
            let sp = *zone_index
                .get(&o.sp)
                .ok_or_else(|| invariant(format!("headway override references unknown zone {:?}", o.sp)))?;
            if o.value < 0 {
                return Err(invariant("headway override value must be >= 0"));
            }
            if headway_map.insert((j, jp, s, sp), o.value).is_some() {
                return Err(invariant(format!(
                    "duplicate headway override for ({}, {}, {}, {})",
                    o.j, o.jp, o.s, o.sp
                )));
            }
        }

        let single_lanes = lane_kind.iter().filter(|(_, &bi)| bi).map(|(&k, _)| k).collect();

        Ok(Self {
            topology,
            agvs,
            d_max,
            headway_default,
            headway_overrides,
            zone_index,
            paths,
            pass,
            stay,
            single_lanes,
            headway_map,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn agvs(&self) -> &[AgvSpec] {
        &self.agvs
    }

    pub fn d_max(&self) -> Ticks {
        self.d_max
    }

    pub fn headway_default(&self) -> Ticks {
        self.headway_default
    }

    pub fn headway_overrides(&self) -> &[HeadwayOverride] {
        &self.headway_overrides
    }

    pub fn n_agvs(&self) -> usize {
        self.agvs.len()
    }

    pub fn n_zones(&self) -> usize {
        self.topology.zones.len()
    }

    pub fn zone_name(&self, zone: usize) -> &str {
        &self.topology.zones[zone]
    }

    pub fn agv_id(&self, agv: usize) -> &str {
        &self.agvs[agv].id
    }

    pub fn zone_index(&self, name: &str) -> Option<usize> {
        self.zone_index.get(name).copied()
    }

    pub fn agv_index(&self, id: &str) -> Option<usize> {
        self.agvs.iter().position(|a| a.id == id)
    }

    /// Zone indices along the AGV's path.
    pub fn path(&self, agv: usize) -> &[usize] {
        &self.paths[agv]
    }

    /// Position of `zone` on the AGV's path.
    pub fn position(&self, agv: usize, zone: usize) -> Option<usize> {
        self.paths[agv].iter().position(|&z| z == zone)
    }

    pub fn release(&self, agv: usize) -> Ticks {
        self.agvs[agv].release
    }

    pub fn weight(&self, agv: usize) -> f64 {
        self.agvs[agv].weight
    }

    /// Passing time from path position `k` to `k + 1`.
    pub fn pass_time(&self, agv: usize, k: usize) -> Ticks {
        self.pass[agv][k]
    }

    /// Stay time at path position `k`.
    pub fn zone_time(&self, agv: usize, k: usize) -> Ticks {
        self.stay[agv][k]
    }

    /// Headway for `j'` following `j` out of `s` towards `s'`.
    pub fn headway(&self, j: usize, jp: usize, s: usize, sp: usize) -> Ticks {
        self.headway_map.get(&(j, jp, s, sp)).copied().unwrap_or(self.headway_default)
    }

    /// True when `s` and `s'` are joined by a single track used in both directions.
    pub fn is_single_lane(&self, s: usize, sp: usize) -> bool {
        self.single_lanes.contains(&(s.min(sp), s.max(sp)))
    }

    /// Copy of this instance with a different time-window length.
    pub fn with_d_max(&self, d_max: Ticks) -> Result<Instance, InstanceError> {
        Instance::new(
            self.topology.clone(),
            self.agvs.clone(),
            d_max,
            self.headway_default,
            self.headway_overrides.clone(),
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgvDoc {
    id: String,
    path: Vec<String>,
    release: Ticks,
    weight: f64,
    pass_time: BTreeMap<String, Ticks>,
    zone_time: BTreeMap<String, Ticks>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    zones: Vec<String>,
    lanes: Vec<Lane>,
    d_max: Ticks,
    headway_default: Ticks,
    #[serde(default)]
    headway_overrides: Vec<HeadwayOverride>,
    agvs: Vec<AgvDoc>,
}

/// Parses and validates a JSON instance document.
pub fn load_instance(bytes: &[u8]) -> Result<Instance, InstanceError> {
    let doc: InstanceDoc = serde_json::from_slice(bytes)?;
    let topology = Topology::new(doc.zones, doc.lanes)?;
    let mut agvs = Vec::with_capacity(doc.agvs.len());
    for a in doc.agvs {
        let mut pass_time = BTreeMap::new();
        for (key, t) in a.pass_time {
            let (s, sp) = key.split_once(',').ok_or_else(|| {
                InstanceError::Schema(format!("AGV {}: pass_time key {key:?} is not of the form \"s,s'\"", a.id))
            })?;
            pass_time.insert((s.to_string(), sp.to_string()), t);
        }
        agvs.push(AgvSpec {
            id: a.id,
            path: a.path,
            release: a.release,
            weight: a.weight,
            pass_time,
            zone_time: a.zone_time,
        });
    }
    Instance::new(topology, agvs, doc.d_max, doc.headway_default, doc.headway_overrides)
}

/// Canonical serialization: sorted keys, arrays in identifier order, trailing newline.
pub fn save_instance(inst: &Instance) -> String {
    let doc = InstanceDoc {
        zones: inst.topology.zones.clone(),
        lanes: inst.topology.lanes.clone(),
        d_max: inst.d_max,
        headway_default: inst.headway_default,
        headway_overrides: inst.headway_overrides.clone(),
        agvs: inst
            .agvs
            .iter()
            .map(|a| AgvDoc {
                id: a.id.clone(),
                path: a.path.clone(),
                release: a.release,
                weight: a.weight,
                pass_time: a.pass_time.iter().map(|((s, sp), t)| (format!("{s},{sp}"), *t)).collect(),
                zone_time: a.zone_time.clone(),
            })
            .collect(),
    };
    // Going through `Value` sorts object keys (serde_json's default map is ordered).
    let value = serde_json::to_value(&doc).expect("instance document is always serializable");
    let mut out = serde_json::to_string_pretty(&value).expect("value is always serializable");
    out.push('\n');
    out
}

fn zone(i: usize) -> String {
    format!("s{i}")
}

fn agv_from_path(
    id: &str,
    path: &[usize],
    release: Ticks,
    pass: &dyn Fn(usize, usize) -> Ticks,
    stay: Ticks,
) -> AgvSpec {
    let names: Vec<String> = path.iter().map(|&z| zone(z)).collect();
    let pass_time = path.windows(2).map(|w| ((zone(w[0]), zone(w[1])), pass(w[0], w[1]))).collect();
    let zone_time = names.iter().map(|z| (z.clone(), stay)).collect();
    AgvSpec { id: id.to_string(), path: names, release, weight: 1.0, pass_time, zone_time }
}

/// The seven-vehicle, seven-zone factory example with `d_max = 40`.
pub fn appendix_instance() -> Instance {
    let zones: Vec<String> = (0..7).map(zone).collect();
    let lanes = (0..6)
        .map(|i| Lane {
            a: zone(i),
            b: zone(i + 1),
            // s5-s6 is the one single track shared by both directions.
            bidirectional: i == 5,
        })
        .collect();
    let topology = Topology::new(zones, lanes).expect("appendix topology is valid");
    let pass = |a: usize, b: usize| -> Ticks {
        match (a.min(b), a.max(b)) {
            (0, 1) | (1, 2) | (3, 4) => 6,
            (2, 3) => 0,
            (4, 5) | (5, 6) => 4,
            _ => unreachable!("no lane between s{a} and s{b}"),
        }
    };
    let tasks: [(&str, &[usize], Ticks); 7] = [
        ("agv0", &[0, 1, 2, 3], 0),
        ("agv1", &[0, 1, 2], 0),
        ("agv2", &[4, 3, 2, 1], 8),
        ("agv3", &[4, 3, 2, 1, 0], 9),
        ("agv4", &[2, 3], 15),
        ("agv5", &[6, 5, 4, 3], 0),
        ("agv6", &[5, 6], 0),
    ];
    let agvs = tasks.iter().map(|(id, path, release)| agv_from_path(id, path, *release, &pass, 2)).collect();
    Instance::new(topology, agvs, 40, 2, Vec::new()).expect("appendix instance is valid")
}

/// Deterministic corridor instance: zones `s0..s{n-1}` on a line, a mix of
/// single and double lanes, and vehicles travelling in both directions.
pub fn generate_instance(n_agvs: usize, n_zones: usize, d_max: Ticks, seed: u64) -> Result<Instance, InstanceError> {
    if n_agvs < 1 {
        return Err(invariant("generate_instance: n_agvs must be >= 1"));
    }
    if n_zones < 2 {
        return Err(invariant("generate_instance: n_zones must be >= 2"));
    }
    if d_max < 1 {
        return Err(invariant("generate_instance: d_max must be >= 1"));
    }
    let mix = seed
        ^ (n_agvs as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (n_zones as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (d_max as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);

    let zones: Vec<String> = (0..n_zones).map(zone).collect();
    let mut lane_pass = Vec::with_capacity(n_zones - 1);
    let mut lanes = Vec::with_capacity(n_zones - 1);
    for i in 0..n_zones - 1 {
        lanes.push(Lane { a: zone(i), b: zone(i + 1), bidirectional: rng.gen_bool(0.25) });
        lane_pass.push(*[0, 2, 4, 6].choose(&mut rng).unwrap());
    }
    let topology = Topology::new(zones, lanes)?;
    let pass = |a: usize, b: usize| lane_pass[a.min(b)];

    let max_len = n_zones.min(n_zones / 2 + 1).max(2);
    let horizon = 3 * n_agvs as Ticks;
    let agvs = (0..n_agvs)
        .map(|j| {
            let len = rng.gen_range(2..=max_len);
            let start = rng.gen_range(0..=n_zones - len);
            let mut path: Vec<usize> = (start..start + len).collect();
            if rng.gen_bool(0.5) {
                path.reverse();
            }
            let release = rng.gen_range(0..=horizon);
            agv_from_path(&format!("agv{j}"), &path, release, &pass, 2)
        })
        .collect();
    Instance::new(topology, agvs, d_max, 2, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order_compares_digit_runs_numerically() {
        assert_eq!(natural_cmp("s2", "s10"), Ordering::Less);
        assert_eq!(natural_cmp("s10", "s10"), Ordering::Equal);
        assert_eq!(natural_cmp("a", "b"), Ordering::Less);
        assert_eq!(natural_cmp("agv9", "agv10"), Ordering::Less);
    }

    #[test]
    fn appendix_has_expected_shape() {
        let inst = appendix_instance();
        assert_eq!(inst.n_agvs(), 7);
        assert_eq!(inst.n_zones(), 7);
        assert_eq!(inst.d_max(), 40);
        let a2 = inst.agv_index("agv2").unwrap();
        let names: Vec<&str> = inst.path(a2).iter().map(|&z| inst.zone_name(z)).collect();
        assert_eq!(names, ["s4", "s3", "s2", "s1"]);
        assert_eq!(inst.release(a2), 8);
        assert_eq!(inst.release(inst.agv_index("agv3").unwrap()), 9);
        assert_eq!(inst.release(inst.agv_index("agv4").unwrap()), 15);
        assert!(inst.is_single_lane(5, 6));
        assert!(!inst.is_single_lane(1, 2));
        assert_eq!(inst.headway(0, 1, 0, 1), 2);
    }

    #[test]
    fn lane_to_unknown_zone_is_rejected() {
        let doc = br#"{"zones":["s0","s1"],"lanes":[{"a":"s0","b":"s9","bidirectional":false}],
            "d_max":10,"headway_default":2,"agvs":[]}"#;
        let err = load_instance(doc).unwrap_err();
        assert!(matches!(err, InstanceError::Invariant(ref m) if m.contains("s9")), "{err}");
    }

    #[test]
    fn malformed_and_mistyped_documents_are_distinguished() {
        assert!(matches!(load_instance(b"{not json"), Err(InstanceError::Parse(_))));
        assert!(matches!(load_instance(br#"{"zones":3}"#), Err(InstanceError::Schema(_))));
    }

    #[test]
    fn zero_agv_instance_is_rejected() {
        let doc = br#"{"zones":["s0","s1"],"lanes":[{"a":"s0","b":"s1","bidirectional":false}],
            "d_max":10,"headway_default":2,"agvs":[]}"#;
        assert!(matches!(load_instance(doc), Err(InstanceError::Invariant(_))));
    }

    #[test]
    fn path_through_missing_lane_is_rejected() {
        let doc = br#"{"zones":["s0","s1","s2"],"lanes":[{"a":"s0","b":"s1","bidirectional":false}],
            "d_max":10,"headway_default":2,
            "agvs":[{"id":"a","path":["s0","s2"],"release":0,"weight":1,
                     "pass_time":{"s0,s2":1},"zone_time":{"s0":1,"s2":1}}]}"#;
        let err = load_instance(doc).unwrap_err();
        assert!(err.to_string().contains("no lane"), "{err}");
    }

    #[test]
    fn repeated_zone_in_path_is_rejected() {
        let doc = br#"{"zones":["s0","s1"],"lanes":[{"a":"s0","b":"s1","bidirectional":false}],
            "d_max":10,"headway_default":2,
            "agvs":[{"id":"a","path":["s0","s1","s0"],"release":0,"weight":1,
                     "pass_time":{"s0,s1":1,"s1,s0":1},"zone_time":{"s0":1,"s1":1}}]}"#;
        let err = load_instance(doc).unwrap_err();
        assert!(err.to_string().contains("repeats"), "{err}");
    }

    #[test]
    fn appendix_round_trips_byte_identically() {
        let text = save_instance(&appendix_instance());
        let back = load_instance(text.as_bytes()).unwrap();
        assert_eq!(back, appendix_instance());
        assert_eq!(save_instance(&back), text);
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let a = generate_instance(4, 7, 40, 11).unwrap();
        let b = generate_instance(4, 7, 40, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(4, 7, 40, 12).unwrap();
        assert_ne!(save_instance(&a), save_instance(&c));
        let single = generate_instance(1, 2, 10, 0).unwrap();
        assert_eq!(single.n_agvs(), 1);
        assert!(generate_instance(0, 4, 10, 0).is_err());
        assert!(generate_instance(2, 1, 10, 0).is_err());
    }
}
