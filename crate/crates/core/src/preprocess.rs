//! Conflict-free earliest times and pairwise conflict detection.

use crate::instance::{Instance, Ticks};

/// Entering or leaving side of a zone visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    In,
    Out,
}

/// Earliest entering/leaving times per AGV and path position, assuming no
/// other vehicle is present. Every time may slide up to `d_max` later.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeWindows {
    lower_in: Vec<Vec<Ticks>>,
    lower_out: Vec<Vec<Ticks>>,
    d_max: Ticks,
}

impl TimeWindows {
    pub fn lower(&self, agv: usize, pos: usize, side: Side) -> Ticks {
        match side {
            Side::In => self.lower_in[agv][pos],
            Side::Out => self.lower_out[agv][pos],
        }
    }

    pub fn upper(&self, agv: usize, pos: usize, side: Side) -> Ticks {
        self.lower(agv, pos, side) + self.d_max
    }

    pub fn d_max(&self) -> Ticks {
        self.d_max
    }

    /// Earliest leaving time at the last zone of the path.
    pub fn completion(&self, agv: usize) -> Ticks {
        *self.lower_out[agv].last().expect("paths are non-empty")
    }

    pub fn n_agvs(&self) -> usize {
        self.lower_in.len()
    }

    pub fn path_len(&self, agv: usize) -> usize {
        self.lower_in[agv].len()
    }
}

pub fn compute_time_windows(inst: &Instance) -> TimeWindows {
    let mut lower_in = Vec::with_capacity(inst.n_agvs());
    let mut lower_out = Vec::with_capacity(inst.n_agvs());
    for j in 0..inst.n_agvs() {
        let len = inst.path(j).len();
        let mut ins = Vec::with_capacity(len);
        let mut outs = Vec::with_capacity(len);
        let mut t = inst.release(j);
        for k in 0..len {
            ins.push(t);
            let out = t + inst.zone_time(j, k);
            outs.push(out);
            if k + 1 < len {
                t = out + inst.pass_time(j, k);
            }
        }
        lower_in.push(ins);
        lower_out.push(outs);
    }
    TimeWindows { lower_in, lower_out, d_max: inst.d_max() }
}

/// Maximal run of zones that two AGVs pass consecutively in the same order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedRun {
    pub j: usize,
    pub jp: usize,
    /// Zones in travel order; at least two.
    pub zones: Vec<usize>,
}

/// `j` travels `s -> sp` and `jp` travels `sp -> s` over one single track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpposingLane {
    pub j: usize,
    pub jp: usize,
    pub s: usize,
    pub sp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZonePair {
    pub j: usize,
    pub jp: usize,
    pub s: usize,
}

/// All pairwise conflicts; every entry has `j < jp`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConflictSets {
    pub same_dir: Vec<SharedRun>,
    pub opposing: Vec<OpposingLane>,
    pub zone_pairs: Vec<ZonePair>,
}

impl ConflictSets {
    pub fn for_pair(&self, j: usize, jp: usize) -> PairConflicts<'_> {
        let (j, jp) = (j.min(jp), j.max(jp));
        PairConflicts {
            runs: self.same_dir.iter().filter(|r| r.j == j && r.jp == jp).collect(),
            opposing: self.opposing.iter().filter(|o| o.j == j && o.jp == jp).collect(),
            zones: self.zone_pairs.iter().filter(|z| z.j == j && z.jp == jp).map(|z| z.s).collect(),
        }
    }
}

#[derive(Debug)]
pub struct PairConflicts<'a> {
    pub runs: Vec<&'a SharedRun>,
    pub opposing: Vec<&'a OpposingLane>,
    pub zones: Vec<usize>,
}

/// Splits the edges `j` and `jp` traverse in the same direction into maximal runs.
fn same_direction_runs(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    let follows_in_b = |x: usize, y: usize| b.windows(2).any(|w| w[0] == x && w[1] == y);
    let mut runs = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for w in a.windows(2) {
        if follows_in_b(w[0], w[1]) {
            if current.last() != Some(&w[0]) {
                if current.len() >= 2 {
                    runs.push(std::mem::take(&mut current));
                }
                current = vec![w[0]];
            }
            current.push(w[1]);
        } else if current.len() >= 2 {
            runs.push(std::mem::take(&mut current));
        } else {
            current.clear();
        }
    }
    if current.len() >= 2 {
        runs.push(current);
    }
    runs
}

pub fn find_conflicts(inst: &Instance) -> ConflictSets {
    let mut out = ConflictSets::default();
    let n = inst.n_agvs();
    for j in 0..n {
        let pj = inst.path(j);
        for jp in j + 1..n {
            let pjp = inst.path(jp);
            for &s in pj {
                if pjp.contains(&s) {
                    out.zone_pairs.push(ZonePair { j, jp, s });
                }
            }
            for zones in same_direction_runs(pj, pjp) {
                out.same_dir.push(SharedRun { j, jp, zones });
            }
            for w in pj.windows(2) {
                let (s, sp) = (w[0], w[1]);
                if inst.is_single_lane(s, sp) && pjp.windows(2).any(|v| v[0] == sp && v[1] == s) {
                    out.opposing.push(OpposingLane { j, jp, s, sp });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::appendix_instance;

    #[test]
    fn appendix_agv0_windows_by_hand() {
        let inst = appendix_instance();
        let w = compute_time_windows(&inst);
        let expect_in = [0, 8, 16, 18];
        let expect_out = [2, 10, 18, 20];
        for k in 0..4 {
            assert_eq!(w.lower(0, k, Side::In), expect_in[k]);
            assert_eq!(w.lower(0, k, Side::Out), expect_out[k]);
            assert_eq!(w.upper(0, k, Side::Out), expect_out[k] + 40);
        }
        let a2 = inst.agv_index("agv2").unwrap();
        assert_eq!(w.lower(a2, 0, Side::In), 8);
    }

    #[test]
    fn runs_split_when_routes_diverge_and_rejoin() {
        // a: 0 1 2 3 4 ; b: 0 1 5 3 4  -> runs (0,1) and (3,4)
        let runs = same_direction_runs(&[0, 1, 2, 3, 4], &[0, 1, 5, 3, 4]);
        assert_eq!(runs, vec![vec![0, 1], vec![3, 4]]);
        assert!(same_direction_runs(&[0, 1, 2], &[2, 1, 0]).is_empty());
        assert_eq!(same_direction_runs(&[0, 1, 2], &[0, 1, 2]), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn appendix_conflicts() {
        let inst = appendix_instance();
        let c = find_conflicts(&inst);
        let p01 = c.for_pair(0, 1);
        assert_eq!(p01.runs.len(), 1);
        assert_eq!(p01.runs[0].zones, vec![0, 1, 2]);
        // agv0 and agv2 cross in opposite directions, but only over double lanes.
        let p02 = c.for_pair(0, 2);
        assert!(p02.runs.is_empty());
        assert!(p02.opposing.is_empty());
        assert_eq!(p02.zones, vec![1, 2, 3]);
        let p56 = c.for_pair(5, 6);
        assert_eq!(p56.opposing.len(), 1);
        assert_eq!((p56.opposing[0].s, p56.opposing[0].sp), (6, 5));
        assert_eq!(c.zone_pairs.len(), 34);
        assert!(c.for_pair(0, 6).zones.is_empty());
    }
}
