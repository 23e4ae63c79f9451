//! ASAP/ALAP levelling, mobility schedule, minimum initiation interval and
//! the kernel mobility schedule (KMS).
//!
//! The KMS folds the mobility schedule modulo the initiation interval. With
//! `T` mobility rows, `K = ceil(T / ii)` folds and `offset = K * ii - T`, row
//! `t` lands in kernel cycle `(t + offset) % ii` with iteration label
//! `(T - 1 - t) / ii`. The last row therefore always sits in cycle `ii - 1`
//! with label 0, and larger labels belong to iterations that entered the
//! pipeline later (they execute earlier rows of their schedule).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arch::CgraSpec;
use crate::dfg::{CycleReport, DataflowGraph, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("distance-0 edges form a cycle: {0}")]
    Cycle(CycleReport),
    #[error("loop-carried cycle through nodes {0:?} has total distance 0")]
    ZeroDistanceCycle(Vec<NodeId>),
    #[error("schedules have mismatched shapes")]
    Mismatch,
    #[error("initiation interval must be at least 1")]
    ZeroIi,
}

/// One node set per time step; every node appears in exactly one row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSchedule {
    level: Vec<usize>,
    rows: Vec<Vec<NodeId>>,
}

impl LevelSchedule {
    fn from_levels(level: Vec<usize>, len: usize) -> Self {
        let mut rows = vec![Vec::new(); len];
        for (n, &t) in level.iter().enumerate() {
            rows[t].push(NodeId(n));
        }
        LevelSchedule { level, rows }
    }

    pub fn rows(&self) -> &[Vec<NodeId>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn level(&self, n: NodeId) -> usize {
        self.level[n.0]
    }

    pub fn levels(&self) -> &[usize] {
        &self.level
    }
}

/// Earliest start for every node on the distance-0 subgraph. The row count is
/// the critical-path length.
pub fn asap(g: &DataflowGraph) -> Result<LevelSchedule, ScheduleError> {
    let order = g.topological_order().map_err(ScheduleError::Cycle)?;
    let preds = g.forward_predecessors();
    let mut level = vec![0usize; g.num_nodes()];
    for n in order {
        level[n.0] = preds[n.0].iter().map(|p| level[p.0] + 1).max().unwrap_or(0);
    }
    let len = level.iter().max().map_or(0, |m| m + 1);
    Ok(LevelSchedule::from_levels(level, len))
}

/// Latest start for every node such that all sinks finish by row `len - 1`.
pub fn alap(g: &DataflowGraph, len: usize) -> Result<LevelSchedule, ScheduleError> {
    let order = g.topological_order().map_err(ScheduleError::Cycle)?;
    let succ = g.forward_successors();
    let mut level = vec![0usize; g.num_nodes()];
    for n in order.into_iter().rev() {
        level[n.0] = match succ[n.0].iter().map(|s| level[s.0]).min() {
            Some(m) => m.checked_sub(1).ok_or(ScheduleError::Mismatch)?,
            None => len.checked_sub(1).ok_or(ScheduleError::Mismatch)?,
        };
    }
    Ok(LevelSchedule::from_levels(level, len))
}

/// Per time step, the nodes whose `[ASAP, ALAP]` window covers it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobilitySchedule {
    asap: Vec<usize>,
    alap: Vec<usize>,
    rows: Vec<Vec<NodeId>>,
}

impl MobilitySchedule {
    pub fn rows(&self) -> &[Vec<NodeId>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.asap.len()
    }

    /// Inclusive `(asap, alap)` window of `n`.
    pub fn window(&self, n: NodeId) -> (usize, usize) {
        (self.asap[n.0], self.alap[n.0])
    }
}

pub fn mobility(asap: &LevelSchedule, alap: &LevelSchedule) -> Result<MobilitySchedule, ScheduleError> {
    if asap.len() != alap.len() || asap.level.len() != alap.level.len() {
        return Err(ScheduleError::Mismatch);
    }
    let mut rows = vec![Vec::new(); asap.len()];
    for n in 0..asap.level.len() {
        let (lo, hi) = (asap.level[n], alap.level[n]);
        if lo > hi {
            return Err(ScheduleError::Mismatch);
        }
        for row in &mut rows[lo..=hi] {
            row.push(NodeId(n));
        }
    }
    Ok(MobilitySchedule {
        asap: asap.level.clone(),
        alap: alap.level.clone(),
        rows,
    })
}

/// Convenience: ASAP, ALAP and mobility in one go.
pub fn mobility_schedule(g: &DataflowGraph) -> Result<MobilitySchedule, ScheduleError> {
    let early = asap(g)?;
    let late = alap(g, early.len())?;
    mobility(&early, &late)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MiiReport {
    pub res_ii: usize,
    pub rec_ii: usize,
    pub mii: usize,
}

/// Resource bound `ceil(N / P)` and recurrence bound over all elementary
/// cycles, `max ceil(length / distance)`.
pub fn compute_mii(g: &DataflowGraph, spec: &CgraSpec) -> Result<MiiReport, ScheduleError> {
    let res_ii = g.num_nodes().div_ceil(spec.num_pes());
    let rec_ii = recurrence_bound(g)?;
    Ok(MiiReport {
        res_ii,
        rec_ii,
        mii: res_ii.max(rec_ii).max(1),
    })
}

/// Enumerates elementary cycles of the full edge set, rooted at their
/// smallest node. Parallel edges collapse to the smallest distance, which
/// maximises the ratio for that node sequence.
pub fn recurrence_bound(g: &DataflowGraph) -> Result<usize, ScheduleError> {
    let n = g.num_nodes();
    let mut min_dist: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for e in g.edges() {
        let d = min_dist.entry((e.src.0, e.dst.0)).or_insert(e.distance);
        *d = (*d).min(e.distance);
    }
    let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    for (&(s, d), &k) in &min_dist {
        adj[s].push((d, k));
    }

    let mut best = 0usize;
    let mut on_path = vec![false; n];
    let mut path = Vec::new();
    for root in 0..n {
        on_path[root] = true;
        path.push(root);
        cycles_from(root, root, 0, 0, &adj, &mut on_path, &mut path, &mut best)?;
        path.pop();
        on_path[root] = false;
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn cycles_from(
    root: usize,
    at: usize,
    length: usize,
    distance: u64,
    adj: &[Vec<(usize, u32)>],
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    best: &mut usize,
) -> Result<(), ScheduleError> {
    for &(next, d) in &adj[at] {
        if next < root {
            continue;
        }
        let dist = distance + u64::from(d);
        if next == root {
            if dist == 0 {
                return Err(ScheduleError::ZeroDistanceCycle(
                    path.iter().map(|&i| NodeId(i)).collect(),
                ));
            }
            let ratio = (length as u64 + 1).div_ceil(dist) as usize;
            *best = (*best).max(ratio);
        } else if !on_path[next] {
            on_path[next] = true;
            path.push(next);
            cycles_from(root, next, length + 1, dist, adj, on_path, path, best)?;
            path.pop();
            on_path[next] = false;
        }
    }
    Ok(())
}

/// The mobility schedule folded modulo `ii`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelMobilitySchedule {
    ii: usize,
    folds: usize,
    offset: usize,
    len: usize,
    slots: Vec<Vec<(NodeId, usize)>>,
    occurrences: Vec<Vec<(usize, usize)>>,
}

impl KernelMobilitySchedule {
    pub fn ii(&self) -> usize {
        self.ii
    }

    /// Number of folds `K`, i.e. pipeline stages.
    pub fn fold_count(&self) -> usize {
        self.folds
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Row count `T` of the mobility schedule that was folded.
    pub fn schedule_len(&self) -> usize {
        self.len
    }

    /// `(node, iteration label)` entries of each kernel cycle, sorted by label
    /// then node.
    pub fn slots(&self) -> &[Vec<(NodeId, usize)>] {
        &self.slots
    }

    /// `(cycle, label)` occurrences of a node, in mobility-row order.
    pub fn occurrences(&self, n: NodeId) -> &[(usize, usize)] {
        &self.occurrences[n.0]
    }

    pub fn num_nodes(&self) -> usize {
        self.occurrences.len()
    }

    pub fn contains(&self, n: NodeId, cycle: usize, iter: usize) -> bool {
        self.occurrences
            .get(n.0)
            .is_some_and(|occ| occ.contains(&(cycle, iter)))
    }

    /// Kernel position of mobility row `t`.
    pub fn fold(&self, t: usize) -> (usize, usize) {
        ((t + self.offset) % self.ii, (self.len - 1 - t) / self.ii)
    }

    /// Mobility row of kernel position `(cycle, iter)`; `None` when the
    /// position does not correspond to a row.
    pub fn unfold(&self, cycle: usize, iter: usize) -> Option<usize> {
        if cycle >= self.ii || iter >= self.folds {
            return None;
        }
        let t = (cycle + self.ii * (self.folds - 1 - iter)).checked_sub(self.offset)?;
        (t < self.len).then_some(t)
    }
}

pub fn build_kms(ms: &MobilitySchedule, ii: usize) -> Result<KernelMobilitySchedule, ScheduleError> {
    if ii == 0 {
        return Err(ScheduleError::ZeroIi);
    }
    let len = ms.len();
    let folds = len.div_ceil(ii).max(1);
    let offset = folds * ii - len;
    let mut kms = KernelMobilitySchedule {
        ii,
        folds,
        offset,
        len,
        slots: vec![Vec::new(); ii],
        occurrences: vec![Vec::new(); ms.num_nodes()],
    };
    for (t, row) in ms.rows().iter().enumerate() {
        let (c, it) = kms.fold(t);
        for &n in row {
            kms.slots[c].push((n, it));
            kms.occurrences[n.0].push((c, it));
        }
    }
    for slot in &mut kms.slots {
        slot.sort_by_key(|&(n, it)| (it, n));
    }
    Ok(kms)
}
