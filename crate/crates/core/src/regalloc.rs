//! Register allocation of values kept in a PE's register file.
//!
//! A value consumed on its producer's PE at a gap other than 1 has to survive
//! at least one further instruction on that PE, so it is held in the register
//! file. It is live from the slot after production through its last consuming
//! slot, on the cyclic timeline of length `ii`. Values on one PE interfere when
//! their live slots intersect; allocation is exact graph colouring.

use alloc::vec;
use alloc::vec::Vec;

use crate::arch::PeId;
use crate::dfg::{DataflowGraph, NodeId};
use crate::encode::effective_gap;
use crate::solve::{Mapping, RegisterAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Route {
    RegisterFile,
    OutputRegister,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiveValue {
    pub pe: PeId,
    pub producer: NodeId,
    /// Kernel cycle of the producer.
    pub start: usize,
    /// Live length in cycles, `1..=ii`.
    pub len: usize,
    pub route: Route,
    /// A consumer realising the maximal gap.
    pub witness: NodeId,
}

impl LiveValue {
    /// Kernel cycles in which the value occupies a register.
    pub fn slots(&self, ii: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.start;
        (1..=self.len).map(move |j| (start + j) % ii)
    }

    pub fn slot_mask(&self, ii: usize) -> Vec<bool> {
        let mut mask = vec![false; ii];
        for s in self.slots(ii) {
            mask[s] = true;
        }
        mask
    }
}

/// Register-file values of a mapping, one per producer with at least one
/// same-PE consumer at a gap other than 1, sorted by PE then producer.
/// Nodes without a placement are ignored.
pub fn extract_live_values(g: &DataflowGraph, m: &Mapping) -> Vec<LiveValue> {
    let mut out: Vec<LiveValue> = Vec::new();
    for e in g.edges() {
        let (Some(s), Some(d)) = (m.placement_of(e.src), m.placement_of(e.dst)) else {
            continue;
        };
        if s.pe != d.pe || m.ii == 0 || s.cycle >= m.ii || d.cycle >= m.ii {
            continue;
        }
        let gap = effective_gap(s.cycle, d.cycle, m.ii);
        if gap == 1 {
            continue;
        }
        match out.iter_mut().find(|v| v.producer == e.src) {
            Some(v) => {
                if gap > v.len || (gap == v.len && e.dst < v.witness) {
                    v.len = gap;
                    v.witness = e.dst;
                }
            }
            None => out.push(LiveValue {
                pe: s.pe,
                producer: e.src,
                start: s.cycle,
                len: gap,
                route: Route::RegisterFile,
                witness: e.dst,
            }),
        }
    }
    out.sort();
    out
}

pub fn intervals_overlap(a: &LiveValue, b: &LiveValue, ii: usize) -> bool {
    let mask = a.slot_mask(ii);
    b.slots(ii).any(|s| mask[s])
}

/// Interference among the register-file values of one PE.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeInterference {
    pub pe: PeId,
    pub values: Vec<LiveValue>,
    pub adjacency: Vec<Vec<usize>>,
}

impl PeInterference {
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(&b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceGraph {
    pub ii: usize,
    /// One entry per PE holding at least one value, by PE.
    pub pes: Vec<PeInterference>,
}

/// Groups register-file values by PE and connects overlapping intervals.
/// Output-register values are ignored.
pub fn build_interference(values: &[LiveValue], ii: usize) -> InterferenceGraph {
    let mut vals: Vec<LiveValue> = values
        .iter()
        .filter(|v| v.route == Route::RegisterFile)
        .copied()
        .collect();
    vals.sort();
    let mut pes: Vec<PeInterference> = Vec::new();
    for v in vals {
        match pes.last_mut() {
            Some(p) if p.pe == v.pe => p.values.push(v),
            _ => pes.push(PeInterference {
                pe: v.pe,
                values: vec![v],
                adjacency: Vec::new(),
            }),
        }
    }
    for p in &mut pes {
        let masks: Vec<Vec<bool>> = p.values.iter().map(|v| v.slot_mask(ii)).collect();
        let n = p.values.len();
        p.adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if masks[i].iter().zip(&masks[j]).any(|(a, b)| *a && *b) {
                    p.adjacency[i].push(j);
                    p.adjacency[j].push(i);
                }
            }
        }
    }
    InterferenceGraph { ii, pes }
}

/// A proper colouring of `adjacency` with colours `0..k`, found by exhaustive
/// backtracking. `None` iff no such colouring exists.
pub fn color_exact(adjacency: &[Vec<usize>], k: usize) -> Option<Vec<usize>> {
    let n = adjacency.len();
    if n == 0 {
        return Some(Vec::new());
    }
    if k == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (core::cmp::Reverse(adjacency[v].len()), v));
    let mut colors = vec![usize::MAX; n];
    fn go(i: usize, order: &[usize], adj: &[Vec<usize>], k: usize, used: usize, colors: &mut [usize]) -> bool {
        let Some(&v) = order.get(i) else {
            return true;
        };
        // a fresh colour is interchangeable with any other unused one
        for c in 0..k.min(used + 1) {
            if adj[v].iter().all(|&u| colors[u] != c) {
                colors[v] = c;
                if go(i + 1, order, adj, k, used.max(c + 1), colors) {
                    return true;
                }
                colors[v] = usize::MAX;
            }
        }
        false
    }
    go(0, &order, adjacency, k, 0, &mut colors).then_some(colors)
}

/// A PE whose values cannot be coloured, with a subset of its values that is
/// still uncolourable and becomes colourable when any member is dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringFailure {
    pub pe: PeId,
    pub core: Vec<LiveValue>,
}

pub fn color(graph: &InterferenceGraph, k: usize) -> Result<Vec<RegisterAssignment>, ColoringFailure> {
    let mut out = Vec::new();
    for p in &graph.pes {
        match color_exact(&p.adjacency, k) {
            Some(colors) => out.extend(p.values.iter().zip(colors).map(|(v, reg)| RegisterAssignment {
                pe: v.pe,
                producer: v.producer,
                reg,
            })),
            None => {
                return Err(ColoringFailure {
                    pe: p.pe,
                    core: minimal_core(p, k),
                })
            }
        }
    }
    Ok(out)
}

fn minimal_core(p: &PeInterference, k: usize) -> Vec<LiveValue> {
    let mut keep = vec![true; p.values.len()];
    for i in 0..keep.len() {
        keep[i] = false;
        if color_exact(&induced(p, &keep), k).is_some() {
            keep[i] = true;
        }
    }
    p.values
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(v, _)| *v)
        .collect()
}

fn induced(p: &PeInterference, keep: &[bool]) -> Vec<Vec<usize>> {
    let index: Vec<Option<usize>> = keep
        .iter()
        .scan(0, |next, &k| {
            Some(k.then(|| {
                *next += 1;
                *next - 1
            }))
        })
        .collect();
    (0..p.values.len())
        .filter(|&v| keep[v])
        .map(|v| p.adjacency[v].iter().filter_map(|&u| index[u]).collect())
        .collect()
}

/// Register assignment for a mapping on PEs with `k` registers each.
pub fn allocate(g: &DataflowGraph, m: &Mapping, k: usize) -> Result<Vec<RegisterAssignment>, ColoringFailure> {
    let values = extract_live_values(g, m);
    color(&build_interference(&values, m.ii), k)
}
