//! Mapping validator and exhaustive search oracle.
//!
//! Legality is checked directly on placements, without going through the
//! clause encoding. Timing uses schedule times recovered by unfolding each
//! kernel position: a consumer reached over an edge of distance `d` must run
//! between 1 and `ii` cycles after its producer, i.e.
//! `1 <= d * ii + t_dst - t_src <= ii`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::arch::CgraSpec;
use crate::dfg::{DataflowGraph, DfgEdge, NodeId};
use crate::regalloc::{build_interference, color_exact, extract_live_values};
use crate::schedule::{build_kms, compute_mii, mobility_schedule, KernelMobilitySchedule, ScheduleError};
use crate::solve::{Mapping, Placement, RegisterAssignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    UnplacedNode,
    DuplicatePlacement,
    KmsViolation,
    PeConflict,
    BadTimingRelation,
    NonNeighborRoute,
    OutputRegisterClobbered,
    RegisterOverflow,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::UnplacedNode => "unplaced_node",
            ViolationKind::DuplicatePlacement => "duplicate_placement",
            ViolationKind::KmsViolation => "kms_violation",
            ViolationKind::PeConflict => "pe_conflict",
            ViolationKind::BadTimingRelation => "bad_timing_relation",
            ViolationKind::NonNeighborRoute => "non_neighbor_route",
            ViolationKind::OutputRegisterClobbered => "output_register_clobbered",
            ViolationKind::RegisterOverflow => "register_overflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.detail)
    }
}

fn violation(kind: ViolationKind, detail: String) -> Violation {
    Violation { kind, detail }
}

/// Schedule time of a kernel position, if the position belongs to the fold.
fn time_of(kms: &KernelMobilitySchedule, p: &Placement) -> Option<usize> {
    kms.unfold(p.cycle, p.iter)
}

/// Cycles between producer and consumer over `e`, as a signed count.
fn edge_gap(kms: &KernelMobilitySchedule, e: &DfgEdge, s: &Placement, d: &Placement) -> Option<i64> {
    let ts = time_of(kms, s)? as i64;
    let td = time_of(kms, d)? as i64;
    Some(i64::from(e.distance) * kms.ii() as i64 + td - ts)
}

/// Checks of a single edge that only involve its two endpoints.
fn edge_local(
    kms: &KernelMobilitySchedule,
    spec: &CgraSpec,
    e: &DfgEdge,
    s: &Placement,
    d: &Placement,
) -> Result<usize, Violation> {
    let ii = kms.ii() as i64;
    let gap = edge_gap(kms, e, s, d).unwrap_or(-1);
    if !(1..=ii).contains(&gap) {
        return Err(violation(
            ViolationKind::BadTimingRelation,
            format!(
                "edge {}->{} (distance {}): consumer runs {} cycles after producer",
                e.src, e.dst, e.distance, gap
            ),
        ));
    }
    let link = if s.pe.0 < spec.num_pes() && d.pe.0 < spec.num_pes() {
        spec.link(s.pe, d.pe)
    } else {
        0
    };
    if link == 0 {
        return Err(violation(
            ViolationKind::NonNeighborRoute,
            format!("edge {}->{}: PE {} cannot reach PE {}", e.src, e.dst, s.pe, d.pe),
        ));
    }
    Ok(gap as usize)
}

/// Returns every violation found; an empty list means the mapping is legal.
pub fn validate(g: &DataflowGraph, spec: &CgraSpec, m: &Mapping) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = g.num_nodes();
    let ii = m.ii;
    let kms = if ii == 0 {
        out.push(violation(
            ViolationKind::KmsViolation,
            "initiation interval is 0".into(),
        ));
        None
    } else {
        match mobility_schedule(g).and_then(|ms| build_kms(&ms, ii)) {
            Ok(k) => Some(k),
            Err(e) => {
                out.push(violation(ViolationKind::KmsViolation, format!("no schedule: {e}")));
                None
            }
        }
    };

    // C1 and placement legality
    let mut first: Vec<Option<Placement>> = vec![None; n];
    for p in &m.placements {
        if p.node.0 >= n {
            out.push(violation(
                ViolationKind::KmsViolation,
                format!("placement of unknown node {}", p.node),
            ));
            continue;
        }
        if first[p.node.0].is_some() {
            out.push(violation(
                ViolationKind::DuplicatePlacement,
                format!("node {} placed more than once", p.node),
            ));
            continue;
        }
        let legal = p.pe.0 < spec.num_pes() && kms.as_ref().is_some_and(|k| k.contains(p.node, p.cycle, p.iter));
        if !legal {
            out.push(violation(
                ViolationKind::KmsViolation,
                format!(
                    "node {} at pe {} cycle {} iteration {} is outside the kernel mobility schedule",
                    p.node, p.pe, p.cycle, p.iter
                ),
            ));
            continue;
        }
        first[p.node.0] = Some(*p);
    }
    for (i, p) in first.iter().enumerate() {
        if p.is_none() && !m.placements.iter().any(|q| q.node.0 == i) {
            out.push(violation(
                ViolationKind::UnplacedNode,
                format!("node {i} has no placement"),
            ));
        }
    }
    let Some(kms) = kms else {
        return Err(out);
    };

    let mut rest = Vec::new();
    check_placed(g, spec, &kms, &first, &m.registers, &mut rest);
    out.extend(rest);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// C2, C3 and register checks over the nodes that are placed. Each violation
/// found here persists when further nodes are placed.
fn check_placed(
    g: &DataflowGraph,
    spec: &CgraSpec,
    kms: &KernelMobilitySchedule,
    first: &[Option<Placement>],
    registers: &[RegisterAssignment],
    out: &mut Vec<Violation>,
) {
    let ii = kms.ii();
    // C2
    let mut occupant: Vec<Option<NodeId>> = vec![None; spec.num_pes() * ii];
    for p in first.iter().flatten() {
        let slot = &mut occupant[p.pe.0 * ii + p.cycle];
        match slot {
            Some(other) => out.push(violation(
                ViolationKind::PeConflict,
                format!("nodes {} and {} share pe {} in cycle {}", other, p.node, p.pe, p.cycle),
            )),
            None => *slot = Some(p.node),
        }
    }

    // C3
    for e in g.edges() {
        let (Some(s), Some(d)) = (first[e.src.0], first[e.dst.0]) else {
            continue;
        };
        let gap = match edge_local(kms, spec, e, &s, &d) {
            Ok(gap) => gap,
            Err(v) => {
                out.push(v);
                continue;
            }
        };
        if gap == 1 || s.pe == d.pe {
            continue;
        }
        // a neighbour reads the output register, which no later instruction on
        // the producer's PE may overwrite before the read
        for j in 1..gap {
            let c = (s.cycle + j) % ii;
            if let Some(o) = occupant[s.pe.0 * ii + c] {
                out.push(violation(
                    ViolationKind::OutputRegisterClobbered,
                    format!(
                        "edge {}->{}: node {} overwrites the output register of pe {} in cycle {}",
                        e.src, e.dst, o, s.pe, c
                    ),
                ));
            }
        }
    }

    if out.is_empty() {
        let m = Mapping {
            ii,
            placements: first.iter().flatten().copied().collect(),
            registers: registers.to_vec(),
        };
        check_registers(g, spec, &m, out);
    }
}

fn check_registers(g: &DataflowGraph, spec: &CgraSpec, m: &Mapping, out: &mut Vec<Violation>) {
    let k = spec.registers_per_pe();
    let graph = build_interference(&extract_live_values(g, m), m.ii);
    for p in &graph.pes {
        if color_exact(&p.adjacency, k).is_none() {
            out.push(violation(
                ViolationKind::RegisterOverflow,
                format!(
                    "pe {}: {} live values do not fit in {} registers",
                    p.pe,
                    p.values.len(),
                    k
                ),
            ));
            continue;
        }
        if m.registers.is_empty() {
            continue;
        }
        let regs: Vec<Option<usize>> = p
            .values
            .iter()
            .map(|v| {
                m.registers
                    .iter()
                    .find(|r| r.pe == v.pe && r.producer == v.producer)
                    .map(|r| r.reg)
            })
            .collect();
        for (i, v) in p.values.iter().enumerate() {
            match regs[i] {
                None => out.push(violation(
                    ViolationKind::RegisterOverflow,
                    format!("pe {}: value of node {} has no register", p.pe, v.producer),
                )),
                Some(r) if r >= k => out.push(violation(
                    ViolationKind::RegisterOverflow,
                    format!(
                        "pe {}: register {} of node {} exceeds {} registers",
                        p.pe, r, v.producer, k
                    ),
                )),
                Some(r) => {
                    for &j in &p.adjacency[i] {
                        if j > i && regs[j] == Some(r) {
                            out.push(violation(
                                ViolationKind::RegisterOverflow,
                                format!(
                                    "pe {}: nodes {} and {} are live together in register {}",
                                    p.pe, v.producer, p.values[j].producer, r
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{nodes} nodes exceed the exhaustive search limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Node count above which [`brute_force_min_ii`] refuses to run unless
/// explicitly allowed.
pub const ORACLE_NODE_LIMIT: usize = 8;

/// Smallest `ii` in `mii..=ii_max` admitting a legal mapping, with the first
/// such mapping in lexicographic enumeration order.
pub fn brute_force_min_ii(
    g: &DataflowGraph,
    spec: &CgraSpec,
    ii_max: usize,
    allow_large: bool,
) -> Result<Option<Mapping>, OracleError> {
    if g.num_nodes() > ORACLE_NODE_LIMIT && !allow_large {
        return Err(OracleError::TooLarge {
            nodes: g.num_nodes(),
            limit: ORACLE_NODE_LIMIT,
        });
    }
    let mii = compute_mii(g, spec)?.mii;
    for ii in mii..=ii_max {
        if let Some(m) = brute_force_at(g, spec, ii)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// First legal mapping at exactly `ii`, if one exists.
pub fn brute_force_at(g: &DataflowGraph, spec: &CgraSpec, ii: usize) -> Result<Option<Mapping>, OracleError> {
    let kms = build_kms(&mobility_schedule(g)?, ii)?;
    let n = g.num_nodes();
    let candidates: Vec<Vec<Placement>> = (0..n)
        .map(|i| {
            let node = NodeId(i);
            let mut occ = kms.occurrences(node).to_vec();
            occ.sort();
            let mut c = Vec::new();
            for (cycle, iter) in occ {
                for pe in spec.pes() {
                    c.push(Placement { node, pe, cycle, iter });
                }
            }
            c
        })
        .collect();
    let order = search_order(g);
    let mut search = Search {
        g,
        spec,
        kms: &kms,
        candidates: &candidates,
        order: &order,
        chosen: vec![None; n],
        occupied: vec![false; spec.num_pes() * ii],
    };
    Ok(search.run(0))
}

/// Nodes ordered so that each one after the first of its component is
/// adjacent to an earlier one, which lets edge checks prune early. Components
/// are entered at their best-connected node; isolated nodes come last.
fn search_order(g: &DataflowGraph) -> Vec<usize> {
    let n = g.num_nodes();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.src.0].push(e.dst.0);
        adj[e.dst.0].push(e.src.0);
    }
    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by_key(|&v| (core::cmp::Reverse(adj[v].len()), v));
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut head = order.len();
        order.push(root);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
            next.sort();
            next.dedup();
            for u in next {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    order
}

struct Search<'a> {
    g: &'a DataflowGraph,
    spec: &'a CgraSpec,
    kms: &'a KernelMobilitySchedule,
    candidates: &'a [Vec<Placement>],
    order: &'a [usize],
    chosen: Vec<Option<Placement>>,
    occupied: Vec<bool>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize) -> Option<Mapping> {
        let ii = self.kms.ii();
        let Some(&node) = self.order.get(depth) else {
            let m = Mapping::new(ii, self.chosen.iter().flatten().copied().collect());
            return validate(self.g, self.spec, &m).is_ok().then_some(m);
        };
        for p in &self.candidates[node] {
            let slot = p.pe.0 * ii + p.cycle;
            if self.occupied[slot] {
                continue;
            }
            self.occupied[slot] = true;
            self.chosen[node] = Some(*p);
            let mut found = Vec::new();
            check_placed(self.g, self.spec, self.kms, &self.chosen, &[], &mut found);
            if found.is_empty() {
                if let Some(m) = self.run(depth + 1) {
                    return Some(m);
                }
            }
            self.chosen[node] = None;
            self.occupied[slot] = false;
        }
        None
    }
}
