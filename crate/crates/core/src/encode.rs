//! CNF encoding of the mapping problem over the kernel mobility schedule.
//!
//! One placement variable exists per (KMS occurrence of a node, PE). Three
//! clause families are emitted:
//!
//! * C1: every node takes exactly one of its placement variables.
//! * C2: no two distinct nodes share a PE in the same kernel cycle.
//! * C3: every dependency is realised by some pairing of producer and
//!   consumer placements that respects timing and routing.
//!
//! For C3, let the gap be the number of kernel cycles the consumer waits,
//! `(c_d - c_s) mod ii` with 0 read as a full `ii`. A gap of 1 can be served
//! by any reachable PE. Longer gaps are served either on the producer's PE
//! (the value sits in the register file, checked later by register
//! allocation) or through the producer's output register, in which case the
//! producer's PE must stay idle for the cycles strictly between production
//! and consumption. The routing disjunction is converted to CNF with one
//! Tseitin variable per conjunctive term.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::arch::{CgraSpec, PeId, NEIGHBOR, SAME_PE};
use crate::cnf::{Clause, CnfProblem, Lit, Provenance, Var};
use crate::dfg::{DataflowGraph, DfgEdge, NodeId};
use crate::schedule::{build_kms, mobility_schedule, KernelMobilitySchedule, ScheduleError};
use crate::time::{Deadline, FrozenClock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlacementVar {
    pub node: NodeId,
    pub pe: PeId,
    pub cycle: usize,
    pub iter: usize,
}

impl fmt::Display for PlacementVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x[{},{},{},{}]", self.node, self.pe, self.cycle, self.iter)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("unroutable edge {src} -> {dst} (distance {distance})")]
    Unroutable { src: NodeId, dst: NodeId, distance: u32 },
    #[error("placement {0} is not part of the literal space")]
    NotInTable(PlacementVar),
}

/// Definition of an auxiliary variable in terms of earlier literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuxDef {
    And(Vec<Lit>),
    Or(Vec<Lit>),
}

/// Placement variables occupy `1..=M`; auxiliaries follow.
#[derive(Clone, Debug)]
pub struct VarTable {
    ii: usize,
    num_pes: usize,
    placements: Vec<PlacementVar>,
    index: BTreeMap<PlacementVar, Var>,
    by_node: Vec<Vec<Var>>,
    by_slot: Vec<Vec<Var>>,
    aux: Vec<AuxDef>,
}

impl VarTable {
    pub fn ii(&self) -> usize {
        self.ii
    }

    pub fn num_pes(&self) -> usize {
        self.num_pes
    }

    pub fn num_placements(&self) -> u32 {
        self.placements.len() as u32
    }

    pub fn num_aux(&self) -> u32 {
        self.aux.len() as u32
    }

    pub fn total_vars(&self) -> u32 {
        self.num_placements() + self.num_aux()
    }

    pub fn num_nodes(&self) -> usize {
        self.by_node.len()
    }

    /// `L(n)`: every placement variable of `node`.
    pub fn literals_of(&self, node: NodeId) -> &[Var] {
        &self.by_node[node.0]
    }

    /// Placement variables of any node on `pe` in kernel cycle `cycle`.
    pub fn vars_at(&self, pe: PeId, cycle: usize) -> &[Var] {
        &self.by_slot[pe.0 * self.ii + cycle]
    }

    pub fn var_of(&self, p: &PlacementVar) -> Option<Var> {
        self.index.get(p).copied()
    }

    /// `None` for auxiliary variables.
    pub fn placement(&self, v: Var) -> Option<&PlacementVar> {
        self.placements.get(v.get() as usize - 1)
    }

    pub fn placements(&self) -> impl Iterator<Item = (Var, &PlacementVar)> + '_ {
        self.placements
            .iter()
            .enumerate()
            .map(|(i, p)| (Var::new(i as u32 + 1), p))
    }

    pub fn aux_def(&self, v: Var) -> Option<&AuxDef> {
        let i = (v.get() as usize).checked_sub(self.placements.len() + 1)?;
        self.aux.get(i)
    }

    fn alloc_aux(&mut self, def: AuxDef) -> Var {
        self.aux.push(def);
        Var::new(self.total_vars())
    }

    /// Full assignment that sets exactly the given placements and evaluates
    /// every auxiliary from its definition.
    pub fn model_for<I>(&self, chosen: I) -> Result<Vec<bool>, EncodeError>
    where
        I: IntoIterator<Item = PlacementVar>,
    {
        let mut model = vec![false; self.total_vars() as usize];
        for p in chosen {
            let v = self.var_of(&p).ok_or(EncodeError::NotInTable(p))?;
            model[v.get() as usize - 1] = true;
        }
        let base = self.placements.len();
        for (i, def) in self.aux.iter().enumerate() {
            model[base + i] = match def {
                AuxDef::And(lits) => lits.iter().all(|l| l.eval(&model)),
                AuxDef::Or(lits) => lits.iter().any(|l| l.eval(&model)),
            };
        }
        Ok(model)
    }
}

/// One variable per node occurrence in the KMS and per PE, numbered by node,
/// then kernel cycle, iteration label and PE.
pub fn build_vars(kms: &KernelMobilitySchedule, spec: &CgraSpec) -> VarTable {
    let ii = kms.ii();
    let num_pes = spec.num_pes();
    let mut vt = VarTable {
        ii,
        num_pes,
        placements: Vec::new(),
        index: BTreeMap::new(),
        by_node: vec![Vec::new(); kms.num_nodes()],
        by_slot: vec![Vec::new(); num_pes * ii],
        aux: Vec::new(),
    };
    for n in 0..kms.num_nodes() {
        let node = NodeId(n);
        let mut occ = kms.occurrences(node).to_vec();
        occ.sort();
        for (cycle, iter) in occ {
            for pe in spec.pes() {
                let p = PlacementVar { node, pe, cycle, iter };
                vt.placements.push(p);
                let v = Var::new(vt.placements.len() as u32);
                vt.index.insert(p, v);
                vt.by_node[n].push(v);
                vt.by_slot[pe.0 * ii + cycle].push(v);
            }
        }
    }
    vt
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AmoEncoding {
    /// One binary clause per pair of placement variables.
    #[default]
    Pairwise,
    /// Sequential counter with `|L(n)| - 1` auxiliaries per node.
    Sequential,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    pub amo: AmoEncoding,
}

/// Exactly-one per node.
pub fn emit_c1(vt: &mut VarTable, amo: AmoEncoding) -> Vec<Clause> {
    let mut out = Vec::new();
    for n in 0..vt.num_nodes() {
        let node = NodeId(n);
        let lits: Vec<Lit> = vt.by_node[n].iter().map(|v| v.pos()).collect();
        out.push(Clause::new(lits.clone(), Provenance::C1ExactOne { node }));
        let tag = Provenance::C1Pair { node };
        match amo {
            AmoEncoding::Pairwise => {
                for i in 0..lits.len() {
                    for j in i + 1..lits.len() {
                        out.push(Clause::new(vec![!lits[i], !lits[j]], tag));
                    }
                }
            }
            AmoEncoding::Sequential => {
                if lits.len() < 2 {
                    continue;
                }
                // s_i <-> x_0 | ... | x_i
                let mut prev = vt.alloc_aux(AuxDef::Or(vec![lits[0]])).pos();
                out.push(Clause::new(vec![!lits[0], prev], tag));
                for (i, &x) in lits.iter().enumerate().skip(1) {
                    out.push(Clause::new(vec![!x, !prev], tag));
                    if i + 1 < lits.len() {
                        let s = vt.alloc_aux(AuxDef::Or(vec![x, prev])).pos();
                        out.push(Clause::new(vec![!x, s], tag));
                        out.push(Clause::new(vec![!prev, s], tag));
                        prev = s;
                    }
                }
            }
        }
    }
    out
}

/// At most one node per (PE, kernel cycle), whatever the iteration labels.
pub fn emit_c2(vt: &VarTable) -> Vec<Clause> {
    let mut out = Vec::new();
    for slot in &vt.by_slot {
        for (i, &a) in slot.iter().enumerate() {
            let na = vt.placements[a.get() as usize - 1].node;
            for &b in &slot[i + 1..] {
                if vt.placements[b.get() as usize - 1].node != na {
                    out.push(Clause::new(vec![a.neg(), b.neg()], Provenance::C2));
                }
            }
        }
    }
    out
}

/// Cycles the consumer waits after the producer issues: `(c_d - c_s) mod ii`
/// in `0..ii`.
pub fn kms_distance(cs: usize, cd: usize, ii: usize) -> usize {
    (cd + ii - cs) % ii
}

/// [`kms_distance`] with a zero distance read as a full kernel round.
pub fn effective_gap(cs: usize, cd: usize, ii: usize) -> usize {
    match kms_distance(cs, cd, ii) {
        0 => ii,
        g => g,
    }
}

/// A producer/consumer pair of KMS occurrences admitted for one dependency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pairing {
    /// `(cycle, label)` of the producer.
    pub src: (usize, usize),
    /// `(cycle, label)` of the consumer.
    pub dst: (usize, usize),
    pub gap: usize,
}

/// Whether a producer at `(cs, its)` may feed a consumer at `(cd, itd)` over
/// an edge of the given iteration distance, so that the consumer runs between
/// one cycle and one kernel round after the producer.
///
/// With `shift = its - itd + distance` kernel rounds separating the two
/// placements, the consumer waits `cd - cs + shift * ii` cycles; that lies in
/// `1..=ii` exactly when `shift == 0 && cd > cs` or `shift == 1 && cd <= cs`.
/// For forward edges this is "same label, later cycle" or "producer one label
/// above, same or earlier cycle"; for distance-1 back-edges it is "same label,
/// same or earlier cycle" or "consumer one label above, later cycle".
pub fn timing_admits(src: (usize, usize), dst: (usize, usize), distance: u32) -> bool {
    let (cs, its) = src;
    let (cd, itd) = dst;
    let shift = its as i64 - itd as i64 + i64::from(distance);
    (shift == 0 && cd > cs) || (shift == 1 && cd <= cs)
}

pub fn candidate_pairings(edge: &DfgEdge, kms: &KernelMobilitySchedule) -> Vec<Pairing> {
    let ii = kms.ii();
    let mut out = Vec::new();
    for &src in kms.occurrences(edge.src) {
        for &dst in kms.occurrences(edge.dst) {
            if timing_admits(src, dst, edge.distance) {
                out.push(Pairing {
                    src,
                    dst,
                    gap: effective_gap(src.0, dst.0, ii),
                });
            }
        }
    }
    out.sort();
    out
}

/// Routing terms of one dependency, each a conjunction of literals.
pub fn routing_terms(edge: &DfgEdge, pairings: &[Pairing], vt: &VarTable, spec: &CgraSpec) -> Vec<Vec<Lit>> {
    let ii = vt.ii;
    let mut terms = Vec::new();
    for pairing in pairings {
        let (cs, its) = pairing.src;
        let (cd, itd) = pairing.dst;
        for ps in spec.pes() {
            let Some(v) = vt.var_of(&PlacementVar {
                node: edge.src,
                pe: ps,
                cycle: cs,
                iter: its,
            }) else {
                continue;
            };
            let blockers: Vec<Lit> = (1..pairing.gap)
                .flat_map(|j| vt.vars_at(ps, (cs + j) % ii).iter().map(|z| z.neg()))
                .collect();
            for pd in spec.pes() {
                let link = spec.link(ps, pd);
                if link == 0 {
                    continue;
                }
                let Some(w) = vt.var_of(&PlacementVar {
                    node: edge.dst,
                    pe: pd,
                    cycle: cd,
                    iter: itd,
                }) else {
                    continue;
                };
                if pairing.gap == 1 {
                    terms.push(vec![v.pos(), w.pos()]);
                    continue;
                }
                if link == SAME_PE {
                    // value kept in the register file
                    terms.push(vec![v.pos(), w.pos()]);
                }
                debug_assert!(link == SAME_PE || link == NEIGHBOR);
                // value kept in the output register; the source PE idles
                let mut t = Vec::with_capacity(2 + blockers.len());
                t.push(v.pos());
                t.push(w.pos());
                t.extend_from_slice(&blockers);
                terms.push(t);
            }
        }
    }
    terms
}

/// Routing constraint of one dependency: the disjunction of its terms, with a
/// Tseitin variable per term.
pub fn emit_c3(
    edge: &DfgEdge,
    pairings: &[Pairing],
    vt: &mut VarTable,
    spec: &CgraSpec,
) -> Result<Vec<Clause>, EncodeError> {
    let terms = routing_terms(edge, pairings, vt, spec);
    if terms.is_empty() {
        return Err(EncodeError::Unroutable {
            src: edge.src,
            dst: edge.dst,
            distance: edge.distance,
        });
    }
    let mut out = Vec::new();
    let mut top = Vec::with_capacity(terms.len());
    for term in terms {
        let a = vt.alloc_aux(AuxDef::And(term.clone()));
        for l in term {
            out.push(Clause::new(vec![a.neg(), l], Provenance::Aux));
        }
        top.push(a.pos());
    }
    out.push(Clause::new(
        top,
        Provenance::C3Edge {
            src: edge.src,
            dst: edge.dst,
        },
    ));
    Ok(out)
}

/// Everything produced for one initiation interval.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub kms: KernelMobilitySchedule,
    pub vars: VarTable,
    pub problem: CnfProblem,
}

pub fn build_problem(
    g: &DataflowGraph,
    spec: &CgraSpec,
    ii: usize,
    options: EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let clock = FrozenClock;
    let enc = build_problem_until(g, spec, ii, options, &Deadline::none(&clock))?;
    Ok(enc.expect("an unbounded encoding always completes"))
}

/// Like [`build_problem`] but gives up with `Ok(None)` once `deadline`
/// expires. The deadline is polled between clause families and between edges.
pub fn build_problem_until(
    g: &DataflowGraph,
    spec: &CgraSpec,
    ii: usize,
    options: EncodeOptions,
    deadline: &Deadline<'_>,
) -> Result<Option<Encoding>, EncodeError> {
    let ms = mobility_schedule(g)?;
    let kms = build_kms(&ms, ii)?;
    let mut vars = build_vars(&kms, spec);
    let mut clauses = emit_c1(&mut vars, options.amo);
    if deadline.expired() {
        return Ok(None);
    }
    clauses.extend(emit_c2(&vars));
    for edge in g.edges() {
        if deadline.expired() {
            return Ok(None);
        }
        let pairings = candidate_pairings(edge, &kms);
        clauses.extend(emit_c3(edge, &pairings, &mut vars, spec)?);
    }
    if deadline.expired() {
        return Ok(None);
    }
    let mut problem = CnfProblem {
        num_vars: vars.total_vars(),
        clauses,
    };
    problem.canonicalize();
    Ok(Some(Encoding { kms, vars, problem }))
}
