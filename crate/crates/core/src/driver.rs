//! Search over initiation intervals.
//!
//! Starting at the MII, each interval is encoded and solved. A model is
//! accepted once its register-file values can be coloured; otherwise the
//! placements responsible for the uncolourable values are excluded with a
//! blocking clause and the same interval is solved again. The interval is
//! abandoned when the solver proves no acceptable model remains, when the
//! per-interval budget runs out, or when the optional retry limit is hit.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use thiserror::Error;

use crate::arch::{CgraSpec, PeId};
use crate::cnf::Lit;
use crate::dfg::{DataflowGraph, NodeId};
use crate::encode::{build_problem_until, EncodeError, EncodeOptions, PlacementVar, VarTable};
use crate::regalloc::{allocate, ColoringFailure};
use crate::sat::{SolveStatus, Solver};
use crate::schedule::{compute_mii, KernelMobilitySchedule, MiiReport, ScheduleError};
use crate::solve::{decode, DecodeError, Mapping};
use crate::time::{Clock, Deadline};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_ii: usize,
    pub per_ii_budget: Option<Duration>,
    pub global_budget: Option<Duration>,
    pub encode: EncodeOptions,
    /// Register-allocation failures tolerated per interval before moving on
    /// without proof; `None` keeps solving until the interval is decided.
    pub ra_retry_limit: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_ii: 50,
            per_ii_budget: None,
            global_budget: Some(Duration::from_secs(4000)),
            encode: EncodeOptions::default(),
            ra_retry_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IiStatus {
    Sat,
    Unsat,
    Timeout,
    /// Every model found failed register allocation.
    RaFail,
}

impl IiStatus {
    pub fn label(self) -> &'static str {
        match self {
            IiStatus::Sat => "sat",
            IiStatus::Unsat => "unsat",
            IiStatus::Timeout => "timeout",
            IiStatus::RaFail => "ra_fail",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub ii: usize,
    pub status: IiStatus,
    pub elapsed: Duration,
    pub vars: u32,
    pub clauses: usize,
    pub ra_failures: usize,
    /// Whether the interval was shown to admit no acceptable mapping (or
    /// produced one).
    pub decided: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapOutcome {
    Mapped,
    ExhaustedIi,
    TimedOut,
}

impl MapOutcome {
    pub fn label(self) -> &'static str {
        match self {
            MapOutcome::Mapped => "mapped",
            MapOutcome::ExhaustedIi => "exhausted_ii",
            MapOutcome::TimedOut => "timed_out",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapResult {
    pub outcome: MapOutcome,
    pub mapping: Option<Mapping>,
    pub mii: MiiReport,
    pub trace: Vec<TraceEntry>,
}

impl MapResult {
    /// True when every interval below the returned one was decided, so the
    /// returned interval is the minimum.
    pub fn proven_minimal(&self) -> bool {
        self.outcome == MapOutcome::Mapped && self.trace.iter().all(|t| t.decided)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("solver model could not be decoded: {0}")]
    Decode(#[from] DecodeError),
}

enum Attempt {
    Mapped(Mapping),
    Failed(IiStatus, bool),
}

pub fn map_loop(
    g: &DataflowGraph,
    spec: &CgraSpec,
    cfg: &SearchConfig,
    clock: &dyn Clock,
) -> Result<MapResult, MapError> {
    let start = clock.now();
    let global = cfg.global_budget.map(|b| start.saturating_add(b));
    let mii = compute_mii(g, spec)?;
    let mut trace = Vec::new();
    for ii in mii.mii.max(1)..=cfg.max_ii {
        let ii_start = clock.now();
        if global.is_some_and(|at| ii_start >= at) {
            return Ok(MapResult {
                outcome: MapOutcome::TimedOut,
                mapping: None,
                mii,
                trace,
            });
        }
        let deadline = match cfg.per_ii_budget {
            Some(b) => Deadline::after(clock, b),
            None => Deadline::none(clock),
        }
        .min(global);
        let mut entry = TraceEntry {
            ii,
            status: IiStatus::Unsat,
            elapsed: Duration::ZERO,
            vars: 0,
            clauses: 0,
            ra_failures: 0,
            decided: true,
        };
        let attempt = match build_problem_until(g, spec, ii, cfg.encode, &deadline) {
            Err(EncodeError::Unroutable { .. }) => Attempt::Failed(IiStatus::Unsat, true),
            Err(e) => return Err(e.into()),
            Ok(None) => Attempt::Failed(IiStatus::Timeout, false),
            Ok(Some(enc)) => {
                entry.vars = enc.problem.num_vars;
                entry.clauses = enc.problem.num_clauses();
                let mut solver = Solver::new(enc.problem.num_vars);
                let mut loaded = true;
                for (i, c) in enc.problem.clauses.iter().enumerate() {
                    if i.is_multiple_of(4096) && deadline.expired() {
                        loaded = false;
                        break;
                    }
                    solver.add_clause(&c.lits);
                }
                if loaded {
                    solve_interval(g, spec, cfg, &enc.vars, &mut solver, &deadline, &mut entry.ra_failures)?
                } else {
                    Attempt::Failed(IiStatus::Timeout, false)
                }
            }
        };
        entry.elapsed = clock.now().saturating_sub(ii_start);
        match attempt {
            Attempt::Mapped(m) => {
                entry.status = IiStatus::Sat;
                trace.push(entry);
                return Ok(MapResult {
                    outcome: MapOutcome::Mapped,
                    mapping: Some(m),
                    mii,
                    trace,
                });
            }
            Attempt::Failed(status, decided) => {
                entry.status = status;
                entry.decided = decided;
                trace.push(entry);
                if status == IiStatus::Timeout && global.is_some_and(|at| clock.now() >= at) {
                    return Ok(MapResult {
                        outcome: MapOutcome::TimedOut,
                        mapping: None,
                        mii,
                        trace,
                    });
                }
            }
        }
    }
    Ok(MapResult {
        outcome: MapOutcome::ExhaustedIi,
        mapping: None,
        mii,
        trace,
    })
}

fn solve_interval(
    g: &DataflowGraph,
    spec: &CgraSpec,
    cfg: &SearchConfig,
    vt: &VarTable,
    solver: &mut Solver,
    deadline: &Deadline<'_>,
    ra_failures: &mut usize,
) -> Result<Attempt, MapError> {
    loop {
        match solver.solve(deadline) {
            SolveStatus::Timeout => return Ok(Attempt::Failed(IiStatus::Timeout, false)),
            SolveStatus::Unsat => {
                let status = if *ra_failures > 0 {
                    IiStatus::RaFail
                } else {
                    IiStatus::Unsat
                };
                return Ok(Attempt::Failed(status, true));
            }
            SolveStatus::Sat => {}
        }
        let mut mapping = decode(&solver.model(), vt)?;
        match allocate(g, &mapping, spec.registers_per_pe()) {
            Ok(regs) => {
                mapping.registers = regs;
                return Ok(Attempt::Mapped(mapping));
            }
            Err(failure) => {
                *ra_failures += 1;
                if cfg.ra_retry_limit.is_some_and(|lim| *ra_failures > lim) {
                    return Ok(Attempt::Failed(IiStatus::RaFail, false));
                }
                let block = blocking_clause(&failure, &mapping, vt);
                if !solver.add_clause(&block) {
                    return Ok(Attempt::Failed(IiStatus::RaFail, true));
                }
            }
        }
    }
}

/// Excludes every model that keeps the producers and maximal-gap consumers
/// of an uncolourable set of values where they are. Such models contain the
/// same values with intervals at least as long, so they fail too.
pub fn blocking_clause(failure: &ColoringFailure, m: &Mapping, vt: &VarTable) -> Vec<Lit> {
    let mut nodes: Vec<NodeId> = failure.core.iter().flat_map(|v| [v.producer, v.witness]).collect();
    nodes.sort();
    nodes.dedup();
    nodes
        .into_iter()
        .map(|n| {
            let p = m.placement_of(n).expect("decoded mapping places every node");
            vt.var_of(&PlacementVar::from(*p))
                .expect("decoded placement has a variable")
                .neg()
        })
        .collect()
}

/// Fraction of PE slots of the kernel that execute an operation.
pub fn utilization(m: &Mapping, spec: &CgraSpec) -> f64 {
    let slots = m.ii * spec.num_pes();
    if slots == 0 {
        return 0.0;
    }
    m.placements.len() as f64 / slots as f64
}

/// One operation of the expanded schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StagedOp {
    pub pe: PeId,
    pub node: NodeId,
    /// Loop iteration the operation belongs to, counted from the first one
    /// entering the pipeline.
    pub iteration: usize,
}

/// Execution of `K` consecutive loop iterations through the pipeline.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StagedSchedule {
    pub prologue: Vec<Vec<StagedOp>>,
    pub kernel: Vec<Vec<StagedOp>>,
    pub epilogue: Vec<Vec<StagedOp>>,
}

impl StagedSchedule {
    pub fn num_ops(&self) -> usize {
        self.prologue
            .iter()
            .chain(&self.kernel)
            .chain(&self.epilogue)
            .map(Vec::len)
            .sum()
    }
}

/// Unrolls the kernel over `K` iterations. A placement with label `it` is
/// stage `K - 1 - it` of its iteration, and iteration `i` runs stage `s` in
/// kernel round `i + s`. Rounds before `K - 1` form the prologue, round
/// `K - 1` is the kernel and later rounds the epilogue. Leading rows of the
/// prologue that no row of the mobility schedule maps to are dropped.
pub fn expand_stages(m: &Mapping, kms: &KernelMobilitySchedule) -> StagedSchedule {
    let ii = kms.ii();
    let k = kms.fold_count();
    let rounds = 2 * k - 1;
    let mut rows: Vec<Vec<StagedOp>> = vec![Vec::new(); rounds * ii];
    for p in &m.placements {
        if p.iter >= k || p.cycle >= ii {
            continue;
        }
        let stage = k - 1 - p.iter;
        for iteration in 0..k {
            rows[(iteration + stage) * ii + p.cycle].push(StagedOp {
                pe: p.pe,
                node: p.node,
                iteration,
            });
        }
    }
    for r in &mut rows {
        r.sort();
    }
    let epilogue = rows.split_off(k * ii);
    let kernel = rows.split_off((k - 1) * ii);
    let mut prologue = rows;
    let skip = kms.offset().min(prologue.len());
    prologue.drain(..skip);
    StagedSchedule {
        prologue,
        kernel,
        epilogue,
    }
}
