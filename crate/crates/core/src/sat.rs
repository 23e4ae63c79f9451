//! Embedded CDCL solver.
//!
//! Two-watched-literal propagation with blockers, first-UIP clause learning
//! with local minimisation, VSIDS decisions with phase saving, Luby restarts
//! and activity-based learnt clause deletion. Ties in the decision heap are
//! broken towards the lowest variable index, so on a fresh problem the first
//! decisions follow variable numbering.
//!
//! The search polls its [`Deadline`] on every conflict and every 256
//! decisions.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use thiserror::Error;

use crate::cnf::{CnfProblem, Lit, MalformedClause, Var};
use crate::time::Deadline;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present iff `status` is `Sat`; index `i` holds variable `i + 1`.
    pub model: Option<Vec<bool>>,
    pub stats: SolveStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("clause {} is malformed (variable {})", .0.index, .0.var)]
    Malformed(MalformedClause),
    #[error("solver model violates clause {0}")]
    ModelCheck(usize),
}

/// Decides `problem` within `deadline`. Every returned model has been checked
/// against all clauses.
pub fn solve(problem: &CnfProblem, deadline: &Deadline<'_>) -> Result<SolveOutcome, SolveError> {
    problem.well_formed().map_err(SolveError::Malformed)?;
    let start = deadline.clock().now();
    let mut solver = Solver::new(problem.num_vars);
    for c in &problem.clauses {
        solver.add_clause(&c.lits);
    }
    let status = solver.solve(deadline);
    let mut stats = solver.stats();
    stats.elapsed = deadline.clock().now().saturating_sub(start);
    let model = match status {
        SolveStatus::Sat => {
            let m = solver.model();
            if let Some(i) = problem.first_violated(&m) {
                return Err(SolveError::ModelCheck(i));
            }
            Some(m)
        }
        _ => None,
    };
    Ok(SolveOutcome { status, model, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Clone, Copy, Debug)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

const NO_REASON: u32 = u32::MAX;

/// Incremental CDCL solver. Clauses may be added between `solve` calls.
#[derive(Clone, Debug)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    num_learnts: usize,
    max_learnts: f64,
    stats: SolveStats,
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        let mut heap = VarHeap::new(n);
        let activity = vec![0.0; n];
        for v in 0..n {
            heap.insert(v, &activity);
        }
        Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap,
            phase: vec![false; n],
            seen: vec![false; n],
            ok: true,
            num_learnts: 0,
            max_learnts: 0.0,
            stats: SolveStats::default(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().slot()] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l.is_negated() => Value::False,
            Value::False if l.is_negated() => Value::True,
            v => v,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at decision level 0. Returns `false` once the clause set
    /// is known to be unsatisfiable. Panics on variables beyond `num_vars`.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.backtrack(0);
        let mut c: Vec<Lit> = lits.to_vec();
        for l in &c {
            assert!((l.var().get() as usize) <= self.num_vars, "literal {l} out of range");
        }
        c.sort();
        c.dedup();
        // tautology or already satisfied at level 0
        if c.windows(2).any(|w| w[0] == !w[1]) || c.iter().any(|&l| self.value(l) == Value::True) {
            return true;
        }
        c.retain(|&l| self.value(l) != Value::False);
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watch {
            clause: idx,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watch {
            clause: idx,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.num_learnts += 1;
        }
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var().slot();
        debug_assert_eq!(self.assigns[v], Value::Unassigned);
        self.assigns[v] = if l.is_negated() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = core::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                let kept = Watch {
                    clause: w.clause,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == Value::True {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let cand = self.clauses[ci].lits[k];
                    if self.value(cand) != Value::False {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[cand.code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.clause);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, ci: usize) {
        let c = &mut self.clauses[ci];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::new(Var::new(1), false)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let ci = confl as usize;
            self.bump_clause(ci);
            let start = usize::from(p.is_some());
            let len = self.clauses[ci].lits.len();
            for k in start..len {
                let q = self.clauses[ci].lits[k];
                let v = q.var().slot();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().slot()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            let v = lit.var().slot();
            confl = self.reason[v];
            self.seen[v] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.expect("conflict analysis visits at least one literal");

        // local minimisation: drop literals implied by other learnt literals
        let mut out = Vec::with_capacity(learnt.len());
        out.push(learnt[0]);
        for &l in &learnt[1..] {
            let r = self.reason[l.var().slot()];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let v = q.var().slot();
                    self.seen[v] || self.level[v] == 0
                });
            if !redundant {
                out.push(l);
            }
        }
        for l in &learnt[1..] {
            self.seen[l.var().slot()] = false;
        }

        let mut back = 0;
        if out.len() > 1 {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var().slot()] > self.level[out[max_i].var().slot()] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            back = self.level[out[1].var().slot()];
        }
        (out, back)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().slot();
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = NO_REASON;
            self.phase[v] = !l.is_negated();
            if !self.heap.contains(v) {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == Value::Unassigned {
                return Some(Lit::new(Var::new(v as u32 + 1), !self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, ci: usize) -> bool {
        let first = self.clauses[ci].lits[0];
        let v = first.var().slot();
        self.reason[v] == ci as u32 && self.value(first) == Value::True
    }

    fn reduce_db(&mut self) {
        let mut learnts: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2
            })
            .collect();
        learnts.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        let half = learnts.len() / 2;
        for &ci in &learnts[..half] {
            if !self.locked(ci) {
                self.clauses[ci].deleted = true;
                self.clauses[ci].lits = Vec::new();
                self.num_learnts -= 1;
            }
        }
    }

    /// Runs the search. After `Sat`, [`model`](Self::model) holds the
    /// assignment until the next mutation.
    pub fn solve(&mut self, deadline: &Deadline<'_>) -> SolveStatus {
        if !self.ok {
            return SolveStatus::Unsat;
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveStatus::Unsat;
        }
        if deadline.expired() {
            return SolveStatus::Timeout;
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        }
        let mut restart_index = 0u32;
        loop {
            let budget = 100 * luby(restart_index);
            restart_index += 1;
            match self.search(budget, deadline) {
                Some(status) => return status,
                None => {
                    self.stats.restarts += 1;
                    self.backtrack(0);
                }
            }
        }
    }

    fn search(&mut self, conflict_budget: u64, deadline: &Deadline<'_>) -> Option<SolveStatus> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveStatus::Unsat);
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt, true);
                    self.bump_clause(ci as usize);
                    self.enqueue(first, ci);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if deadline.expired() {
                    self.backtrack(0);
                    return Some(SolveStatus::Timeout);
                }
            } else {
                if conflicts >= conflict_budget {
                    return None;
                }
                if self.num_learnts as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                match self.pick_branch() {
                    None => return Some(SolveStatus::Sat),
                    Some(l) => {
                        self.stats.decisions += 1;
                        if self.stats.decisions.is_multiple_of(256) && deadline.expired() {
                            self.backtrack(0);
                            return Some(SolveStatus::Timeout);
                        }
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }

    /// Current assignment; unassigned variables read as `false`.
    pub fn model(&self) -> Vec<bool> {
        self.assigns.iter().map(|&v| v == Value::True).collect()
    }
}

fn luby(i: u32) -> u64 {
    // position in the sequence 1 1 2 1 1 2 4 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = u64::from(i);
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

/// Max-heap of variables keyed by activity, ties to the lower index.
#[derive(Clone, Debug)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![NOT_IN_HEAP; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn better(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        self.pos[v] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(self.heap[r], self.heap[l], act) {
                r
            } else {
                l
            };
            if !Self::better(self.heap[child], v, act) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{Clause, Provenance};
    use crate::time::FrozenClock;
    use proptest::prelude::*;

    fn problem(num_vars: u32, clauses: &[&[i64]]) -> CnfProblem {
        let mut p = CnfProblem::new(num_vars);
        for c in clauses {
            let lits = c.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect();
            p.push(Clause::new(lits, Provenance::Aux));
        }
        p
    }

    fn run(p: &CnfProblem) -> SolveOutcome {
        solve(p, &Deadline::none(&FrozenClock)).unwrap()
    }

    fn brute_force_sat(p: &CnfProblem) -> bool {
        let n = p.num_vars as usize;
        (0u64..1 << n).any(|bits| {
            let m: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            p.first_violated(&m).is_none()
        })
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn empty_problem_is_sat() {
        let out = run(&CnfProblem::new(0));
        assert_eq!(out.status, SolveStatus::Sat);
        assert_eq!(out.model, Some(vec![]));
    }

    #[test]
    fn contradiction_is_unsat() {
        let out = run(&problem(1, &[&[1], &[-1]]));
        assert_eq!(out.status, SolveStatus::Unsat);
        assert!(out.model.is_none());
    }

    #[test]
    fn pigeonhole_four_into_three_is_unsat() {
        // p(i,h) = 3*i + h + 1
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for i in 0..4 {
            clauses.push((0..3).map(|h| 3 * i + h + 1).collect());
        }
        for h in 0..3 {
            for i in 0..4 {
                for j in i + 1..4 {
                    clauses.push(vec![-(3 * i + h + 1), -(3 * j + h + 1)]);
                }
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let out = run(&problem(12, &refs));
        assert_eq!(out.status, SolveStatus::Unsat);
        assert!(out.stats.conflicts > 0);
    }

    #[test]
    fn malformed_problem_rejected() {
        let mut p = problem(1, &[&[1]]);
        p.push(Clause::new(vec![Lit::from_dimacs(5).unwrap()], Provenance::Aux));
        assert!(matches!(
            solve(&p, &Deadline::none(&FrozenClock)),
            Err(SolveError::Malformed(_))
        ));
    }

    #[test]
    fn incremental_clauses() {
        let mut s = Solver::new(2);
        s.add_clause(&[Var::new(1).pos(), Var::new(2).pos()]);
        assert_eq!(s.solve(&Deadline::none(&FrozenClock)), SolveStatus::Sat);
        s.add_clause(&[Var::new(1).neg()]);
        assert_eq!(s.solve(&Deadline::none(&FrozenClock)), SolveStatus::Sat);
        assert_eq!(s.model(), vec![false, true]);
        s.add_clause(&[Var::new(2).neg()]);
        assert_eq!(s.solve(&Deadline::none(&FrozenClock)), SolveStatus::Unsat);
    }

    struct Ticking(core::cell::Cell<u64>);
    impl crate::time::Clock for Ticking {
        fn now(&self) -> Duration {
            let t = self.0.get() + 1;
            self.0.set(t);
            Duration::from_millis(t)
        }
    }

    #[test]
    fn expired_deadline_times_out() {
        // pigeonhole 9 into 8 needs many conflicts
        let holes = 8i64;
        let pigeons = 9i64;
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        for i in 0..pigeons {
            clauses.push((0..holes).map(|h| holes * i + h + 1).collect());
        }
        for h in 0..holes {
            for i in 0..pigeons {
                for j in i + 1..pigeons {
                    clauses.push(vec![-(holes * i + h + 1), -(holes * j + h + 1)]);
                }
            }
        }
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let p = problem((holes * pigeons) as u32, &refs);
        let clock = Ticking(core::cell::Cell::new(0));
        let out = solve(&p, &Deadline::after(&clock, Duration::from_millis(20))).unwrap();
        assert_eq!(out.status, SolveStatus::Timeout);
        assert!(out.model.is_none());
    }

    fn arb_cnf() -> impl Strategy<Value = CnfProblem> {
        (1u32..=10).prop_flat_map(|n| {
            let lit = (1i64..=n as i64, any::<bool>()).prop_map(|(v, s)| if s { -v } else { v });
            proptest::collection::vec(proptest::collection::vec(lit, 1..=4), 0..=45).prop_map(move |cs| {
                let mut p = CnfProblem::new(n);
                for c in cs {
                    p.push(Clause::new(
                        c.into_iter().map(|x| Lit::from_dimacs(x).unwrap()).collect(),
                        Provenance::Aux,
                    ));
                }
                p
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_truth_table(p in arb_cnf()) {
            let out = run(&p);
            let expected = brute_force_sat(&p);
            prop_assert_eq!(out.status == SolveStatus::Sat, expected);
            if let Some(m) = out.model {
                prop_assert!(p.first_violated(&m).is_none());
            }
        }

        #[test]
        fn deterministic(p in arb_cnf()) {
            prop_assert_eq!(run(&p), run(&p));
        }
    }
}
