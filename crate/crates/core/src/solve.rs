//! Mappings and their recovery from satisfying assignments.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::arch::PeId;
use crate::cnf::{CnfProblem, Lit};
use crate::dfg::NodeId;
use crate::encode::{PlacementVar, VarTable};

pub use crate::sat::{solve, SolveError, SolveOutcome, SolveStats, SolveStatus, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub node: NodeId,
    pub pe: PeId,
    pub cycle: usize,
    pub iter: usize,
}

impl From<PlacementVar> for Placement {
    fn from(p: PlacementVar) -> Self {
        Placement {
            node: p.node,
            pe: p.pe,
            cycle: p.cycle,
            iter: p.iter,
        }
    }
}

impl From<Placement> for PlacementVar {
    fn from(p: Placement) -> Self {
        PlacementVar {
            node: p.node,
            pe: p.pe,
            cycle: p.cycle,
            iter: p.iter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegisterAssignment {
    pub pe: PeId,
    pub producer: NodeId,
    pub reg: usize,
}

/// A kernel of length `ii`. Placements are kept as given so that malformed
/// mappings can still be represented and rejected by the validator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mapping {
    pub ii: usize,
    pub placements: Vec<Placement>,
    pub registers: Vec<RegisterAssignment>,
}

impl Mapping {
    pub fn new(ii: usize, mut placements: Vec<Placement>) -> Self {
        placements.sort();
        Mapping {
            ii,
            placements,
            registers: Vec::new(),
        }
    }

    /// First placement recorded for `node`.
    pub fn placement_of(&self, node: NodeId) -> Option<&Placement> {
        self.placements.iter().find(|p| p.node == node)
    }

    /// Node occupying `(pe, cycle)`, if any.
    pub fn node_at(&self, pe: PeId, cycle: usize) -> Option<NodeId> {
        self.placements
            .iter()
            .find(|p| p.pe == pe && p.cycle == cycle)
            .map(|p| p.node)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("model has {got} values, expected {expected}")]
    ModelLength { expected: usize, got: usize },
    #[error("no placement variable of node {0} is true")]
    Unplaced(NodeId),
    #[error("node {0} has more than one true placement variable")]
    MultiplyPlaced(NodeId),
}

/// Reads the unique true placement variable of every node.
pub fn decode(model: &[bool], vt: &VarTable) -> Result<Mapping, DecodeError> {
    if model.len() < vt.total_vars() as usize {
        return Err(DecodeError::ModelLength {
            expected: vt.total_vars() as usize,
            got: model.len(),
        });
    }
    let mut placements = Vec::with_capacity(vt.num_nodes());
    for n in 0..vt.num_nodes() {
        let node = NodeId(n);
        let mut chosen = vt.literals_of(node).iter().filter(|v| v.pos().eval(model));
        let v = chosen.next().ok_or(DecodeError::Unplaced(node))?;
        if chosen.next().is_some() {
            return Err(DecodeError::MultiplyPlaced(node));
        }
        placements.push(Placement::from(*vt.placement(*v).expect("placement variable")));
    }
    Ok(Mapping::new(vt.ii(), placements))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: &'static str },
    #[error("line {line}: variable {var} out of range 1..={max}")]
    OutOfRange { line: usize, var: i64, max: u32 },
    #[error("variable {0} assigned twice with different values")]
    Conflicting(u32),
    #[error("variable {0} has no value")]
    Missing(u32),
    #[error("solver reported UNSATISFIABLE")]
    Unsatisfiable,
    #[error("model violates clause {0}")]
    ViolatesClause(usize),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Parses solver output in the usual competition format: optional `c`
/// comments, an optional `s` status line and `v` value lines terminated by
/// `0`. Bare lines of integers are accepted as values too. Every variable in
/// `1..=num_vars` must be given a value.
pub fn parse_model(text: &str, num_vars: u32) -> Result<Vec<bool>, ModelError> {
    let mut values: Vec<Option<bool>> = vec![None; num_vars as usize];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('c') {
            continue;
        }
        if let Some(status) = l.strip_prefix('s') {
            match status.trim() {
                "SATISFIABLE" => continue,
                "UNSATISFIABLE" => return Err(ModelError::Unsatisfiable),
                _ => {
                    return Err(ModelError::Syntax {
                        line,
                        msg: "unknown status",
                    })
                }
            }
        }
        let body = l.strip_prefix('v').unwrap_or(l);
        for tok in body.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| ModelError::Syntax {
                line,
                msg: "expected an integer",
            })?;
            if x == 0 {
                continue;
            }
            let lit = Lit::from_dimacs(x)
                .filter(|l| l.var().get() <= num_vars)
                .ok_or(ModelError::OutOfRange {
                    line,
                    var: x,
                    max: num_vars,
                })?;
            let slot = &mut values[lit.var().get() as usize - 1];
            let val = !lit.is_negated();
            match *slot {
                Some(prev) if prev != val => return Err(ModelError::Conflicting(lit.var().get())),
                _ => *slot = Some(val),
            }
        }
    }
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(ModelError::Missing(i as u32 + 1)))
        .collect()
}

/// Checks a model produced outside the embedded solver against `problem`
/// and decodes it.
pub fn import_external_model(text: &str, problem: &CnfProblem, vt: &VarTable) -> Result<Mapping, ModelError> {
    let model = parse_model(text, problem.num_vars)?;
    if let Some(i) = problem.first_violated(&model) {
        return Err(ModelError::ViolatesClause(i));
    }
    Ok(decode(&model, vt)?)
}
