//! Variables, literals and clause lists.
//!
//! Variables are 1-based as in DIMACS. A literal is stored as
//! `2 * (var - 1) + negated`, which is also the index the solver uses for
//! watch lists.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Not;

use crate::dfg::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// `index` is 1-based.
    pub fn new(index: u32) -> Self {
        assert!(index > 0, "variables are 1-based");
        Var(index)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub(crate) fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit(((var.0 - 1) << 1) | negated as u32)
    }

    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// `None` for 0 or values that do not fit a variable index.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        let idx = u32::try_from(value.unsigned_abs()).ok()?;
        if idx == 0 || idx > u32::MAX / 2 {
            return None;
        }
        Some(Lit::new(Var(idx), value < 0))
    }

    /// Truth value under a 0-based assignment vector.
    pub fn eval(self, model: &[bool]) -> bool {
        model[self.var().slot()] != self.is_negated()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Which constraint family produced a clause. The derived order is the
/// emission order of DIMACS exports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// At-least-one placement of a node.
    C1ExactOne { node: NodeId },
    /// At-most-one placement of a node.
    C1Pair { node: NodeId },
    /// Two nodes on the same PE in the same kernel cycle.
    C2,
    /// Disjunction of routing terms of one dependency.
    C3Edge { src: NodeId, dst: NodeId },
    /// Tseitin definitions of routing terms.
    Aux,
    /// Clauses added by the search loop to exclude register-infeasible
    /// models.
    Blocking,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::C1ExactOne { .. } => "C1-exact-one",
            Provenance::C1Pair { .. } => "C1-pair",
            Provenance::C2 => "C2",
            Provenance::C3Edge { .. } => "C3-edge",
            Provenance::Aux => "aux",
            Provenance::Blocking => "blocking",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub lits: Vec<Lit>,
    pub tag: Provenance,
}

impl Clause {
    pub fn new(mut lits: Vec<Lit>, tag: Provenance) -> Self {
        lits.sort();
        lits.dedup();
        Clause { lits, tag }
    }

    pub fn is_satisfied(&self, model: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(model))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfProblem {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl CnfProblem {
    pub fn new(num_vars: u32) -> Self {
        CnfProblem {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Sorts clauses by provenance, then lexicographically by literal.
    pub fn canonicalize(&mut self) {
        self.clauses
            .sort_unstable_by(|a, b| a.tag.cmp(&b.tag).then_with(|| a.lits.cmp(&b.lits)));
    }

    /// Index of the first clause not satisfied by `model`, if any.
    pub fn first_violated(&self, model: &[bool]) -> Option<usize> {
        self.clauses.iter().position(|c| !c.is_satisfied(model))
    }

    /// Checks variable indices and clause non-emptiness.
    pub fn well_formed(&self) -> Result<(), MalformedClause> {
        for (index, c) in self.clauses.iter().enumerate() {
            if c.lits.is_empty() {
                return Err(MalformedClause { index, var: 0 });
            }
            if let Some(l) = c.lits.iter().find(|l| l.var().get() > self.num_vars) {
                return Err(MalformedClause {
                    index,
                    var: l.var().get(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MalformedClause {
    pub index: usize,
    /// Offending variable, or 0 for an empty clause.
    pub var: u32,
}
