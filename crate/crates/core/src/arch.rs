//! CGRA array model: dimensions, interconnect and register file size.
//!
//! PEs are numbered row-major. A mesh connects each PE to its four nearest
//! neighbours without wrap-around; a torus wraps rows and columns. When a
//! dimension has length 2 the two wrap directions reach the same PE, so the
//! neighbour set is deduplicated.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeId(pub usize);

impl PeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Topology {
    Mesh,
    #[default]
    Torus,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Mesh => "mesh",
            Topology::Torus => "torus",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArchError {
    #[error("array dimensions must be positive (got {rows}x{cols})")]
    EmptyArray { rows: usize, cols: usize },
    #[error("registers_per_pe must be at least 1")]
    NoRegisters,
    #[error("PE {pe} is outside a {rows}x{cols} array")]
    InvalidPe { pe: PeId, rows: usize, cols: usize },
}

/// Link between two PEs.
pub const SAME_PE: u8 = 1;
pub const NEIGHBOR: u8 = 2;
pub const DISCONNECTED: u8 = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CgraSpec {
    rows: usize,
    cols: usize,
    topology: Topology,
    registers_per_pe: usize,
    // row-major adjacency, includes self
    adjacency: Vec<Vec<PeId>>,
}

impl CgraSpec {
    pub fn new(rows: usize, cols: usize, topology: Topology, registers_per_pe: usize) -> Result<Self, ArchError> {
        if rows == 0 || cols == 0 {
            return Err(ArchError::EmptyArray { rows, cols });
        }
        if registers_per_pe == 0 {
            return Err(ArchError::NoRegisters);
        }
        let adjacency = (0..rows * cols).map(|p| link_set(rows, cols, topology, p)).collect();
        Ok(CgraSpec {
            rows,
            cols,
            topology,
            registers_per_pe,
            adjacency,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn registers_per_pe(&self) -> usize {
        self.registers_per_pe
    }

    pub fn num_pes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn pes(&self) -> impl Iterator<Item = PeId> {
        (0..self.num_pes()).map(PeId)
    }

    pub fn coords(&self, pe: PeId) -> (usize, usize) {
        (pe.0 / self.cols, pe.0 % self.cols)
    }

    /// Same array with a different topology.
    pub fn with_topology(&self, topology: Topology) -> Self {
        Self::new(self.rows, self.cols, topology, self.registers_per_pe).expect("dimensions already validated")
    }

    pub fn with_registers(&self, registers_per_pe: usize) -> Result<Self, ArchError> {
        Self::new(self.rows, self.cols, self.topology, registers_per_pe)
    }

    fn check(&self, pe: PeId) -> Result<(), ArchError> {
        if pe.0 < self.num_pes() {
            Ok(())
        } else {
            Err(ArchError::InvalidPe {
                pe,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// `1` when both PEs coincide, `2` when they are directly connected, `0`
    /// otherwise.
    pub fn neighbor_value(&self, a: PeId, b: PeId) -> Result<u8, ArchError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.link(a, b))
    }

    /// Unchecked variant of [`neighbor_value`](Self::neighbor_value) for hot
    /// loops over valid PEs.
    pub fn link(&self, a: PeId, b: PeId) -> u8 {
        if a == b {
            SAME_PE
        } else if self.adjacency[a.0].binary_search(&b).is_ok() {
            NEIGHBOR
        } else {
            DISCONNECTED
        }
    }

    pub fn is_reachable(&self, a: PeId, b: PeId) -> bool {
        self.link(a, b) != DISCONNECTED
    }

    /// PEs reachable from `pe` in one hop, `pe` itself included, sorted.
    pub fn neighbors_of(&self, pe: PeId) -> Result<&[PeId], ArchError> {
        self.check(pe)?;
        Ok(&self.adjacency[pe.0])
    }
}

fn link_set(rows: usize, cols: usize, topology: Topology, p: usize) -> Vec<PeId> {
    let (r, c) = (p / cols, p % cols);
    let mut out = Vec::with_capacity(5);
    out.push(PeId(p));
    let mut push = |rr: usize, cc: usize| out.push(PeId(rr * cols + cc));
    match topology {
        Topology::Mesh => {
            if r > 0 {
                push(r - 1, c);
            }
            if r + 1 < rows {
                push(r + 1, c);
            }
            if c > 0 {
                push(r, c - 1);
            }
            if c + 1 < cols {
                push(r, c + 1);
            }
        }
        Topology::Torus => {
            push((r + rows - 1) % rows, c);
            push((r + 1) % rows, c);
            push(r, (c + cols - 1) % cols);
            push(r, (c + 1) % cols);
        }
    }
    out.sort();
    out.dedup();
    out
}
