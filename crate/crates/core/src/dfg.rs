//! Dataflow graph of a loop body.
//!
//! Edges carry an iteration distance: `0` is an ordinary data dependency
//! inside one iteration, `d >= 1` is a loop-carried back-edge whose value is
//! consumed `d` iterations later. The distance-0 subgraph must be acyclic.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfgNode {
    pub id: NodeId,
    /// Informational label; it has no effect on mapping.
    pub opcode: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DfgEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub distance: u32,
}

impl DfgEdge {
    pub fn new(src: usize, dst: usize, distance: u32) -> Self {
        DfgEdge {
            src: NodeId(src),
            dst: NodeId(dst),
            distance,
        }
    }

    pub fn is_back_edge(&self) -> bool {
        self.distance > 0
    }
}

/// A cycle in the distance-0 subgraph, listed in edge order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub nodes: Vec<NodeId>,
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfgError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node ids must be dense 0..{expected}; found id {found}")]
    NonDenseIds { expected: usize, found: usize },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node {0} has an empty opcode")]
    EmptyOpcode(NodeId),
    #[error("edge {index} references unknown node {node}")]
    UnknownNode { index: usize, node: NodeId },
    #[error("self-loop with distance 0 on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {src} -> {dst} (distance {distance})")]
    DuplicateEdge { src: NodeId, dst: NodeId, distance: u32 },
    #[error("distance-0 edges form a cycle: {0}")]
    Cycle(CycleReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataflowGraph {
    nodes: Vec<DfgNode>,
    edges: Vec<DfgEdge>,
}

impl DataflowGraph {
    /// Builds a fully validated graph, including the acyclicity check of the
    /// forward subgraph.
    pub fn new(nodes: Vec<DfgNode>, edges: Vec<DfgEdge>) -> Result<Self, DfgError> {
        let g = Self::structural(nodes, edges)?;
        validate_dag(&g).map_err(DfgError::Cycle)?;
        Ok(g)
    }

    /// Builds a graph checking everything except acyclicity. Nodes are sorted
    /// by id.
    pub fn structural(mut nodes: Vec<DfgNode>, edges: Vec<DfgEdge>) -> Result<Self, DfgError> {
        if nodes.is_empty() {
            return Err(DfgError::Empty);
        }
        nodes.sort_by_key(|n| n.id);
        for (i, n) in nodes.iter().enumerate() {
            if n.id.0 < i {
                return Err(DfgError::DuplicateNode(n.id));
            }
            if n.id.0 != i {
                return Err(DfgError::NonDenseIds {
                    expected: nodes.len(),
                    found: n.id.0,
                });
            }
            if n.opcode.trim().is_empty() {
                return Err(DfgError::EmptyOpcode(n.id));
            }
        }
        let mut seen = BTreeSet::new();
        for (index, e) in edges.iter().enumerate() {
            for node in [e.src, e.dst] {
                if node.0 >= nodes.len() {
                    return Err(DfgError::UnknownNode { index, node });
                }
            }
            if e.src == e.dst && e.distance == 0 {
                return Err(DfgError::SelfLoop(e.src));
            }
            if !seen.insert(*e) {
                return Err(DfgError::DuplicateEdge {
                    src: e.src,
                    dst: e.dst,
                    distance: e.distance,
                });
            }
        }
        Ok(DataflowGraph { nodes, edges })
    }

    /// Convenience constructor with generated opcodes.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize, u32)]) -> Result<Self, DfgError> {
        let nodes = (0..num_nodes)
            .map(|i| DfgNode {
                id: NodeId(i),
                opcode: String::from("op"),
            })
            .collect();
        let edges = edges.iter().map(|&(s, d, k)| DfgEdge::new(s, d, k)).collect();
        Self::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[DfgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DfgEdge] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn forward_edges(&self) -> impl Iterator<Item = &DfgEdge> + '_ {
        self.edges.iter().filter(|e| e.distance == 0)
    }

    /// Successor lists of the distance-0 subgraph, deduplicated and sorted.
    pub fn forward_successors(&self) -> Vec<Vec<NodeId>> {
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for e in self.forward_edges() {
            succ[e.src.0].push(e.dst);
        }
        for s in &mut succ {
            s.sort();
            s.dedup();
        }
        succ
    }

    pub fn forward_predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut pred = vec![Vec::new(); self.nodes.len()];
        for e in self.forward_edges() {
            pred[e.dst.0].push(e.src);
        }
        for p in &mut pred {
            p.sort();
            p.dedup();
        }
        pred
    }

    /// Topological order of the distance-0 subgraph (Kahn, smallest id first).
    pub fn topological_order(&self) -> Result<Vec<NodeId>, CycleReport> {
        let succ = self.forward_successors();
        let mut indeg = vec![0usize; self.nodes.len()];
        for s in &succ {
            for d in s {
                indeg[d.0] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop_first() {
            order.push(NodeId(n));
            for d in &succ[n] {
                indeg[d.0] -= 1;
                if indeg[d.0] == 0 {
                    ready.insert(d.0);
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            Err(find_cycle(&succ, &indeg))
        }
    }
}

/// Checks that the distance-0 subgraph is acyclic, returning one witnessed
/// cycle otherwise. Back-edges are ignored.
pub fn validate_dag(g: &DataflowGraph) -> Result<(), CycleReport> {
    g.topological_order().map(|_| ())
}

// Nodes left with nonzero in-degree after Kahn's algorithm all lie on or
// downstream of a cycle; walking predecessors inside that set must revisit
// a node.
fn find_cycle(succ: &[Vec<NodeId>], indeg: &[usize]) -> CycleReport {
    let n = succ.len();
    let mut pred_in_rest: Vec<Option<usize>> = vec![None; n];
    for (s, ds) in succ.iter().enumerate() {
        if indeg[s] == 0 {
            continue;
        }
        for d in ds {
            if indeg[d.0] > 0 && pred_in_rest[d.0].is_none() {
                pred_in_rest[d.0] = Some(s);
            }
        }
    }
    let start = (0..n).find(|&i| indeg[i] > 0).expect("cycle must exist");
    let mut pos = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut cur = start;
    while pos[cur] == usize::MAX {
        pos[cur] = walk.len();
        walk.push(cur);
        cur = pred_in_rest[cur].expect("every remaining node has a remaining predecessor");
    }
    let mut cycle: Vec<NodeId> = walk[pos[cur]..].iter().map(|&i| NodeId(i)).collect();
    cycle.reverse();
    // rotate so the smallest id comes first
    let min_at = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, n)| **n)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(min_at);
    CycleReport { nodes: cycle }
}
