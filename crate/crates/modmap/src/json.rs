//! JSON documents for graphs, arrays and mappings.

use modmap_core::arch::{ArchError, CgraSpec, PeId, Topology};
use modmap_core::dfg::{DataflowGraph, DfgEdge, DfgError, DfgNode, NodeId};
use modmap_core::solve::{Mapping, Placement, RegisterAssignment};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Dfg(#[from] DfgError),
    #[error("invalid array: {0}")]
    Arch(#[from] ArchError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: usize,
    op: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: usize,
    dst: usize,
    #[serde(default)]
    distance: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DfgDoc {
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

pub fn load_dfg(text: &str) -> Result<DataflowGraph, FormatError> {
    let doc: DfgDoc = serde_json::from_str(text)?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| DfgNode {
            id: NodeId(n.id),
            opcode: n.op,
        })
        .collect();
    let edges = doc
        .edges
        .iter()
        .map(|e| DfgEdge::new(e.src, e.dst, e.distance))
        .collect();
    Ok(DataflowGraph::new(nodes, edges)?)
}

/// Canonical form: nodes by id, edges in stored order.
pub fn dfg_to_json(g: &DataflowGraph) -> String {
    let doc = DfgDoc {
        nodes: g
            .nodes()
            .iter()
            .map(|n| NodeDoc {
                id: n.id.0,
                op: n.opcode.clone(),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                src: e.src.0,
                dst: e.dst.0,
                distance: e.distance,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serialises")
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TopologyDoc {
    Mesh,
    Torus,
}

impl From<TopologyDoc> for Topology {
    fn from(t: TopologyDoc) -> Self {
        match t {
            TopologyDoc::Mesh => Topology::Mesh,
            TopologyDoc::Torus => Topology::Torus,
        }
    }
}

fn default_topology() -> TopologyDoc {
    TopologyDoc::Torus
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchDoc {
    rows: usize,
    cols: usize,
    #[serde(default = "default_topology")]
    topology: TopologyDoc,
    registers_per_pe: usize,
}

pub fn load_arch(text: &str) -> Result<CgraSpec, FormatError> {
    let doc: ArchDoc = serde_json::from_str(text)?;
    Ok(CgraSpec::new(
        doc.rows,
        doc.cols,
        doc.topology.into(),
        doc.registers_per_pe,
    )?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementDoc {
    node: usize,
    pe: usize,
    cycle: usize,
    iter: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterDoc {
    pe: usize,
    producer: usize,
    reg: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metrics {
    pub utilization: f64,
    pub mii: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingDoc {
    ii: usize,
    placements: Vec<PlacementDoc>,
    #[serde(default)]
    registers: Vec<RegisterDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metrics: Option<Metrics>,
}

/// Placements are kept in file order so that malformed mappings reach the
/// validator unchanged.
pub fn load_mapping(text: &str) -> Result<Mapping, FormatError> {
    let doc: MappingDoc = serde_json::from_str(text)?;
    Ok(Mapping {
        ii: doc.ii,
        placements: doc
            .placements
            .iter()
            .map(|p| Placement {
                node: NodeId(p.node),
                pe: PeId(p.pe),
                cycle: p.cycle,
                iter: p.iter,
            })
            .collect(),
        registers: doc
            .registers
            .iter()
            .map(|r| RegisterAssignment {
                pe: PeId(r.pe),
                producer: NodeId(r.producer),
                reg: r.reg,
            })
            .collect(),
    })
}

/// Rounds to three decimals, the precision used in mapping files.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub fn mapping_to_json(m: &Mapping, metrics: Option<Metrics>) -> String {
    let doc = MappingDoc {
        ii: m.ii,
        placements: m
            .placements
            .iter()
            .map(|p| PlacementDoc {
                node: p.node.0,
                pe: p.pe.0,
                cycle: p.cycle,
                iter: p.iter,
            })
            .collect(),
        registers: m
            .registers
            .iter()
            .map(|r| RegisterDoc {
                pe: r.pe.0,
                producer: r.producer.0,
                reg: r.reg,
            })
            .collect(),
        metrics: metrics.map(|mut x| {
            x.utilization = round3(x.utilization);
            x
        }),
    };
    serde_json::to_string_pretty(&doc).expect("mapping serialises")
}
