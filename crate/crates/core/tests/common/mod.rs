#![allow(dead_code)]

use modmap_core::arch::{CgraSpec, PeId, Topology};
use modmap_core::dfg::{DataflowGraph, NodeId};
use modmap_core::solve::{Mapping, Placement};
use proptest::prelude::*;

/// Forward edges of the worked example plus the back-edge 7 -> 5.
pub const EXAMPLE_EDGES: &[(usize, usize, u32)] = &[
    (2, 4, 0),
    (4, 5, 0),
    (5, 7, 0),
    (7, 8, 0),
    (3, 6, 0),
    (6, 7, 0),
    (0, 9, 0),
    (9, 10, 0),
    (1, 8, 0),
    (7, 5, 1),
];

pub fn example() -> DataflowGraph {
    DataflowGraph::from_edges(11, EXAMPLE_EDGES).unwrap()
}

pub fn torus_2x2() -> CgraSpec {
    CgraSpec::new(2, 2, Topology::Torus, 4).unwrap()
}

/// `(node, pe, cycle, iter)` of the reference satisfying model.
pub const EXAMPLE_MODEL: &[(usize, usize, usize, usize)] = &[
    (10, 1, 0, 0),
    (5, 2, 0, 0),
    (6, 3, 0, 0),
    (1, 0, 1, 0),
    (0, 1, 1, 1),
    (7, 2, 1, 0),
    (2, 3, 1, 1),
    (8, 0, 2, 0),
    (9, 1, 2, 1),
    (3, 2, 2, 1),
    (4, 3, 2, 1),
];

pub fn mapping(ii: usize, triples: &[(usize, usize, usize, usize)]) -> Mapping {
    Mapping::new(
        ii,
        triples
            .iter()
            .map(|&(n, pe, cycle, iter)| Placement {
                node: NodeId(n),
                pe: PeId(pe),
                cycle,
                iter,
            })
            .collect(),
    )
}

pub fn example_mapping() -> Mapping {
    mapping(3, EXAMPLE_MODEL)
}

/// Random loop bodies: forward edges go from lower to higher ids, back-edges
/// from a node to itself or an earlier one with distance 1 or 2.
pub fn arb_graph(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = DataflowGraph> {
    (3..=max_nodes).prop_flat_map(move |n| {
        let fwd = (0..n - 1)
            .prop_flat_map(move |a| (Just(a), a + 1..n))
            .prop_map(|(a, b)| (a, b, 0u32));
        let back = (0..n)
            .prop_flat_map(move |a| (Just(a), 0..=a, 1u32..=2))
            .prop_map(|(a, b, d)| (a, b, d));
        (
            Just(n),
            proptest::collection::vec(fwd, 1..=max_edges),
            proptest::collection::vec(back, 0..=2),
        )
            .prop_map(|(n, mut fwd, back)| {
                fwd.extend(back);
                fwd.sort();
                fwd.dedup();
                DataflowGraph::from_edges(n, &fwd).unwrap()
            })
    })
}

pub fn arb_spec(max_side: usize) -> impl Strategy<Value = CgraSpec> {
    (
        1..=max_side,
        1..=max_side,
        any::<bool>(),
        prop_oneof![Just(1usize), Just(2), Just(4)],
    )
        .prop_map(|(r, c, torus, k)| {
            let t = if torus { Topology::Torus } else { Topology::Mesh };
            CgraSpec::new(r, c, t, k).unwrap()
        })
}
