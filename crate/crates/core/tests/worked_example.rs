mod common;

use common::*;
use modmap_core::arch::{PeId, Topology};
use modmap_core::cnf::Provenance;
use modmap_core::dfg::NodeId;
use modmap_core::driver::{expand_stages, map_loop, utilization, IiStatus, MapOutcome, SearchConfig};
use modmap_core::encode::{build_problem, EncodeOptions, PlacementVar};
use modmap_core::schedule::{alap, asap, build_kms, compute_mii, mobility_schedule};
use modmap_core::solve::{decode, Placement};
use modmap_core::time::FrozenClock;
use modmap_core::verify::{validate, ViolationKind};

fn ids(rows: &[Vec<NodeId>]) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|r| {
            let mut v: Vec<usize> = r.iter().map(|n| n.0).collect();
            v.sort();
            v
        })
        .collect()
}

#[test]
fn schedules_match_reference_tables() {
    let g = example();
    let a = asap(&g).unwrap();
    assert_eq!(
        ids(a.rows()),
        vec![vec![0, 1, 2, 3], vec![4, 6, 9], vec![5, 10], vec![7], vec![8]]
    );
    let l = alap(&g, a.len()).unwrap();
    assert_eq!(
        ids(l.rows()),
        vec![vec![2], vec![3, 4], vec![0, 5, 6], vec![1, 7, 9], vec![8, 10]]
    );
    let ms = mobility_schedule(&g).unwrap();
    assert_eq!(
        ids(ms.rows()),
        vec![
            vec![0, 1, 2, 3],
            vec![0, 1, 3, 4, 6, 9],
            vec![0, 1, 5, 6, 9, 10],
            vec![1, 7, 9, 10],
            vec![8, 10]
        ]
    );
}

#[test]
fn kernel_mobility_schedule_at_three() {
    let kms = build_kms(&mobility_schedule(&example()).unwrap(), 3).unwrap();
    assert_eq!(kms.fold_count(), 2);
    let labelled = |c: usize| -> Vec<(usize, usize)> { kms.slots()[c].iter().map(|&(n, it)| (n.0, it)).collect() };
    assert_eq!(labelled(0), vec![(0, 0), (1, 0), (5, 0), (6, 0), (9, 0), (10, 0)]);
    assert_eq!(
        labelled(1),
        vec![(1, 0), (7, 0), (9, 0), (10, 0), (0, 1), (1, 1), (2, 1), (3, 1)]
    );
    assert_eq!(
        labelled(2),
        vec![(8, 0), (10, 0), (0, 1), (1, 1), (3, 1), (4, 1), (6, 1), (9, 1)]
    );
}

#[test]
fn mii_on_two_by_two() {
    let r = compute_mii(&example(), &torus_2x2()).unwrap();
    assert_eq!((r.res_ii, r.rec_ii, r.mii), (3, 2, 3));
}

#[test]
fn reference_model_satisfies_every_clause() {
    let g = example();
    let spec = torus_2x2();
    let enc = build_problem(&g, &spec, 3, EncodeOptions::default()).unwrap();
    let chosen = EXAMPLE_MODEL.iter().map(|&(n, pe, cycle, iter)| PlacementVar {
        node: NodeId(n),
        pe: PeId(pe),
        cycle,
        iter,
    });
    let model = enc.vars.model_for(chosen).unwrap();
    assert_eq!(enc.problem.first_violated(&model), None);
    let m = decode(&model, &enc.vars).unwrap();
    assert_eq!(m, example_mapping());
    assert_eq!(validate(&g, &spec, &m), Ok(()));
}

#[test]
fn every_clause_family_is_present() {
    let enc = build_problem(&example(), &torus_2x2(), 3, EncodeOptions::default()).unwrap();
    let has = |f: &dyn Fn(&Provenance) -> bool| enc.problem.clauses.iter().any(|c| f(&c.tag));
    assert!(has(&|t| matches!(t, Provenance::C1ExactOne { .. })));
    assert!(has(&|t| matches!(t, Provenance::C1Pair { .. })));
    assert!(has(&|t| matches!(t, Provenance::C2)));
    let c3 = enc
        .problem
        .clauses
        .iter()
        .filter(|c| matches!(c.tag, Provenance::C3Edge { .. }))
        .count();
    assert_eq!(c3, EXAMPLE_EDGES.len());
}

#[test]
fn maps_at_mii() {
    let g = example();
    let spec = torus_2x2();
    let r = map_loop(&g, &spec, &SearchConfig::default(), &FrozenClock).unwrap();
    assert_eq!(r.outcome, MapOutcome::Mapped);
    let m = r.mapping.unwrap();
    assert_eq!(m.ii, 3);
    assert_eq!(validate(&g, &spec, &m), Ok(()));
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.trace[0].status, IiStatus::Sat);
}

#[test]
fn collision_is_reported() {
    let g = example();
    let mut m = example_mapping();
    // node 8 onto the slot of node 9
    let p = m.placements.iter_mut().find(|p| p.node == NodeId(8)).unwrap();
    p.pe = PeId(1);
    let errs = validate(&g, &torus_2x2(), &m).unwrap_err();
    assert!(errs.iter().any(|v| v.kind == ViolationKind::PeConflict));
}

#[test]
fn diagonal_route_is_reported() {
    let g = example();
    let spec = torus_2x2();
    let m0 = example_mapping();
    let src = m0.placement_of(NodeId(9)).unwrap().pe;
    // a PE that is neither the source nor one grid step away on the torus
    let (r0, c0) = (src.0 / 2, src.0 % 2);
    let diagonal = (0..4)
        .map(PeId)
        .find(|p| {
            let (r, c) = (p.0 / 2, p.0 % 2);
            let dr = r.abs_diff(r0).min(2 - r.abs_diff(r0));
            let dc = c.abs_diff(c0).min(2 - c.abs_diff(c0));
            dr + dc == 2
        })
        .unwrap();
    let mut m = m0.clone();
    m.placements.iter_mut().find(|p| p.node == NodeId(10)).unwrap().pe = diagonal;
    let errs = validate(&g, &spec, &m).unwrap_err();
    assert!(errs.iter().any(|v| v.kind == ViolationKind::NonNeighborRoute));
}

#[test]
fn duplicate_and_missing_placements() {
    let g = example();
    let mut m = example_mapping();
    let extra = m.placements[0];
    m.placements.push(extra);
    let errs = validate(&g, &torus_2x2(), &m).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].kind, ViolationKind::DuplicatePlacement);

    let mut m = example_mapping();
    m.placements.retain(|p| p.node != NodeId(4));
    let errs = validate(&g, &torus_2x2(), &m).unwrap_err();
    assert!(errs.iter().any(|v| v.kind == ViolationKind::UnplacedNode));
}

#[test]
fn kernel_expands_into_three_phases() {
    let kms = build_kms(&mobility_schedule(&example()).unwrap(), 3).unwrap();
    let s = expand_stages(&example_mapping(), &kms);
    assert_eq!((s.prologue.len(), s.kernel.len(), s.epilogue.len()), (2, 3, 3));
    assert_eq!(s.num_ops(), 11 * 2);
    // the kernel rows hold the mapping itself
    let mut kernel: Vec<Placement> = s
        .kernel
        .iter()
        .enumerate()
        .flat_map(|(c, row)| {
            row.iter().map(move |op| Placement {
                node: op.node,
                pe: op.pe,
                cycle: c,
                iter: op.iteration,
            })
        })
        .collect();
    kernel.sort();
    assert_eq!(kernel, example_mapping().placements);
}

#[test]
fn reference_utilisation_figures() {
    let spec = torus_2x2();
    let m = mapping(3, &(0..9).map(|n| (n, 0, 0, 0)).collect::<Vec<_>>());
    assert_eq!(utilization(&m, &spec), 0.75);
    let m = mapping(4, &(0..6).map(|n| (n, 0, 0, 0)).collect::<Vec<_>>());
    assert_eq!((utilization(&m, &spec) * 100.0).round(), 38.0);
    let spec3 = modmap_core::arch::CgraSpec::new(3, 3, Topology::Mesh, 4).unwrap();
    let m = mapping(2, &(0..16).map(|n| (n, 0, 0, 0)).collect::<Vec<_>>());
    assert_eq!((utilization(&m, &spec3) * 100.0).round(), 89.0);
}
