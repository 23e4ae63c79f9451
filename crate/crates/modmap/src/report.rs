//! Plain-text renderings of schedules and search traces.

use std::fmt::Write;

use modmap_core::dfg::NodeId;
use modmap_core::driver::TraceEntry;
use modmap_core::schedule::{KernelMobilitySchedule, LevelSchedule, MiiReport, MobilitySchedule};

fn row(nodes: &[NodeId]) -> String {
    let mut ids: Vec<usize> = nodes.iter().map(|n| n.0).collect();
    ids.sort_unstable();
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// One line per time step: `t | asap | alap | ms`.
pub fn schedule_table(asap: &LevelSchedule, alap: &LevelSchedule, ms: &MobilitySchedule) -> String {
    let mut out = String::from("time | asap | alap | ms\n");
    for t in 0..ms.len() {
        writeln!(
            out,
            "{} | {} | {} | {}",
            t,
            row(&asap.rows()[t]),
            row(&alap.rows()[t]),
            row(&ms.rows()[t])
        )
        .unwrap();
    }
    out
}

/// One line per kernel cycle listing `node_label` entries.
pub fn kms_table(kms: &KernelMobilitySchedule) -> String {
    let mut out = String::new();
    writeln!(out, "kms ii={} folds={}", kms.ii(), kms.fold_count()).unwrap();
    for (c, slot) in kms.slots().iter().enumerate() {
        let entries: Vec<String> = slot.iter().map(|(n, it)| format!("{n}_{it}")).collect();
        writeln!(out, "{} | {}", c, entries.join(" ")).unwrap();
    }
    out
}

pub fn mii_line(r: &MiiReport) -> String {
    format!("res_ii={} rec_ii={} mii={}", r.res_ii, r.rec_ii, r.mii)
}

pub fn trace_line(t: &TraceEntry) -> String {
    format!(
        "II={} status={} time={:.3} vars={} clauses={}",
        t.ii,
        t.status.label(),
        t.elapsed.as_secs_f64(),
        t.vars,
        t.clauses
    )
}
