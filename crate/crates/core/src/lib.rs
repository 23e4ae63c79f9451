//! Exact modulo-scheduling mapper for time-multiplexed CGRAs.
//!
//! A loop body is given as a [`dfg::DataflowGraph`] and the target array as an
//! [`arch::CgraSpec`]. For each candidate initiation interval the mobility
//! schedule of the graph is folded into a kernel mobility schedule, placement,
//! timing and routing legality are encoded as CNF, and the embedded CDCL solver
//! searches for a model. Models that exceed the register files are excluded and
//! the interval is solved again; once no acceptable model remains the interval
//! is increased.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front-end and wall clocks live in the companion `modmap` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arch;
pub mod cnf;
pub mod dfg;
pub mod driver;
pub mod encode;
pub mod regalloc;
pub mod sat;
pub mod schedule;
pub mod solve;
pub mod time;
pub mod verify;

pub use arch::{CgraSpec, PeId, Topology};
pub use dfg::{DataflowGraph, DfgEdge, DfgNode, NodeId};
pub use driver::{map_loop, MapOutcome, MapResult, SearchConfig};
pub use solve::{Mapping, Placement, RegisterAssignment};
