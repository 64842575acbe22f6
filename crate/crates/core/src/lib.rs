//! Online reachability preservers and their verification machinery.
//!
//! * [`graph`] and [`condense`]: dense-id digraphs, reachability, and SCC
//!   condensation with per-component spanning trees.
//! * [`paths`]: ordered path systems, ordered bridge detection, cleaning and
//!   R-set diagnostics.
//! * [`online`]: forwards/backwards path growth and online preserver sessions.
//! * [`nonadaptive`]: precomputed path tables selected by arrival index.
//! * [`udsn`]: an online unweighted directed Steiner network simulator.
//! * [`oracle`]: exact minimum preservers, a greedy adversary and seeded
//!   instance generators.
//! * [`harness`]: run manifests, replay verification and benchmark sweeps.

pub mod condense;
pub mod error;
pub mod graph;
pub mod harness;
pub mod nonadaptive;
pub mod online;
pub mod oracle;
pub mod paths;
pub mod udsn;

pub use condense::{condense, Condensation};
pub use error::{Error, Result};
pub use graph::{load_graph, DirectedGraph, Direction, Edge, Vertex};
pub use online::{CondensedSession, Mode, PreserverSession, Selector};
pub use paths::PathSystem;
