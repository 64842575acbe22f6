use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{DirectedGraph, Edge, Vertex};
use crate::online::{Mode, PairRecord, PreserverSession, SessionReport};
use crate::paths::PathSystem;

/// Recorded state of a DAG preserver session, enough to re-check it and to
/// replay it from scratch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDump {
    pub n: usize,
    pub graph: Vec<Edge>,
    pub mode: Mode,
    pub pairs: Vec<Edge>,
    pub h: Vec<Edge>,
    pub z: Vec<Vec<Vertex>>,
}

impl SessionDump {
    pub fn from_session(s: &PreserverSession) -> Self {
        Self {
            n: s.g().n(),
            graph: s.g().edges().collect(),
            mode: s.mode(),
            pairs: s.log().iter().map(|r| r.pair).collect(),
            h: s.h().edges().collect(),
            z: s.z().paths().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpReport {
    /// Invariant check of the recorded state as is.
    pub recorded: SessionReport,
    /// Index of the first pair whose replayed `z` path differs from the
    /// recorded one.
    pub first_divergence: Option<usize>,
    /// Whether the replayed preserver equals the recorded one.
    pub h_matches: bool,
}

impl DumpReport {
    pub fn passed(&self) -> bool {
        self.recorded.passed() && self.first_divergence.is_none() && self.h_matches
    }
}

/// Checks the recorded state and replays the pairs against it.
pub fn verify_session_dump(dump: &SessionDump, max_k: usize) -> Result<DumpReport> {
    let g = DirectedGraph::from_edges(dump.n, dump.graph.iter().copied())?;
    let h = DirectedGraph::from_edges(dump.n, dump.h.iter().copied())?;
    let z = PathSystem::from_paths(dump.n, dump.z.clone())?;
    let log = dump
        .pairs
        .iter()
        .map(|&pair| PairRecord { pair, path: Vec::new(), new_edges: 0, h_size: 0, z_size: 0 })
        .collect();
    let recorded = PreserverSession::from_parts(g.clone(), h, z, dump.mode, log).verify_with(max_k);

    let mut replay = PreserverSession::new(g, dump.mode)?;
    for &(s, t) in &dump.pairs {
        replay.serve_pair(s, t)?;
    }
    let replayed = replay.z().paths();
    let first_divergence = (0..dump.pairs.len().max(dump.z.len())).find(|&i| replayed.get(i) != dump.z.get(i));
    let h_matches = replay.h().edges().eq(dump.h.iter().copied());
    Ok(DumpReport { recorded, first_divergence, h_matches })
}
