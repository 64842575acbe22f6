use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Mode, Selector};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, Vertex};
use crate::paths::{find_k_bridge, find_k_bridge_involving, BridgeWitness, PathSystem};

/// One served demand pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair: Edge,
    pub path: Vec<Vertex>,
    pub new_edges: usize,
    pub h_size: usize,
    pub z_size: usize,
}

impl PairRecord {
    /// The per-pair stats line: `{pair, new_edges, h_size, z_size}`.
    pub fn stats_json(&self) -> String {
        serde_json::json!({
            "pair": [self.pair.0, self.pair.1],
            "new_edges": self.new_edges,
            "h_size": self.h_size,
            "z_size": self.z_size,
        })
        .to_string()
    }
}

/// Online preserver over a DAG.
///
/// Invariants after every served pair: `E(h) ⊆ E(g)`, `‖z‖ = |E(h)| + p`,
/// and `z` is acyclic with none of the ordered bridges forbidden for the
/// session's mode.
#[derive(Debug, Clone)]
pub struct PreserverSession {
    g: DirectedGraph,
    h: DirectedGraph,
    z: PathSystem,
    selector: Selector,
    log: Vec<PairRecord>,
    sources_seen: BTreeSet<Vertex>,
    sinks_seen: BTreeSet<Vertex>,
}

impl PreserverSession {
    pub fn new(g: DirectedGraph, mode: Mode) -> Result<Self> {
        Self::with_selector(g, Selector::new(mode))
    }

    pub fn with_selector(g: DirectedGraph, selector: Selector) -> Result<Self> {
        if !g.is_dag() {
            return Err(Error::NotADag);
        }
        let n = g.n();
        Ok(Self {
            h: DirectedGraph::empty(n),
            z: PathSystem::new(n),
            g,
            selector,
            log: Vec::new(),
            sources_seen: BTreeSet::new(),
            sinks_seen: BTreeSet::new(),
        })
    }

    /// Reassembles a session from raw state without checking invariants, so
    /// that recorded or deliberately corrupted state can be verified.
    pub fn from_parts(g: DirectedGraph, h: DirectedGraph, z: PathSystem, mode: Mode, log: Vec<PairRecord>) -> Self {
        let sources_seen = log.iter().map(|r| r.pair.0).collect();
        let sinks_seen = log.iter().map(|r| r.pair.1).collect();
        Self { g, h, z, selector: Selector::new(mode), log, sources_seen, sinks_seen }
    }

    pub fn g(&self) -> &DirectedGraph {
        &self.g
    }

    pub fn h(&self) -> &DirectedGraph {
        &self.h
    }

    pub fn z(&self) -> &PathSystem {
        &self.z
    }

    pub fn mode(&self) -> Mode {
        self.selector.mode()
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn log(&self) -> &[PairRecord] {
        &self.log
    }

    pub fn pairs_served(&self) -> usize {
        self.log.len()
    }

    pub fn sources_seen(&self) -> &BTreeSet<Vertex> {
        &self.sources_seen
    }

    pub fn sinks_seen(&self) -> &BTreeSet<Vertex> {
        &self.sinks_seen
    }

    /// Path the session would choose for `(s, t)` right now.
    pub fn peek_path(&mut self, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
        let eligible = self.selector.eligibility(&self.g, s, t)?;
        Ok(self.selector.grow(&self.g, &self.h, s, t, &eligible))
    }

    /// Serves one demand pair: grows its path, adds the new edges to `h`
    /// irrevocably and appends the matching path to `z`. An infeasible pair
    /// leaves the session untouched.
    pub fn serve_pair(&mut self, s: Vertex, t: Vertex) -> Result<Vec<Edge>> {
        let path = self.peek_path(s, t)?;
        let new_edges: Vec<Edge> =
            path.windows(2).map(|w| (w[0], w[1])).filter(|&(u, v)| !self.h.has_edge(u, v)).collect();

        let z_path: Vec<Vertex> = match self.mode() {
            Mode::Forwards => new_edges.iter().map(|&(u, _)| u).chain([t]).collect(),
            Mode::Backwards => [s].into_iter().chain(new_edges.iter().map(|&(_, v)| v)).collect(),
        };
        for &(u, v) in &new_edges {
            self.h.add_edge(u, v)?;
        }
        self.z.push(z_path)?;
        self.sources_seen.insert(s);
        self.sinks_seen.insert(t);
        self.log.push(PairRecord {
            pair: (s, t),
            path,
            new_edges: new_edges.len(),
            h_size: self.h.edge_count(),
            z_size: self.z.size(),
        });
        Ok(new_edges)
    }

    /// Full check of the session invariants with bridges up to size `max_k`.
    pub fn verify_with(&self, max_k: usize) -> SessionReport {
        let mut report = self.base_report();
        for k in 2..=max_k.min(4) {
            if let Ok(Some(w)) = find_k_bridge(&self.z, k, self.mode().forbidden()) {
                report.bridges.push(w);
            }
        }
        report.unreachable =
            self.log.iter().map(|r| r.pair).filter(|&(s, t)| !self.h.reaches(s, t).unwrap_or(false)).collect();
        report
    }

    /// All checks, bridges of size 2 through 4.
    pub fn verify(&self) -> SessionReport {
        self.verify_with(4)
    }

    /// Checks only what the most recent pair could have broken: the global
    /// acyclicity and size identity, bridges that use the newest `z` path,
    /// and the newest pair's reachability. Running this after every pair
    /// covers the same ground as a full check after every pair.
    pub fn verify_latest(&self, max_k: usize) -> SessionReport {
        let mut report = self.base_report();
        if let Some(last) = self.z.len().checked_sub(1) {
            for k in 2..=max_k.min(4) {
                if let Ok(Some(w)) = find_k_bridge_involving(&self.z, k, self.mode().forbidden(), last) {
                    report.bridges.push(w);
                }
            }
        }
        if let Some(r) = self.log.last() {
            if !self.h.reaches(r.pair.0, r.pair.1).unwrap_or(false) {
                report.unreachable.push(r.pair);
            }
        }
        report
    }

    fn base_report(&self) -> SessionReport {
        let cyclic_vertices = match self.z.acyclic_order() {
            Some(_) => Vec::new(),
            None => stuck_vertices(&self.z),
        };
        let stray_edges = self.h.edges().filter(|&(u, v)| !self.g.has_edge(u, v)).collect();
        SessionReport {
            acyclic: cyclic_vertices.is_empty(),
            cyclic_vertices,
            size_identity: SizeIdentity { z_size: self.z.size(), h_edges: self.h.edge_count(), pairs: self.log.len() },
            bridges: Vec::new(),
            unreachable: Vec::new(),
            stray_edges,
        }
    }
}

/// Vertices left over when peeling sources off the precedence relation:
/// every directed cycle of `z` lies among them.
fn stuck_vertices(z: &PathSystem) -> Vec<Vertex> {
    let n = z.universe();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for p in z.paths() {
        for w in p.windows(2) {
            succ[w[0]].push(w[1]);
            indeg[w[1]] += 1;
        }
    }
    let mut stack: Vec<Vertex> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = stack.pop() {
        for &w in &succ[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    (0..n).filter(|&v| indeg[v] > 0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeIdentity {
    pub z_size: usize,
    pub h_edges: usize,
    pub pairs: usize,
}

impl SizeIdentity {
    pub fn holds(&self) -> bool {
        self.z_size == self.h_edges + self.pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub acyclic: bool,
    pub cyclic_vertices: Vec<Vertex>,
    pub size_identity: SizeIdentity,
    pub bridges: Vec<BridgeWitness>,
    pub unreachable: Vec<Edge>,
    /// Preserver edges missing from the input graph.
    pub stray_edges: Vec<Edge>,
}

impl SessionReport {
    pub fn passed(&self) -> bool {
        self.acyclic
            && self.size_identity.holds()
            && self.bridges.is_empty()
            && self.unreachable.is_empty()
            && self.stray_edges.is_empty()
    }
}
