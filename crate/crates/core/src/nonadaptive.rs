//! Non-adaptive path tables.
//!
//! A table fixes one path per reachable pair before any demand arrives. The
//! known-`p` construction runs a greedy adversary against the online
//! selector while some pair would still add more than `f̂(n, p) / p` edges,
//! then freezes the preserver and finalizes every other pair against it. Any
//! `p` pairs drawn from such a table use at most `2 f̂(n, p)` edges, provided
//! `f̂` really bounds the online process, which [`surrogate_monitor`] checks.
//!
//! Without knowing `p`, one table per doubling level is built and the pair
//! arriving `i`-th uses the least level `q ≥ i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, ReachIndex, Vertex};
use crate::online::{Mode, Selector};
use crate::oracle::{most_costly, new_edge_count, selected_path};

pub const DEFAULT_SURROGATE_C: f64 = 4.0;

/// Doubling stops after this many levels even if the surrogate never
/// reaches its cap.
pub const MAX_LEVELS: usize = 48;

/// A stand-in for the extremal function `f(n, p)`.
///
/// Values are clamped to `[n - 1, n(n - 1)]`: one path may need `n - 1`
/// edges and no preserver has more than `n(n - 1)`.
#[derive(Clone)]
pub struct ExtremalSurrogate {
    name: String,
    f: Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>,
}

impl fmt::Debug for ExtremalSurrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtremalSurrogate").field("name", &self.name).finish()
    }
}

impl ExtremalSurrogate {
    pub fn new(name: impl Into<String>, f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cap(n: usize) -> f64 {
        (n * n.saturating_sub(1)) as f64
    }

    pub fn evaluate(&self, n: usize, p: usize) -> f64 {
        let raw = (self.f)(n, p);
        raw.max(n.saturating_sub(1) as f64).min(Self::cap(n))
    }

    pub fn is_saturated(&self, n: usize, p: usize) -> bool {
        self.evaluate(n, p) >= Self::cap(n)
    }
}

/// `min(c (n √p + n), n(n - 1))` with `c` = [`DEFAULT_SURROGATE_C`].
pub fn default_surrogate() -> ExtremalSurrogate {
    scaled_surrogate(DEFAULT_SURROGATE_C)
}

pub fn scaled_surrogate(c: f64) -> ExtremalSurrogate {
    ExtremalSurrogate::new(format!("{c}*(n*sqrt(p)+n)"), move |n, p| {
        let n = n as f64;
        c * (n * (p as f64).sqrt() + n)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Finalized by the greedy loop; its edges form the frozen preserver.
    WhileLoop,
    /// Finalized against the frozen preserver.
    Residual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub path: Vec<Vertex>,
    pub phase: Phase,
}

/// One path per reachable pair, built for a known pair count `level`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathTable {
    pub level: usize,
    pub entries: BTreeMap<Edge, TableEntry>,
}

/// One JSON line of a serialized table set.
#[derive(Serialize, Deserialize)]
struct EntryLine {
    s: Vertex,
    t: Vertex,
    path: Vec<Vertex>,
    phase: Phase,
    level: usize,
}

impl PathTable {
    pub fn get(&self, s: Vertex, t: Vertex) -> Option<&[Vertex]> {
        self.entries.get(&(s, t)).map(|e| e.path.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs finalized by the greedy loop.
    pub fn greedy_count(&self) -> usize {
        self.entries.values().filter(|e| e.phase == Phase::WhileLoop).count()
    }

    /// The frozen preserver: the union of the greedy-phase paths.
    pub fn frozen_edges(&self) -> BTreeSet<Edge> {
        self.entries
            .values()
            .filter(|e| e.phase == Phase::WhileLoop)
            .flat_map(|e| e.path.windows(2).map(|w| (w[0], w[1])))
            .collect()
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (&(s, t), e) in &self.entries {
            let line = EntryLine { s, t, path: e.path.clone(), phase: e.phase, level: self.level };
            out.push_str(&serde_json::to_string(&line).expect("entry serializes"));
            out.push('\n');
        }
        out
    }
}

/// Serializes a level sequence as JSON lines `{s, t, path, phase, level}`.
pub fn tables_to_json_lines(tables: &[PathTable]) -> String {
    tables.iter().map(PathTable::to_json_lines).collect()
}

/// Inverse of [`tables_to_json_lines`]. Levels come back in increasing order.
pub fn tables_from_json_lines(text: &str) -> Result<Vec<PathTable>> {
    let mut levels: BTreeMap<usize, BTreeMap<Edge, TableEntry>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: EntryLine =
            serde_json::from_str(raw).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        levels
            .entry(line.level)
            .or_default()
            .insert((line.s, line.t), TableEntry { path: line.path, phase: line.phase });
    }
    Ok(levels.into_iter().map(|(level, entries)| PathTable { level, entries }).collect())
}

fn check_dag(g: &DirectedGraph) -> Result<()> {
    if g.is_dag() {
        Ok(())
    } else {
        Err(Error::NotADag)
    }
}

/// Table for a known pair count `p`.
pub fn precompute_known_p(g: &DirectedGraph, p: usize, surrogate: &ExtremalSurrogate, mode: Mode) -> Result<PathTable> {
    check_dag(g)?;
    let reach = ReachIndex::new(g);
    known_p(g, &reach, p, surrogate, mode)
}

fn known_p(
    g: &DirectedGraph,
    reach: &ReachIndex,
    p: usize,
    surrogate: &ExtremalSurrogate,
    mode: Mode,
) -> Result<PathTable> {
    if p < 1 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let threshold = surrogate.evaluate(g.n(), p) / p as f64;
    let mut selector = Selector::new(mode);
    let mut h = DirectedGraph::empty(g.n());
    let mut pending: BTreeSet<Edge> = reach.reachable_pairs().into_iter().collect();
    let mut entries = BTreeMap::new();

    while let Some(best) = most_costly(g, &h, &mut selector, reach, pending.iter().copied()) {
        if best.new_edges as f64 <= threshold {
            break;
        }
        for w in best.path.windows(2) {
            h.add_edge(w[0], w[1])?;
        }
        pending.remove(&best.pair);
        entries.insert(best.pair, TableEntry { path: best.path, phase: Phase::WhileLoop });
    }
    for pair in pending {
        let path = selected_path(g, &h, &mut selector, reach, pair);
        entries.insert(pair, TableEntry { path, phase: Phase::Residual });
    }
    Ok(PathTable { level: p, entries })
}

/// The doubling levels `p*, 2p*, 4p*, …`, ending at the first saturated one.
pub fn doubling_levels(n: usize, surrogate: &ExtremalSurrogate, p_star: usize) -> Result<Vec<usize>> {
    if p_star < 1 {
        return Err(Error::InvalidParameter("p* must be at least 1".into()));
    }
    let mut levels = vec![p_star];
    let mut q = p_star;
    while !surrogate.is_saturated(n, q) && levels.len() < MAX_LEVELS {
        q = q.checked_mul(2).ok_or_else(|| Error::TooLarge("doubling level overflow".into()))?;
        levels.push(q);
    }
    Ok(levels)
}

/// One table per doubling level, built in parallel.
pub fn precompute_index_sensitive(
    g: &DirectedGraph,
    surrogate: &ExtremalSurrogate,
    mode: Mode,
    p_star: usize,
) -> Result<Vec<PathTable>> {
    check_dag(g)?;
    let levels = doubling_levels(g.n(), surrogate, p_star)?;
    let reach = ReachIndex::new(g);
    levels.into_par_iter().map(|q| known_p(g, &reach, q, surrogate, mode)).collect()
}

/// Index into `tables` of the level consulted for arrival index `i`: the
/// least level `q ≥ i`, or the last level once `i` exceeds them all.
pub fn level_for(tables: &[PathTable], i: usize) -> Result<usize> {
    if i < 1 {
        return Err(Error::InvalidParameter("arrival index starts at 1".into()));
    }
    if tables.is_empty() {
        return Err(Error::InvalidParameter("no tables".into()));
    }
    Ok(tables.iter().position(|t| t.level >= i).unwrap_or(tables.len() - 1))
}

/// The precomputed path for the `i`-th arriving pair `(s, t)`.
pub fn select_path(tables: &[PathTable], s: Vertex, t: Vertex, i: usize) -> Result<&[Vertex]> {
    let level = level_for(tables, i)?;
    tables[level].get(s, t).ok_or(Error::Infeasible { s, t })
}

/// Pairs whose path differs between consecutive levels, as
/// `(pair, lower level, higher level)`.
pub fn level_disagreements(tables: &[PathTable]) -> Vec<(Edge, usize, usize)> {
    let mut out = Vec::new();
    for w in tables.windows(2) {
        for (pair, e) in &w[0].entries {
            if w[1].entries.get(pair).is_some_and(|f| f.path != e.path) {
                out.push((*pair, w[0].level, w[1].level));
            }
        }
    }
    out
}

/// Outcome of playing the online selector against the greedy adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub p: usize,
    pub rounds: usize,
    pub h_edges: usize,
    pub budget: f64,
}

impl MonitorReport {
    /// Whether the surrogate bounded this run.
    pub fn holds(&self) -> bool {
        self.h_edges as f64 <= self.budget
    }
}

/// Runs `p` adversary rounds, each requesting the not yet requested reachable
/// pair of largest cost, and compares `|E(h)|` against `f̂(n, p)`.
///
/// The first rounds coincide with the greedy loop of
/// [`precompute_known_p`], so a passing monitor also certifies that loop
/// stopped after fewer than `p` pairs.
pub fn surrogate_monitor(
    g: &DirectedGraph,
    p: usize,
    surrogate: &ExtremalSurrogate,
    mode: Mode,
) -> Result<MonitorReport> {
    check_dag(g)?;
    if p < 1 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let reach = ReachIndex::new(g);
    let mut selector = Selector::new(mode);
    let mut h = DirectedGraph::empty(g.n());
    let mut pending: BTreeSet<Edge> = reach.reachable_pairs().into_iter().collect();
    let mut rounds = 0;
    while rounds < p {
        let Some(best) = most_costly(g, &h, &mut selector, &reach, pending.iter().copied()) else {
            break;
        };
        rounds += 1;
        if best.new_edges == 0 {
            // every remaining round is free
            break;
        }
        for w in best.path.windows(2) {
            h.add_edge(w[0], w[1])?;
        }
        pending.remove(&best.pair);
    }
    Ok(MonitorReport { p, rounds, h_edges: h.edge_count(), budget: surrogate.evaluate(g.n(), p) })
}

/// Edges of the union of `paths`.
pub fn union_edges<'a>(paths: impl IntoIterator<Item = &'a [Vertex]>) -> BTreeSet<Edge> {
    paths.into_iter().flat_map(|p| p.windows(2).map(|w| (w[0], w[1]))).collect()
}

/// Largest number of edges a residual path adds to the frozen preserver.
pub fn residual_cost(table: &PathTable, n: usize) -> Result<usize> {
    let frozen = DirectedGraph::from_edges(n, table.frozen_edges())?;
    Ok(table
        .entries
        .values()
        .filter(|e| e.phase == Phase::Residual)
        .map(|e| new_edge_count(&frozen, &e.path))
        .max()
        .unwrap_or(0))
}
