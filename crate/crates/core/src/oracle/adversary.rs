//! The greedy online adversary: always request the most expensive pair.

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, ReachIndex, Vertex};
use crate::online::{Mode, Selector};

/// A candidate pair with the path the selector would take for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostedPair {
    pub pair: Edge,
    pub path: Vec<Vertex>,
    pub new_edges: usize,
}

/// Number of consecutive steps of `path` missing from `h`.
pub fn new_edge_count(h: &DirectedGraph, path: &[Vertex]) -> usize {
    path.windows(2).filter(|w| !h.has_edge(w[0], w[1])).count()
}

/// The selector's path for a reachable pair, using precomputed reachability.
pub(crate) fn selected_path(
    g: &DirectedGraph,
    h: &DirectedGraph,
    selector: &mut Selector,
    reach: &ReachIndex,
    (s, t): Edge,
) -> Vec<Vertex> {
    let eligible = match selector.mode() {
        Mode::Forwards => reach.to(t),
        Mode::Backwards => reach.from(s),
    };
    selector.grow(g, h, s, t, eligible)
}

/// Candidate with the most new edges against `h`; ties go to the
/// lexicographically smallest pair. Candidates must be reachable.
pub(crate) fn most_costly(
    g: &DirectedGraph,
    h: &DirectedGraph,
    selector: &mut Selector,
    reach: &ReachIndex,
    candidates: impl IntoIterator<Item = Edge>,
) -> Option<CostedPair> {
    let mut best: Option<CostedPair> = None;
    for pair in candidates {
        let path = selected_path(g, h, selector, reach, pair);
        let new_edges = new_edge_count(h, &path);
        let better = match &best {
            None => true,
            Some(b) => new_edges > b.new_edges || (new_edges == b.new_edges && pair < b.pair),
        };
        if better {
            best = Some(CostedPair { pair, path, new_edges });
        }
    }
    best
}

/// One adversary round: the candidate whose selected path adds the most
/// edges to `h`.
pub fn greedy_adversary_step(
    g: &DirectedGraph,
    h: &DirectedGraph,
    selector: &mut Selector,
    candidates: &[Edge],
) -> Result<Edge> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate pairs".into()));
    }
    if !g.is_dag() {
        return Err(Error::NotADag);
    }
    for &(s, t) in candidates {
        if !g.reaches(s, t)? {
            return Err(Error::Infeasible { s, t });
        }
    }
    let reach = ReachIndex::new(g);
    let best = most_costly(g, h, selector, &reach, candidates.iter().copied());
    Ok(best.expect("candidates are nonempty").pair)
}
