//! Exact minimum reachability preservers by exhaustive subset search.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, Vertex};

/// Largest edge count accepted by [`min_preserver`].
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 20;

/// Minimum-cardinality edge subset of `g` preserving every pair, the
/// lexicographically smallest among optima.
///
/// Edges whose removal from `g` breaks some pair are fixed up front; the
/// remaining edges are searched in increasing subset size, each size in
/// lexicographic order.
pub fn min_preserver(g: &DirectedGraph, pairs: &[Edge]) -> Result<Vec<Edge>> {
    let edges: Vec<Edge> = g.edges().collect();
    if edges.len() > EXHAUSTIVE_EDGE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} edges exceeds the exhaustive limit of {EXHAUSTIVE_EDGE_LIMIT}",
            edges.len()
        )));
    }
    for &(s, t) in pairs {
        if !g.reaches(s, t)? {
            return Err(Error::Infeasible { s, t });
        }
    }
    let masks = MaskGraph::new(&edges, pairs);
    let full: u32 = if edges.is_empty() { 0 } else { u32::MAX >> (32 - edges.len()) };

    let mandatory: u32 =
        (0..edges.len()).filter(|&i| !masks.preserves(full & !(1 << i))).fold(0, |acc, i| acc | (1 << i));
    let optional: Vec<usize> = (0..edges.len()).filter(|&i| mandatory & (1 << i) == 0).collect();

    for k in 0..=optional.len() {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let mask = combo.iter().fold(mandatory, |acc, &j| acc | (1 << optional[j]));
            if masks.preserves(mask) {
                return Ok((0..edges.len()).filter(|&i| mask & (1 << i) != 0).map(|i| edges[i]).collect());
            }
            if !next_combination(&mut combo, optional.len()) {
                break;
            }
        }
    }
    unreachable!("the full edge set preserves every feasible pair")
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Bitmask reachability over at most 20 edges and the vertices they touch.
struct MaskGraph {
    /// Per compressed vertex: (edge bit, head).
    out: Vec<Vec<(u32, usize)>>,
    pairs: Vec<(usize, usize)>,
}

impl MaskGraph {
    fn new(edges: &[Edge], pairs: &[Edge]) -> Self {
        let mut ids: Vec<Vertex> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        let local = |v: Vertex| ids.binary_search(&v).expect("pair endpoints touch an edge");
        let mut out = vec![Vec::new(); ids.len()];
        for (i, &(u, v)) in edges.iter().enumerate() {
            out[local(u)].push((1u32 << i, local(v)));
        }
        let pairs = pairs.iter().filter(|(s, t)| s != t).map(|&(s, t)| (local(s), local(t))).collect();
        Self { out, pairs }
    }

    fn preserves(&self, mask: u32) -> bool {
        self.pairs.iter().all(|&(s, t)| {
            let mut seen: u64 = 1 << s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(bit, w) in &self.out[u] {
                    if mask & bit != 0 && seen & (1 << w) == 0 {
                        seen |= 1 << w;
                        stack.push(w);
                    }
                }
            }
            seen & (1 << t) != 0
        })
    }
}

/// Independent check that the edge set `edges` on `n` vertices keeps every
/// pair reachable.
pub fn preserves(n: usize, edges: &[Edge], pairs: &[Edge]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    pairs.iter().all(|&(s, t)| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen[t]
    })
}
