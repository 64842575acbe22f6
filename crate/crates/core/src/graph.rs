//! Dense-id directed graphs with sorted adjacency in both directions.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Edge = (Vertex, Vertex);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// A simple directed graph over vertices `0..n`.
///
/// Both adjacency lists are kept sorted by neighbor id; there are no
/// self-loops and no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    out_adj: Vec<Vec<Vertex>>,
    in_adj: Vec<Vec<Vertex>>,
    m: usize,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self { out_adj: vec![Vec::new(); n], in_adj: vec![Vec::new(); n], m: 0 }
    }

    /// Builds a graph from an edge list. Duplicates collapse; self-loops and
    /// out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn out_neighbors(&self, u: Vertex) -> &[Vertex] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.out_adj[u].binary_search(&v).is_ok()
    }

    /// Inserts `(u, v)`, returning `true` if the edge was new.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<bool> {
        let n = self.n();
        for x in [u, v] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop { line: 0, vertex: u });
        }
        match self.out_adj[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.out_adj[u].insert(pos, v);
                let pos = self.in_adj[v].binary_search(&u).unwrap_err();
                self.in_adj[v].insert(pos, u);
                self.m += 1;
                Ok(true)
            }
        }
    }

    /// All edges in lexicographic `(tail, head)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(u, outs)| outs.iter().map(move |&v| (u, v)))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    /// Membership mask of the vertices reachable from `root` (forward) or
    /// reaching `root` (reverse). `root` itself is always included.
    pub fn reach_mask(&self, root: Vertex, direction: Direction) -> Result<Vec<bool>> {
        self.check_vertex(root)?;
        let mut seen = vec![false; self.n()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let next = match direction {
                Direction::Forward => &self.out_adj[u],
                Direction::Reverse => &self.in_adj[u],
            };
            for &w in next {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(seen)
    }

    /// Sorted list of vertices reachable from (or reaching) `root`.
    pub fn reachable_set(&self, root: Vertex, direction: Direction) -> Result<Vec<Vertex>> {
        let mask = self.reach_mask(root, direction)?;
        Ok(mask_to_vec(&mask))
    }

    pub fn reaches(&self, s: Vertex, t: Vertex) -> Result<bool> {
        self.check_vertex(t)?;
        Ok(self.reach_mask(s, Direction::Forward)?[t])
    }

    /// Topological order (smallest available id first), or `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<Vertex>> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        let n = self.n();
        let mut indeg: Vec<usize> = self.in_adj.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<Vertex>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(u)) = ready.pop() {
            order.push(u);
            for &w in &self.out_adj[u] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_dag(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Shortest `s -> t` path by BFS; among equal-length paths the one found
    /// by scanning out-neighbors in ascending order.
    pub fn shortest_path(&self, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(s)?;
        self.check_vertex(t)?;
        let mut parent = vec![usize::MAX; self.n()];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &w in &self.out_adj[u] {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if parent[t] == usize::MAX {
            return Err(Error::Infeasible { s, t });
        }
        let mut path = vec![t];
        let mut cur = t;
        while cur != s {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Canonical edge-list text: `n <count>` header then one edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n {}", self.n()).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}

/// All-pairs reachability as per-vertex masks, one BFS per vertex in each
/// direction. Meant for the small graphs that get exhaustive treatment.
#[derive(Debug, Clone)]
pub struct ReachIndex {
    from: Vec<Vec<bool>>,
    to: Vec<Vec<bool>>,
}

impl ReachIndex {
    pub fn new(g: &DirectedGraph) -> Self {
        let n = g.n();
        let from = (0..n).map(|v| g.reach_mask(v, Direction::Forward).unwrap()).collect();
        let to = (0..n).map(|v| g.reach_mask(v, Direction::Reverse).unwrap()).collect();
        Self { from, to }
    }

    pub fn reaches(&self, s: Vertex, t: Vertex) -> bool {
        self.from[s][t]
    }

    /// Vertices reachable from `s`.
    pub fn from(&self, s: Vertex) -> &[bool] {
        &self.from[s]
    }

    /// Vertices that reach `t`.
    pub fn to(&self, t: Vertex) -> &[bool] {
        &self.to[t]
    }

    /// Every reachable pair `(s, t)`, including `s == t`, in lexicographic order.
    pub fn reachable_pairs(&self) -> Vec<Edge> {
        let n = self.from.len();
        (0..n).flat_map(|s| (0..n).filter(move |&t| self.from[s][t]).map(move |t| (s, t))).collect()
    }
}

pub(crate) fn mask_to_vec(mask: &[bool]) -> Vec<Vertex> {
    mask.iter().enumerate().filter_map(|(v, &b)| b.then_some(v)).collect()
}

/// Parses the edge-list format.
///
/// An optional `n <count>` line fixes the vertex count; otherwise it is one
/// more than the largest id seen. Lines starting with `#` and blank lines are
/// skipped.
pub fn load_graph(text: &str) -> Result<DirectedGraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "n" {
            if declared.is_some() || !edges.is_empty() {
                return Err(Error::Parse { line: line_no, msg: "vertex-count header must come first".into() });
            }
            if fields.len() != 2 {
                return Err(Error::Parse { line: line_no, msg: "expected `n <count>`".into() });
            }
            declared = Some(parse_id(fields[1], line_no)?);
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `<tail> <head>`, got {} fields", fields.len()),
            });
        }
        let u = parse_id(fields[0], line_no)?;
        let v = parse_id(fields[1], line_no)?;
        if u == v {
            return Err(Error::SelfLoop { line: line_no, vertex: u });
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
            }
        }
        edges.push((u, v));
    }
    let n = declared.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    DirectedGraph::from_edges(n, edges)
}

fn parse_id(field: &str, line: usize) -> Result<usize> {
    field.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("`{field}` is not a vertex id") })
}

/// Parses a demand-pair stream: one `s t` per line, `#` comments allowed.
pub fn load_pairs(text: &str) -> Result<Vec<Edge>> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if let Some(pair) = parse_pair_line(raw, idx + 1)? {
            pairs.push(pair);
        }
    }
    Ok(pairs)
}

pub fn parse_pair_line(raw: &str, line_no: usize) -> Result<Option<Edge>> {
    let line = raw.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse { line: line_no, msg: "expected `<s> <t>`".into() });
    }
    Ok(Some((parse_id(fields[0], line_no)?, parse_id(fields[1], line_no)?)))
}

pub fn pairs_to_text(pairs: &[Edge]) -> String {
    let mut out = String::new();
    for (s, t) in pairs {
        writeln!(out, "{s} {t}").unwrap();
    }
    out
}
