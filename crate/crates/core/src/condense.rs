//! Strongly connected component condensation.
//!
//! Each component is contracted to a supernode. Strong connectivity inside a
//! component is witnessed by two BFS trees rooted at its smallest vertex: an
//! out-tree (root reaches everything) and an in-tree (everything reaches the
//! root), `2(|C| - 1)` edges in total. A preserver on the condensed DAG plus
//! these trees, with every DAG edge lifted to one original edge, preserves
//! all reachability of the original graph.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, Vertex};

pub type ComponentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeKind {
    Out,
    In,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeEdge {
    pub edge: Edge,
    pub kind: TreeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    component_of: Vec<ComponentId>,
    members: Vec<Vec<Vertex>>,
    dag: DirectedGraph,
    trees: Vec<Vec<TreeEdge>>,
    lifts: BTreeMap<Edge, Edge>,
}

impl Condensation {
    pub fn component_of(&self, v: Vertex) -> ComponentId {
        self.component_of[v]
    }

    pub fn component_count(&self) -> usize {
        self.members.len()
    }

    /// Vertices of component `c`, ascending.
    pub fn members(&self, c: ComponentId) -> &[Vertex] {
        &self.members[c]
    }

    pub fn representative(&self, c: ComponentId) -> Vertex {
        self.members[c][0]
    }

    pub fn dag(&self) -> &DirectedGraph {
        &self.dag
    }

    /// Out-tree edges followed by in-tree edges of component `c`. An edge may
    /// appear once in each tree.
    pub fn tree_edges_of(&self, c: ComponentId) -> &[TreeEdge] {
        &self.trees[c]
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = &TreeEdge> {
        self.trees.iter().flatten()
    }

    pub fn tree_edge_count(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Lexicographically smallest original edge realizing a DAG edge.
    pub fn lift_edge(&self, dag_edge: Edge) -> Result<Edge> {
        self.lifts.get(&dag_edge).copied().ok_or(Error::MissingEdge(dag_edge.0, dag_edge.1))
    }
}

/// Condenses `g`. Component ids follow a topological order of the condensed
/// DAG, so `c1 -> c2` in the DAG implies `c1 < c2`.
pub fn condense(g: &DirectedGraph) -> Condensation {
    let sccs = tarjan(g);
    let n = g.n();
    let mut component_of = vec![0; n];
    let mut members = Vec::with_capacity(sccs.len());
    // tarjan yields sinks first
    for (c, mut comp) in sccs.into_iter().rev().enumerate() {
        comp.sort_unstable();
        for &v in &comp {
            component_of[v] = c;
        }
        members.push(comp);
    }

    let mut lifts: BTreeMap<Edge, Edge> = BTreeMap::new();
    for (u, v) in g.edges() {
        let (cu, cv) = (component_of[u], component_of[v]);
        if cu != cv {
            // edges() is lexicographic, so the first hit is the smallest
            lifts.entry((cu, cv)).or_insert((u, v));
        }
    }
    let dag = DirectedGraph::from_edges(members.len(), lifts.keys().copied())
        .expect("component ids are in range and distinct");

    let trees = members.iter().enumerate().map(|(c, comp)| spanning_trees(g, &component_of, c, comp[0])).collect();

    Condensation { component_of, members, dag, trees, lifts }
}

fn spanning_trees(g: &DirectedGraph, component_of: &[ComponentId], c: ComponentId, root: Vertex) -> Vec<TreeEdge> {
    let mut out = Vec::new();
    for kind in [TreeKind::Out, TreeKind::In] {
        let mut seen = std::collections::HashSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let next = match kind {
                TreeKind::Out => g.out_neighbors(u),
                TreeKind::In => g.in_neighbors(u),
            };
            for &w in next {
                if component_of[w] == c && seen.insert(w) {
                    let edge = match kind {
                        TreeKind::Out => (u, w),
                        TreeKind::In => (w, u),
                    };
                    out.push(TreeEdge { edge, kind });
                    queue.push_back(w);
                }
            }
        }
    }
    out
}

/// Iterative Tarjan. Components come out in reverse topological order.
fn tarjan(g: &DirectedGraph) -> Vec<Vec<Vertex>> {
    let n = g.n();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next_index = 0;
    // (vertex, next neighbor offset)
    let mut call: Vec<(Vertex, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut off)) = call.last_mut() {
            let outs = g.out_neighbors(v);
            if *off < outs.len() {
                let w = outs[*off];
                *off += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}
