use super::{Mode, PreserverSession, Selector};
use crate::condense::{condense, ComponentId, Condensation};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, Vertex};

/// Online preserver over an arbitrary digraph.
///
/// Pairs are mapped to components and served by a [`PreserverSession`] on the
/// condensed DAG. Every DAG edge the inner session adds is lifted to one
/// original edge, and the spanning trees of each component a chosen path
/// passes through are added the first time that happens.
#[derive(Debug, Clone)]
pub struct CondensedSession {
    g: DirectedGraph,
    condensation: Condensation,
    inner: PreserverSession,
    h: DirectedGraph,
    trees_added: Vec<bool>,
    pairs: Vec<Edge>,
}

impl CondensedSession {
    pub fn new(g: DirectedGraph, mode: Mode) -> Result<Self> {
        Self::with_selector(g, Selector::new(mode))
    }

    pub fn with_selector(g: DirectedGraph, selector: Selector) -> Result<Self> {
        let condensation = condense(&g);
        let inner = PreserverSession::with_selector(condensation.dag().clone(), selector)?;
        Ok(Self {
            h: DirectedGraph::empty(g.n()),
            trees_added: vec![false; condensation.component_count()],
            g,
            condensation,
            inner,
            pairs: Vec::new(),
        })
    }

    pub fn g(&self) -> &DirectedGraph {
        &self.g
    }

    /// The preserver in original vertex ids.
    pub fn h(&self) -> &DirectedGraph {
        &self.h
    }

    pub fn condensation(&self) -> &Condensation {
        &self.condensation
    }

    pub fn inner(&self) -> &PreserverSession {
        &self.inner
    }

    pub fn pairs(&self) -> &[Edge] {
        &self.pairs
    }

    /// Number of tree edges (with multiplicity) of components added so far.
    pub fn tree_edges_added(&self) -> usize {
        self.trees_added
            .iter()
            .enumerate()
            .filter(|(_, &added)| added)
            .map(|(c, _)| self.condensation.tree_edges_of(c).len())
            .sum()
    }

    /// Serves `(s, t)`, returning the original edges newly added to `h`.
    pub fn serve_pair(&mut self, s: Vertex, t: Vertex) -> Result<Vec<Edge>> {
        self.g.check_vertex(s)?;
        self.g.check_vertex(t)?;
        let (cs, ct) = (self.condensation.component_of(s), self.condensation.component_of(t));
        let dag_new = self.inner.serve_pair(cs, ct).map_err(|e| match e {
            Error::Infeasible { .. } => Error::Infeasible { s, t },
            e => e,
        })?;
        let dag_path = self.inner.log().last().expect("pair was just served").path.clone();

        let mut added = Vec::new();
        for c in dag_path {
            self.add_trees(c, &mut added)?;
        }
        for e in dag_new {
            let (u, v) = self.condensation.lift_edge(e)?;
            if self.h.add_edge(u, v)? {
                added.push((u, v));
            }
        }
        self.pairs.push((s, t));
        Ok(added)
    }

    fn add_trees(&mut self, c: ComponentId, added: &mut Vec<Edge>) -> Result<()> {
        if self.trees_added[c] {
            return Ok(());
        }
        self.trees_added[c] = true;
        for te in self.condensation.tree_edges_of(c) {
            let (u, v) = te.edge;
            if self.h.add_edge(u, v)? {
                added.push((u, v));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_then_tail() {
        // 0 -> 1 -> 2 -> 0, 2 -> 3
        let g = DirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let mut s = CondensedSession::new(g, Mode::Backwards).unwrap();
        s.serve_pair(1, 0).unwrap();
        assert!(s.h().reaches(1, 0).unwrap());
        s.serve_pair(0, 3).unwrap();
        assert!(s.h().reaches(0, 3).unwrap());
        assert!(s.h().reaches(1, 3).unwrap());
        assert_eq!(s.tree_edges_added(), 4);
        assert!(s.inner().verify().passed());
    }

    #[test]
    fn passes_through_intermediate_component() {
        // 0 -> {1,2} -> 3, entering at 1 and leaving from 2
        let g = DirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 1), (2, 3)]).unwrap();
        let mut s = CondensedSession::new(g, Mode::Forwards).unwrap();
        s.serve_pair(0, 3).unwrap();
        assert!(s.h().reaches(0, 3).unwrap());
    }

    #[test]
    fn infeasible_pair() {
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 0)]).unwrap();
        let mut s = CondensedSession::new(g, Mode::Forwards).unwrap();
        assert!(matches!(s.serve_pair(0, 2), Err(Error::Infeasible { .. })));
        assert!(s.pairs().is_empty());
        assert_eq!(s.h().edge_count(), 0);
    }
}
