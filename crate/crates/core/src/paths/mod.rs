//! Ordered path systems: abstract vertex sequences over a shared universe,
//! with the position of a path in `paths` giving its place in the order.

mod bridge;
mod clean;
mod rset;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use bridge::{find_k_bridge, find_k_bridge_involving, BridgeWitness, OrderConstraint};
pub use clean::{clean, CleanReport};
pub use rset::{r_set, verify_r_ordering, RMember, RSet};

use crate::error::{Error, Result};
use crate::graph::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathSystem {
    universe: usize,
    paths: Vec<Vec<Vertex>>,
}

impl PathSystem {
    pub fn new(universe: usize) -> Self {
        Self { universe, paths: Vec::new() }
    }

    pub fn from_paths(universe: usize, paths: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut s = Self::new(universe);
        for p in paths {
            s.push(p)?;
        }
        Ok(s)
    }

    /// Appends `path` as the last path in the order.
    pub fn push(&mut self, path: Vec<Vertex>) -> Result<()> {
        validate_path(&path, self.universe)?;
        self.paths.push(path);
        Ok(())
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn paths(&self) -> &[Vec<Vertex>] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> Result<&[Vertex]> {
        self.paths.get(i).map(Vec::as_slice).ok_or(Error::PathOutOfRange { index: i, len: self.paths.len() })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `‖S‖`: total number of vertex occurrences.
    pub fn size(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    /// Number of paths containing `v`.
    pub fn degree(&self, v: Vertex) -> Result<usize> {
        if v >= self.universe {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.universe });
        }
        Ok(self.paths.iter().filter(|p| p.contains(&v)).count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.universe];
        for p in &self.paths {
            for &v in p {
                deg[v] += 1;
            }
        }
        deg
    }

    /// A total vertex order agreeing with every path, or `None` when the
    /// precedence relation has a cycle. Ties go to the smallest id.
    pub fn acyclic_order(&self) -> Option<Vec<Vertex>> {
        let n = self.universe;
        let mut succ: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for p in &self.paths {
            for w in p.windows(2) {
                succ[w[0]].push(w[1]);
                indeg[w[1]] += 1;
            }
        }
        let mut ready: BinaryHeap<Reverse<Vertex>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(u)) = ready.pop() {
            order.push(u);
            for &w in &succ[u] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(Reverse(w));
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic_order().is_some()
    }

    /// Text form: `universe <n>` then one space-separated path per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "universe {}", self.universe).unwrap();
        for p in &self.paths {
            let line: Vec<String> = p.iter().map(ToString::to_string).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines =
            text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (idx, header) =
            lines.next().ok_or(Error::Parse { line: 1, msg: "missing `universe <n>` header".into() })?;
        let universe = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["universe", n] => {
                n.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("bad universe size `{n}`") })?
            }
            _ => {
                return Err(Error::Parse { line: idx + 1, msg: "expected `universe <n>`".into() });
            }
        };
        let mut s = Self::new(universe);
        for (idx, line) in lines {
            let path = line
                .split_whitespace()
                .map(|f| {
                    f.parse::<Vertex>()
                        .map_err(|_| Error::Parse { line: idx + 1, msg: format!("`{f}` is not a vertex id") })
                })
                .collect::<Result<Vec<_>>>()?;
            s.push(path).map_err(|e| Error::Parse { line: idx + 1, msg: e.to_string() })?;
        }
        Ok(s)
    }

    pub(crate) fn paths_mut(&mut self) -> &mut Vec<Vec<Vertex>> {
        &mut self.paths
    }

    pub(crate) fn set_universe(&mut self, universe: usize) {
        self.universe = universe;
    }
}

fn validate_path(path: &[Vertex], universe: usize) -> Result<()> {
    if path.is_empty() {
        return Err(Error::InvalidParameter("paths must be nonempty".into()));
    }
    let mut seen = std::collections::HashSet::with_capacity(path.len());
    for &v in path {
        if v >= universe {
            return Err(Error::VertexOutOfRange { vertex: v, n: universe });
        }
        if !seen.insert(v) {
            return Err(Error::InvalidParameter(format!("vertex {v} repeats within a path")));
        }
    }
    Ok(())
}

/// Per-vertex list of `(path index, position)` occurrences, ordered by path.
pub(crate) fn occurrences(s: &PathSystem) -> Vec<Vec<(usize, usize)>> {
    let mut occ = vec![Vec::new(); s.universe()];
    for (i, p) in s.paths().iter().enumerate() {
        for (pos, &v) in p.iter().enumerate() {
            occ[v].push((i, pos));
        }
    }
    occ
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(universe: usize, paths: &[&[Vertex]]) -> PathSystem {
        PathSystem::from_paths(universe, paths.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn size_examples() {
        assert_eq!(sys(3, &[&[0, 1, 2]]).size(), 3);
        assert_eq!(PathSystem::new(3).size(), 0);
        assert_eq!(sys(3, &[&[0, 1], &[1, 2], &[0, 2]]).size(), 6);
    }

    #[test]
    fn degree_examples() {
        let s = sys(4, &[&[0, 1], &[1, 2]]);
        assert_eq!(s.degree(1).unwrap(), 2);
        assert_eq!(s.degree(0).unwrap(), 1);
        assert_eq!(s.degree(3).unwrap(), 0);
        assert!(matches!(s.degree(4), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn acyclicity_examples() {
        assert_eq!(sys(3, &[&[0, 1], &[1, 2]]).acyclic_order(), Some(vec![0, 1, 2]));
        assert!(!sys(2, &[&[0, 1], &[1, 0]]).is_acyclic());
        assert!(!sys(4, &[&[0, 1, 2], &[2, 3], &[3, 0]]).is_acyclic());
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(PathSystem::from_paths(3, vec![vec![0, 1, 0]]).is_err());
        assert!(PathSystem::from_paths(3, vec![vec![3]]).is_err());
        assert!(PathSystem::from_paths(3, vec![vec![]]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = sys(5, &[&[0, 4, 2], &[3], &[1, 2]]);
        assert_eq!(PathSystem::parse(&s.to_text()).unwrap(), s);
        assert!(PathSystem::parse("paths 3\n0 1").is_err());
        assert!(matches!(PathSystem::parse("universe 3\n0 1\n0 7"), Err(Error::Parse { line: 3, .. })));
    }
}
