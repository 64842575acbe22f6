//! k-bridge detection with subsequence semantics.
//!
//! A k-bridge is a chain of distinct vertices `x_1, ..., x_k` together with
//! `k` pairwise distinct paths: a river containing `x_1` before `x_k`, and
//! for each `i` an arc containing `x_i` before `x_{i+1}`. The vertices only
//! need to appear in order, not consecutively.

use serde::{Deserialize, Serialize};

use super::{occurrences, PathSystem};
use crate::error::{Error, Result};
use crate::graph::Vertex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderConstraint {
    None,
    FirstArcBeforeRiver,
    LastArcBeforeRiver,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BridgeWitness {
    pub k: usize,
    pub chain: Vec<Vertex>,
    pub river: usize,
    pub arcs: Vec<usize>,
}

impl BridgeWitness {
    /// Checks the witness against `s` from scratch.
    pub fn validate(&self, s: &PathSystem, constraint: OrderConstraint) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.chain.len() != self.k || self.arcs.len() + 1 != self.k || self.k < 2 {
            return bad("witness shape does not match k".into());
        }
        let mut roles = self.arcs.clone();
        roles.push(self.river);
        let mut sorted = roles.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != roles.len() {
            return bad("bridge roles must be distinct paths".into());
        }
        let mut chain = self.chain.clone();
        chain.sort_unstable();
        chain.dedup();
        if chain.len() != self.k {
            return bad("chain vertices must be distinct".into());
        }
        let in_order = |path: usize, a: Vertex, b: Vertex| -> Result<bool> {
            let p = s.path(path)?;
            let pa = p.iter().position(|&v| v == a);
            let pb = p.iter().position(|&v| v == b);
            Ok(matches!((pa, pb), (Some(i), Some(j)) if i < j))
        };
        if !in_order(self.river, self.chain[0], self.chain[self.k - 1])? {
            return bad(format!("river {} does not span the chain", self.river));
        }
        for (i, &arc) in self.arcs.iter().enumerate() {
            if !in_order(arc, self.chain[i], self.chain[i + 1])? {
                return bad(format!("arc {arc} does not contain link {i}"));
            }
        }
        let ok = match constraint {
            OrderConstraint::None => true,
            OrderConstraint::FirstArcBeforeRiver => self.arcs[0] < self.river,
            OrderConstraint::LastArcBeforeRiver => self.arcs[self.k - 2] < self.river,
        };
        if !ok {
            return bad("ordering constraint not met".into());
        }
        Ok(())
    }
}

/// Exhaustive search for a k-bridge (2 <= k <= 4) subject to `constraint`.
///
/// Chains are enumerated lexicographically by vertex id; for a fixed chain
/// the smallest river is chosen, then the lexicographically smallest arcs.
/// The first witness in that order is returned.
pub fn find_k_bridge(s: &PathSystem, k: usize, constraint: OrderConstraint) -> Result<Option<BridgeWitness>> {
    Search::new(s, k, constraint, None).map(|mut search| search.run())
}

/// Like [`find_k_bridge`], restricted to bridges in which path `path` plays
/// some role. Every bridge of an ordered system built by appending paths
/// shows up in exactly the first call made after its last path arrived.
pub fn find_k_bridge_involving(
    s: &PathSystem,
    k: usize,
    constraint: OrderConstraint,
    path: usize,
) -> Result<Option<BridgeWitness>> {
    s.path(path)?;
    Search::new(s, k, constraint, Some(path)).map(|mut search| search.run())
}

struct Search<'a> {
    s: &'a PathSystem,
    k: usize,
    constraint: OrderConstraint,
    occ: Vec<Vec<(usize, usize)>>,
    succ: Vec<Option<Vec<Vertex>>>,
    involving: Option<(usize, Vec<bool>)>,
}

impl<'a> Search<'a> {
    fn new(s: &'a PathSystem, k: usize, constraint: OrderConstraint, involving: Option<usize>) -> Result<Self> {
        if !(2..=4).contains(&k) {
            return Err(Error::InvalidParameter(format!("bridge size k={k} must be in 2..=4")));
        }
        let involving = involving.map(|j| {
            let mut on = vec![false; s.universe()];
            for &v in &s.paths()[j] {
                on[v] = true;
            }
            (j, on)
        });
        Ok(Self { s, k, constraint, occ: occurrences(s), succ: vec![None; s.universe()], involving })
    }

    fn successors(&mut self, x: Vertex) -> &[Vertex] {
        if self.succ[x].is_none() {
            let mut out: Vec<Vertex> =
                self.occ[x].iter().flat_map(|&(p, pos)| self.s.paths()[p][pos + 1..].iter().copied()).collect();
            out.sort_unstable();
            out.dedup();
            self.succ[x] = Some(out);
        }
        self.succ[x].as_deref().unwrap()
    }

    fn run(&mut self) -> Option<BridgeWitness> {
        let mut chain = Vec::with_capacity(self.k);
        for x1 in 0..self.s.universe() {
            if self.occ[x1].len() < 2 {
                continue;
            }
            chain.push(x1);
            if let Some(w) = self.extend(&mut chain) {
                return Some(w);
            }
            chain.pop();
        }
        None
    }

    fn extend(&mut self, chain: &mut Vec<Vertex>) -> Option<BridgeWitness> {
        let last = *chain.last().unwrap();
        let mut next: Vec<Vertex> = self.successors(last).to_vec();
        if chain.len() + 1 == self.k {
            // the final vertex must also follow x_1 on the river
            let first = self.successors(chain[0]);
            next.retain(|v| first.binary_search(v).is_ok());
        }
        for v in next {
            if chain.contains(&v) || self.occ[v].len() < 2 {
                continue;
            }
            chain.push(v);
            let found = if chain.len() == self.k { self.assign(chain) } else { self.extend(chain) };
            chain.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Paths containing `a` strictly before `b`, ascending.
    fn ordered_paths(&self, a: Vertex, b: Vertex) -> Vec<usize> {
        let (oa, ob) = (&self.occ[a], &self.occ[b]);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < oa.len() && j < ob.len() {
            match oa[i].0.cmp(&ob[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if oa[i].1 < ob[j].1 {
                        out.push(oa[i].0);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    fn assign(&self, chain: &[Vertex]) -> Option<BridgeWitness> {
        if let Some((_, on)) = &self.involving {
            if chain.iter().filter(|&&v| on[v]).count() < 2 {
                return None;
            }
        }
        let k = self.k;
        let mut roles = Vec::with_capacity(k);
        roles.push(self.ordered_paths(chain[0], chain[k - 1]));
        for w in chain.windows(2) {
            roles.push(self.ordered_paths(w[0], w[1]));
        }
        if roles.iter().any(Vec::is_empty) {
            return None;
        }
        let mut picked = Vec::with_capacity(k);
        if self.pick(&roles, &mut picked) {
            Some(BridgeWitness { k, chain: chain.to_vec(), river: picked[0], arcs: picked[1..].to_vec() })
        } else {
            None
        }
    }

    fn pick(&self, roles: &[Vec<usize>], picked: &mut Vec<usize>) -> bool {
        let depth = picked.len();
        if depth == roles.len() {
            let river = picked[0];
            let ordered = match self.constraint {
                OrderConstraint::None => true,
                OrderConstraint::FirstArcBeforeRiver => picked[1] < river,
                OrderConstraint::LastArcBeforeRiver => picked[depth - 1] < river,
            };
            let involves = match &self.involving {
                Some((j, _)) => picked.contains(j),
                None => true,
            };
            return ordered && involves;
        }
        for &p in &roles[depth] {
            if picked.contains(&p) {
                continue;
            }
            picked.push(p);
            if self.pick(roles, picked) {
                return true;
            }
            picked.pop();
        }
        false
    }
}
