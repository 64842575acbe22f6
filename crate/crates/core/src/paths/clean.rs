//! Regularizing transformation: trims low-degree vertices and short paths,
//! then splits high-degree vertices and long paths, leaving every degree and
//! length within a constant factor of the input averages.

use super::PathSystem;
use crate::error::{Error, Result};
use crate::graph::Vertex;

#[derive(Debug, Clone, PartialEq)]
pub struct CleanReport {
    pub system: PathSystem,
    /// Average degree over the vertices that occur in some path.
    pub avg_degree: f64,
    pub avg_length: f64,
    /// Original vertex of every vertex id in `system`'s universe.
    pub origin: Vec<Vertex>,
}

/// Cleans `s` against its own averages `d = ‖s‖ / #used vertices` and
/// `ℓ = ‖s‖ / #paths`.
///
/// Deletion runs to a fixed point first; the splits that follow never push
/// anything back under a deletion threshold. Vertex copies take alternate
/// occurrences in path order, and a split path keeps its first (longer) half
/// in place with the second half inserted right after it.
pub fn clean(s: &PathSystem) -> Result<CleanReport> {
    if s.is_empty() {
        return Err(Error::InvalidParameter("cannot clean an empty path system".into()));
    }
    let total = s.size();
    let used = s.degrees().iter().filter(|&&d| d > 0).count();
    let count = s.len();
    // thresholds as exact integer comparisons against total = d * used = ℓ * count
    let low_degree = |deg: usize| 4 * deg * used < total;
    let high_degree = |deg: usize| deg * used > total;
    let short = |len: usize| 4 * len * count < total;
    let long = |len: usize| len * count > total;

    let mut paths: Vec<Vec<Vertex>> = s.paths().to_vec();
    let mut universe = s.universe();

    loop {
        let mut changed = false;
        let mut deg = vec![0usize; universe];
        for p in &paths {
            for &v in p {
                deg[v] += 1;
            }
        }
        for p in &mut paths {
            let before = p.len();
            p.retain(|&v| !low_degree(deg[v]));
            changed |= p.len() != before;
        }
        let before = paths.len();
        paths.retain(|p| !p.is_empty() && !short(p.len()));
        changed |= paths.len() != before;
        if !changed {
            break;
        }
    }

    let mut origin: Vec<Vertex> = (0..universe).collect();
    let mut deg = vec![0usize; universe];
    for p in &paths {
        for &v in p {
            deg[v] += 1;
        }
    }
    let mut work: Vec<Vertex> = (0..universe).filter(|&v| high_degree(deg[v])).collect();
    while let Some(v) = work.pop() {
        let copy = universe;
        universe += 1;
        origin.push(origin[v]);
        let mut flip = false;
        for p in &mut paths {
            if let Some(slot) = p.iter_mut().find(|x| **x == v) {
                if flip {
                    *slot = copy;
                }
                flip = !flip;
            }
        }
        let d = deg[v];
        deg[v] = d.div_ceil(2);
        deg.push(d / 2);
        for x in [v, copy] {
            if high_degree(deg[x]) {
                work.push(x);
            }
        }
    }

    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        split_path(p, &long, &mut out);
    }

    let mut system = PathSystem::new(universe);
    *system.paths_mut() = out;
    system.set_universe(universe);
    Ok(CleanReport { system, avg_degree: total as f64 / used as f64, avg_length: total as f64 / count as f64, origin })
}

fn split_path(p: Vec<Vertex>, long: &impl Fn(usize) -> bool, out: &mut Vec<Vec<Vertex>>) {
    if !long(p.len()) {
        out.push(p);
        return;
    }
    let mid = p.len().div_ceil(2);
    let (a, b) = p.split_at(mid);
    split_path(a.to_vec(), long, out);
    split_path(b.to_vec(), long, out);
}
