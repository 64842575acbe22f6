use serde::{Deserialize, Serialize};

use super::PathSystem;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RMember {
    pub path: usize,
    /// Position of the shared vertex along the first path.
    pub first_pos: usize,
    /// Position of the shared vertex along the third path.
    pub third_pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RSet {
    pub members: Vec<RMember>,
    /// Some candidate met the first or third path more than once; its
    /// earliest meeting point along the candidate was used.
    pub multi_intersection: bool,
}

impl RSet {
    pub fn paths(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.path).collect()
    }
}

/// Paths `π_2` later than `π_{i3}` in the order that meet `π_{i1}` and then,
/// strictly further along `π_2`, meet `π_{i3}`. Sorted by where they meet
/// `π_{i1}`.
///
/// Meeting points are expected to be unique (no half-2-bridges); otherwise
/// the earliest point along `π_2` is used and `multi_intersection` is set.
pub fn r_set(s: &PathSystem, i1: usize, i3: usize) -> Result<RSet> {
    let first = s.path(i1)?;
    let third = s.path(i3)?;
    let mut first_pos = vec![usize::MAX; s.universe()];
    let mut third_pos = vec![usize::MAX; s.universe()];
    for (i, &v) in first.iter().enumerate() {
        first_pos[v] = i;
    }
    for (i, &v) in third.iter().enumerate() {
        third_pos[v] = i;
    }

    let mut out = RSet::default();
    for i2 in i3 + 1..s.len() {
        if i2 == i1 {
            continue;
        }
        let p2 = &s.paths()[i2];
        let mut a: Option<(usize, usize)> = None;
        let mut b: Option<(usize, usize)> = None;
        let (mut hits1, mut hits3) = (0, 0);
        for (pos, &v) in p2.iter().enumerate() {
            if first_pos[v] != usize::MAX {
                hits1 += 1;
                a.get_or_insert((pos, first_pos[v]));
            }
            if third_pos[v] != usize::MAX {
                hits3 += 1;
                b.get_or_insert((pos, third_pos[v]));
            }
        }
        if let (Some((pa, fa)), Some((pb, tb))) = (a, b) {
            if hits1 > 1 || hits3 > 1 {
                out.multi_intersection = true;
            }
            if pa < pb {
                out.members.push(RMember { path: i2, first_pos: fa, third_pos: tb });
            }
        }
    }
    out.members.sort_by_key(|m| (m.first_pos, m.path));
    Ok(out)
}

/// Checks that the R-set is totally ordered: meeting points along the first
/// path strictly increase while those along the third path never decrease,
/// and the set is no larger than the first path.
pub fn verify_r_ordering(s: &PathSystem, i1: usize, i3: usize) -> Result<bool> {
    let r = r_set(s, i1, i3)?;
    let monotone = r.members.windows(2).all(|w| w[0].first_pos < w[1].first_pos && w[0].third_pos <= w[1].third_pos);
    Ok(monotone && r.members.len() <= s.path(i1)?.len())
}
