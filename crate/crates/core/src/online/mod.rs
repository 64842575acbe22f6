//! Online reachability preservers built by greedy path growth.
//!
//! Each demand pair gets a path grown one edge at a time, either from the
//! source forwards or from the sink backwards, always preferring an edge that
//! is already in the preserver. The session records, per pair, the ordered
//! auxiliary path system `Z` whose structure certifies the size bounds.

mod condensed;
mod envelope;
mod session;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use condensed::CondensedSession;
pub use envelope::{pairwise_tripwire, size_envelope_source_restricted, DEFAULT_ENVELOPE_C, DEFAULT_TRIPWIRE_C};
pub use session::{PairRecord, PreserverSession, SessionReport, SizeIdentity};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Direction, Vertex};
use crate::paths::OrderConstraint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "fw")]
    Forwards,
    #[serde(rename = "bw")]
    Backwards,
}

impl Mode {
    /// The ordered bridges this mode never produces in `Z`.
    pub fn forbidden(self) -> OrderConstraint {
        match self {
            Mode::Forwards => OrderConstraint::FirstArcBeforeRiver,
            Mode::Backwards => OrderConstraint::LastArcBeforeRiver,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Forwards => "fw",
            Mode::Backwards => "bw",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fw" | "forwards" => Ok(Mode::Forwards),
            "bw" | "backwards" => Ok(Mode::Backwards),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeChoice {
    SmallestId,
    LargestId,
    Random { seed: u64 },
}

/// Path-selection policy. The default grows by `mode`, prefers preserver
/// edges, and breaks ties towards the smallest neighbor id.
#[derive(Debug, Clone)]
pub struct Selector {
    mode: Mode,
    prefer_preserver: bool,
    choice: EdgeChoice,
    rng: Option<ChaCha8Rng>,
}

impl Selector {
    pub fn new(mode: Mode) -> Self {
        Self::with_policy(mode, true, EdgeChoice::SmallestId)
    }

    pub fn with_policy(mode: Mode, prefer_preserver: bool, choice: EdgeChoice) -> Self {
        let rng = match choice {
            EdgeChoice::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self { mode, prefer_preserver, choice, rng }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn prefers_preserver(&self) -> bool {
        self.prefer_preserver
    }

    pub fn choice(&self) -> EdgeChoice {
        self.choice
    }

    pub fn is_default_policy(&self) -> bool {
        self.prefer_preserver && self.choice == EdgeChoice::SmallestId
    }

    /// Vertices eligible as next hops for `(s, t)`: those reaching `t`
    /// (forwards) or reachable from `s` (backwards).
    pub fn eligibility(&self, g: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<bool>> {
        g.check_vertex(s)?;
        g.check_vertex(t)?;
        let mask = match self.mode {
            Mode::Forwards => g.reach_mask(t, Direction::Reverse)?,
            Mode::Backwards => g.reach_mask(s, Direction::Forward)?,
        };
        let feasible = match self.mode {
            Mode::Forwards => mask[s],
            Mode::Backwards => mask[t],
        };
        if feasible {
            Ok(mask)
        } else {
            Err(Error::Infeasible { s, t })
        }
    }

    /// Grows the `s -> t` path given a precomputed eligibility mask. `g` must
    /// be a DAG and the pair feasible.
    pub(crate) fn grow(
        &mut self,
        g: &DirectedGraph,
        h: &DirectedGraph,
        s: Vertex,
        t: Vertex,
        eligible: &[bool],
    ) -> Vec<Vertex> {
        match self.mode {
            Mode::Forwards => {
                let mut path = vec![s];
                let mut u = s;
                while u != t {
                    u = self.step(h.out_neighbors(u), g.out_neighbors(u), eligible);
                    path.push(u);
                }
                path
            }
            Mode::Backwards => {
                let mut path = vec![t];
                let mut v = t;
                while v != s {
                    v = self.step(h.in_neighbors(v), g.in_neighbors(v), eligible);
                    path.push(v);
                }
                path.reverse();
                path
            }
        }
    }

    fn step(&mut self, preserved: &[Vertex], all: &[Vertex], eligible: &[bool]) -> Vertex {
        if self.prefer_preserver {
            if let Some(v) = self.choose(preserved, eligible) {
                return v;
            }
        }
        self.choose(all, eligible).expect("an eligible vertex always has an eligible neighbor")
    }

    fn choose(&mut self, candidates: &[Vertex], eligible: &[bool]) -> Option<Vertex> {
        let mut it = candidates.iter().copied().filter(|&v| eligible[v]);
        match self.choice {
            EdgeChoice::SmallestId => it.next(),
            EdgeChoice::LargestId => it.next_back(),
            EdgeChoice::Random { .. } => {
                let pool: Vec<Vertex> = it.collect();
                pool.choose(self.rng.as_mut().expect("random selector has an rng")).copied()
            }
        }
    }
}

fn grow_checked(mode: Mode, g: &DirectedGraph, h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
    if !g.is_dag() {
        return Err(Error::NotADag);
    }
    let mut selector = Selector::new(mode);
    let eligible = selector.eligibility(g, s, t)?;
    Ok(selector.grow(g, h, s, t, &eligible))
}

/// Grows an `s -> t` path front to back, taking a preserver edge out of the
/// current endpoint whenever one still leads to `t`. Does not modify `h`.
pub fn grow_forwards(g: &DirectedGraph, h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
    grow_checked(Mode::Forwards, g, h, s, t)
}

/// Mirror image of [`grow_forwards`]: grows from `t` back to `s`.
pub fn grow_backwards(g: &DirectedGraph, h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
    grow_checked(Mode::Backwards, g, h, s, t)
}
