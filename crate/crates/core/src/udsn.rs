//! Online unweighted directed Steiner network simulator.
//!
//! The first `T` nontrivial pairs go to a pluggable handler. Right after the
//! `T`-th, a vertex sample `S` is drawn. Every later nontrivial pair hit by
//! `S` at some `v` is split into the legs `(s, v)` and `(v, t)`, served by two
//! online preserver sessions whose demands share the sink set and source set
//! `S` respectively. Pairs missed by `S` go to a second handler; they are
//! thin unless the sample was unlucky, which is checked and reported.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Direction, Edge, Vertex};
use crate::online::{Mode, PreserverSession};

pub const DEFAULT_SAMPLING_C: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UdsnParams {
    /// Thickness threshold.
    pub tau: usize,
    /// Nontrivial pairs handled before sampling.
    pub first_budget: usize,
    /// Sampling constant.
    pub c: f64,
    /// Exponent knob made available to handlers; unused by the defaults.
    pub epsilon: f64,
}

impl UdsnParams {
    /// `τ = ⌈n^{3/5}⌉`, `T = ⌈n^{6/5}⌉`.
    pub fn defaults(n: usize) -> Self {
        let n = n as f64;
        Self {
            tau: n.powf(0.6).ceil() as usize,
            first_budget: n.powf(1.2).ceil() as usize,
            c: DEFAULT_SAMPLING_C,
            epsilon: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::InvalidParameter("tau must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter("sampling constant must be positive".into()));
        }
        Ok(())
    }
}

/// `min(n, ⌈c n ln n / τ⌉)`.
pub fn sample_size(n: usize, tau: usize, c: f64) -> usize {
    if n == 0 || tau == 0 {
        return 0;
    }
    let nf = n as f64;
    let k = (c * nf * nf.ln() / tau as f64).ceil();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(n)
    }
}

/// Vertices on some `s -> t` path: reachable from `s` and reaching `t`.
fn on_path_mask(g: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<bool>> {
    let from = g.reach_mask(s, Direction::Forward)?;
    let to = g.reach_mask(t, Direction::Reverse)?;
    if !from[t] {
        return Err(Error::Infeasible { s, t });
    }
    Ok(from.iter().zip(&to).map(|(&a, &b)| a && b).collect())
}

/// Number of vertices lying on some `s -> t` path.
pub fn on_path_count(g: &DirectedGraph, s: Vertex, t: Vertex) -> Result<usize> {
    Ok(on_path_mask(g, s, t)?.into_iter().filter(|&b| b).count())
}

/// Whether at most `tau` vertices lie on `s -> t` paths.
pub fn is_thin(g: &DirectedGraph, s: Vertex, t: Vertex, tau: usize) -> Result<bool> {
    Ok(on_path_count(g, s, t)? <= tau)
}

/// Smallest sampled vertex on some `s -> t` path.
pub fn hit_by(g: &DirectedGraph, s: Vertex, t: Vertex, sample: &[Vertex]) -> Option<Vertex> {
    let mask = on_path_mask(g, s, t).ok()?;
    sample.iter().copied().filter(|&v| mask.get(v).copied().unwrap_or(false)).min()
}

/// Serves pairs the framework does not route itself. Returns the edges to
/// add to the output preserver; they must form an `s -> t` connection in
/// `g` together with `h`.
pub trait PairHandler: Send {
    fn name(&self) -> &str;
    fn serve(&mut self, g: &DirectedGraph, h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Edge>>;
}

/// Adds a BFS shortest path of `g`.
#[derive(Debug, Clone, Default)]
pub struct ShortestPathHandler;

impl PairHandler for ShortestPathHandler {
    fn name(&self) -> &str {
        "shortest-path"
    }

    fn serve(&mut self, g: &DirectedGraph, _h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Edge>> {
        Ok(g.shortest_path(s, t)?.windows(2).map(|w| (w[0], w[1])).collect())
    }
}

/// `(first-phase handler, thin handler)`, both [`ShortestPathHandler`].
pub fn default_handlers() -> (Box<dyn PairHandler>, Box<dyn PairHandler>) {
    (Box::new(ShortestPathHandler), Box::new(ShortestPathHandler))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Trivial,
    First,
    Thick,
    Thin,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Trivial => "trivial",
            Route::First => "first",
            Route::Thick => "thick",
            Route::Thin => "thin",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub pair: Edge,
    pub tag: Route,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_node: Option<Vertex>,
    /// Edges charged to this pair by whichever component served it.
    pub cost_delta: usize,
}

impl PairOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }
}

/// A pair the sample missed although more than `tau` vertices lie on its
/// paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingFailure {
    pub pair: Edge,
    pub on_path: usize,
    pub tau: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub first: usize,
    pub thick: usize,
    pub thin: usize,
}

impl CostLedger {
    pub fn total(&self) -> usize {
        self.first + self.thick + self.thin
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub edges: usize,
    pub opt_lower_bound: usize,
    pub ratio: f64,
    pub sampling_failures: Vec<SamplingFailure>,
    /// False while any stand-in handler is in use.
    pub certified: bool,
}

pub struct UdsnSession {
    g: DirectedGraph,
    params: UdsnParams,
    seed: u64,
    sample: Option<Vec<Vertex>>,
    fw: PreserverSession,
    bw: PreserverSession,
    first_handler: Box<dyn PairHandler>,
    thin_handler: Box<dyn PairHandler>,
    h: DirectedGraph,
    ledger: CostLedger,
    nontrivial: usize,
    hits: usize,
    terminals: BTreeSet<Vertex>,
    failures: Vec<SamplingFailure>,
    outcomes: Vec<PairOutcome>,
}

impl fmt::Debug for UdsnSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UdsnSession")
            .field("params", &self.params)
            .field("seed", &self.seed)
            .field("sample", &self.sample)
            .field("nontrivial", &self.nontrivial)
            .field("edges", &self.h.edge_count())
            .finish_non_exhaustive()
    }
}

impl UdsnSession {
    pub fn new(g: DirectedGraph, params: UdsnParams, seed: u64) -> Result<Self> {
        let (first, thin) = default_handlers();
        Self::with_handlers(g, params, seed, first, thin)
    }

    pub fn with_handlers(
        g: DirectedGraph,
        params: UdsnParams,
        seed: u64,
        first_handler: Box<dyn PairHandler>,
        thin_handler: Box<dyn PairHandler>,
    ) -> Result<Self> {
        params.validate()?;
        let fw = PreserverSession::new(g.clone(), Mode::Forwards)?;
        let bw = PreserverSession::new(g.clone(), Mode::Backwards)?;
        let mut session = Self {
            h: DirectedGraph::empty(g.n()),
            g,
            params,
            seed,
            sample: None,
            fw,
            bw,
            first_handler,
            thin_handler,
            ledger: CostLedger::default(),
            nontrivial: 0,
            hits: 0,
            terminals: BTreeSet::new(),
            failures: Vec::new(),
            outcomes: Vec::new(),
        };
        if params.first_budget == 0 {
            session.draw_sample();
        }
        Ok(session)
    }

    pub fn g(&self) -> &DirectedGraph {
        &self.g
    }

    /// The output preserver.
    pub fn h(&self) -> &DirectedGraph {
        &self.h
    }

    pub fn params(&self) -> &UdsnParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The sample, once the main phase has started.
    pub fn sample(&self) -> Option<&[Vertex]> {
        self.sample.as_deref()
    }

    pub fn in_main_phase(&self) -> bool {
        self.sample.is_some()
    }

    /// Session serving the `(s, v)` legs, whose sinks lie in the sample.
    pub fn sink_leg_session(&self) -> &PreserverSession {
        &self.fw
    }

    /// Session serving the `(v, t)` legs, whose sources lie in the sample.
    pub fn source_leg_session(&self) -> &PreserverSession {
        &self.bw
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger
    }

    pub fn nontrivial_count(&self) -> usize {
        self.nontrivial
    }

    pub fn hit_count(&self) -> usize {
        self.hits
    }

    pub fn sampling_failures(&self) -> &[SamplingFailure] {
        &self.failures
    }

    pub fn outcomes(&self) -> &[PairOutcome] {
        &self.outcomes
    }

    fn draw_sample(&mut self) {
        let n = self.g.n();
        let k = sample_size(n, self.params.tau, self.params.c);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut sample = rand::seq::index::sample(&mut rng, n, k).into_vec();
        sample.sort_unstable();
        self.sample = Some(sample);
    }

    fn absorb(&mut self, edges: impl IntoIterator<Item = Edge>) -> Result<usize> {
        let mut added = 0;
        for (u, v) in edges {
            if !self.g.has_edge(u, v) {
                return Err(Error::MissingEdge(u, v));
            }
            if self.h.add_edge(u, v)? {
                added += 1;
            }
        }
        Ok(added)
    }

    fn run_handler(&mut self, thin: bool, s: Vertex, t: Vertex) -> Result<usize> {
        let handler = if thin { &mut self.thin_handler } else { &mut self.first_handler };
        let edges = handler.serve(&self.g, &self.h, s, t)?;
        let added = self.absorb(edges)?;
        if !self.h.reaches(s, t)? {
            let name = if thin { self.thin_handler.name() } else { self.first_handler.name() };
            return Err(Error::InvalidParameter(format!("handler `{name}` left ({s}, {t}) unconnected")));
        }
        Ok(added)
    }

    /// Serves one demand pair. An infeasible pair leaves the session untouched.
    pub fn serve_pair(&mut self, s: Vertex, t: Vertex) -> Result<PairOutcome> {
        self.g.check_vertex(s)?;
        self.g.check_vertex(t)?;
        let mask = on_path_mask(&self.g, s, t)?;
        if s != t {
            self.terminals.insert(s);
            self.terminals.insert(t);
        }

        let outcome = if self.h.reaches(s, t)? {
            PairOutcome { pair: (s, t), tag: Route::Trivial, hit_node: None, cost_delta: 0 }
        } else {
            self.nontrivial += 1;
            // sample is sorted, so the first hit is the smallest
            let hit = self.sample.as_ref().map(|sample| sample.iter().copied().find(|&v| mask[v]));
            match hit {
                None => {
                    let cost = self.run_handler(false, s, t)?;
                    self.ledger.first += cost;
                    if self.nontrivial == self.params.first_budget {
                        self.draw_sample();
                    }
                    PairOutcome { pair: (s, t), tag: Route::First, hit_node: None, cost_delta: cost }
                }
                Some(hit) => match hit {
                    Some(v) => {
                        let mut legs = Vec::new();
                        if s != v {
                            legs.extend(self.fw.serve_pair(s, v)?);
                        }
                        if v != t {
                            legs.extend(self.bw.serve_pair(v, t)?);
                        }
                        let cost = legs.len();
                        self.absorb(legs)?;
                        self.ledger.thick += cost;
                        self.hits += 1;
                        PairOutcome { pair: (s, t), tag: Route::Thick, hit_node: Some(v), cost_delta: cost }
                    }
                    None => {
                        let on_path = mask.iter().filter(|&&b| b).count();
                        if on_path > self.params.tau {
                            self.failures.push(SamplingFailure { pair: (s, t), on_path, tau: self.params.tau });
                        }
                        let cost = self.run_handler(true, s, t)?;
                        self.ledger.thin += cost;
                        PairOutcome { pair: (s, t), tag: Route::Thin, hit_node: None, cost_delta: cost }
                    }
                },
            }
        };
        self.outcomes.push(outcome.clone());
        Ok(outcome)
    }

    /// Terminal-counting lower bound on the optimum: each bound counts
    /// terminals that need an incident edge, halved since an edge has two
    /// endpoints.
    pub fn opt_lower_bound(&self) -> usize {
        let by_terminals = self.terminals.len().div_ceil(2);
        let by_count = ((self.nontrivial as f64).sqrt() / 2.0).ceil() as usize;
        let by_hits = match self.sample.as_ref().map(Vec::len) {
            Some(k) if k > 0 => (self.hits as f64 / k as f64 / 2.0).ceil() as usize,
            _ => 0,
        };
        by_terminals.max(by_count).max(by_hits)
    }

    pub fn summary(&self) -> RunSummary {
        let edges = self.h.edge_count();
        let lb = self.opt_lower_bound();
        RunSummary {
            edges,
            opt_lower_bound: lb,
            ratio: if lb == 0 { 0.0 } else { edges as f64 / lb as f64 },
            sampling_failures: self.failures.clone(),
            certified: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::{Arc, Mutex};

    use super::*;

    fn path3() -> DirectedGraph {
        DirectedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn params(tau: usize, first_budget: usize) -> UdsnParams {
        UdsnParams { tau, first_budget, c: DEFAULT_SAMPLING_C, epsilon: 0.0 }
    }

    #[test]
    fn thin_thresholds() {
        let g = path3();
        assert!(is_thin(&g, 0, 2, 3).unwrap());
        assert!(!is_thin(&g, 0, 2, 2).unwrap());
        assert!(is_thin(&g, 1, 1, 1).unwrap());
        assert_eq!(is_thin(&g, 2, 0, 5), Err(Error::Infeasible { s: 2, t: 0 }));
    }

    #[test]
    fn hitting() {
        let g = path3();
        assert_eq!(hit_by(&g, 0, 2, &[1]), Some(1));
        assert_eq!(hit_by(&g, 2, 0, &[1]), None);
        assert_eq!(hit_by(&g, 0, 2, &[]), None);
        assert_eq!(hit_by(&g, 0, 2, &[2, 0]), Some(0));
    }

    #[test]
    fn default_parameters() {
        let p = UdsnParams::defaults(32);
        assert_eq!(p.tau, 8);
        assert_eq!(p.first_budget, 64);
        assert_eq!(sample_size(1, 1, 2.0), 0);
        assert_eq!(sample_size(10, 1, 2.0), 10);
        // 2 * 100 * ln 100 / 16 = 57.56...
        assert_eq!(sample_size(100, 16, 2.0), 58);
    }

    #[test]
    fn thick_route_through_sample() {
        let g = DirectedGraph::from_edges(5, (0..4).map(|i| (i, i + 1))).unwrap();
        // c large enough that the sample is every vertex
        let mut s = UdsnSession::new(g, UdsnParams { tau: 1, first_budget: 0, c: 100.0, epsilon: 0.0 }, 1).unwrap();
        assert_eq!(s.sample().unwrap(), &[0, 1, 2, 3, 4]);
        let out = s.serve_pair(1, 4).unwrap();
        assert_eq!(out.tag, Route::Thick);
        assert_eq!(out.hit_node, Some(1));
        assert_eq!(out.cost_delta, 3);
        assert_eq!(s.source_leg_session().pairs_served(), 1);
        assert_eq!(s.sink_leg_session().pairs_served(), 0);
        assert!(s.h().reaches(1, 4).unwrap());
        let again = s.serve_pair(2, 3).unwrap();
        assert_eq!((again.tag, again.cost_delta), (Route::Trivial, 0));
    }

    #[test]
    fn thin_route_when_missed() {
        let g = DirectedGraph::from_edges(2, [(0, 1)]).unwrap();
        let mut s = UdsnSession::new(g, params(2, 0), 5).unwrap();
        s.sample = Some(Vec::new());
        let out = s.serve_pair(0, 1).unwrap();
        assert_eq!(out.tag, Route::Thin);
        assert!(s.sampling_failures().is_empty());
    }

    #[test]
    fn missed_thick_pair_is_reported() {
        let g = path3();
        let mut s = UdsnSession::new(g, params(2, 0), 5).unwrap();
        // an honest sample here would be all of V, so plant an unlucky one
        s.sample = Some(Vec::new());
        let out = s.serve_pair(0, 2).unwrap();
        assert_eq!(out.tag, Route::Thin);
        assert_eq!(s.sampling_failures(), &[SamplingFailure { pair: (0, 2), on_path: 3, tau: 2 }]);
    }

    #[test]
    fn phase_flips_after_budget() {
        let g = DirectedGraph::from_edges(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        let mut s = UdsnSession::new(g, params(1, 2), 9).unwrap();
        assert_eq!(s.serve_pair(0, 1).unwrap().tag, Route::First);
        assert!(!s.in_main_phase());
        assert_eq!(s.serve_pair(0, 1).unwrap().tag, Route::Trivial);
        assert!(!s.in_main_phase());
        assert_eq!(s.serve_pair(2, 3).unwrap().tag, Route::First);
        assert!(s.in_main_phase());
        assert_eq!(s.ledger().first, 2);
    }

    #[test]
    fn infeasible_leaves_state() {
        let mut s = UdsnSession::new(path3(), params(1, 3), 0).unwrap();
        assert_eq!(s.serve_pair(2, 0), Err(Error::Infeasible { s: 2, t: 0 }));
        assert!(s.outcomes().is_empty());
        assert_eq!(s.opt_lower_bound(), 0);
    }

    #[test]
    fn lower_bound_counts_terminals() {
        let g = DirectedGraph::from_edges(8, [(0, 1), (2, 3), (4, 5), (6, 7)]).unwrap();
        let mut s = UdsnSession::new(g, params(1, 100), 0).unwrap();
        s.serve_pair(0, 1).unwrap();
        assert_eq!(s.opt_lower_bound(), 1);
        for (a, b) in [(2, 3), (4, 5), (6, 7)] {
            s.serve_pair(a, b).unwrap();
        }
        assert_eq!(s.opt_lower_bound(), 4);
        let sum = s.summary();
        assert_eq!((sum.edges, sum.ratio), (4, 1.0));
        assert!(!sum.certified);
    }

    #[test]
    fn default_handlers_add_shortest_path() {
        let (mut first, mut thin) = default_handlers();
        let g = DirectedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let h = DirectedGraph::empty(3);
        assert_eq!(thin.serve(&path3(), &h, 0, 2).unwrap(), vec![(0, 1), (1, 2)]);
        assert_eq!(first.serve(&g, &h, 0, 2).unwrap(), vec![(0, 2)]);
    }

    struct Recorder(Arc<Mutex<Vec<(usize, Edge)>>>);

    impl PairHandler for Recorder {
        fn name(&self) -> &str {
            "recorder"
        }

        fn serve(&mut self, g: &DirectedGraph, h: &DirectedGraph, s: Vertex, t: Vertex) -> Result<Vec<Edge>> {
            self.0.lock().unwrap().push((h.edge_count(), (s, t)));
            ShortestPathHandler.serve(g, h, s, t)
        }
    }

    #[test]
    fn custom_handler_sees_the_pair() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let g = DirectedGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let mut s = UdsnSession::with_handlers(
            g,
            params(1, 5),
            0,
            Box::new(Recorder(log.clone())),
            Box::new(ShortestPathHandler),
        )
        .unwrap();
        s.serve_pair(0, 1).unwrap();
        s.serve_pair(2, 3).unwrap();
        assert_eq!(*log.lock().unwrap(), vec![(0, (0, 1)), (1, (2, 3))]);
    }

    #[test]
    fn rejects_cyclic_and_bad_params() {
        let cyc = DirectedGraph::from_edges(2, [(0, 1), (1, 0)]).unwrap();
        assert!(matches!(UdsnSession::new(cyc, params(1, 1), 0), Err(Error::NotADag)));
        assert!(UdsnSession::new(path3(), params(0, 1), 0).is_err());
    }
}
