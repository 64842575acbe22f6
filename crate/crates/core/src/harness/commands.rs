use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::bench::{bench_sweep, SweepGrid};
use crate::error::{Error, Result};
use crate::graph::{load_graph, load_pairs, parse_pair_line, DirectedGraph, Edge, Vertex};
use crate::nonadaptive::{
    level_disagreements, precompute_index_sensitive, precompute_known_p, scaled_surrogate, select_path,
    surrogate_monitor, tables_from_json_lines, tables_to_json_lines,
};
use crate::online::{
    size_envelope_source_restricted, CondensedSession, EdgeChoice, Mode, PreserverSession, Selector, DEFAULT_ENVELOPE_C,
};
use crate::oracle::{generate, min_preserver, preserves, InstanceFamily};
use crate::udsn::{UdsnParams, UdsnSession};

/// Path standing for standard input in pair-stream arguments.
pub const STDIN: &str = "-";

/// A fully specified command: everything that determines its primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandSpec {
    Preserve { graph: PathBuf, pairs: PathBuf, mode: Mode, max_k: usize },
    Precompute { graph: PathBuf, mode: Mode, p: Option<usize>, p_star: Option<usize>, surrogate_c: f64, monitor: bool },
    Select { tables: PathBuf, index: usize, pair: Edge },
    Udsn { graph: PathBuf, pairs: PathBuf, seed: u64, tau: Option<usize>, first_budget: Option<usize>, c: Option<f64> },
    Oracle { graph: PathBuf, pairs: PathBuf },
    Gen { family: InstanceFamily },
    Bench { grid: SweepGrid },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Preserve { .. } => "preserve",
            CommandSpec::Precompute { .. } => "precompute",
            CommandSpec::Select { .. } => "select",
            CommandSpec::Udsn { .. } => "udsn",
            CommandSpec::Oracle { .. } => "oracle",
            CommandSpec::Gen { .. } => "gen",
            CommandSpec::Bench { .. } => "bench",
        }
    }

    /// Files the command reads.
    pub fn inputs(&self) -> Vec<&Path> {
        match self {
            CommandSpec::Preserve { graph, pairs, .. }
            | CommandSpec::Udsn { graph, pairs, .. }
            | CommandSpec::Oracle { graph, pairs } => vec![graph.as_path(), pairs.as_path()],
            CommandSpec::Precompute { graph, .. } => vec![graph.as_path()],
            CommandSpec::Select { tables, .. } => vec![tables.as_path()],
            CommandSpec::Gen { .. } | CommandSpec::Bench { .. } => Vec::new(),
        }
    }

    /// Points every standard-input argument at `path`.
    pub fn replace_stdin(&mut self, path: &Path) {
        if let CommandSpec::Preserve { pairs, .. } | CommandSpec::Udsn { pairs, .. } = self {
            if pairs.as_os_str() == STDIN {
                *pairs = path.to_path_buf();
            }
        }
    }
}

/// Overrides applied on top of a command, used to inject faults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Replaces the preserve command's path-selection policy.
    pub policy: Option<(bool, EdgeChoice)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Deterministic output, one line per record, newline-terminated.
    pub primary: String,
    pub summary: Value,
    /// No check failed.
    pub passed: bool,
    /// Text read from standard input, if any.
    pub stdin: Option<String>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Streams pairs from a file or standard input. Malformed lines abort.
fn for_each_pair(path: &Path, mut f: impl FnMut(Vertex, Vertex) -> Result<()>) -> Result<Option<String>> {
    if path.as_os_str() == STDIN {
        let mut seen = String::new();
        for (i, line) in io::stdin().lock().lines().enumerate() {
            let line = line?;
            seen.push_str(&line);
            seen.push('\n');
            if let Some((s, t)) = parse_pair_line(&line, i + 1)? {
                f(s, t)?;
            }
        }
        Ok(Some(seen))
    } else {
        for (s, t) in load_pairs(&read(path)?)? {
            f(s, t)?;
        }
        Ok(None)
    }
}

struct Emitter<'a> {
    primary: String,
    sink: &'a mut dyn FnMut(&str),
}

impl Emitter<'_> {
    fn line(&mut self, line: &str) {
        (self.sink)(line);
        self.primary.push_str(line);
        self.primary.push('\n');
    }

    fn block(&mut self, text: &str) {
        for l in text.lines() {
            self.line(l);
        }
    }
}

/// Whether an error concerns only the offending pair, so a stream can go on.
fn is_pair_error(e: &Error) -> bool {
    matches!(e, Error::Infeasible { .. } | Error::VertexOutOfRange { .. })
}

fn rejected_line(s: Vertex, t: Vertex, e: &Error) -> String {
    json!({"pair": [s, t], "error": e.to_string()}).to_string()
}

pub fn run(spec: &CommandSpec, opts: &RunOptions) -> Result<RunOutput> {
    run_streaming(spec, opts, &mut |_| {})
}

/// Runs `spec`, passing each primary output line to `sink` as soon as it is
/// produced.
pub fn run_streaming(spec: &CommandSpec, opts: &RunOptions, sink: &mut dyn FnMut(&str)) -> Result<RunOutput> {
    let mut out = Emitter { primary: String::new(), sink };
    let (summary, passed, stdin) = match spec {
        CommandSpec::Preserve { graph, pairs, mode, max_k } => {
            run_preserve(graph, pairs, *mode, *max_k, opts, &mut out)?
        }
        CommandSpec::Precompute { graph, mode, p, p_star, surrogate_c, monitor } => {
            let g = load_graph(&read(graph)?)?;
            let surrogate = scaled_surrogate(*surrogate_c);
            let tables = match p {
                Some(p) => vec![precompute_known_p(&g, *p, &surrogate, *mode)?],
                None => precompute_index_sensitive(&g, &surrogate, *mode, p_star.unwrap_or(g.n().max(1)))?,
            };
            out.block(&tables_to_json_lines(&tables));
            let mut all_hold = true;
            let mut levels = Vec::new();
            for t in &tables {
                let mut level = json!({
                    "level": t.level,
                    "pairs": t.len(),
                    "greedy": t.greedy_count(),
                    "frozen_edges": t.frozen_edges().len(),
                    "budget": surrogate.evaluate(g.n(), t.level),
                });
                if *monitor {
                    let m = surrogate_monitor(&g, t.level, &surrogate, *mode)?;
                    all_hold &= m.holds();
                    level["monitor"] = json!({"rounds": m.rounds, "h_edges": m.h_edges, "holds": m.holds()});
                }
                levels.push(level);
            }
            let summary = json!({
                "surrogate": surrogate.name(),
                "levels": levels,
                "level_disagreements": level_disagreements(&tables).len(),
            });
            (summary, all_hold, None)
        }
        CommandSpec::Select { tables, index, pair } => {
            let tables = tables_from_json_lines(&read(tables)?)?;
            let path = select_path(&tables, pair.0, pair.1, *index)?;
            let text: Vec<String> = path.iter().map(|v| v.to_string()).collect();
            out.line(&text.join(" "));
            (json!({"index": index, "length": path.len() - 1}), true, None)
        }
        CommandSpec::Udsn { graph, pairs, seed, tau, first_budget, c } => {
            let g = load_graph(&read(graph)?)?;
            let mut params = UdsnParams::defaults(g.n());
            if let Some(tau) = tau {
                params.tau = *tau;
            }
            if let Some(t) = first_budget {
                params.first_budget = *t;
            }
            if let Some(c) = c {
                params.c = *c;
            }
            run_udsn(g, pairs, params, *seed, &mut out)?
        }
        CommandSpec::Oracle { graph, pairs } => {
            let g = load_graph(&read(graph)?)?;
            let pairs = load_pairs(&read(pairs)?)?;
            let opt = min_preserver(&g, &pairs)?;
            out.line(&format!("opt {}", opt.len()));
            for (u, v) in &opt {
                out.line(&format!("{u} {v}"));
            }
            let ok = preserves(g.n(), &opt, &pairs);
            (json!({"opt": opt.len(), "checked": ok}), ok, None)
        }
        CommandSpec::Gen { family } => {
            let inst = generate(family)?;
            out.block(&inst.graph.to_edge_list());
            out.line(PAIRS_MARKER);
            for (s, t) in &inst.pairs {
                out.line(&format!("{s} {t}"));
            }
            let summary = json!({
                "kind": family.kind(),
                "n": inst.graph.n(),
                "edges": inst.graph.edge_count(),
                "pairs": inst.pairs.len(),
                "terminals": inst.terminals,
            });
            (summary, true, None)
        }
        CommandSpec::Bench { grid } => {
            let report = bench_sweep(grid);
            out.block(&report.to_csv(false));
            let summary = json!({
                "cells": report.rows.len(),
                "flagged": report.flagged(),
                "failed": report.rows.iter().filter(|r| r.failed()).count(),
                "bridge_violations": report.bridge_violations(),
            });
            (summary, report.passed(), None)
        }
    };
    Ok(RunOutput { primary: out.primary, summary, passed, stdin })
}

/// Separates the graph from the pair stream in `gen` output.
pub const PAIRS_MARKER: &str = "# pairs";

/// Splits `gen` output into graph text and pair text.
pub fn split_instance_text(text: &str) -> (&str, &str) {
    match text.find(PAIRS_MARKER) {
        Some(i) => (&text[..i], text[i + PAIRS_MARKER.len()..].trim_start_matches('\n')),
        None => (text, ""),
    }
}

enum Runner {
    Dag(Box<PreserverSession>),
    Cyclic(Box<CondensedSession>),
}

fn run_preserve(
    graph: &Path,
    pairs: &Path,
    mode: Mode,
    max_k: usize,
    opts: &RunOptions,
    out: &mut Emitter<'_>,
) -> Result<(Value, bool, Option<String>)> {
    let g = load_graph(&read(graph)?)?;
    let selector = match opts.policy {
        Some((prefer, choice)) => Selector::with_policy(mode, prefer, choice),
        None => Selector::new(mode),
    };
    let mut runner = if g.is_dag() {
        Runner::Dag(Box::new(PreserverSession::with_selector(g, selector)?))
    } else {
        Runner::Cyclic(Box::new(CondensedSession::with_selector(g, selector)?))
    };
    let mut rejected = 0usize;
    let stdin = for_each_pair(pairs, |s, t| {
        let served = match &mut runner {
            Runner::Dag(session) => {
                session.serve_pair(s, t).map(|_| session.log().last().expect("just served").stats_json())
            }
            Runner::Cyclic(session) => session.serve_pair(s, t).map(|added| {
                json!({
                    "pair": [s, t],
                    "new_edges": added.len(),
                    "h_size": session.h().edge_count(),
                    "z_size": session.inner().z().size(),
                })
                .to_string()
            }),
        };
        match served {
            Ok(line) => out.line(&line),
            Err(e) if is_pair_error(&e) => {
                rejected += 1;
                out.line(&rejected_line(s, t, &e));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    })?;

    let (h, report, unreachable, served) = match &runner {
        Runner::Dag(session) => {
            let report = session.verify_with(max_k);
            (session.h().clone(), report, Vec::new(), session.pairs_served())
        }
        Runner::Cyclic(session) => {
            let report = session.inner().verify_with(max_k);
            let unreachable: Vec<Edge> =
                session.pairs().iter().copied().filter(|&(s, t)| !session.h().reaches(s, t).unwrap_or(false)).collect();
            (session.h().clone(), report, unreachable, session.pairs().len())
        }
    };
    out.block(&h.to_edge_list());
    let passed = report.passed() && unreachable.is_empty();
    let summary = json!({
        "pairs": served,
        "rejected": rejected,
        "edges": h.edge_count(),
        "condensed": matches!(runner, Runner::Cyclic(_)),
        "report": report,
        "unreachable": unreachable,
    });
    Ok((summary, passed, stdin))
}

fn run_udsn(
    g: DirectedGraph,
    pairs: &Path,
    params: UdsnParams,
    seed: u64,
    out: &mut Emitter<'_>,
) -> Result<(Value, bool, Option<String>)> {
    let n = g.n();
    let mut session = UdsnSession::new(g, params, seed)?;
    let mut rejected = 0usize;
    let stdin = for_each_pair(pairs, |s, t| {
        match session.serve_pair(s, t) {
            Ok(o) => out.line(&o.to_json()),
            Err(e) if is_pair_error(&e) => {
                rejected += 1;
                out.line(&rejected_line(s, t, &e));
            }
            Err(e) => return Err(e),
        }
        Ok(())
    })?;
    let summary = session.summary();
    out.line(&serde_json::to_string(&summary)?);

    let unreachable =
        session.outcomes().iter().filter(|o| !session.h().reaches(o.pair.0, o.pair.1).unwrap_or(false)).count();
    let sample_len = session.sample().map_or(0, <[Vertex]>::len);
    let mut legs = Vec::new();
    let mut legs_ok = true;
    for (name, leg) in [("sink_leg", session.sink_leg_session()), ("source_leg", session.source_leg_session())] {
        let p = leg.pairs_served();
        let edges = leg.h().edge_count();
        let envelope = if p == 0 || sample_len == 0 {
            None
        } else {
            Some(size_envelope_source_restricted(n, p, sample_len, DEFAULT_ENVELOPE_C)?)
        };
        legs_ok &= envelope.is_none_or(|e| edges as f64 <= e);
        legs.push(json!({"leg": name, "pairs": p, "edges": edges, "envelope": envelope}));
    }
    let passed = summary.sampling_failures.is_empty() && unreachable == 0 && legs_ok;
    let summary = json!({
        "params": params,
        "sample_size": sample_len,
        "nontrivial": session.nontrivial_count(),
        "hits": session.hit_count(),
        "ledger": session.ledger(),
        "rejected": rejected,
        "unreachable": unreachable,
        "legs": legs,
        "run": summary,
    });
    Ok((summary, passed, stdin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("reachkeep-cmd-{name}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn preserve_streams_stats() {
        let dir = scratch("preserve");
        let graph = write(&dir, "g.txt", "0 1\n1 2\n0 2\n");
        let pairs = write(&dir, "p.txt", "0 2\n2 0\n0 1\n");
        let spec = CommandSpec::Preserve { graph, pairs, mode: Mode::Forwards, max_k: 4 };
        let mut lines = Vec::new();
        let out = run_streaming(&spec, &RunOptions::default(), &mut |l| lines.push(l.to_string())).unwrap();
        assert_eq!(lines[0], r#"{"h_size":2,"new_edges":2,"pair":[0,2],"z_size":3}"#);
        assert!(lines[1].contains("error"));
        assert_eq!(lines[2], r#"{"h_size":2,"new_edges":0,"pair":[0,1],"z_size":4}"#);
        assert_eq!(&lines[3..], ["n 3", "0 1", "1 2"]);
        assert!(out.passed);
        assert_eq!(out.summary["rejected"], 1);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn preserve_condenses_cyclic_input() {
        let dir = scratch("cyclic");
        let graph = write(&dir, "g.txt", "0 1\n1 0\n1 2\n");
        let pairs = write(&dir, "p.txt", "1 0\n0 2\n");
        let spec = CommandSpec::Preserve { graph, pairs, mode: Mode::Backwards, max_k: 4 };
        let out = run(&spec, &RunOptions::default()).unwrap();
        assert!(out.passed);
        assert_eq!(out.summary["condensed"], true);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn oracle_and_gen() {
        let dir = scratch("oracle");
        let graph = write(&dir, "g.txt", "0 1\n1 2\n0 2\n");
        let pairs = write(&dir, "p.txt", "0 2\n");
        let out = run(&CommandSpec::Oracle { graph, pairs }, &RunOptions::default()).unwrap();
        assert_eq!(out.primary, "opt 1\n0 2\n");
        let fam = InstanceFamily::PathUnion { paths: 2, length: 3, seed: 4 };
        let a = run(&CommandSpec::Gen { family: fam.clone() }, &RunOptions::default()).unwrap();
        let b = run(&CommandSpec::Gen { family: fam }, &RunOptions::default()).unwrap();
        assert_eq!(a.primary, b.primary);
        let (g, p) = split_instance_text(&a.primary);
        assert_eq!(load_graph(g).unwrap().edge_count(), 4);
        assert_eq!(load_pairs(p).unwrap().len(), 2);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn precompute_then_select() {
        let dir = scratch("select");
        let graph = write(&dir, "g.txt", "0 1\n1 2\n2 3\n0 2\n");
        let spec = CommandSpec::Precompute {
            graph,
            mode: Mode::Forwards,
            p: None,
            p_star: Some(2),
            surrogate_c: 0.2,
            monitor: true,
        };
        let out = run(&spec, &RunOptions::default()).unwrap();
        let tables = write(&dir, "t.jsonl", &out.primary);
        let sel = run(&CommandSpec::Select { tables, index: 1, pair: (0, 3) }, &RunOptions::default()).unwrap();
        assert_eq!(sel.primary, "0 1 2 3\n");
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn udsn_reports_run() {
        let dir = scratch("udsn");
        let graph = write(&dir, "g.txt", "0 1\n1 2\n2 3\n");
        let pairs = write(&dir, "p.txt", "0 3\n1 2\n");
        let spec = CommandSpec::Udsn { graph, pairs, seed: 3, tau: None, first_budget: Some(0), c: None };
        let out = run(&spec, &RunOptions::default()).unwrap();
        let last: Value = serde_json::from_str(out.primary.lines().last().unwrap()).unwrap();
        assert_eq!(last["edges"], 3);
        assert!(out.passed);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn spec_json_tagged() {
        let spec = CommandSpec::Select { tables: "t".into(), index: 2, pair: (0, 1) };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.starts_with(r#"{"command":"select""#));
        assert_eq!(serde_json::from_str::<CommandSpec>(&json).unwrap(), spec);
    }
}
