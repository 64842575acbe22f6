use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use reachkeep_core::graph::{load_graph, load_pairs};
use reachkeep_core::harness::{
    run_streaming, split_instance_text, verify_all, verify_session_dump, CommandSpec, RunManifest, RunOptions,
    SessionDump, SweepFamily, SweepGrid, STDIN,
};
use reachkeep_core::nonadaptive::DEFAULT_SURROGATE_C;
use reachkeep_core::online::{EdgeChoice, Mode, PreserverSession, Selector};
use reachkeep_core::oracle::{InstanceFamily, SharedSide};
use reachkeep_core::udsn::DEFAULT_SAMPLING_C;
use reachkeep_core::Error;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "reachkeep", version, about = "Online reachability preservers and their checks")]
struct Cli {
    /// Root seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record a replayable manifest of the run here.
    #[arg(long, global = true)]
    manifest_dir: Option<PathBuf>,
    /// Print the run summary as JSON on stdout after the output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fw,
    Bw,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fw => Mode::Forwards,
            ModeArg::Bw => Mode::Backwards,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreak {
    Smallest,
    Largest,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    RandomDag,
    Layered,
    PathUnion,
    Sourcewise,
    RandomDigraph,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Sources,
    Sinks,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepFamilyArg {
    RandomDag,
    Sourcewise,
}

#[derive(Subcommand)]
enum Command {
    /// Serve a pair stream online and print the preserver.
    Preserve {
        /// Edge-list graph file.
        #[arg(long)]
        graph: PathBuf,
        /// Growth direction: fw for shared sinks, bw for shared sources.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Pair file, or `-` for standard input.
        #[arg(long, default_value = STDIN)]
        pairs: PathBuf,
        /// Largest bridge size scanned by the final check.
        #[arg(long, default_value_t = 4)]
        max_k: usize,
        /// Write a session dump for `verify --session`.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Replace the path-selection policy (fault injection).
        #[arg(long, value_enum)]
        tie_break: Option<TieBreak>,
        /// Ignore preserver edges when growing paths (fault injection).
        #[arg(long)]
        no_preserver_preference: bool,
    },
    /// Build non-adaptive path tables.
    Precompute {
        /// Edge-list graph file; must be acyclic.
        #[arg(long)]
        graph: PathBuf,
        /// Growth direction: fw for shared sinks, bw for shared sources.
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Known pair count; omit for one table per doubling level.
        #[arg(long)]
        p: Option<usize>,
        /// Base doubling level, defaults to the vertex count.
        #[arg(long)]
        p_star: Option<usize>,
        /// Surrogate constant c in c*(n*sqrt(p)+n).
        #[arg(long, default_value_t = DEFAULT_SURROGATE_C)]
        surrogate_c: f64,
        /// Check the surrogate against a greedy adversary at each level.
        #[arg(long)]
        monitor: bool,
    },
    /// Look up the precomputed path for an arriving pair.
    Select {
        /// Tables written by `precompute`.
        #[arg(long)]
        tables: PathBuf,
        /// Arrival index, starting at 1.
        #[arg(long)]
        index: usize,
        /// The pair as "s t".
        #[arg(long)]
        pair: String,
    },
    /// Run the online Steiner network simulator.
    Udsn {
        /// Edge-list graph file; must be acyclic.
        #[arg(long)]
        graph: PathBuf,
        /// Pair file, or `-` for standard input.
        #[arg(long, default_value = STDIN)]
        pairs: PathBuf,
        /// Thickness threshold, defaults to ceil(n^0.6).
        #[arg(long)]
        tau: Option<usize>,
        /// Nontrivial pairs handled before sampling.
        #[arg(long = "T")]
        first_budget: Option<usize>,
        /// Sampling constant.
        #[arg(long = "C")]
        c: Option<f64>,
    },
    /// Exact minimum preserver of a small instance.
    Oracle {
        /// Edge-list graph file with at most 20 edges.
        #[arg(long)]
        graph: PathBuf,
        /// Pair file.
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Generate a seeded instance.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Vertex count.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Edge probability.
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        /// Number of demand pairs.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Shared endpoints (sourcewise).
        #[arg(long, default_value_t = 2)]
        sigma: usize,
        /// Which endpoint the pairs share (sourcewise).
        #[arg(long, value_enum, default_value = "sources")]
        side: SideArg,
        /// Layer count (layered).
        #[arg(long, default_value_t = 4)]
        layers: usize,
        /// Vertices per layer (layered).
        #[arg(long, default_value_t = 5)]
        width: usize,
        /// Disjoint path count (path-union).
        #[arg(long = "paths", default_value_t = 3)]
        path_count: usize,
        /// Vertices per path (path-union).
        #[arg(long, default_value_t = 5)]
        length: usize,
        /// Write `<out>.graph` and `<out>.pairs` instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a session dump, or replay every manifest in --manifest-dir.
    Verify {
        /// Session dump written by `preserve --dump`.
        #[arg(long)]
        session: Option<PathBuf>,
        /// Largest bridge size scanned.
        #[arg(long, default_value_t = 4)]
        max_k: usize,
        /// Replay with a different tie-break (fault injection).
        #[arg(long, value_enum)]
        tie_break: Option<TieBreak>,
    },
    /// Sweep seeded instances and compare preserver sizes to their envelopes.
    Bench {
        /// Instance families.
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["random-dag", "sourcewise"])]
        families: Vec<SweepFamilyArg>,
        /// Growth directions.
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["fw", "bw"])]
        modes: Vec<ModeArg>,
        /// Vertex counts.
        #[arg(long, value_delimiter = ',', default_values = ["50", "100"])]
        sizes: Vec<usize>,
        /// Pair counts.
        #[arg(long = "pairs", value_delimiter = ',', default_values = ["20", "40"])]
        pair_counts: Vec<usize>,
        /// Shared endpoint counts (sourcewise).
        #[arg(long, value_delimiter = ',', default_values = ["1", "2", "4"])]
        sigmas: Vec<usize>,
        /// Edge probability.
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        /// Largest bridge size scanned per cell.
        #[arg(long, default_value_t = 3)]
        max_k: usize,
        /// Use a selector that ignores the preserver (fault injection).
        #[arg(long)]
        faulty: bool,
        /// Write bench.csv and bench.json, with timings, here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn policy(tie: Option<TieBreak>, no_preference: bool, seed: u64) -> Option<(bool, EdgeChoice)> {
    if tie.is_none() && !no_preference {
        return None;
    }
    let choice = match tie.unwrap_or(TieBreak::Smallest) {
        TieBreak::Smallest => EdgeChoice::SmallestId,
        TieBreak::Largest => EdgeChoice::LargestId,
        TieBreak::Random => EdgeChoice::Random { seed },
    };
    Some((!no_preference, choice))
}

/// Absolute form of an input path so manifests replay from any directory.
fn absolute(path: PathBuf) -> Result<PathBuf, Error> {
    if path.as_os_str() == STDIN {
        return Ok(path);
    }
    fs::canonicalize(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_pair(text: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::InvalidParameter(format!("expected \"s t\", got `{text}`"));
    let mut it = text.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(s)), Some(Ok(t)), None) => Ok((s, t)),
        _ => Err(bad()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Runs the command; `Ok(false)` means a check failed.
fn dispatch(cli: Cli) -> Result<bool, Error> {
    let seed = cli.seed;
    let mut opts = RunOptions::default();
    let mut dump_to = None;
    let mut gen_out = None;
    let mut bench_out = None;
    let spec = match cli.command {
        Command::Verify { session, max_k, tie_break } => {
            return verify(session, cli.manifest_dir, max_k, policy(tie_break, false, seed), cli.json);
        }
        Command::Preserve { graph, mode, pairs, max_k, dump, tie_break, no_preserver_preference } => {
            opts.policy = policy(tie_break, no_preserver_preference, seed);
            dump_to = dump;
            CommandSpec::Preserve { graph: absolute(graph)?, pairs: absolute(pairs)?, mode: mode.into(), max_k }
        }
        Command::Precompute { graph, mode, p, p_star, surrogate_c, monitor } => {
            CommandSpec::Precompute { graph: absolute(graph)?, mode: mode.into(), p, p_star, surrogate_c, monitor }
        }
        Command::Select { tables, index, pair } => {
            CommandSpec::Select { tables: absolute(tables)?, index, pair: parse_pair(&pair)? }
        }
        Command::Udsn { graph, pairs, tau, first_budget, c } => CommandSpec::Udsn {
            graph: absolute(graph)?,
            pairs: absolute(pairs)?,
            seed,
            tau,
            first_budget,
            c: Some(c.unwrap_or(DEFAULT_SAMPLING_C)),
        },
        Command::Oracle { graph, pairs } => CommandSpec::Oracle { graph: absolute(graph)?, pairs: absolute(pairs)? },
        Command::Gen { family, n, density, pairs, sigma, side, layers, width, path_count, length, out } => {
            gen_out = out;
            let family = match family {
                FamilyArg::RandomDag => InstanceFamily::RandomDag { n, density, pairs, seed },
                FamilyArg::Layered => InstanceFamily::Layered { layers, width, density, pairs, seed },
                FamilyArg::PathUnion => InstanceFamily::PathUnion { paths: path_count, length, seed },
                FamilyArg::Sourcewise => InstanceFamily::Sourcewise {
                    n,
                    density,
                    sigma,
                    side: match side {
                        SideArg::Sources => SharedSide::Sources,
                        SideArg::Sinks => SharedSide::Sinks,
                    },
                    pairs,
                    seed,
                },
                FamilyArg::RandomDigraph => InstanceFamily::RandomDigraph { n, density, pairs, seed },
            };
            CommandSpec::Gen { family }
        }
        Command::Bench { families, modes, sizes, pair_counts, sigmas, density, max_k, faulty, out } => {
            bench_out = out;
            let grid = SweepGrid {
                families: families
                    .into_iter()
                    .map(|f| match f {
                        SweepFamilyArg::RandomDag => SweepFamily::RandomDag,
                        SweepFamilyArg::Sourcewise => SweepFamily::Sourcewise,
                    })
                    .collect(),
                modes: modes.into_iter().map(Mode::from).collect(),
                sizes,
                pair_counts,
                sigmas,
                density,
                max_k,
                seed,
                faulty,
            };
            CommandSpec::Bench { grid }
        }
    };

    let quiet = gen_out.is_some();
    let stdout = io::stdout();
    let mut sink = |line: &str| {
        if !quiet {
            let mut lock = stdout.lock();
            // a closed pipe only loses output, the run itself goes on
            let _ = writeln!(lock, "{line}");
            let _ = lock.flush();
        }
    };
    let output = run_streaming(&spec, &opts, &mut sink)?;

    let mut spec = spec;
    if let Some(dir) = &cli.manifest_dir {
        if let Some(text) = &output.stdin {
            let stored = RunManifest::store_input(dir, text)?;
            spec.replace_stdin(&stored);
        }
        let m = RunManifest::record(dir, &spec, seed, &output)?;
        eprintln!("manifest {}", dir.join(format!("{}.json", m.id)).display());
    }
    if let Some(path) = dump_to {
        write_dump(&spec, output.stdin.as_deref(), &opts, &path)?;
    }
    if let Some(prefix) = gen_out {
        let (graph, pairs) = split_instance_text(&output.primary);
        let gpath = prefix.with_extension("graph");
        let ppath = prefix.with_extension("pairs");
        fs::write(&gpath, graph)?;
        fs::write(&ppath, pairs)?;
        eprintln!("wrote {} and {}", gpath.display(), ppath.display());
    }
    if let (Some(dir), CommandSpec::Bench { grid }) = (bench_out, &spec) {
        let report = reachkeep_core::harness::bench_sweep(grid);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("bench.csv"), report.to_csv(true))?;
        fs::write(dir.join("bench.json"), report.to_json())?;
    }
    report_summary(&output.summary, output.passed, cli.json);
    Ok(output.passed)
}

fn report_summary(summary: &serde_json::Value, passed: bool, json: bool) {
    let line = serde_json::json!({"passed": passed, "summary": summary}).to_string();
    if json {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn write_dump(spec: &CommandSpec, stdin: Option<&str>, opts: &RunOptions, path: &Path) -> Result<(), Error> {
    let CommandSpec::Preserve { graph, pairs, mode, .. } = spec else {
        return Ok(());
    };
    let g = load_graph(&fs::read_to_string(graph)?)?;
    if !g.is_dag() {
        return Err(Error::InvalidParameter("session dumps need an acyclic graph".into()));
    }
    let pair_text = match stdin {
        Some(text) => text.to_string(),
        None => fs::read_to_string(pairs)?,
    };
    let selector = match opts.policy {
        Some((prefer, choice)) => Selector::with_policy(*mode, prefer, choice),
        None => Selector::new(*mode),
    };
    let mut session = PreserverSession::with_selector(g, selector)?;
    for (s, t) in load_pairs(&pair_text)? {
        match session.serve_pair(s, t) {
            Ok(_) | Err(Error::Infeasible { .. } | Error::VertexOutOfRange { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    fs::write(path, SessionDump::from_session(&session).to_json())?;
    Ok(())
}

fn verify(
    session: Option<PathBuf>,
    manifest_dir: Option<PathBuf>,
    max_k: usize,
    policy: Option<(bool, EdgeChoice)>,
    json: bool,
) -> Result<bool, Error> {
    if let Some(path) = session {
        let dump = SessionDump::from_json(&fs::read_to_string(&path)?)?;
        let report = verify_session_dump(&dump, max_k)?;
        let passed = report.passed();
        println!("{}", serde_json::to_string(&report)?);
        if !json {
            eprintln!("{}", if passed { "session verified" } else { "session violates its invariants" });
        }
        return Ok(passed);
    }
    let Some(dir) = manifest_dir else {
        return Err(Error::InvalidParameter("verify needs --session or --manifest-dir".into()));
    };
    let report = verify_all(&dir, &RunOptions { policy })?;
    if json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(report.passed())
}
