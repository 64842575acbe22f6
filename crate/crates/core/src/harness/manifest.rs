use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::commands::{run, CommandSpec, RunOptions, RunOutput};
use crate::error::{Error, Result};
use crate::graph::Edge;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of one command run, sufficient to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub id: String,
    pub command: CommandSpec,
    pub seed: u64,
    /// Input path to content hash.
    pub inputs: BTreeMap<String, String>,
    /// Primary output file, relative to the manifest directory.
    pub output_file: String,
    pub output_hash: String,
    /// Logical clock: the number of manifests already in the directory.
    pub timestamp: u64,
    pub passed: bool,
    pub summary: Value,
}

impl RunManifest {
    /// Content-derived id: the same command and seed always map to the same
    /// manifest.
    pub fn id_for(spec: &CommandSpec, seed: u64) -> String {
        let key = serde_json::to_string(&(spec, seed)).expect("spec serializes");
        sha256_hex(key.as_bytes())[..16].to_string()
    }

    /// Writes the primary output and the manifest into `dir`, replacing any
    /// earlier manifest with the same id.
    pub fn record(dir: &Path, spec: &CommandSpec, seed: u64, output: &RunOutput) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let id = Self::id_for(spec, seed);
        let mut inputs = BTreeMap::new();
        for path in spec.inputs() {
            let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        }
        let timestamp =
            list_manifests(dir)?.iter().filter(|p| p.file_stem().is_some_and(|s| s != id.as_str())).count() as u64;
        let output_file = format!("{id}.out");
        fs::write(dir.join(&output_file), &output.primary)?;
        let manifest = Self {
            id: id.clone(),
            command: spec.clone(),
            seed,
            inputs,
            output_file,
            output_hash: sha256_hex(output.primary.as_bytes()),
            timestamp,
            passed: output.passed,
            summary: output.summary.clone(),
        };
        fs::write(dir.join(format!("{id}.json")), serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }

    /// Saves standard-input text under `dir/inputs`, named by its hash.
    pub fn store_input(dir: &Path, text: &str) -> Result<PathBuf> {
        let inputs = dir.join("inputs");
        fs::create_dir_all(&inputs)?;
        let path = inputs.join(format!("{}.txt", &sha256_hex(text.as_bytes())[..16]));
        fs::write(&path, text)?;
        Ok(fs::canonicalize(path)?)
    }
}

fn list_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    MissingInput {
        path: String,
    },
    InputChanged {
        path: String,
    },
    MissingOutput,
    /// The stored output no longer matches the recorded hash.
    HashMismatch {
        expected: String,
        actual: String,
    },
    /// The replay produced different output.
    Diverged {
        line: usize,
        pair: Option<Edge>,
        expected: String,
        actual: String,
    },
    VerdictChanged {
        recorded: bool,
        replayed: bool,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCheck {
    pub id: String,
    pub command: String,
    #[serde(flatten)]
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<ManifestCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let detail = match &c.status {
                CheckStatus::Pass => "pass".to_string(),
                CheckStatus::MissingInput { path } => format!("FAIL missing input {path}"),
                CheckStatus::InputChanged { path } => format!("FAIL input changed {path}"),
                CheckStatus::MissingOutput => "FAIL missing output".to_string(),
                CheckStatus::HashMismatch { expected, actual } => {
                    format!("FAIL hash mismatch: expected {expected}, found {actual}")
                }
                CheckStatus::Diverged { line, pair, .. } => match pair {
                    Some((s, t)) => format!("FAIL diverged at line {line}, pair ({s}, {t})"),
                    None => format!("FAIL diverged at line {line}"),
                },
                CheckStatus::VerdictChanged { recorded, replayed } => {
                    format!("FAIL verdict changed: recorded {recorded}, replayed {replayed}")
                }
                CheckStatus::Error { message } => format!("FAIL {message}"),
            };
            writeln!(out, "{} {} {}", c.id, c.command, detail).unwrap();
        }
        out
    }
}

/// The pair a primary output line refers to, if it carries one.
fn line_pair(line: &str) -> Option<Edge> {
    let v: Value = serde_json::from_str(line).ok()?;
    let p = v.get("pair")?.as_array()?;
    Some((p.first()?.as_u64()? as usize, p.get(1)?.as_u64()? as usize))
}

fn first_divergence(expected: &str, actual: &str) -> CheckStatus {
    let mut e = expected.lines();
    let mut a = actual.lines();
    let mut line = 0;
    loop {
        line += 1;
        match (e.next(), a.next()) {
            (Some(x), Some(y)) if x == y => continue,
            (None, None) => {
                // identical lines, so only trailing bytes differ
                return CheckStatus::Diverged { line, pair: None, expected: String::new(), actual: String::new() };
            }
            (x, y) => {
                let pair = x.and_then(line_pair).or_else(|| y.and_then(line_pair));
                return CheckStatus::Diverged {
                    line,
                    pair,
                    expected: x.unwrap_or("").to_string(),
                    actual: y.unwrap_or("").to_string(),
                };
            }
        }
    }
}

fn check_manifest(dir: &Path, m: &RunManifest, opts: &RunOptions) -> CheckStatus {
    for (path, hash) in &m.inputs {
        match fs::read(path) {
            Err(_) => return CheckStatus::MissingInput { path: path.clone() },
            Ok(bytes) if sha256_hex(&bytes) != *hash => return CheckStatus::InputChanged { path: path.clone() },
            Ok(_) => {}
        }
    }
    let stored = match fs::read(dir.join(&m.output_file)) {
        Ok(b) => b,
        Err(_) => return CheckStatus::MissingOutput,
    };
    let actual = sha256_hex(&stored);
    if actual != m.output_hash {
        return CheckStatus::HashMismatch { expected: m.output_hash.clone(), actual };
    }
    let replay = match run(&m.command, opts) {
        Ok(r) => r,
        Err(e) => return CheckStatus::Error { message: e.to_string() },
    };
    if sha256_hex(replay.primary.as_bytes()) != m.output_hash {
        return first_divergence(&String::from_utf8_lossy(&stored), &replay.primary);
    }
    if replay.passed != m.passed {
        return CheckStatus::VerdictChanged { recorded: m.passed, replayed: replay.passed };
    }
    CheckStatus::Pass
}

/// Replays every manifest in `dir`, in file-name order.
pub fn verify_all(dir: &Path, opts: &RunOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for path in list_manifests(dir)? {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let parsed: std::result::Result<RunManifest, String> = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()));
        let check = match parsed {
            Ok(m) => ManifestCheck {
                id: m.id.clone(),
                command: m.command.name().to_string(),
                status: check_manifest(dir, &m, opts),
            },
            Err(message) => {
                ManifestCheck { id: stem, command: "unknown".into(), status: CheckStatus::Error { message } }
            }
        };
        report.checks.push(check);
    }
    Ok(report)
}
