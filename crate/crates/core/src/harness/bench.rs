use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SeedSplitter;
use crate::error::Result;
use crate::online::{
    pairwise_tripwire, size_envelope_source_restricted, EdgeChoice, Mode, PreserverSession, Selector,
    DEFAULT_ENVELOPE_C, DEFAULT_TRIPWIRE_C,
};
use crate::oracle::{generate, InstanceFamily, SharedSide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepFamily {
    RandomDag,
    Sourcewise,
}

impl SweepFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepFamily::RandomDag => "random-dag",
            SweepFamily::Sourcewise => "sourcewise",
        }
    }
}

/// The shared side whose envelope a mode is measured against: backwards
/// growth for shared sources, forwards growth for shared sinks.
pub fn side_for(mode: Mode) -> SharedSide {
    match mode {
        Mode::Backwards => SharedSide::Sources,
        Mode::Forwards => SharedSide::Sinks,
    }
}

/// One sweep cell. `sigma` is only used by the sourcewise family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub family: SweepFamily,
    pub mode: Mode,
    pub n: usize,
    pub p: usize,
    pub sigma: usize,
    pub density: f64,
    pub seed: u64,
    pub max_k: usize,
    /// Replace the selector with one that ignores the preserver and picks
    /// random next hops.
    pub faulty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub families: Vec<SweepFamily>,
    pub modes: Vec<Mode>,
    pub sizes: Vec<usize>,
    pub pair_counts: Vec<usize>,
    pub sigmas: Vec<usize>,
    pub density: f64,
    pub max_k: usize,
    pub seed: u64,
    pub faulty: bool,
}

impl SweepGrid {
    /// Cells in a fixed order; cell `i` is seeded with stream `i` of the grid
    /// seed.
    pub fn cells(&self) -> Vec<BenchCell> {
        let mut cells = Vec::new();
        for &family in &self.families {
            let sigmas: &[usize] = match family {
                SweepFamily::RandomDag => &[0],
                SweepFamily::Sourcewise => &self.sigmas,
            };
            for &mode in &self.modes {
                for &n in &self.sizes {
                    for &sigma in sigmas {
                        for &p in &self.pair_counts {
                            cells.push(BenchCell {
                                family,
                                mode,
                                n,
                                p,
                                sigma,
                                density: self.density,
                                seed: 0,
                                max_k: self.max_k,
                                faulty: self.faulty,
                            });
                        }
                    }
                }
            }
        }
        let split = SeedSplitter::new(self.seed);
        for (i, c) in cells.iter_mut().enumerate() {
            c.seed = split.derive(i as u64);
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: SweepFamily,
    pub mode: Mode,
    pub n: usize,
    pub p: usize,
    /// Distinct shared endpoints actually requested (sourcewise only).
    pub sigma: Option<usize>,
    pub edges_h: usize,
    pub size_z: usize,
    pub envelope: f64,
    pub envelope_ratio: f64,
    pub verified: bool,
    pub bridge_violations: usize,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn exceeds_envelope(&self) -> bool {
        self.envelope_ratio > 1.0
    }

    pub fn failed(&self) -> bool {
        self.error.is_some() || !self.verified || self.exceeds_envelope()
    }
}

pub fn run_cell(cell: &BenchCell) -> BenchRow {
    let start = Instant::now();
    let mut row = BenchRow {
        family: cell.family,
        mode: cell.mode,
        n: cell.n,
        p: cell.p,
        sigma: None,
        edges_h: 0,
        size_z: 0,
        envelope: 0.0,
        envelope_ratio: 0.0,
        verified: false,
        bridge_violations: 0,
        wall_time_ms: 0.0,
        error: None,
    };
    if let Err(e) = fill_row(cell, &mut row) {
        row.error = Some(e.to_string());
    }
    row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

fn fill_row(cell: &BenchCell, row: &mut BenchRow) -> Result<()> {
    let family = match cell.family {
        SweepFamily::RandomDag => {
            InstanceFamily::RandomDag { n: cell.n, density: cell.density, pairs: cell.p, seed: cell.seed }
        }
        SweepFamily::Sourcewise => InstanceFamily::Sourcewise {
            n: cell.n,
            density: cell.density,
            sigma: cell.sigma,
            side: side_for(cell.mode),
            pairs: cell.p,
            seed: cell.seed,
        },
    };
    let inst = generate(&family)?;
    let selector = if cell.faulty {
        Selector::with_policy(cell.mode, false, EdgeChoice::Random { seed: cell.seed })
    } else {
        Selector::new(cell.mode)
    };
    let mut session = PreserverSession::with_selector(inst.graph, selector)?;
    for &(s, t) in &inst.pairs {
        session.serve_pair(s, t)?;
    }
    let report = session.verify_with(cell.max_k);
    row.edges_h = session.h().edge_count();
    row.size_z = session.z().size();
    row.verified = report.passed();
    row.bridge_violations = report.bridges.len();
    let p = session.pairs_served().max(1);
    row.envelope = match cell.family {
        SweepFamily::RandomDag => pairwise_tripwire(cell.n, p, DEFAULT_TRIPWIRE_C),
        SweepFamily::Sourcewise => {
            let measured = match side_for(cell.mode) {
                SharedSide::Sources => session.sources_seen().len(),
                SharedSide::Sinks => session.sinks_seen().len(),
            };
            row.sigma = Some(measured);
            size_envelope_source_restricted(cell.n, p, measured.max(1), DEFAULT_ENVELOPE_C)?
        }
    };
    row.envelope_ratio = row.edges_h as f64 / row.envelope;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<BenchRow>,
}

impl SweepReport {
    pub fn flagged(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].exceeds_envelope()).collect()
    }

    pub fn bridge_violations(&self) -> usize {
        self.rows.iter().map(|r| r.bridge_violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| !r.failed())
    }

    /// CSV with a header row. Timing is nondeterministic, so it can be left
    /// out for hashed outputs.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::from(
            "family,mode,n,p,sigma,edges_h,size_z,envelope,envelope_ratio,verified,bridge_violations,error",
        );
        if with_timing {
            out.push_str(",wall_time_ms");
        }
        out.push('\n');
        for r in &self.rows {
            write!(
                out,
                "{},{},{},{},{},{},{},{:.3},{:.6},{},{},{}",
                r.family.as_str(),
                r.mode,
                r.n,
                r.p,
                r.sigma.map(|s| s.to_string()).unwrap_or_default(),
                r.edges_h,
                r.size_z,
                r.envelope,
                r.envelope_ratio,
                r.verified,
                r.bridge_violations,
                r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            )
            .unwrap();
            if with_timing {
                write!(out, ",{:.3}", r.wall_time_ms).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the cells in parallel; rows keep cell order. A failing cell is
/// recorded in its row and the sweep continues.
pub fn bench_cells(cells: &[BenchCell]) -> SweepReport {
    SweepReport { rows: cells.par_iter().map(run_cell).collect() }
}

pub fn bench_sweep(grid: &SweepGrid) -> SweepReport {
    bench_cells(&grid.cells())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SweepGrid {
        SweepGrid {
            families: vec![SweepFamily::Sourcewise],
            modes: vec![Mode::Backwards],
            sizes: vec![20],
            pair_counts: vec![10],
            sigmas: vec![2],
            density: 0.2,
            max_k: 3,
            seed: 1,
            faulty: false,
        }
    }

    #[test]
    fn one_cell_one_row() {
        let report = bench_sweep(&grid());
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.error.is_none());
        assert!(row.verified);
        assert_eq!(row.size_z, row.edges_h + 10);
        assert!(report.passed());
        assert_eq!(report.to_csv(false).lines().count(), 2);
    }

    #[test]
    fn bad_cell_is_recorded() {
        let mut g = grid();
        g.sigmas = vec![50];
        let report = bench_sweep(&g);
        assert!(report.rows[0].error.is_some());
        assert!(!report.passed());
    }

    #[test]
    fn cells_seeded_by_index() {
        let mut g = grid();
        g.sizes = vec![10, 20];
        let cells = g.cells();
        assert_eq!(cells.len(), 2);
        assert_ne!(cells[0].seed, cells[1].seed);
        assert_eq!(cells, g.cells());
    }
}
