//! Instance × k × seed × mode grids. Every cell runs as a child process of
//! the `hgpart` binary, so a crash stays confined to its cell. A cell counts
//! as done once its stats file exists, which makes reruns resume.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{read_stats, stat, Mode};
use crate::{Error, Result};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "HGPART_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub instances: Vec<PathBuf>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub modes: Vec<Mode>,
    pub epsilon: f64,
    pub time_limit: Option<f64>,
    pub generations: Option<u64>,
    pub out_dir: PathBuf,
    /// Passed through to every `partition` invocation.
    pub extra_args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub instance: PathBuf,
    pub instance_id: String,
    pub k: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Cell {
    /// Output prefix; the partition is written there, stats and CSV next to it.
    pub fn prefix(&self, out_dir: &Path) -> PathBuf {
        out_dir.join(self.mode.as_str()).join(format!("{}.s{}", self.instance_id, self.seed))
    }
}

pub fn stats_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".stats")
}

pub fn csv_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".csv")
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

impl GridSpec {
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for inst in &self.instances {
            for &k in &self.ks {
                for &mode in &self.modes {
                    for &seed in &self.seeds {
                        out.push(Cell {
                            instance: inst.clone(),
                            instance_id: format!("{}-k{}", stem(inst), k),
                            k,
                            seed,
                            mode,
                        });
                    }
                }
            }
        }
        out
    }

    fn command(&self, exe: &Path, cell: &Cell) -> Command {
        let mut cmd = Command::new(exe);
        cmd.arg("partition")
            .arg("--hgr")
            .arg(&cell.instance)
            .args(["--k", &cell.k.to_string()])
            .args(["--eps", &self.epsilon.to_string()])
            .args(["--mode", cell.mode.as_str()])
            .args(["--seed", &cell.seed.to_string()])
            .args(["--instance-id", &cell.instance_id])
            .arg("--output")
            .arg(cell.prefix(&self.out_dir));
        if let Some(g) = self.generations {
            cmd.args(["--generations", &g.to_string()]);
        } else if let Some(t) = self.time_limit {
            cmd.args(["--time-limit", &t.to_string()]);
        }
        cmd.args(&self.extra_args);
        cmd
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Skipped,
    Done,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub cells: Vec<(Cell, CellStatus)>,
}

impl GridReport {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|(_, s)| matches!(s, CellStatus::Failed(_))).count()
    }
}

pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_cell(spec: &GridSpec, exe: &Path, cell: &Cell) -> CellStatus {
    let prefix = cell.prefix(&spec.out_dir);
    if stats_path(&prefix).exists() {
        return CellStatus::Skipped;
    }
    if let Some(dir) = prefix.parent() {
        if let Err(e) = fs::create_dir_all(dir) {
            return CellStatus::Failed(e.to_string());
        }
    }
    let output = match spec.command(exe, cell).output() {
        Ok(o) => o,
        Err(e) => return CellStatus::Failed(e.to_string()),
    };
    if stats_path(&prefix).exists() {
        CellStatus::Done
    } else {
        let msg = format!("{}: {}", output.status, String::from_utf8_lossy(&output.stderr).trim());
        let _ = fs::write(with_suffix(&prefix, ".err"), &msg);
        CellStatus::Failed(msg)
    }
}

/// Runs every pending cell on a pool of `workers` threads, each driving one
/// child process at a time, then writes `results.csv`.
pub fn run_grid(spec: &GridSpec, exe: &Path, workers: usize) -> Result<GridReport> {
    fs::create_dir_all(&spec.out_dir)?;
    let cells = spec.cells();
    let next = AtomicUsize::new(0);
    let status: Mutex<Vec<Option<CellStatus>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(cells.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cells.len() {
                    break;
                }
                let st = run_cell(spec, exe, &cells[i]);
                log::info!("{} {} s{} {}: {:?}", cells[i].instance_id, cells[i].mode, cells[i].seed, i, st);
                status.lock().expect("status lock")[i] = Some(st);
            });
        }
    });
    let status = status.into_inner().expect("status lock");
    let report = GridReport {
        cells: cells.into_iter().zip(status).map(|(c, s)| (c, s.expect("every cell visited"))).collect(),
    };
    write_results(spec, &report)?;
    Ok(report)
}

pub const RESULTS_HEADER: &str = "instance,k,seed,mode,km1,cut,imbalance,balanced,status";

/// Combined table, one row per cell in grid order. Run times stay in the
/// per-cell stats files so the table is reproducible.
pub fn write_results(spec: &GridSpec, report: &GridReport) -> Result<()> {
    let mut f = fs::File::create(spec.out_dir.join("results.csv"))?;
    writeln!(f, "{RESULTS_HEADER}")?;
    for (cell, st) in &report.cells {
        let prefix = cell.prefix(&spec.out_dir);
        let stats = match st {
            CellStatus::Failed(_) => None,
            _ => Some(read_stats(std::io::BufReader::new(fs::File::open(stats_path(&prefix))?))?),
        };
        let get = |key: &str| stats.as_ref().and_then(|s| stat(s, key)).unwrap_or("").to_string();
        let status = if matches!(st, CellStatus::Failed(_)) { "failed" } else { "ok" };
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{}",
            cell.instance_id,
            cell.k,
            cell.seed,
            cell.mode,
            get("km1"),
            get("cut"),
            get("imbalance"),
            get("balanced"),
            status
        )?;
    }
    Ok(())
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::Invalid(format!("bad list item {x:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_arithmetic() {
        let spec = GridSpec {
            instances: vec!["a/x.hgr".into(), "b/y.hgr".into()],
            ks: vec![2],
            seeds: vec![1, 2, 3],
            modes: vec![Mode::Repeated, Mode::Evolve],
            epsilon: 0.03,
            time_limit: Some(1.0),
            generations: None,
            out_dir: "out".into(),
            extra_args: vec![],
        };
        let cells = spec.cells();
        assert_eq!(cells.len(), 12);
        let prefixes: std::collections::HashSet<_> = cells.iter().map(|c| c.prefix(&spec.out_dir)).collect();
        assert_eq!(prefixes.len(), 12);
        assert_eq!(cells[0].prefix(Path::new("out")), Path::new("out/repeated/x-k2.s1"));
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_list::<u64>("1,x").is_err());
    }
}
