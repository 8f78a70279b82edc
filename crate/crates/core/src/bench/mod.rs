//! Run driver, result files, benchmark grids and aggregation for the
//! `hgpart` binary.
//!
//! File formats:
//!
//! * convergence CSV: header `instance,seed,elapsed_s,generation,operator,best_km1`,
//!   one row per improvement of the best objective;
//! * stats: one `key = value` per line;
//! * partition: one block id per line (hMetis convention).

pub mod aggregate;
pub mod grid;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hgraph::{Hypergraph, Weight};
use crate::memetic::{evolve, Budget, EvolveConfig, Operator, OperatorConfig, OperatorStats, PopulationSize, Progress};
use crate::multilevel::{check_k, partition_single, vcycle, MultilevelConfig, Partitioned};
use crate::partition::{imbalance, is_balanced, Partition};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// One multilevel run.
    Single,
    /// Independent multilevel runs with V-cycles, keeping the best.
    Repeated,
    /// Memetic evolution.
    Evolve,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Repeated => "repeated",
            Mode::Evolve => "evolve",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Mode::Single),
            "repeated" => Ok(Mode::Repeated),
            "evolve" => Ok(Mode::Evolve),
            _ => Err(Error::Invalid(format!("unknown mode {s:?}"))),
        }
    }
}

/// Everything one run needs besides the hypergraph.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub instance_id: String,
    pub k: usize,
    pub epsilon: f64,
    pub mode: Mode,
    /// Wall-clock budget in seconds for `repeated` and `evolve`.
    pub time_limit: Option<f64>,
    /// Generation budget; overrides `time_limit` and switches the progress
    /// clock to the generation index.
    pub generations: Option<u64>,
    pub seed: u64,
    pub operators: OperatorConfig,
    pub population: PopulationSize,
    pub multilevel: MultilevelConfig,
    /// V-cycles after each fresh run in `repeated` mode.
    pub max_vcycles: usize,
    /// Consecutive non-improving V-cycles before giving up on a run.
    pub vcycle_patience: usize,
}

impl RunConfig {
    pub fn new(instance_id: impl Into<String>, k: usize, mode: Mode, seed: u64) -> Self {
        RunConfig {
            instance_id: instance_id.into(),
            k,
            epsilon: 0.03,
            mode,
            time_limit: None,
            generations: None,
            seed,
            operators: OperatorConfig::mma(),
            population: PopulationSize::Auto,
            multilevel: MultilevelConfig::default(),
            max_vcycles: 100,
            vcycle_patience: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Invalid("k must be at least 2".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid("epsilon must be a non-negative number".into()));
        }
        if self.mode != Mode::Single && self.generations.is_none() {
            match self.time_limit {
                Some(t) if t > 0.0 && t.is_finite() => {}
                _ => return Err(Error::Invalid(format!("{} mode needs a time limit or a generation count", self.mode))),
            }
        }
        self.operators.validate()
    }

    fn budget(&self) -> Budget {
        match (self.generations, self.time_limit) {
            (Some(g), _) => Budget::Generations(g),
            (None, Some(t)) => Budget::Time(Duration::from_secs_f64(t)),
            (None, None) => Budget::Generations(0),
        }
    }
}

/// One row of a convergence CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub instance: String,
    pub seed: u64,
    pub elapsed: f64,
    pub generation: u64,
    pub operator: String,
    pub best: Weight,
}

pub const CSV_HEADER: &str = "instance,seed,elapsed_s,generation,operator,best_km1";

pub fn write_convergence_csv(records: &[ConvergenceRecord], mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for r in records {
        writeln!(sink, "{},{},{:.6},{},{},{}", r.instance, r.seed, r.elapsed, r.generation, r.operator, r.best)?;
    }
    Ok(())
}

pub fn read_convergence_csv(reader: impl BufRead) -> Result<Vec<ConvergenceRecord>> {
    let mut out = Vec::new();
    let mut lines = reader.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Invalid(format!("bad convergence header {other:?}"))),
    }
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Invalid(format!("bad convergence row {}: {line:?}", i + 2));
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(bad());
        }
        out.push(ConvergenceRecord {
            instance: f[0].to_string(),
            seed: f[1].parse().map_err(|_| bad())?,
            elapsed: f[2].parse().map_err(|_| bad())?,
            generation: f[3].parse().map_err(|_| bad())?,
            operator: f[4].to_string(),
            best: f[5].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// Ordered `key = value` pairs.
pub type Stats = Vec<(String, String)>;

pub fn write_stats(stats: &Stats, mut sink: impl Write) -> std::io::Result<()> {
    for (k, v) in stats {
        writeln!(sink, "{k} = {v}")?;
    }
    Ok(())
}

pub fn read_stats(reader: impl BufRead) -> Result<Stats> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(" = ").ok_or_else(|| Error::Invalid(format!("bad stats line {line:?}")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn stat<'a>(stats: &'a Stats, key: &str) -> Option<&'a str> {
    stats.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub partition: Partition,
    /// False when no ε-balanced partition was found.
    pub balanced: bool,
    pub runtime: f64,
    pub records: Vec<ConvergenceRecord>,
    pub generations: u64,
    pub operator_stats: Option<OperatorStats>,
}

impl RunResult {
    pub fn stats(&self, h: &Hypergraph, cfg: &RunConfig) -> Stats {
        let p = &self.partition;
        let mut s: Stats = vec![
            ("instance".into(), cfg.instance_id.clone()),
            ("mode".into(), cfg.mode.to_string()),
            ("k".into(), cfg.k.to_string()),
            ("epsilon".into(), cfg.epsilon.to_string()),
            ("seed".into(), cfg.seed.to_string()),
            ("km1".into(), p.km1().to_string()),
            ("cut".into(), p.cut().to_string()),
            ("imbalance".into(), format!("{:.6}", imbalance(h, p))),
            ("balanced".into(), self.balanced.to_string()),
            ("generations".into(), self.generations.to_string()),
            ("runtime_s".into(), format!("{:.3}", self.runtime)),
        ];
        if let Some(ops) = &self.operator_stats {
            for (op, n) in &ops.invoked {
                s.push((format!("invoked_{}", op.tag()), n.to_string()));
            }
            s.push(("discarded_unbalanced".into(), ops.unbalanced.to_string()));
        }
        s
    }
}

struct Tracker<'a> {
    cfg: &'a RunConfig,
    records: Vec<ConvergenceRecord>,
    best: Option<Partitioned>,
}

impl Tracker<'_> {
    /// Keeps `cand` if it beats the incumbent. Balanced candidates always
    /// beat unbalanced ones.
    fn offer(&mut self, cand: Partitioned, elapsed: f64, generation: u64, op: Operator) -> bool {
        let better = match &self.best {
            None => true,
            Some(b) => (!cand.balanced, cand.partition.km1()) < (!b.balanced, b.partition.km1()),
        };
        if better {
            self.records.push(ConvergenceRecord {
                instance: self.cfg.instance_id.clone(),
                seed: self.cfg.seed,
                elapsed,
                generation,
                operator: op.tag().into(),
                best: cand.partition.km1(),
            });
            self.best = Some(cand);
        }
        better
    }
}

fn run_repeated(h: &Hypergraph, cfg: &RunConfig, master: &mut ChaCha8Rng, start: Instant) -> (Partitioned, Vec<ConvergenceRecord>, u64) {
    let logical = cfg.generations.is_some();
    let max_gen = cfg.generations.unwrap_or(u64::MAX);
    let limit = cfg.time_limit.map_or(Duration::MAX, Duration::from_secs_f64);
    let elapsed = |g: u64| if logical { g as f64 } else { start.elapsed().as_secs_f64() };
    let out_of_budget = |g: u64| g >= max_gen || (!logical && start.elapsed() >= limit);

    let mut t = Tracker { cfg, records: Vec::new(), best: None };
    let mut generation = 0u64;
    loop {
        // the first run always happens so there is something to report
        if generation > 0 && out_of_budget(generation) {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let first = partition_single(h, cfg.k, cfg.epsilon, &cfg.multilevel, &mut rng).expect("k checked");
        generation += 1;
        let mut current = first.clone();
        t.offer(first, elapsed(generation), generation, Operator::Single);
        let mut fruitless = 0;
        for _ in 0..cfg.max_vcycles {
            if fruitless >= cfg.vcycle_patience || out_of_budget(generation) {
                break;
            }
            let next = vcycle(h, &current.partition, cfg.epsilon, &cfg.multilevel, &mut rng);
            generation += 1;
            let improved = (!next.balanced, next.partition.km1()) < (!current.balanced, current.partition.km1());
            if improved {
                fruitless = 0;
                current = next.clone();
                t.offer(next, elapsed(generation), generation, Operator::VCycle);
            } else {
                fruitless += 1;
            }
        }
    }
    (t.best.expect("at least one run"), t.records, generation)
}

/// Runs `cfg` on `h`.
pub fn run(h: &Hypergraph, cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    check_k(h, cfg.k)?;
    let start = Instant::now();
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (best, records, generations, operator_stats) = match cfg.mode {
        Mode::Single => {
            let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
            let r = partition_single(h, cfg.k, cfg.epsilon, &cfg.multilevel, &mut rng)?;
            let elapsed = if cfg.generations.is_some() { 1.0 } else { start.elapsed().as_secs_f64() };
            let rec = ConvergenceRecord {
                instance: cfg.instance_id.clone(),
                seed: cfg.seed,
                elapsed,
                generation: 1,
                operator: Operator::Single.tag().into(),
                best: r.partition.km1(),
            };
            (r, vec![rec], 1, None)
        }
        Mode::Repeated => {
            let (b, r, g) = run_repeated(h, cfg, &mut master, start);
            (b, r, g, None)
        }
        Mode::Evolve => {
            let ecfg = EvolveConfig {
                budget: cfg.budget(),
                population: cfg.population,
                operators: cfg.operators.clone(),
                multilevel: cfg.multilevel.clone(),
            };
            let mut records = Vec::new();
            let out = evolve(h, cfg.k, cfg.epsilon, &ecfg, &mut master, |p: &Progress| {
                records.push(ConvergenceRecord {
                    instance: cfg.instance_id.clone(),
                    seed: cfg.seed,
                    elapsed: p.elapsed,
                    generation: p.generation,
                    operator: p.operator.tag().into(),
                    best: p.best,
                });
            })?;
            let partition = out.best.partition(h);
            let balanced = is_balanced(h, &partition, cfg.epsilon);
            (Partitioned { partition, balanced }, records, out.generations, Some(out.stats))
        }
    };
    Ok(RunResult {
        balanced: best.balanced,
        partition: best.partition,
        runtime: start.elapsed().as_secs_f64(),
        records,
        generations,
        operator_stats,
    })
}
