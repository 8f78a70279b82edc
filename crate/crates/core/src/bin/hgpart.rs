use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hgpart::bench::aggregate::{
    convergence, load_series, log_grid, performance, write_convergence, write_performance, Series,
};
use hgpart::bench::grid::{csv_path, parse_list, run_grid, stats_path, with_suffix, worker_count, GridSpec};
use hgpart::bench::{run, write_convergence_csv, write_stats, Mode, RunConfig};
use hgpart::hgraph::{read_hmetis, write_partition};
use hgpart::memetic::{OperatorConfig, PopulationSize};
use hgpart::Error;

/// Exit status for inputs that admit no partition (k larger than n).
const EXIT_INFEASIBLE_INPUT: u8 = 3;
/// Exit status when the result misses the balance bound; outputs are still
/// written, with `balanced = false` in the stats.
const EXIT_UNBALANCED: u8 = 4;

#[derive(Parser)]
#[command(name = "hgpart", version, about = "Multilevel memetic k-way hypergraph partitioner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Repeated,
    Evolve,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Repeated => Mode::Repeated,
            ModeArg::Evolve => Mode::Evolve,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Km1,
    Cut,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateMode {
    Convergence,
    Performance,
}

#[derive(clap::Args, Clone)]
struct Tuning {
    /// Operator schedule: mma, mma-m-0.5, mma-g, mma-eq-c, kahypar-e.
    #[arg(long, default_value = "mma")]
    schedule: String,
    /// Override the recombination probability of the schedule.
    #[arg(long)]
    p_combine: Option<f64>,
    /// Override the C1,C2,C3 weights, e.g. 0.4,0.2,0.4.
    #[arg(long)]
    combine_weights: Option<String>,
    /// Override the M1..M4 weights.
    #[arg(long)]
    mutate_weights: Option<String>,
    /// Fixed population size instead of sizing from the time budget.
    #[arg(long)]
    population: Option<usize>,
    /// Contraction-limit multiplier t.
    #[arg(long, default_value_t = 150)]
    t: usize,
    /// Runs of each initial-partitioning algorithm per bisection.
    #[arg(long, default_value_t = 20)]
    ip_runs: usize,
}

impl Tuning {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), Error> {
        let mut ops = OperatorConfig::by_name(&self.schedule)
            .ok_or_else(|| Error::Invalid(format!("unknown schedule {:?}", self.schedule)))?;
        if let Some(p) = self.p_combine {
            ops.p_combine = p;
        }
        if let Some(w) = &self.combine_weights {
            ops.combine_weights = weights(w)?;
        }
        if let Some(w) = &self.mutate_weights {
            ops.mutate_weights = weights(w)?;
        }
        cfg.operators = ops;
        cfg.population = self.population.map_or(PopulationSize::Auto, PopulationSize::Fixed);
        cfg.multilevel.t = self.t;
        cfg.multilevel.initial.runs = self.ip_runs;
        Ok(())
    }

    fn to_args(&self) -> Vec<String> {
        let mut a = vec!["--schedule".into(), self.schedule.clone(), "--t".into(), self.t.to_string()];
        a.extend(["--ip-runs".into(), self.ip_runs.to_string()]);
        if let Some(p) = self.p_combine {
            a.extend(["--p-combine".into(), p.to_string()]);
        }
        if let Some(w) = &self.combine_weights {
            a.extend(["--combine-weights".into(), w.clone()]);
        }
        if let Some(w) = &self.mutate_weights {
            a.extend(["--mutate-weights".into(), w.clone()]);
        }
        if let Some(p) = self.population {
            a.extend(["--population".into(), p.to_string()]);
        }
        a
    }
}

fn weights<const N: usize>(s: &str) -> Result<[f64; N], Error> {
    let v: Vec<f64> = parse_list(s)?;
    v.try_into().map_err(|_| Error::Invalid(format!("expected {N} weights in {s:?}")))
}

#[derive(Subcommand)]
enum Command {
    /// Partition one hypergraph.
    Partition {
        /// Input in hMetis format.
        #[arg(long)]
        hgr: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.03)]
        eps: f64,
        #[arg(long, value_enum, default_value = "single")]
        mode: ModeArg,
        /// Objective shown on stdout; optimization always uses km1.
        #[arg(long, value_enum, default_value = "km1")]
        objective: Objective,
        /// Wall-clock budget in seconds (repeated, evolve).
        #[arg(long)]
        time_limit: Option<f64>,
        /// Generation budget; makes runs reproducible.
        #[arg(long)]
        generations: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance name in the convergence CSV (default: file stem).
        #[arg(long)]
        instance_id: Option<String>,
        /// Output prefix: partition at PREFIX, stats at PREFIX.stats,
        /// convergence log at PREFIX.csv (default: <hgr>.part.<k>).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Run an instance × k × seed × mode grid, one child process per cell.
    /// The worker count comes from HGPART_WORKERS.
    Bench {
        #[arg(long, required = true, num_args = 1..)]
        instances: Vec<PathBuf>,
        /// Comma-separated block counts.
        #[arg(long, default_value = "2")]
        k: String,
        /// Comma-separated seeds.
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        /// Comma-separated modes.
        #[arg(long, default_value = "repeated,evolve")]
        modes: String,
        #[arg(long, default_value_t = 0.03)]
        eps: f64,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        generations: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Aggregate convergence CSVs into convergence or performance tables.
    Aggregate {
        #[arg(long, value_enum)]
        mode: AggregateMode,
        /// LABEL=PATH, PATH being a CSV file or a directory of CSV files.
        #[arg(long = "input", required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Logarithmic grid density for convergence tables.
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
        /// Extend the convergence grid to this time.
        #[arg(long)]
        until: Option<f64>,
    },
}

fn default_output(hgr: &Path, k: usize) -> PathBuf {
    with_suffix(hgr, &format!(".part.{k}"))
}

fn write_atomically(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> std::io::Result<()> {
    let tmp = with_suffix(path, ".tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        f(&mut w)?;
        std::io::Write::flush(&mut w)?;
    }
    fs::rename(tmp, path)
}

#[allow(clippy::too_many_arguments)]
fn cmd_partition(
    hgr: PathBuf,
    k: usize,
    eps: f64,
    mode: ModeArg,
    objective: Objective,
    time_limit: Option<f64>,
    generations: Option<u64>,
    seed: u64,
    instance_id: Option<String>,
    output: Option<PathBuf>,
    tuning: Tuning,
) -> Result<ExitCode, Error> {
    let h = read_hmetis(&hgr)?;
    let id = instance_id.unwrap_or_else(|| hgr.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned()));
    let mut cfg = RunConfig::new(id, k, mode.into(), seed);
    cfg.epsilon = eps;
    cfg.time_limit = time_limit;
    cfg.generations = generations;
    tuning.apply(&mut cfg)?;
    let result = run(&h, &cfg)?;

    let prefix = output.unwrap_or_else(|| default_output(&hgr, k));
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_atomically(&prefix, |w| write_partition(result.partition.assignment(), w))?;
    write_atomically(&csv_path(&prefix), |w| write_convergence_csv(&result.records, w))?;
    // stats last: their presence marks a finished run
    write_atomically(&stats_path(&prefix), |w| write_stats(&result.stats(&h, &cfg), w))?;

    let value = match objective {
        Objective::Km1 => result.partition.km1(),
        Objective::Cut => result.partition.cut(),
    };
    let name = match objective {
        Objective::Km1 => "km1",
        Objective::Cut => "cut",
    };
    println!("{name} = {value}");
    println!("balanced = {}", result.balanced);
    if result.balanced {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("no {eps}-balanced partition found");
        Ok(ExitCode::from(EXIT_UNBALANCED))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    instances: Vec<PathBuf>,
    k: String,
    seeds: String,
    modes: String,
    eps: f64,
    time_limit: Option<f64>,
    generations: Option<u64>,
    out: PathBuf,
    tuning: Tuning,
) -> Result<ExitCode, Error> {
    for inst in &instances {
        if !inst.is_file() {
            return Err(Error::Invalid(format!("cannot read instance {}", inst.display())));
        }
    }
    if time_limit.is_none() && generations.is_none() {
        return Err(Error::Invalid("bench needs --time-limit or --generations".into()));
    }
    let spec = GridSpec {
        instances,
        ks: parse_list(&k)?,
        seeds: parse_list(&seeds)?,
        modes: parse_list(&modes)?,
        epsilon: eps,
        time_limit,
        generations,
        out_dir: out,
        extra_args: tuning.to_args(),
    };
    let exe = std::env::current_exe()?;
    let report = run_grid(&spec, &exe, worker_count())?;
    let failed = report.failures();
    println!("{} cells, {} failed, results in {}", report.cells.len(), failed, spec.out_dir.join("results.csv").display());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_aggregate(
    mode: AggregateMode,
    inputs: Vec<String>,
    out: PathBuf,
    per_decade: usize,
    until: Option<f64>,
) -> Result<ExitCode, Error> {
    let series = inputs
        .iter()
        .map(|spec| {
            let (label, path) =
                spec.split_once('=').ok_or_else(|| Error::Invalid(format!("expected LABEL=PATH, got {spec:?}")))?;
            load_series(label, Path::new(path))
        })
        .collect::<Result<Vec<Series>, Error>>()?;
    match mode {
        AggregateMode::Convergence => {
            let grid = log_grid(&series, per_decade, until);
            let points = convergence(&series, &grid);
            write_atomically(&out, |w| write_convergence(&points, w))?;
        }
        AggregateMode::Performance => {
            let points = performance(&series)?;
            write_atomically(&out, |w| write_performance(&points, w))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Partition { hgr, k, eps, mode, objective, time_limit, generations, seed, instance_id, output, tuning } => {
            cmd_partition(hgr, k, eps, mode, objective, time_limit, generations, seed, instance_id, output, tuning)
        }
        Command::Bench { instances, k, seeds, modes, eps, time_limit, generations, out, tuning } => {
            cmd_bench(instances, k, seeds, modes, eps, time_limit, generations, out, tuning)
        }
        Command::Aggregate { mode, inputs, out, per_decade, until } => cmd_aggregate(mode, inputs, out, per_decade, until),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::TooFewNodes { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INFEASIBLE_INPUT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
