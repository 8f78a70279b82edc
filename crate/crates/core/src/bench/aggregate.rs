//! Aggregation of convergence logs: seeds are combined by arithmetic mean,
//! instances by geometric mean (values below 1 are lifted to 1 first).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{read_convergence_csv, ConvergenceRecord};
use crate::hgraph::Weight;
use crate::{Error, Result};

/// Convergence records of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub algorithm: String,
    pub records: Vec<ConvergenceRecord>,
}

type Trajectories = BTreeMap<String, BTreeMap<u64, Vec<(f64, Weight)>>>;

fn trajectories(records: &[ConvergenceRecord]) -> Trajectories {
    let mut out: Trajectories = BTreeMap::new();
    for r in records {
        out.entry(r.instance.clone()).or_default().entry(r.seed).or_default().push((r.elapsed, r.best));
    }
    for seeds in out.values_mut() {
        for t in seeds.values_mut() {
            t.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    out
}

/// Best objective at time `t` of a sorted trajectory, if any was reported yet.
fn step(traj: &[(f64, Weight)], t: f64) -> Option<Weight> {
    traj.iter().take_while(|&&(e, _)| e <= t).map(|&(_, b)| b).min()
}

/// Geometric mean of `max(v, 1)`. A single value is returned unchanged so
/// that one-instance aggregation is the identity.
pub fn geometric_mean(values: &[f64]) -> f64 {
    match values {
        [] => f64::NAN,
        [v] => v.max(1.0),
        _ => (values.iter().map(|v| v.max(1.0).ln()).sum::<f64>() / values.len() as f64).exp(),
    }
}

pub fn arithmetic_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Time points: the earliest time at which every trajectory has reported,
/// then `per_decade` logarithmic points per decade, then the last report
/// (or `until`, when later).
pub fn log_grid(series: &[Series], per_decade: usize, until: Option<f64>) -> Vec<f64> {
    let mut first = 0.0f64;
    let mut last = 0.0f64;
    let mut min_pos = f64::INFINITY;
    for s in series {
        for seeds in trajectories(&s.records).values() {
            for t in seeds.values() {
                first = first.max(t[0].0);
                last = last.max(t[t.len() - 1].0);
            }
        }
        for r in &s.records {
            if r.elapsed > 0.0 {
                min_pos = min_pos.min(r.elapsed);
            }
        }
    }
    let last = until.map_or(last, |u| u.max(last));
    let mut grid = vec![first];
    if per_decade > 0 && min_pos.is_finite() {
        let lo = first.max(min_pos);
        let mut j = (lo.log10() * per_decade as f64).floor() as i64;
        loop {
            let t = 10f64.powf(j as f64 / per_decade as f64);
            if t >= last {
                break;
            }
            if t > first {
                grid.push(t);
            }
            j += 1;
        }
    }
    if last > first {
        grid.push(last);
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePoint {
    pub algorithm: String,
    pub time: f64,
    pub value: f64,
}

/// Per time point: mean over seeds of the best-so-far objective of each
/// instance, then the geometric mean over instances. Points at which some
/// trajectory has not reported yet are omitted.
pub fn convergence(series: &[Series], grid: &[f64]) -> Vec<ConvergencePoint> {
    let mut out = Vec::new();
    for s in series {
        let traj = trajectories(&s.records);
        'time: for &t in grid {
            let mut per_instance = Vec::with_capacity(traj.len());
            for seeds in traj.values() {
                let mut vals = Vec::with_capacity(seeds.len());
                for tr in seeds.values() {
                    match step(tr, t) {
                        Some(b) => vals.push(b as f64),
                        None => continue 'time,
                    }
                }
                per_instance.push(arithmetic_mean(&vals));
            }
            out.push(ConvergencePoint { algorithm: s.algorithm.clone(), time: t, value: geometric_mean(&per_instance) });
        }
    }
    out
}

/// Mean final objective per (algorithm, instance).
pub fn final_means(series: &[Series]) -> BTreeMap<String, BTreeMap<String, f64>> {
    series
        .iter()
        .map(|s| {
            let per = trajectories(&s.records)
                .into_iter()
                .map(|(inst, seeds)| {
                    let finals: Vec<f64> =
                        seeds.values().map(|t| t.iter().map(|&(_, b)| b).min().expect("nonempty") as f64).collect();
                    (inst, arithmetic_mean(&finals))
                })
                .collect();
            (s.algorithm.clone(), per)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformancePoint {
    pub algorithm: String,
    pub ratio: f64,
    pub fraction: f64,
}

/// Performance profile: per instance, each algorithm's mean final objective
/// divided by the best algorithm's, then for every distinct ratio r the
/// fraction of instances with ratio ≤ r.
pub fn performance(series: &[Series]) -> Result<Vec<PerformancePoint>> {
    let means = final_means(series);
    let instances: BTreeSet<&String> = means.values().flat_map(|m| m.keys()).collect();
    for (alg, m) in &means {
        if m.len() != instances.len() {
            return Err(Error::Invalid(format!("algorithm {alg} lacks results for some instances")));
        }
    }
    let best: BTreeMap<&String, f64> = instances
        .iter()
        .map(|&i| (i, means.values().map(|m| m[i].max(1.0)).fold(f64::INFINITY, f64::min)))
        .collect();
    let n = instances.len() as f64;
    let mut out = Vec::new();
    for s in series {
        let m = &means[&s.algorithm];
        let mut ratios: Vec<f64> = instances.iter().map(|&i| m[i].max(1.0) / best[i]).collect();
        ratios.sort_by(f64::total_cmp);
        for (idx, &r) in ratios.iter().enumerate() {
            if idx + 1 < ratios.len() && ratios[idx + 1] == r {
                continue;
            }
            out.push(PerformancePoint { algorithm: s.algorithm.clone(), ratio: r, fraction: (idx + 1) as f64 / n });
        }
    }
    Ok(out)
}

pub const CONVERGENCE_HEADER: &str = "algorithm,time_s,geomean_best_km1";
pub const PERFORMANCE_HEADER: &str = "algorithm,ratio,fraction";

pub fn write_convergence(points: &[ConvergencePoint], mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "{CONVERGENCE_HEADER}")?;
    for p in points {
        writeln!(sink, "{},{},{}", p.algorithm, p.time, p.value)?;
    }
    Ok(())
}

pub fn write_performance(points: &[PerformancePoint], mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "{PERFORMANCE_HEADER}")?;
    for p in points {
        writeln!(sink, "{},{},{}", p.algorithm, p.ratio, p.fraction)?;
    }
    Ok(())
}

/// Loads a series from a CSV file or from every `*.csv` file of a directory.
pub fn load_series(algorithm: &str, path: &Path) -> Result<Series> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    let mut records = Vec::new();
    for f in files {
        let reader = std::io::BufReader::new(fs::File::open(&f)?);
        records.extend(read_convergence_csv(reader)?);
    }
    if records.is_empty() {
        return Err(Error::Invalid(format!("no convergence records under {}", path.display())));
    }
    Ok(Series { algorithm: algorithm.to_string(), records })
}
