use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Budget, EvolveConfig, Operator, PopulationSize};
use super::operators::{combine_c1, combine_c2, combine_c3, mutate};
use super::population::{tournament_select, tournament_single, Individual, Population};
use crate::hgraph::{Hypergraph, Weight};
use crate::multilevel::{check_k, partition_single, uniform_bounds, MultilevelConfig, Partitioned};
use crate::partition::Partition;
use crate::Result;

const REROLLS: usize = 5;
const PERTURB_ATTEMPTS: usize = 20;

/// S = clamp(round(0.15·T/τ), 3, 50) for a time limit T and a single-run
/// duration τ, both in seconds.
pub fn population_size(time_limit: f64, tau: f64) -> usize {
    if tau <= 0.0 {
        return 50;
    }
    let s = (0.15 * time_limit / tau).round();
    if s.is_nan() {
        return 3;
    }
    (s as i64).clamp(3, 50) as usize
}

/// One improvement of the best objective seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Progress {
    /// Seconds since the start; the generation index in generation-count mode.
    pub elapsed: f64,
    pub generation: u64,
    pub operator: Operator,
    pub best: Weight,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperatorStats {
    pub invoked: BTreeMap<Operator, u64>,
    /// Offspring that entered the population.
    pub accepted: BTreeMap<Operator, u64>,
    /// Offspring that improved the best objective.
    pub improved: BTreeMap<Operator, u64>,
    /// Offspring dropped because they missed the balance bound.
    pub unbalanced: u64,
}

impl OperatorStats {
    pub fn invocations(&self, op: Operator) -> u64 {
        self.invoked.get(&op).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    /// Fittest individual ever seen, whether or not it is still a member.
    pub best: Individual,
    pub population: Population,
    pub stats: OperatorStats,
    pub generations: u64,
    /// Duration of the first single-shot run, in seconds.
    pub tau: f64,
}

struct Clock {
    start: Instant,
    logical: bool,
}

impl Clock {
    fn elapsed(&self, generation: u64) -> f64 {
        if self.logical {
            generation as f64
        } else {
            self.start.elapsed().as_secs_f64()
        }
    }
}

/// One random move of a non-singleton node to another block that keeps the
/// balance bound, used to break a duplicate.
fn perturb(h: &Hypergraph, p: &mut Partition, epsilon: f64, rng: &mut impl Rng) -> bool {
    let k = p.k();
    let bounds = uniform_bounds(h, k, epsilon);
    let nodes: Vec<_> = h.active_nodes().collect();
    for _ in 0..PERTURB_ATTEMPTS {
        let v = nodes[rng.gen_range(0..nodes.len())];
        let from = p.block_of(v);
        let to = rng.gen_range(0..k as u32);
        if to == from || p.block_size(from) < 2 || p.block_weight(to) + h.node_weight(v) > bounds[to as usize] {
            continue;
        }
        p.apply_move(h, v, to);
        return true;
    }
    false
}

/// Builds the initial population. The first single-shot run is timed to
/// size the population; each further member uses a seed drawn from `rng`.
/// Duplicates and unbalanced results are re-rolled, then perturbed; members
/// that still collide are dropped, so tiny instances with few distinct
/// balanced partitions can end up with a smaller population.
pub fn init_population(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    cfg: &EvolveConfig,
    rng: &mut impl Rng,
    mut on_member: impl FnMut(&Individual),
) -> Result<(Population, f64)> {
    check_k(h, k)?;
    let ml = &cfg.multilevel;
    let single = |rng: &mut ChaCha8Rng| -> Partitioned { partition_single(h, k, epsilon, ml, rng).expect("k checked") };

    let started = Instant::now();
    let first = single(&mut ChaCha8Rng::seed_from_u64(rng.gen()));
    let tau = started.elapsed().as_secs_f64();
    let size = match (cfg.population, cfg.budget) {
        (PopulationSize::Fixed(s), _) => s.max(1),
        (PopulationSize::Auto, Budget::Time(limit)) => population_size(limit.as_secs_f64(), tau),
        (PopulationSize::Auto, Budget::Generations(_)) => PopulationSize::GENERATION_MODE_DEFAULT,
    };
    log::debug!("single run took {tau:.3}s, population size {size}");

    let mut pop = Population::new();
    let ind = Individual::from_partition(h, &first.partition);
    on_member(&ind);
    pop.push_unique(ind);
    for _ in 1..size {
        let mut candidate = None;
        for _ in 0..=REROLLS {
            let r = single(&mut ChaCha8Rng::seed_from_u64(rng.gen()));
            let ind = Individual::from_partition(h, &r.partition);
            let fresh = !pop.contains_equivalent(&ind);
            if r.balanced && fresh {
                candidate = Some(ind);
                break;
            }
            if r.balanced {
                candidate.get_or_insert(ind);
            }
        }
        let Some(mut ind) = candidate else { continue };
        if pop.contains_equivalent(&ind) {
            let mut p = ind.partition(h);
            let mut resolved = false;
            for _ in 0..PERTURB_ATTEMPTS {
                if !perturb(h, &mut p, epsilon, rng) {
                    break;
                }
                let next = Individual::from_partition(h, &p);
                if !pop.contains_equivalent(&next) {
                    ind = next;
                    resolved = true;
                    break;
                }
            }
            if !resolved {
                log::debug!("dropping a duplicate initial member");
                continue;
            }
        }
        on_member(&ind);
        pop.push_unique(ind);
    }
    Ok((pop, tau))
}

fn weighted(weights: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().copied()).ok()
}

/// Steady-state evolution: one offspring per generation until the budget is
/// spent. `sink` receives every improvement of the best objective.
pub fn evolve(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    cfg: &EvolveConfig,
    rng: &mut impl Rng,
    sink: impl FnMut(&Progress),
) -> Result<EvolveOutcome> {
    evolve_observed(h, k, epsilon, cfg, rng, sink, |_, _| {})
}

/// [`evolve`] that also shows the population to `observe` after
/// initialization (generation 0) and after every generation.
pub fn evolve_observed(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    cfg: &EvolveConfig,
    rng: &mut impl Rng,
    mut sink: impl FnMut(&Progress),
    mut observe: impl FnMut(u64, &Population),
) -> Result<EvolveOutcome> {
    check_k(h, k)?;
    cfg.operators.validate()?;
    let ops = cfg.operators.for_k(k);
    let combine = weighted(&ops.combine_weights);
    let mutation = weighted(&ops.mutate_weights);
    let p_combine = match (&combine, &mutation) {
        (None, _) => 0.0,
        (_, None) => 1.0,
        _ => ops.p_combine,
    };
    let (limit, max_generations) = match cfg.budget {
        Budget::Time(d) => (d, u64::MAX),
        Budget::Generations(g) => (Duration::MAX, g),
    };
    let clock = Clock { start: Instant::now(), logical: matches!(cfg.budget, Budget::Generations(_)) };

    let mut best: Option<Individual> = None;
    let mut stats = OperatorStats::default();
    let (mut pop, tau) = init_population(h, k, epsilon, cfg, rng, |ind| {
        if best.as_ref().map_or(true, |b| ind.objective() < b.objective()) {
            best = Some(ind.clone());
            sink(&Progress { elapsed: clock.elapsed(0), generation: 0, operator: Operator::Init, best: ind.objective() });
        }
    })?;
    let mut best = best.expect("population holds the first run");
    *stats.invoked.entry(Operator::Init).or_default() += pop.len() as u64;

    let ml: &MultilevelConfig = &cfg.multilevel;
    let mut generation = 0u64;
    observe(0, &pop);
    while generation < max_generations && clock.start.elapsed() < limit {
        generation += 1;
        let recombine = rng.gen_bool(p_combine);
        let op = if recombine {
            Operator::COMBINE[combine.as_ref().expect("nonzero combine weights").sample(rng)]
        } else {
            Operator::MUTATE[mutation.as_ref().expect("nonzero mutation weights").sample(rng)]
        };
        *stats.invoked.entry(op).or_default() += 1;

        let offspring = match op {
            Operator::C1 | Operator::C3 => {
                let (a, b) = if pop.len() >= 2 { tournament_select(&pop, rng) } else { (0, 0) };
                let (p1, p2) = (pop.get(a), pop.get(b));
                if op == Operator::C1 {
                    combine_c1(h, p1, p2, epsilon, ml, rng)
                } else {
                    combine_c3(h, p1, p2, epsilon, ml, rng)
                }
            }
            Operator::C2 => combine_c2(h, &pop, k, epsilon, ops.gamma, ml, rng),
            _ => {
                let i = tournament_single(&pop, rng);
                mutate(op, h, pop.get(i), epsilon, ml, rng)
            }
        };
        if !offspring.balanced {
            stats.unbalanced += 1;
            observe(generation, &pop);
            continue;
        }
        let ind = Individual::from_partition(h, &offspring.partition);
        if ind.objective() < best.objective() {
            best = ind.clone();
            *stats.improved.entry(op).or_default() += 1;
            sink(&Progress { elapsed: clock.elapsed(generation), generation, operator: op, best: best.objective() });
        }
        if pop.replace(ind) {
            *stats.accepted.entry(op).or_default() += 1;
        }
        observe(generation, &pop);
    }
    Ok(EvolveOutcome { best, population: pop, stats, generations: generation, tau })
}
