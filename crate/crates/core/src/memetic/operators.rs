//! Recombination and mutation operators. Each one is a configuration of the
//! multilevel pipeline: a clustering constraint, a rating, and whether the
//! coarsest level is partitioned from scratch or inherits a parent's blocks.

use std::collections::HashMap;

use rand::Rng;

use super::config::Operator;
use super::population::{Individual, Population};
use crate::hgraph::{BlockId, EdgeId, Hypergraph, NodeId};
use crate::multilevel::{
    run_pipeline, ClusterPolicy, Clustering, FrequencyRating, HeavyEdge, InitialMode, MultilevelConfig, Partitioned,
};
use crate::partition::Partition;

/// C1: contract only nodes that both parents place together, then refine the
/// first parent's partition. Never worse than `parent1`.
pub fn combine_c1(
    h: &Hypergraph,
    parent1: &Individual,
    parent2: &Individual,
    epsilon: f64,
    cfg: &MultilevelConfig,
    rng: &mut impl Rng,
) -> Partitioned {
    let k = parent1.k();
    let (a, b) = (parent1.assignment(), parent2.assignment());
    let labels: Vec<u32> = a.iter().zip(b).map(|(&x, &y)| x * k as u32 + y + 1).collect();
    let clustering = Clustering::new(labels, ClusterPolicy::SameClusterOnly);
    run_pipeline(h, k, epsilon, cfg, &cfg.coarsening(h, k), &clustering, &HeavyEdge, InitialMode::Project(a), rng)
}

/// Edge frequencies over the `round(sqrt(|pop|))` fittest members: how many
/// of them cut each edge.
pub fn cut_frequencies(h: &Hypergraph, pop: &Population) -> Vec<u32> {
    let p = (pop.len() as f64).sqrt().round().max(1.0) as usize;
    let mut freq = vec![0u32; h.num_edges()];
    for i in pop.fittest(p) {
        for &(e, _) in pop.get(i).signature().entries() {
            freq[e as usize] += 1;
        }
    }
    freq
}

/// C2: full pipeline with the frequency rating, which prefers pairs sharing
/// small edges rarely cut by the fittest individuals.
pub fn combine_c2(
    h: &Hypergraph,
    pop: &Population,
    k: usize,
    epsilon: f64,
    gamma: f64,
    cfg: &MultilevelConfig,
    rng: &mut impl Rng,
) -> Partitioned {
    let rating = FrequencyRating::new(cut_frequencies(h, pop), gamma);
    run_pipeline(
        h,
        k,
        epsilon,
        cfg,
        &cfg.coarsening(h, k),
        &Clustering::unrestricted(h.num_nodes()),
        &rating,
        InitialMode::Compute,
        rng,
    )
}

/// Mean squared pin fraction of the node set over its incident edges.
/// `nodes` must be distinct.
pub fn block_quality(h: &Hypergraph, nodes: &[NodeId]) -> f64 {
    let mut inside: HashMap<EdgeId, u32> = HashMap::new();
    for &v in nodes {
        for &e in h.incident_edges(v) {
            *inside.entry(e).or_insert(0) += 1;
        }
    }
    if inside.is_empty() {
        return 0.0;
    }
    let sum: f64 = inside
        .iter()
        .map(|(&e, &c)| {
            let f = c as f64 / h.edge_size(e) as f64;
            f * f
        })
        .sum();
    sum / inside.len() as f64
}

/// Greedy block selection over the blocks of both parents. Returns cluster
/// labels: selected blocks get 1, 2, ... in selection order, everything
/// left over after ⌊3k/2⌋ selections gets 0.
pub fn c3_clusters(h: &Hypergraph, parent1: &[BlockId], parent2: &[BlockId], k: usize) -> Vec<u32> {
    let n = h.num_nodes();
    let parents = [parent1, parent2];
    let mut blocks: [Vec<Vec<NodeId>>; 2] = [vec![Vec::new(); k], vec![Vec::new(); k]];
    for v in h.active_nodes() {
        for (pi, parent) in parents.iter().enumerate() {
            blocks[pi][parent[v as usize] as usize].push(v);
        }
    }
    let mut quality: [Vec<f64>; 2] = [
        blocks[0].iter().map(|b| block_quality(h, b)).collect(),
        blocks[1].iter().map(|b| block_quality(h, b)).collect(),
    ];

    let mut label = vec![0u32; n];
    let mut assigned = vec![false; n];
    let mut remaining = h.num_active_nodes();
    let cap = 3 * k / 2;
    let mut selected = 0;
    while selected < cap && remaining > 0 {
        let mut best: Option<(usize, usize)> = None;
        for pi in 0..2 {
            for bi in 0..k {
                if blocks[pi][bi].is_empty() {
                    continue;
                }
                if best.map_or(true, |(bp, bb)| quality[pi][bi] > quality[bp][bb]) {
                    best = Some((pi, bi));
                }
            }
        }
        let Some((pi, bi)) = best else { break };
        selected += 1;
        let taken = std::mem::take(&mut blocks[pi][bi]);
        let other = 1 - pi;
        let mut touched: Vec<usize> = Vec::new();
        for &v in &taken {
            label[v as usize] = selected as u32;
            assigned[v as usize] = true;
            touched.push(parents[other][v as usize] as usize);
        }
        remaining -= taken.len();
        touched.sort_unstable();
        touched.dedup();
        for ob in touched {
            blocks[other][ob].retain(|&v| !assigned[v as usize]);
            quality[other][ob] = block_quality(h, &blocks[other][ob]);
        }
    }
    label
}

/// C3: coarsen inside the greedily selected blocks until nothing can be
/// contracted, then run the full pipeline from a fresh initial partition.
pub fn combine_c3(
    h: &Hypergraph,
    parent1: &Individual,
    parent2: &Individual,
    epsilon: f64,
    cfg: &MultilevelConfig,
    rng: &mut impl Rng,
) -> Partitioned {
    let k = parent1.k();
    let labels = c3_clusters(h, parent1.assignment(), parent2.assignment(), k);
    let clustering = Clustering::new(labels, ClusterPolicy::SameClusterOnly);
    let mut coarsening = cfg.coarsening(h, k);
    coarsening.respect_kappa = false;
    coarsening.stop_at_tk = false;
    run_pipeline(h, k, epsilon, cfg, &coarsening, &clustering, &HeavyEdge, InitialMode::Compute, rng)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

/// Clusters for M3/M4. Inside each block, nodes are connected through edges
/// with at least two pins in that block. A component that contains every pin
/// of some edge gets the block's label `b + 1`; other components get 0.
/// The returned clustering uses [`ClusterPolicy::SameClusterOnly`].
pub fn build_mutation_clusters(h: &Hypergraph, p: &Partition) -> Clustering {
    let n = h.num_nodes();
    let mut dsu: Vec<u32> = (0..n as u32).collect();
    let mut first: Vec<(BlockId, NodeId)> = Vec::new();
    for e in h.edges() {
        first.clear();
        for &v in h.pins(e) {
            let b = p.block_of(v);
            match first.iter().find(|&&(fb, _)| fb == b) {
                Some(&(_, root)) => {
                    let (ra, rb) = (find(&mut dsu, root), find(&mut dsu, v));
                    if ra != rb {
                        dsu[rb as usize] = ra;
                    }
                }
                None => first.push((b, v)),
            }
        }
    }
    let mut qualifies = vec![false; n];
    for e in h.edges() {
        if p.lambda(e) == 1 {
            let r = find(&mut dsu, h.pins(e)[0]);
            qualifies[r as usize] = true;
        }
    }
    let labels = (0..n as NodeId)
        .map(|v| {
            if !h.is_active(v) {
                return 0;
            }
            let r = find(&mut dsu, v);
            if qualifies[r as usize] {
                p.block_of(v) + 1
            } else {
                0
            }
        })
        .collect();
    Clustering::new(labels, ClusterPolicy::SameClusterOnly)
}

/// M1: a V-cycle. Never worse than the parent.
pub fn mutate_m1(h: &Hypergraph, parent: &Individual, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Partitioned {
    let a = parent.assignment();
    let k = parent.k();
    let clustering = Clustering::from_blocks(a);
    run_pipeline(h, k, epsilon, cfg, &cfg.coarsening(h, k), &clustering, &HeavyEdge, InitialMode::Project(a), rng)
}

/// M2: V-cycle coarsening followed by a fresh initial partition.
pub fn mutate_m2(h: &Hypergraph, parent: &Individual, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Partitioned {
    let k = parent.k();
    let clustering = Clustering::from_blocks(parent.assignment());
    run_pipeline(h, k, epsilon, cfg, &cfg.coarsening(h, k), &clustering, &HeavyEdge, InitialMode::Compute, rng)
}

/// M3: like M1, but components without a fully contained edge stay
/// uncontracted. Never worse than the parent.
pub fn mutate_m3(h: &Hypergraph, parent: &Individual, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Partitioned {
    let a = parent.assignment();
    let k = parent.k();
    let clustering = build_mutation_clusters(h, &parent.partition(h));
    run_pipeline(h, k, epsilon, cfg, &cfg.coarsening(h, k), &clustering, &HeavyEdge, InitialMode::Project(a), rng)
}

/// M4: cluster-0 nodes may merge with anything; fresh initial partition.
pub fn mutate_m4(h: &Hypergraph, parent: &Individual, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Partitioned {
    let k = parent.k();
    let c = build_mutation_clusters(h, &parent.partition(h));
    let clustering = Clustering::new(c.labels().to_vec(), ClusterPolicy::SameClusterOrZero);
    run_pipeline(h, k, epsilon, cfg, &cfg.coarsening(h, k), &clustering, &HeavyEdge, InitialMode::Compute, rng)
}

/// Dispatches one of M1..M4.
pub fn mutate(
    op: Operator,
    h: &Hypergraph,
    parent: &Individual,
    epsilon: f64,
    cfg: &MultilevelConfig,
    rng: &mut impl Rng,
) -> Partitioned {
    match op {
        Operator::M1 => mutate_m1(h, parent, epsilon, cfg, rng),
        Operator::M2 => mutate_m2(h, parent, epsilon, cfg, rng),
        Operator::M3 => mutate_m3(h, parent, epsilon, cfg, rng),
        Operator::M4 => mutate_m4(h, parent, epsilon, cfg, rng),
        other => panic!("{other} is not a mutation operator"),
    }
}
