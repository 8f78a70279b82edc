//! Initial partitioning by recursive bisection.
//!
//! Every bisection runs a small pool of randomized algorithms (random
//! balanced assignment, BFS region growing, greedy hypergraph growing) a
//! fixed number of times each, refines every candidate with 2-way FM and
//! keeps the best. Edges cut by a bisection are split: each side keeps its
//! own pins, which is the right model for the connectivity objective.

use std::collections::{BinaryHeap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use super::fm::{rebalance, FmConfig, FmRefiner};
use super::clustering::Clustering;
use super::coarsen::{coarsen, CoarseningConfig};
use super::fm2::BisectionFm;
use super::rating::HeavyEdge;
use crate::hgraph::{BlockId, Hypergraph, NodeId, Weight};
use crate::partition::{is_balanced, max_block_weight, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BisectionAlgorithm {
    Random,
    BfsGrowing,
    GreedyGrowing,
}

pub const POOL: [BisectionAlgorithm; 3] =
    [BisectionAlgorithm::Random, BisectionAlgorithm::BfsGrowing, BisectionAlgorithm::GreedyGrowing];

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    /// Runs of every pool algorithm per bisection.
    pub runs: usize,
    /// Larger sub-hypergraphs are coarsened to about this many nodes before
    /// the pool runs, and the bisection is projected back and refined.
    pub coarse_nodes: usize,
    pub fm: FmConfig,
}

impl Default for InitialConfig {
    fn default() -> Self {
        // short searches: every bisection is refined 60 times
        InitialConfig {
            runs: 20,
            coarse_nodes: 300,
            fm: FmConfig { max_passes: 10, max_fruitless_moves: 50, ..FmConfig::default() },
        }
    }
}

/// Result of a partitioning step that may fail to meet the balance bound.
#[derive(Debug, Clone)]
pub struct Partitioned {
    pub partition: Partition,
    /// False when no ε-balanced partition was found; the partition is then
    /// the least imbalanced candidate.
    pub balanced: bool,
}

/// Relaxed imbalance for a bisection step of a sub-hypergraph of weight
/// `sub_weight` destined for `k_sub` final blocks, such that the final
/// per-block `limit` remains reachable after ⌈log2 k_sub⌉ further levels.
pub fn adaptive_epsilon(limit: Weight, sub_weight: Weight, k_sub: usize) -> f64 {
    if k_sub <= 1 || sub_weight <= 0 {
        return 0.0;
    }
    let depth = (k_sub as f64).log2().ceil();
    let ratio = k_sub as f64 * limit as f64 / sub_weight as f64;
    (ratio.powf(1.0 / depth) - 1.0).max(0.0)
}

fn side_bounds(limit: Weight, sub_weight: Weight, k_sub: usize) -> [Weight; 2] {
    let eps = adaptive_epsilon(limit, sub_weight, k_sub);
    let k0 = k_sub - k_sub / 2;
    let k1 = k_sub / 2;
    let bound = |ki: usize| {
        let b = ((1.0 + eps) * (ki as f64 * sub_weight as f64) / k_sub as f64 + 1e-9).floor() as Weight;
        b.min(ki as Weight * limit)
    };
    [bound(k0), bound(k1)]
}

/// Computes a k-way partition of the active nodes of `h`.
pub fn initial_partition(h: &Hypergraph, k: usize, epsilon: f64, cfg: &InitialConfig, rng: &mut impl Rng) -> Partitioned {
    let nodes: Vec<NodeId> = h.active_nodes().collect();
    assert!(nodes.len() >= k && k >= 1, "need at least k active nodes");
    let limit = max_block_weight(h.total_weight(), k, epsilon);

    let sub = h.induced(&nodes);
    let mut local_block = vec![0 as BlockId; nodes.len()];
    let ids: Vec<NodeId> = (0..nodes.len() as NodeId).collect();
    recurse(&sub, &ids, 0, k, limit, cfg, rng, &mut local_block);

    let mut block_of = vec![0 as BlockId; h.num_nodes()];
    for (i, &v) in nodes.iter().enumerate() {
        block_of[v as usize] = local_block[i];
    }
    let mut partition = Partition::new(h, k, block_of).expect("recursive bisection yields k nonempty blocks");
    let bounds = vec![limit; k];
    let mut refiner = FmRefiner::new(h.num_nodes(), k);
    let mut balanced = is_balanced(h, &partition, epsilon);
    if !balanced {
        balanced = rebalance(h, &mut partition, &bounds);
    }
    refiner.refine(h, &mut partition, &bounds, &cfg.fm);
    Partitioned { partition, balanced }
}

/// Assigns blocks `first..first+k_sub` to the nodes of `g`; `ids[i]` is the
/// top-level id of local node `i`.
#[allow(clippy::too_many_arguments)]
fn recurse(
    g: &Hypergraph,
    ids: &[NodeId],
    first: BlockId,
    k_sub: usize,
    limit: Weight,
    cfg: &InitialConfig,
    rng: &mut impl Rng,
    out: &mut [BlockId],
) {
    if k_sub == 1 {
        for &id in ids {
            out[id as usize] = first;
        }
        return;
    }
    let k0 = k_sub - k_sub / 2;
    let k1 = k_sub / 2;
    let bounds = side_bounds(limit, g.total_weight(), k_sub);
    let side = multilevel_bisect(g, bounds, [k0, k1], cfg, rng);

    for (s, ks, offset) in [(0, k0, 0), (1, k1, k0 as BlockId)] {
        let members: Vec<NodeId> = (0..g.num_nodes() as NodeId).filter(|&v| side[v as usize] == s).collect();
        let sub_ids: Vec<NodeId> = members.iter().map(|&v| ids[v as usize]).collect();
        let sub = g.induced(&members);
        recurse(&sub, &sub_ids, first + offset, ks, limit, cfg, rng, out);
    }
}

/// [`bisect`] on a heavy-edge coarsening of `g` when `g` is large, projected
/// back and refined with two-way FM.
fn multilevel_bisect(
    g: &Hypergraph,
    bounds: [Weight; 2],
    min_nodes: [usize; 2],
    cfg: &InitialConfig,
    rng: &mut impl Rng,
) -> Vec<BlockId> {
    let n = g.num_nodes();
    let target = cfg.coarse_nodes.max(2 * (min_nodes[0] + min_nodes[1]));
    if n <= target {
        return bisect(g, bounds, min_nodes, cfg, rng);
    }
    let mut work = g.clone();
    let coarsening = CoarseningConfig::new(g.total_weight(), 2, target.div_ceil(2));
    let hierarchy = coarsen(&mut work, &coarsening, &Clustering::unrestricted(n), &HeavyEdge, rng);
    let nodes: Vec<NodeId> = work.active_nodes().collect();
    let coarse_side = bisect(&work.induced(&nodes), bounds, min_nodes, cfg, rng);
    let mut side = vec![0 as BlockId; n];
    for (i, &v) in nodes.iter().enumerate() {
        side[v as usize] = coarse_side[i];
    }
    for m in hierarchy.mementos.iter().rev() {
        side[m.removed_node as usize] = side[m.kept_node as usize];
    }
    let mut p = Partition::new(g, 2, side).expect("projection keeps both sides nonempty");
    BisectionFm::new(n).refine(g, &mut p, &bounds, &cfg.fm);
    let mut side = p.into_assignment();
    enforce_counts(g, &mut side, min_nodes);
    side
}

/// Best bisection over the pool; side `i` gets at least `min_nodes[i]` nodes.
pub fn bisect(
    g: &Hypergraph,
    bounds: [Weight; 2],
    min_nodes: [usize; 2],
    cfg: &InitialConfig,
    rng: &mut impl Rng,
) -> Vec<BlockId> {
    let n = g.num_nodes();
    debug_assert!(n >= min_nodes[0] + min_nodes[1]);
    let mut refiner = BisectionFm::new(n);
    let total = g.total_weight();
    let target0 = total as f64 * min_nodes[0] as f64 / (min_nodes[0] + min_nodes[1]) as f64;

    let mut best: Option<((Weight, Weight), Vec<BlockId>)> = None;
    'pool: for algo in POOL {
        for _ in 0..cfg.runs.max(1) {
            let mut side = match algo {
                BisectionAlgorithm::Random => random_bisection(g, target0, rng),
                BisectionAlgorithm::BfsGrowing => bfs_bisection(g, target0, rng),
                BisectionAlgorithm::GreedyGrowing => greedy_bisection(g, target0, rng),
            };
            enforce_counts(g, &mut side, min_nodes);
            let mut p = Partition::new(g, 2, side).expect("both sides nonempty");
            if p.block_weight(0) > bounds[0] || p.block_weight(1) > bounds[1] {
                rebalance(g, &mut p, &bounds);
            }
            refiner.refine(g, &mut p, &bounds, &cfg.fm);
            // refinement may leave a side with too few nodes for its blocks
            if p.block_size(0) < min_nodes[0] as u32 || p.block_size(1) < min_nodes[1] as u32 {
                let mut side = p.into_assignment();
                enforce_counts(g, &mut side, min_nodes);
                p = Partition::new(g, 2, side).expect("both sides nonempty");
            }
            let overload = (p.block_weight(0) - bounds[0]).max(0) + (p.block_weight(1) - bounds[1]).max(0);
            let key = (overload, p.km1());
            if best.as_ref().map_or(true, |(b, _)| key < *b) {
                let perfect = key == (0, 0);
                best = Some((key, p.into_assignment()));
                if perfect {
                    break 'pool;
                }
            }
        }
    }
    best.expect("pool ran at least once").1
}

fn random_bisection(g: &Hypergraph, target0: f64, rng: &mut impl Rng) -> Vec<BlockId> {
    let mut order: Vec<NodeId> = (0..g.num_nodes() as NodeId).collect();
    order.shuffle(rng);
    let mut side = vec![1 as BlockId; g.num_nodes()];
    let mut w0 = 0;
    for v in order {
        if (w0 as f64) < target0 {
            side[v as usize] = 0;
            w0 += g.node_weight(v);
        }
    }
    side
}

fn bfs_bisection(g: &Hypergraph, target0: f64, rng: &mut impl Rng) -> Vec<BlockId> {
    let n = g.num_nodes();
    let mut side = vec![1 as BlockId; n];
    let mut visited = vec![false; n];
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(rng);
    let mut queue = VecDeque::new();
    let mut w0 = 0;
    let mut restart = order.into_iter();
    while (w0 as f64) < target0 {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => match restart.find(|&v| !visited[v as usize]) {
                Some(v) => {
                    visited[v as usize] = true;
                    v
                }
                None => break,
            },
        };
        side[v as usize] = 0;
        w0 += g.node_weight(v);
        for &e in g.incident_edges(v) {
            for &u in g.pins(e) {
                if !visited[u as usize] {
                    visited[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    side
}

/// Grows side 0 from a random seed, always absorbing the node whose move
/// increases the cut the least.
fn greedy_bisection(g: &Hypergraph, target0: f64, rng: &mut impl Rng) -> Vec<BlockId> {
    let n = g.num_nodes();
    if n < 2 {
        return vec![0; n];
    }
    let seed = rng.gen_range(0..n as NodeId);
    let mut side = vec![1 as BlockId; n];
    side[seed as usize] = 0;
    let mut p = Partition::new(g, 2, side).expect("seed and rest nonempty");
    let mut w0 = g.node_weight(seed);
    let mut version = vec![0u32; n];
    let mut heap: BinaryHeap<(Weight, std::cmp::Reverse<NodeId>, u32)> = BinaryHeap::new();

    let gain_to_0 = |p: &Partition, v: NodeId| -> Weight {
        g.incident_edges(v)
            .iter()
            .filter(|&&e| !g.is_inert(e))
            .map(|&e| {
                let c = g.edge_cost(e);
                let mut gain = 0;
                if p.pins_in_block(e, 1) == 1 {
                    gain += c;
                }
                if p.pins_in_block(e, 0) == 0 {
                    gain -= c;
                }
                gain
            })
            .sum()
    };
    let frontier = |p: &Partition, heap: &mut BinaryHeap<_>, version: &mut [u32], v: NodeId| {
        for &e in g.incident_edges(v) {
            for &u in g.pins(e) {
                if p.block_of(u) == 1 {
                    version[u as usize] += 1;
                    heap.push((gain_to_0(p, u), std::cmp::Reverse(u), version[u as usize]));
                }
            }
        }
    };
    frontier(&p, &mut heap, &mut version, seed);
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(rng);
    let mut restart = order.into_iter();

    while (w0 as f64) < target0 && p.block_size(1) > 1 {
        let v = loop {
            match heap.pop() {
                Some((_, std::cmp::Reverse(v), ver)) if ver == version[v as usize] && p.block_of(v) == 1 => break Some(v),
                Some(_) => continue,
                None => break restart.find(|&v| p.block_of(v) == 1),
            }
        };
        let Some(v) = v else { break };
        p.apply_move(g, v, 0);
        w0 += g.node_weight(v);
        frontier(&p, &mut heap, &mut version, v);
    }
    p.into_assignment()
}

/// Moves the lightest nodes across until side `i` holds `min_nodes[i]` nodes.
fn enforce_counts(g: &Hypergraph, side: &mut [BlockId], min_nodes: [usize; 2]) {
    for s in 0..2 {
        let other = 1 - s;
        let mut count = side.iter().filter(|&&b| b as usize == s).count();
        if count >= min_nodes[s] {
            continue;
        }
        let mut donors: Vec<NodeId> = (0..g.num_nodes() as NodeId).filter(|&v| side[v as usize] as usize == other).collect();
        donors.sort_by_key(|&v| (g.node_weight(v), v));
        for v in donors {
            if count >= min_nodes[s] {
                break;
            }
            side[v as usize] = s as BlockId;
            count += 1;
        }
    }
}
