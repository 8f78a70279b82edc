//! k-way Fiduccia–Mattheyses refinement on the connectivity objective.
//!
//! Gains are integral, so candidate moves live in a max-heap keyed by
//! (gain, lower node id, lower target block). Entries are invalidated lazily
//! through per-node version counters; a popped entry is re-evaluated against
//! the current state before it is applied. After a move only the pins of
//! edges whose pin counts crossed a gain-relevant threshold are re-rated.

use std::collections::BinaryHeap;

use crate::hgraph::{BlockId, ContractionMemento, Hypergraph, NodeId, Weight};
use crate::partition::{max_block_weight, Partition};

#[derive(Debug, Clone, PartialEq)]
pub struct FmConfig {
    /// Upper bound on passes per refinement call; passes also stop as soon
    /// as one yields no improvement.
    pub max_passes: usize,
    /// A pass ends after this many consecutive moves without a new best.
    pub max_fruitless_moves: usize,
    /// Hard cap for the localized searches run after each uncontraction.
    pub local_fruitless_moves: usize,
    /// Localized searches also stop once the mean gain since the last
    /// improvement is negative enough relative to its variance; larger
    /// values search longer.
    pub adaptive_alpha: f64,
}

impl Default for FmConfig {
    fn default() -> Self {
        FmConfig { max_passes: 100, max_fruitless_moves: 500, local_fruitless_moves: 50, adaptive_alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    gain: Weight,
    node: NodeId,
    target: BlockId,
    version: u32,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gain
            .cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.target.cmp(&self.target))
            .then_with(|| self.version.cmp(&other.version))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable scratch state for FM passes over one hypergraph, including a
/// gain cache: per node the summed cost of its edges, the cost of edges it
/// is the only pin of its block in, and per block the cost of its edges
/// that already touch that block. Moves update the cache incrementally.
pub struct FmRefiner {
    k: usize,
    heap: BinaryHeap<Entry>,
    version: Vec<u32>,
    locked: Vec<u32>,
    queued: Vec<u32>,
    pass: u32,
    move_stamp: u32,
    total: Vec<Weight>,
    benefit: Vec<Weight>,
    conn: Vec<Weight>,
    moves: Vec<(NodeId, BlockId)>,
    touched: Vec<NodeId>,
    scratch_conn: Vec<Weight>,
    scratch_adjacent: Vec<bool>,
    scratch_list: Vec<BlockId>,
}

impl FmRefiner {
    pub fn new(num_nodes: usize, k: usize) -> Self {
        FmRefiner {
            k,
            heap: BinaryHeap::new(),
            version: vec![0; num_nodes],
            locked: vec![0; num_nodes],
            queued: vec![0; num_nodes],
            pass: 0,
            move_stamp: 0,
            total: vec![0; num_nodes],
            benefit: vec![0; num_nodes],
            conn: vec![0; num_nodes * k],
            moves: Vec::new(),
            touched: Vec::new(),
            scratch_conn: vec![0; k],
            scratch_adjacent: vec![false; k],
            scratch_list: Vec::new(),
        }
    }

    /// Best balance-feasible move of `v` to an adjacent block, as
    /// (gain, target), computed from scratch. Gain is the decrease of the
    /// connectivity objective.
    pub fn best_move(&mut self, h: &Hypergraph, p: &Partition, bounds: &[Weight], v: NodeId) -> Option<(Weight, BlockId)> {
        let source = p.block_of(v);
        if p.block_size(source) <= 1 {
            return None;
        }
        let mut benefit = 0;
        let mut total = 0;
        for &e in h.incident_edges(v) {
            if h.is_inert(e) {
                continue;
            }
            let c = h.edge_cost(e);
            total += c;
            if p.pins_in_block(e, source) == 1 {
                benefit += c;
            }
            for b in p.connectivity_set(e) {
                if b != source {
                    if !self.scratch_adjacent[b as usize] {
                        self.scratch_adjacent[b as usize] = true;
                        self.scratch_list.push(b);
                    }
                    self.scratch_conn[b as usize] += c;
                }
            }
        }
        self.scratch_list.sort_unstable();
        let w = h.node_weight(v);
        let mut best: Option<(Weight, BlockId)> = None;
        for &b in &self.scratch_list {
            let gain = benefit - total + self.scratch_conn[b as usize];
            if p.block_weight(b) + w <= bounds[b as usize] && best.map_or(true, |(g, _)| gain > g) {
                best = Some((gain, b));
            }
        }
        for &b in &self.scratch_list {
            self.scratch_adjacent[b as usize] = false;
            self.scratch_conn[b as usize] = 0;
        }
        self.scratch_list.clear();
        best
    }

    /// Same as [`FmRefiner::best_move`], read from the gain cache.
    fn cached_best_move(&self, h: &Hypergraph, p: &Partition, bounds: &[Weight], v: NodeId) -> Option<(Weight, BlockId)> {
        let source = p.block_of(v);
        if p.block_size(source) <= 1 {
            return None;
        }
        let i = v as usize;
        let base = self.benefit[i] - self.total[i];
        let w = h.node_weight(v);
        let conn = &self.conn[i * self.k..(i + 1) * self.k];
        let mut best: Option<(Weight, BlockId)> = None;
        for (b, &c) in conn.iter().enumerate() {
            let b = b as BlockId;
            if c == 0 || b == source {
                continue;
            }
            let gain = base + c;
            if p.block_weight(b) + w <= bounds[b as usize] && best.map_or(true, |(g, _)| gain > g) {
                best = Some((gain, b));
            }
        }
        best
    }

    fn recompute(&mut self, h: &Hypergraph, p: &Partition, v: NodeId) {
        let i = v as usize;
        let source = p.block_of(v);
        let (mut total, mut benefit) = (0, 0);
        self.conn[i * self.k..(i + 1) * self.k].iter_mut().for_each(|c| *c = 0);
        for &e in h.incident_edges(v) {
            if h.is_inert(e) {
                continue;
            }
            let c = h.edge_cost(e);
            total += c;
            if p.pins_in_block(e, source) == 1 {
                benefit += c;
            }
            for b in p.connectivity_set(e) {
                self.conn[i * self.k + b as usize] += c;
            }
        }
        self.total[i] = total;
        self.benefit[i] = benefit;
    }

    /// Builds the gain cache for `p`. Every later change of `p` must go
    /// through this refiner or [`FmRefiner::on_uncontract`].
    pub fn attach(&mut self, h: &Hypergraph, p: &Partition) {
        for v in h.active_nodes() {
            self.recompute(h, p, v);
        }
    }

    /// Updates the cache after `h.uncontract(m)` and `p.on_uncontract(h, m)`;
    /// only the two restored nodes change.
    pub fn on_uncontract(&mut self, h: &Hypergraph, p: &Partition, m: &ContractionMemento) {
        self.recompute(h, p, m.kept_node);
        self.recompute(h, p, m.removed_node);
    }

    /// Moves `v` to `to` and updates the cache. With `collect`, unlocked
    /// pins of edges whose gain-relevant pin counts changed are gathered in
    /// `self.touched`.
    fn apply(&mut self, h: &Hypergraph, p: &mut Partition, v: NodeId, to: BlockId, collect: bool) -> Weight {
        let from = p.block_of(v);
        let delta = p.apply_move(h, v, to);
        let k = self.k;
        let mut benefit_v = 0;
        for &e in h.incident_edges(v) {
            if h.is_inert(e) {
                continue;
            }
            let c = h.edge_cost(e);
            let (a, b) = (p.pins_in_block(e, from), p.pins_in_block(e, to));
            if b == 1 {
                benefit_v += c;
            }
            // gains of other pins only change when these counts cross 0/1/2
            if a > 1 && b > 2 {
                continue;
            }
            for &u in h.pins(e) {
                let i = u as usize;
                if a == 0 {
                    self.conn[i * k + from as usize] -= c;
                }
                if b == 1 {
                    self.conn[i * k + to as usize] += c;
                }
                if u != v {
                    let bu = p.block_of(u);
                    if a == 1 && bu == from {
                        self.benefit[i] += c;
                    }
                    if b == 2 && bu == to {
                        self.benefit[i] -= c;
                    }
                    if collect && self.locked[i] != self.pass && self.queued[i] != self.move_stamp {
                        self.queued[i] = self.move_stamp;
                        self.touched.push(u);
                    }
                }
            }
        }
        self.benefit[v as usize] = benefit_v;
        delta
    }

    fn push(&mut self, h: &Hypergraph, p: &Partition, bounds: &[Weight], v: NodeId) {
        self.version[v as usize] = self.version[v as usize].wrapping_add(1);
        if let Some((gain, target)) = self.cached_best_move(h, p, bounds, v) {
            self.heap.push(Entry { gain, node: v, target, version: self.version[v as usize] });
        }
    }

    fn next_pass(&mut self) {
        self.pass = self.pass.wrapping_add(1);
        if self.pass == 0 {
            self.locked.iter_mut().for_each(|x| *x = 0);
            self.pass = 1;
        }
    }

    fn next_move_stamp(&mut self) {
        self.move_stamp = self.move_stamp.wrapping_add(1);
        if self.move_stamp == 0 {
            self.queued.iter_mut().for_each(|x| *x = 0);
            self.move_stamp = 1;
        }
    }

    /// One FM pass seeded with `seeds`. Moves are applied greedily by gain;
    /// at the end the pass rolls back to the earliest prefix attaining the
    /// best objective. Returns the objective decrease (≥ 0). The cache must
    /// be attached to `p`.
    pub fn pass(
        &mut self,
        h: &Hypergraph,
        p: &mut Partition,
        bounds: &[Weight],
        seeds: impl IntoIterator<Item = NodeId>,
        fruitless_limit: usize,
    ) -> Weight {
        self.run_pass(h, p, bounds, seeds, fruitless_limit, None)
    }

    /// Localized pass around `seeds` with the adaptive stopping rule.
    pub fn local_pass(
        &mut self,
        h: &Hypergraph,
        p: &mut Partition,
        bounds: &[Weight],
        seeds: impl IntoIterator<Item = NodeId>,
        cfg: &FmConfig,
    ) -> Weight {
        self.run_pass(h, p, bounds, seeds, cfg.local_fruitless_moves, Some(cfg.adaptive_alpha))
    }

    fn run_pass(
        &mut self,
        h: &Hypergraph,
        p: &mut Partition,
        bounds: &[Weight],
        seeds: impl IntoIterator<Item = NodeId>,
        fruitless_limit: usize,
        adaptive_alpha: Option<f64>,
    ) -> Weight {
        let beta = (h.num_active_nodes().max(2) as f64).ln();
        let mut stats = GainStats::default();
        self.next_pass();
        self.heap.clear();
        self.moves.clear();
        for v in seeds {
            if h.is_active(v) {
                self.push(h, p, bounds, v);
            }
        }

        let start = p.km1();
        let mut best = start;
        let mut best_len = 0;
        let mut fruitless = 0;
        while let Some(entry) = self.heap.pop() {
            let v = entry.node;
            if self.locked[v as usize] == self.pass || entry.version != self.version[v as usize] {
                continue;
            }
            match self.cached_best_move(h, p, bounds, v) {
                None => continue,
                Some((gain, target)) if gain != entry.gain || target != entry.target => {
                    self.heap.push(Entry { gain, node: v, target, version: entry.version });
                    continue;
                }
                Some(_) => {}
            }

            let from = p.block_of(v);
            self.locked[v as usize] = self.pass;
            self.next_move_stamp();
            let delta = self.apply(h, p, v, entry.target, true);
            let touched = std::mem::take(&mut self.touched);
            for &u in &touched {
                self.push(h, p, bounds, u);
            }
            self.touched = touched;
            self.touched.clear();
            debug_assert_eq!(delta, -entry.gain);
            self.moves.push((v, from));

            if p.km1() < best {
                best = p.km1();
                best_len = self.moves.len();
                fruitless = 0;
                stats = GainStats::default();
            } else {
                fruitless += 1;
                stats.push(entry.gain as f64);
                if fruitless >= fruitless_limit || adaptive_alpha.is_some_and(|a| stats.should_stop(a, beta)) {
                    break;
                }
            }
        }

        while self.moves.len() > best_len {
            let (v, from) = self.moves.pop().expect("non-empty");
            self.apply(h, p, v, from, false);
        }
        debug_assert_eq!(p.km1(), best);
        start - best
    }

    /// Attaches the cache, then runs full passes seeded with every boundary
    /// node until one gains nothing.
    pub fn refine(&mut self, h: &Hypergraph, p: &mut Partition, bounds: &[Weight], cfg: &FmConfig) -> Weight {
        self.attach(h, p);
        let mut improvement = 0;
        for _ in 0..cfg.max_passes {
            let seeds: Vec<NodeId> = h.active_nodes().filter(|&v| is_boundary(h, p, v)).collect();
            let gained = self.pass(h, p, bounds, seeds, cfg.max_fruitless_moves);
            improvement += gained;
            if gained == 0 {
                break;
            }
        }
        improvement
    }
}

/// Running mean and variance of move gains since the last improvement.
#[derive(Default)]
struct GainStats {
    steps: usize,
    mean: f64,
    m2: f64,
}

impl GainStats {
    fn push(&mut self, gain: f64) {
        self.steps += 1;
        let d = gain - self.mean;
        self.mean += d / self.steps as f64;
        self.m2 += d * (gain - self.mean);
    }

    /// True once `steps > beta` and either the mean gain is zero or the
    /// walk is unlikely to climb back to a new best.
    fn should_stop(&self, alpha: f64, beta: f64) -> bool {
        if (self.steps as f64) <= beta {
            return false;
        }
        if self.mean == 0.0 {
            return true;
        }
        let variance = if self.steps > 1 { self.m2 / (self.steps - 1) as f64 } else { 0.0 };
        self.steps as f64 >= alpha * variance / (self.mean * self.mean) + beta
    }
}

/// Whether `v` has an incident edge spanning more than one block.
pub fn is_boundary(h: &Hypergraph, p: &Partition, v: NodeId) -> bool {
    h.incident_edges(v).iter().any(|&e| p.lambda(e) > 1)
}

/// Uniform per-block bounds for an ε-balance constraint.
pub fn uniform_bounds(h: &Hypergraph, k: usize, epsilon: f64) -> Vec<Weight> {
    vec![max_block_weight(h.total_weight(), k, epsilon); k]
}

/// k-way FM refinement of `p` under the ε-balance constraint. Returns the
/// decrease of the connectivity objective; the objective never increases.
pub fn fm_refine(h: &Hypergraph, p: &mut Partition, epsilon: f64, rounds: usize) -> Weight {
    let bounds = uniform_bounds(h, p.k(), epsilon);
    let cfg = FmConfig { max_passes: rounds, ..FmConfig::default() };
    FmRefiner::new(h.num_nodes(), p.k()).refine(h, p, &bounds, &cfg)
}

/// Greedily moves nodes out of overweight blocks, preferring the least
/// damaging feasible moves. Returns whether all bounds hold afterwards.
pub fn rebalance(h: &Hypergraph, p: &mut Partition, bounds: &[Weight]) -> bool {
    let k = p.k();
    let mut conn = vec![0 as Weight; k];
    loop {
        let Some(over) = (0..k as BlockId).find(|&b| p.block_weight(b) > bounds[b as usize]) else {
            return true;
        };
        // (loss, node, target) for every node of the overweight block
        let mut candidates: Vec<(Weight, NodeId, BlockId)> = Vec::new();
        for v in h.active_nodes().filter(|&v| p.block_of(v) == over) {
            let mut benefit = 0;
            let mut total = 0;
            for &e in h.incident_edges(v) {
                if h.is_inert(e) {
                    continue;
                }
                let c = h.edge_cost(e);
                total += c;
                if p.pins_in_block(e, over) == 1 {
                    benefit += c;
                }
                for b in p.connectivity_set(e) {
                    conn[b as usize] += c;
                }
            }
            let w = h.node_weight(v);
            let best = (0..k as BlockId)
                .filter(|&b| b != over && p.block_weight(b) + w <= bounds[b as usize])
                .map(|b| (total - benefit - conn[b as usize], b))
                .min();
            conn.iter_mut().for_each(|c| *c = 0);
            if let Some((loss, b)) = best {
                candidates.push((loss, v, b));
            }
        }
        candidates.sort_unstable();
        let mut moved = false;
        for (_, v, b) in candidates {
            if p.block_weight(over) <= bounds[over as usize] {
                break;
            }
            if p.block_size(over) > 1 && p.block_weight(b) + h.node_weight(v) <= bounds[b as usize] {
                p.apply_move(h, v, b);
                moved = true;
            }
        }
        if !moved {
            return false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::tests::{h0, random_hypergraph};
    use crate::partition::is_balanced;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn repairs_h0() {
        let h = h0();
        let mut p = Partition::new(&h, 2, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(p.km1(), 3);
        // with ε = 0 every single move is infeasible, so the pass is stuck
        assert_eq!(fm_refine(&h, &mut p, 0.0, 10), 0);
        // a bound of 3 admits moving node 1 next to node 0
        let gained = fm_refine(&h, &mut p, 0.5, 10);
        assert_eq!(gained, 1);
        assert_eq!(p.km1(), 2);
        assert!(is_balanced(&h, &p, 0.5));
        p.audit(&h).unwrap();
    }

    #[test]
    fn optimum_is_left_alone() {
        let h = h0();
        let mut p = Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(fm_refine(&h, &mut p, 0.0, 10), 0);
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
    }

    #[test]
    fn monotone_and_balance_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(6..40);
            let k = rng.gen_range(2..=4);
            let m = rng.gen_range(3..60);
            let h = random_hypergraph(&mut rng, n, m, 5);
            let mut block_of: Vec<BlockId> = (0..n).map(|i| (i % k) as BlockId).collect();
            for i in (1..n).rev() {
                block_of.swap(i, rng.gen_range(0..=i));
            }
            let mut p = Partition::new(&h, k, block_of).unwrap();
            let eps = 0.5;
            let was_balanced = is_balanced(&h, &p, eps);
            let before = p.km1();
            let gained = fm_refine(&h, &mut p, eps, 10);
            assert_eq!(p.km1(), before - gained);
            assert!(gained >= 0);
            if was_balanced {
                assert!(is_balanced(&h, &p, eps));
            }
            p.audit(&h).unwrap();
        }
    }

    #[test]
    fn rebalance_fixes_overload() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hypergraph(&mut rng, 30, 40, 4);
        let mut block_of = vec![0; 30];
        block_of[29] = 1;
        block_of[28] = 2;
        let mut p = Partition::new(&h, 3, block_of).unwrap();
        let bounds = uniform_bounds(&h, 3, 0.03);
        assert!(rebalance(&h, &mut p, &bounds));
        assert!(is_balanced(&h, &p, 0.03));
        p.audit(&h).unwrap();
    }
}
