//! Two-way FM with incremental gain updates. Bisections in initial
//! partitioning are refined 60 times each, so the k-way refiner's full gain
//! recomputation after every move is too slow there.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::fm::FmConfig;
use crate::hgraph::{BlockId, Hypergraph, NodeId, Weight};
use crate::partition::Partition;

pub(crate) struct BisectionFm {
    gain: Vec<Weight>,
    version: Vec<u32>,
    locked: Vec<bool>,
    heap: BinaryHeap<(Weight, Reverse<NodeId>, u32)>,
    moves: Vec<NodeId>,
}

impl BisectionFm {
    pub fn new(num_nodes: usize) -> Self {
        BisectionFm {
            gain: vec![0; num_nodes],
            version: vec![0; num_nodes],
            locked: vec![false; num_nodes],
            heap: BinaryHeap::new(),
            moves: Vec::new(),
        }
    }

    fn compute_gain(h: &Hypergraph, p: &Partition, v: NodeId) -> Weight {
        let from = p.block_of(v);
        let to = 1 - from;
        let mut g = 0;
        for &e in h.incident_edges(v) {
            if h.is_inert(e) {
                continue;
            }
            let c = h.edge_cost(e);
            if p.pins_in_block(e, from) == 1 {
                g += c;
            }
            if p.pins_in_block(e, to) == 0 {
                g -= c;
            }
        }
        g
    }

    fn push(&mut self, v: NodeId) {
        let i = v as usize;
        self.version[i] = self.version[i].wrapping_add(1);
        self.heap.push((self.gain[i], Reverse(v), self.version[i]));
    }

    fn adjust(&mut self, u: NodeId, delta: Weight) {
        self.gain[u as usize] += delta;
        if !self.locked[u as usize] {
            self.push(u);
        }
    }

    /// Passes until one gains nothing or `cfg.max_passes` is reached.
    pub fn refine(&mut self, h: &Hypergraph, p: &mut Partition, bounds: &[Weight; 2], cfg: &FmConfig) -> Weight {
        debug_assert_eq!(p.k(), 2);
        let mut total = 0;
        for _ in 0..cfg.max_passes {
            let gained = self.pass(h, p, bounds, cfg.max_fruitless_moves);
            total += gained;
            if gained == 0 {
                break;
            }
        }
        total
    }

    fn pass(&mut self, h: &Hypergraph, p: &mut Partition, bounds: &[Weight; 2], fruitless_limit: usize) -> Weight {
        self.heap.clear();
        self.moves.clear();
        for v in h.active_nodes() {
            self.locked[v as usize] = false;
            self.gain[v as usize] = Self::compute_gain(h, p, v);
            if h.incident_edges(v).iter().any(|&e| p.lambda(e) > 1) {
                self.push(v);
            }
        }

        let start = p.km1();
        let (mut best, mut best_len, mut fruitless) = (start, 0, 0);
        while let Some((gain, Reverse(v), version)) = self.heap.pop() {
            if self.locked[v as usize] || version != self.version[v as usize] {
                continue;
            }
            let from = p.block_of(v);
            let to: BlockId = 1 - from;
            if p.block_size(from) <= 1 || p.block_weight(to) + h.node_weight(v) > bounds[to as usize] {
                continue;
            }
            let delta = p.apply_move(h, v, to);
            debug_assert_eq!(delta, -gain);
            self.locked[v as usize] = true;
            self.moves.push(v);

            if p.km1() < best {
                best = p.km1();
                best_len = self.moves.len();
                fruitless = 0;
            } else {
                fruitless += 1;
                if fruitless >= fruitless_limit {
                    break;
                }
            }

            for &e in h.incident_edges(v) {
                if h.is_inert(e) {
                    continue;
                }
                let c = h.edge_cost(e);
                let (a, b) = (p.pins_in_block(e, from), p.pins_in_block(e, to));
                if b == 1 {
                    // `to` was empty: nobody pays for opening it any more
                    for &u in h.pins(e) {
                        if u != v {
                            self.adjust(u, c);
                        }
                    }
                } else if b == 2 {
                    if let Some(&u) = h.pins(e).iter().find(|&&u| u != v && p.block_of(u) == to) {
                        self.adjust(u, -c);
                    }
                }
                if a == 0 {
                    for &u in h.pins(e) {
                        if u != v {
                            self.adjust(u, -c);
                        }
                    }
                } else if a == 1 {
                    if let Some(&u) = h.pins(e).iter().find(|&&u| p.block_of(u) == from) {
                        self.adjust(u, c);
                    }
                }
            }
        }

        while self.moves.len() > best_len {
            let v = self.moves.pop().expect("non-empty");
            let back = 1 - p.block_of(v);
            p.apply_move(h, v, back);
        }
        start - best
    }
}
