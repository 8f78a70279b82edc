//! k-way partition state with incremental pin counts.
//!
//! Besides the block assignment, a [`Partition`] tracks per-block weights and
//! node counts, the number of pins of every edge inside every block, the
//! connectivity λ(e), and both objectives (connectivity λ−1 and cut). All of
//! them are updated by [`Partition::move_node`] without rescanning the
//! hypergraph.

use crate::hgraph::{BlockId, ContractionMemento, EdgeId, Hypergraph, NodeId, Weight};

/// Above this block count pin counts are stored sparsely per edge.
const DENSE_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("assignment has {got} entries, hypergraph has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("node {node} assigned to block {block}, k = {k}")]
    BlockOutOfRange { node: NodeId, block: BlockId, k: usize },
    #[error("block {0} is empty")]
    EmptyBlock(BlockId),
    #[error("moving node {node} would empty block {block}")]
    WouldEmptyBlock { node: NodeId, block: BlockId },
    #[error("node {0} is already in the target block")]
    SameBlock(NodeId),
    #[error("node {0} is not active")]
    InactiveNode(NodeId),
    #[error("k must be at least 1")]
    ZeroBlocks,
}

#[derive(Debug, Clone)]
enum PinCounts {
    Dense { k: usize, counts: Vec<u32> },
    Sparse(Vec<Vec<(BlockId, u32)>>),
}

impl PinCounts {
    fn new(k: usize, m: usize) -> Self {
        if k <= DENSE_MAX_K {
            PinCounts::Dense { k, counts: vec![0; k * m] }
        } else {
            PinCounts::Sparse(vec![Vec::new(); m])
        }
    }

    #[inline]
    fn get(&self, e: EdgeId, b: BlockId) -> u32 {
        match self {
            PinCounts::Dense { k, counts } => counts[e as usize * k + b as usize],
            PinCounts::Sparse(v) => v[e as usize].iter().find(|(x, _)| *x == b).map_or(0, |&(_, c)| c),
        }
    }

    #[inline]
    fn inc(&mut self, e: EdgeId, b: BlockId) -> u32 {
        match self {
            PinCounts::Dense { k, counts } => {
                let c = &mut counts[e as usize * *k + b as usize];
                *c += 1;
                *c
            }
            PinCounts::Sparse(v) => {
                let list = &mut v[e as usize];
                match list.iter_mut().find(|(x, _)| *x == b) {
                    Some((_, c)) => {
                        *c += 1;
                        *c
                    }
                    None => {
                        list.push((b, 1));
                        1
                    }
                }
            }
        }
    }

    #[inline]
    fn dec(&mut self, e: EdgeId, b: BlockId) -> u32 {
        match self {
            PinCounts::Dense { k, counts } => {
                let c = &mut counts[e as usize * *k + b as usize];
                *c -= 1;
                *c
            }
            PinCounts::Sparse(v) => {
                let list = &mut v[e as usize];
                let i = list.iter().position(|(x, _)| *x == b).expect("pin count present");
                list[i].1 -= 1;
                let c = list[i].1;
                if c == 0 {
                    list.swap_remove(i);
                }
                c
            }
        }
    }

    fn blocks(&self, e: EdgeId) -> ConnectivitySet<'_> {
        match self {
            PinCounts::Dense { k, counts } => {
                ConnectivitySet::Dense(counts[e as usize * k..(e as usize + 1) * k].iter().enumerate())
            }
            PinCounts::Sparse(v) => ConnectivitySet::Sparse(v[e as usize].iter()),
        }
    }
}

/// Blocks holding at least one pin of an edge, Λ(e).
pub enum ConnectivitySet<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, u32>>),
    Sparse(std::slice::Iter<'a, (BlockId, u32)>),
}

impl Iterator for ConnectivitySet<'_> {
    type Item = BlockId;

    #[inline]
    fn next(&mut self) -> Option<BlockId> {
        match self {
            ConnectivitySet::Dense(it) => it.find(|(_, &c)| c > 0).map(|(b, _)| b as BlockId),
            ConnectivitySet::Sparse(it) => it.next().map(|&(b, _)| b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    k: usize,
    block_of: Vec<BlockId>,
    block_weight: Vec<Weight>,
    block_size: Vec<u32>,
    pins_in_block: PinCounts,
    lambda: Vec<u32>,
    km1: Weight,
    cut: Weight,
}

impl Partition {
    /// Builds the partition state for the active nodes of `h`. Entries of
    /// `block_of` for inactive nodes are kept but ignored.
    pub fn new(h: &Hypergraph, k: usize, block_of: Vec<BlockId>) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroBlocks);
        }
        if block_of.len() != h.num_nodes() {
            return Err(PartitionError::Length { expected: h.num_nodes(), got: block_of.len() });
        }
        let mut block_weight = vec![0; k];
        let mut block_size = vec![0u32; k];
        for v in h.active_nodes() {
            let b = block_of[v as usize];
            if b as usize >= k {
                return Err(PartitionError::BlockOutOfRange { node: v, block: b, k });
            }
            block_weight[b as usize] += h.node_weight(v);
            block_size[b as usize] += 1;
        }
        if let Some(b) = block_size.iter().position(|&s| s == 0) {
            return Err(PartitionError::EmptyBlock(b as BlockId));
        }

        let mut pins_in_block = PinCounts::new(k, h.num_edges());
        let mut lambda = vec![0; h.num_edges()];
        let (mut km1, mut cut) = (0, 0);
        for e in h.edges() {
            for &p in h.pins(e) {
                if pins_in_block.inc(e, block_of[p as usize]) == 1 {
                    lambda[e as usize] += 1;
                }
            }
            let l = lambda[e as usize] as Weight;
            km1 += (l - 1) * h.edge_cost(e);
            if l > 1 {
                cut += h.edge_cost(e);
            }
        }

        Ok(Partition { k, block_of, block_weight, block_size, pins_in_block, lambda, km1, cut })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn block_of(&self, v: NodeId) -> BlockId {
        self.block_of[v as usize]
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.block_of
    }

    pub fn into_assignment(self) -> Vec<BlockId> {
        self.block_of
    }

    #[inline]
    pub fn block_weight(&self, b: BlockId) -> Weight {
        self.block_weight[b as usize]
    }

    pub fn block_weights(&self) -> &[Weight] {
        &self.block_weight
    }

    /// Number of active nodes in block `b`.
    #[inline]
    pub fn block_size(&self, b: BlockId) -> u32 {
        self.block_size[b as usize]
    }

    #[inline]
    pub fn pins_in_block(&self, e: EdgeId, b: BlockId) -> u32 {
        self.pins_in_block.get(e, b)
    }

    #[inline]
    pub fn lambda(&self, e: EdgeId) -> u32 {
        self.lambda[e as usize]
    }

    #[inline]
    pub fn connectivity_set(&self, e: EdgeId) -> ConnectivitySet<'_> {
        self.pins_in_block.blocks(e)
    }

    /// Connectivity objective Σ (λ(e)−1)·c(e), maintained incrementally.
    pub fn km1(&self) -> Weight {
        self.km1
    }

    /// Cut objective Σ_{λ(e)>1} c(e), maintained incrementally.
    pub fn cut(&self) -> Weight {
        self.cut
    }

    /// Moves `v` to `target` and returns the change of the connectivity
    /// objective (negative is an improvement).
    pub fn move_node(&mut self, h: &Hypergraph, v: NodeId, target: BlockId) -> Result<Weight, PartitionError> {
        if !h.is_active(v) {
            return Err(PartitionError::InactiveNode(v));
        }
        if target as usize >= self.k {
            return Err(PartitionError::BlockOutOfRange { node: v, block: target, k: self.k });
        }
        let source = self.block_of[v as usize];
        if source == target {
            return Err(PartitionError::SameBlock(v));
        }
        if self.block_size[source as usize] == 1 {
            return Err(PartitionError::WouldEmptyBlock { node: v, block: source });
        }
        Ok(self.apply_move(h, v, target))
    }

    /// Unchecked move used by the refinement hot loops.
    pub(crate) fn apply_move(&mut self, h: &Hypergraph, v: NodeId, target: BlockId) -> Weight {
        let source = self.block_of[v as usize];
        let w = h.node_weight(v);
        self.block_weight[source as usize] -= w;
        self.block_weight[target as usize] += w;
        self.block_size[source as usize] -= 1;
        self.block_size[target as usize] += 1;
        self.block_of[v as usize] = target;

        let mut delta = 0;
        for &e in h.incident_edges(v) {
            let c = h.edge_cost(e);
            let before = self.lambda[e as usize];
            let mut after = before;
            if self.pins_in_block.dec(e, source) == 0 {
                after -= 1;
            }
            if self.pins_in_block.inc(e, target) == 1 {
                after += 1;
            }
            if after != before {
                self.lambda[e as usize] = after;
                delta += (after as Weight - before as Weight) * c;
                match (before > 1, after > 1) {
                    (false, true) => self.cut += c,
                    (true, false) => self.cut -= c,
                    _ => {}
                }
            }
        }
        self.km1 += delta;
        delta
    }

    /// Updates the state after `h.uncontract(m)`: the restored node joins
    /// the block of the node it was merged into. Objectives are unchanged.
    pub fn on_uncontract(&mut self, h: &Hypergraph, m: &ContractionMemento) {
        let b = self.block_of[m.kept_node as usize];
        self.block_of[m.removed_node as usize] = b;
        self.block_size[b as usize] += 1;
        for &(e, _) in &m.shrunk_edges {
            self.pins_in_block.inc(e, b);
        }
        debug_assert!(h.is_active(m.removed_node));
    }

    /// Recomputes all derived state from scratch and compares.
    pub fn audit(&self, h: &Hypergraph) -> Result<(), String> {
        let fresh = Partition::new(h, self.k, self.block_of.clone()).map_err(|e| e.to_string())?;
        if fresh.block_weight != self.block_weight {
            return Err(format!("block weights {:?} != {:?}", self.block_weight, fresh.block_weight));
        }
        if fresh.block_size != self.block_size {
            return Err("block sizes out of sync".into());
        }
        if fresh.lambda != self.lambda {
            return Err("lambda out of sync".into());
        }
        for e in h.edges() {
            for b in 0..self.k as BlockId {
                if fresh.pins_in_block(e, b) != self.pins_in_block(e, b) {
                    return Err(format!("pin count of edge {e} in block {b} out of sync"));
                }
            }
        }
        if fresh.km1 != self.km1 || fresh.cut != self.cut {
            return Err(format!("objectives ({}, {}) != ({}, {})", self.km1, self.cut, fresh.km1, fresh.cut));
        }
        Ok(())
    }
}

/// Connectivity metric (λ−1) of `p`.
pub fn connectivity_metric(_h: &Hypergraph, p: &Partition) -> Weight {
    p.km1()
}

/// Cut metric of `p`.
pub fn cut_metric(_h: &Hypergraph, p: &Partition) -> Weight {
    p.cut()
}

/// Largest block weight admitted by an ε-balance constraint:
/// (1+ε)·⌈W/k⌉, floored since node weights are integral.
pub fn max_block_weight(total: Weight, k: usize, epsilon: f64) -> Weight {
    let k = k as Weight;
    let avg = (total + k - 1) / k;
    ((1.0 + epsilon) * avg as f64).floor() as Weight
}

pub fn is_balanced(h: &Hypergraph, p: &Partition, epsilon: f64) -> bool {
    let limit = max_block_weight(h.total_weight(), p.k(), epsilon);
    p.block_weights().iter().all(|&w| w <= limit)
}

/// max_b w(V_b) / ⌈W/k⌉ − 1.
pub fn imbalance(h: &Hypergraph, p: &Partition) -> f64 {
    let k = p.k() as Weight;
    let avg = ((h.total_weight() + k - 1) / k).max(1);
    let heaviest = p.block_weights().iter().copied().max().unwrap_or(0);
    heaviest as f64 / avg as f64 - 1.0
}

/// Multiset of cut edges, each edge `e` held λ(e)−1 times. Stored as sorted
/// (edge, multiplicity) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature(Vec<(EdgeId, u32)>);

impl Signature {
    /// Builds a signature from (edge, multiplicity) pairs in any order.
    /// Repeated edges are summed and zero multiplicities dropped.
    pub fn from_entries(mut entries: Vec<(EdgeId, u32)>) -> Self {
        entries.sort_unstable();
        let mut out: Vec<(EdgeId, u32)> = Vec::with_capacity(entries.len());
        for (e, m) in entries {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += m,
                _ => out.push((e, m)),
            }
        }
        out.retain(|&(_, m)| m > 0);
        Signature(out)
    }

    pub fn entries(&self) -> &[(EdgeId, u32)] {
        &self.0
    }

    /// Cardinality of the multiset.
    pub fn len(&self) -> u64 {
        self.0.iter().map(|&(_, m)| m as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn multiplicity(&self, e: EdgeId) -> u32 {
        self.0.binary_search_by_key(&e, |&(x, _)| x).map_or(0, |i| self.0[i].1)
    }

    /// Cardinality of the multiset symmetric difference, Σ_e |a(e) − b(e)|.
    pub fn distance(&self, other: &Signature) -> u64 {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut d) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    d += a[i].1 as u64;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    d += b[j].1 as u64;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    d += a[i].1.abs_diff(b[j].1) as u64;
                    i += 1;
                    j += 1;
                }
            }
        }
        d += a[i..].iter().map(|&(_, m)| m as u64).sum::<u64>();
        d += b[j..].iter().map(|&(_, m)| m as u64).sum::<u64>();
        d
    }
}

pub fn signature(h: &Hypergraph, p: &Partition) -> Signature {
    Signature(h.edges().filter(|&e| p.lambda(e) > 1).map(|e| (e, p.lambda(e) - 1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::tests::{h0, random_hypergraph};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_km1(h: &Hypergraph, block_of: &[BlockId]) -> (Weight, Weight) {
        let (mut km1, mut cut) = (0, 0);
        for e in h.edges() {
            let mut blocks: Vec<BlockId> = h.pins(e).iter().map(|&p| block_of[p as usize]).collect();
            blocks.sort();
            blocks.dedup();
            km1 += (blocks.len() as Weight - 1) * h.edge_cost(e);
            if blocks.len() > 1 {
                cut += h.edge_cost(e);
            }
        }
        (km1, cut)
    }

    #[test]
    fn h0_metrics() {
        let h = h0();
        let p = Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(connectivity_metric(&h, &p), 2);
        assert_eq!(cut_metric(&h, &p), 2);
        assert_eq!(p.lambda(0), 1);
        assert_eq!(p.lambda(1), 2);
        let sig = signature(&h, &p);
        assert_eq!(sig.entries(), &[(1, 1), (2, 1)]);
        let uncut = Partition::new(&h, 1, vec![0; 4]).unwrap();
        assert_eq!(uncut.km1(), 0);
        assert!(signature(&h, &uncut).is_empty());
    }

    #[test]
    fn signature_multiplicity() {
        let h = Hypergraph::new(4, vec![vec![0, 1, 2, 3]], None, None).unwrap();
        let p = Partition::new(&h, 4, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(signature(&h, &p).multiplicity(0), 3);
        assert_eq!(p.km1(), 3);
        assert_eq!(p.cut(), 1);
    }

    #[test]
    fn distance_rules() {
        let h = h0();
        let a = signature(&h, &Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap());
        let b = signature(&h, &Partition::new(&h, 2, vec![0, 1, 0, 1]).unwrap());
        assert_eq!(a.distance(&a), 0);
        assert_eq!(a.distance(&b), 1);
        assert_eq!(b.distance(&a), 1);
        let c = Signature(vec![(1, 2), (2, 1)]);
        let d = Signature(vec![(1, 1), (2, 1)]);
        assert_eq!(c.distance(&d), 1);
    }

    #[test]
    fn construction_errors() {
        let h = h0();
        assert_eq!(Partition::new(&h, 2, vec![0, 0, 0, 0]).unwrap_err(), PartitionError::EmptyBlock(1));
        assert!(matches!(Partition::new(&h, 2, vec![0, 0, 2, 1]), Err(PartitionError::BlockOutOfRange { .. })));
        assert!(matches!(Partition::new(&h, 2, vec![0, 1]), Err(PartitionError::Length { .. })));
    }

    #[test]
    fn balance_bound() {
        let h = Hypergraph::new(4, vec![vec![0, 1, 2, 3]], None, None).unwrap();
        assert!(is_balanced(&h, &Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap(), 0.0));
        assert!(!is_balanced(&h, &Partition::new(&h, 2, vec![0, 0, 0, 1]).unwrap(), 0.0));
        assert!(is_balanced(&h, &Partition::new(&h, 4, vec![0, 1, 2, 3]).unwrap(), 1e9));
        // W = 100, k = 4: bound 1.03 * 25 = 25.75
        assert_eq!(max_block_weight(100, 4, 0.03), 25);
        assert_eq!(max_block_weight(100, 4, 0.04), 26);
        assert_eq!(max_block_weight(4, 2, 0.0), 2);
    }

    #[test]
    fn star_move_cuts_every_edge() {
        // centre 0 joined to 1..4 by 2-pin edges of cost 1..4
        let edges = (1..5).map(|i| vec![0, i]).collect();
        let h = Hypergraph::new(6, edges, None, Some(vec![1, 2, 3, 4])).unwrap();
        let mut p = Partition::new(&h, 2, vec![0, 0, 0, 0, 0, 1]).unwrap();
        assert_eq!(p.move_node(&h, 0, 1).unwrap(), 10);
        assert_eq!(p.move_node(&h, 0, 0).unwrap(), -10);
        assert_eq!(p.km1(), 0);
    }

    #[test]
    fn move_errors() {
        let h = h0();
        let mut p = Partition::new(&h, 2, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(p.move_node(&h, 0, 1), Err(PartitionError::WouldEmptyBlock { node: 0, block: 0 }));
        assert_eq!(p.move_node(&h, 1, 1), Err(PartitionError::SameBlock(1)));
        assert!(matches!(p.move_node(&h, 1, 5), Err(PartitionError::BlockOutOfRange { .. })));
    }

    #[test]
    fn random_moves_match_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut moves = 0;
        while moves < 10_000 {
            let n = rng.gen_range(4..14);
            let k = rng.gen_range(2..=4.min(n));
            let m = rng.gen_range(1..16);
            let h = random_hypergraph(&mut rng, n, m, 5);
            let mut block_of: Vec<BlockId> = (0..n).map(|i| (i % k) as BlockId).collect();
            block_of.swap(0, n - 1);
            let mut p = Partition::new(&h, k, block_of).unwrap();
            for _ in 0..50 {
                let v = rng.gen_range(0..n as NodeId);
                let t = rng.gen_range(0..k as BlockId);
                let before = brute_km1(&h, p.assignment());
                match p.move_node(&h, v, t) {
                    Ok(delta) => {
                        let after = brute_km1(&h, p.assignment());
                        assert_eq!(delta, after.0 - before.0);
                        assert_eq!((p.km1(), p.cut()), after);
                        moves += 1;
                    }
                    Err(PartitionError::SameBlock(_)) | Err(PartitionError::WouldEmptyBlock { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
            p.audit(&h).unwrap();
        }
    }

    #[test]
    fn sparse_and_dense_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hypergraph(&mut rng, 40, 60, 8);
        let block_of: Vec<BlockId> = (0..40).map(|i| (i % 12) as BlockId).collect();
        let sparse = Partition::new(&h, 12, block_of.clone()).unwrap();
        let (mut km1, mut cut) = (0, 0);
        for e in h.edges() {
            let l = sparse.connectivity_set(e).count() as Weight;
            assert_eq!(l, sparse.lambda(e) as Weight);
            km1 += (l - 1) * h.edge_cost(e);
            cut += if l > 1 { h.edge_cost(e) } else { 0 };
        }
        assert_eq!((km1, cut), (sparse.km1(), sparse.cut()));
        let dense_of: Vec<BlockId> = block_of.iter().map(|b| b % 8).collect();
        let dense = Partition::new(&h, 8, dense_of).unwrap();
        for e in h.edges() {
            assert_eq!(dense.connectivity_set(e).count() as u32, dense.lambda(e));
        }
    }

    #[test]
    fn uncontract_updates_counts() {
        let mut h = h0();
        let m = h.contract(2, 3).unwrap();
        let mut block_of = vec![0, 0, 1, 1];
        block_of[3] = 7; // stale entry of an inactive node is ignored
        let mut p = Partition::new(&h, 2, block_of).unwrap();
        assert_eq!(p.km1(), 2);
        h.uncontract(&m).unwrap();
        p.on_uncontract(&h, &m);
        p.audit(&h).unwrap();
        assert_eq!(p.block_of(3), 1);
    }
}
