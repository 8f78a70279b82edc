//! n-level coarsening: one contraction per level.

use rand::seq::SliceRandom;
use rand::Rng;

use super::clustering::Clustering;
use super::rating::Rating;
use crate::hgraph::{ContractionMemento, Hypergraph, NodeId, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningConfig {
    /// Contraction-limit multiplier: coarsening stops below `t·k` nodes.
    pub t: usize,
    /// Block count the hierarchy is built for.
    pub k: usize,
    /// Maximum merged node weight κ.
    pub kappa: Weight,
    pub respect_kappa: bool,
    pub stop_at_tk: bool,
    /// Edges larger than this are skipped while rating neighbours.
    pub max_rating_edge_size: usize,
}

impl CoarseningConfig {
    /// Standard configuration with κ = ⌈W / (t·k)⌉.
    pub fn new(total_weight: Weight, k: usize, t: usize) -> Self {
        let tk = (t.max(1) * k.max(1)) as Weight;
        CoarseningConfig {
            t: t.max(1),
            k: k.max(1),
            kappa: ((total_weight + tk - 1) / tk).max(1),
            respect_kappa: true,
            stop_at_tk: true,
            max_rating_edge_size: 1000,
        }
    }

    pub fn contraction_limit(&self) -> usize {
        self.t * self.k
    }
}

/// Contractions in the order they were applied.
#[derive(Debug, Clone, Default)]
pub struct CoarseningHierarchy {
    pub mementos: Vec<ContractionMemento>,
}

impl CoarseningHierarchy {
    pub fn len(&self) -> usize {
        self.mementos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mementos.is_empty()
    }

    /// Undoes every contraction, restoring the input hypergraph.
    pub fn uncoarsen(self, h: &mut Hypergraph) {
        for m in self.mementos.iter().rev() {
            h.uncontract(m).expect("hierarchy uncontracts in stack order");
        }
    }
}

/// Coarsens `h` in place. Nodes are visited in random order; each visited
/// node is contracted with its highest-rated eligible neighbour (ties broken
/// uniformly). A node pair is eligible when the clustering allows it and,
/// if `respect_kappa`, the merged weight stays within κ. Stops once the
/// active node count drops to `t·k` (when `stop_at_tk`) or a full sweep finds
/// no eligible pair.
pub fn coarsen(
    h: &mut Hypergraph,
    cfg: &CoarseningConfig,
    clustering: &Clustering,
    rating: &dyn Rating,
    rng: &mut impl Rng,
) -> CoarseningHierarchy {
    let n = h.num_nodes();
    let policy = clustering.policy();
    let mut labels = clustering.labels().to_vec();
    debug_assert_eq!(labels.len(), n);
    let limit = cfg.contraction_limit();
    // never coarsen below k nodes, the coarsest level must still hold k blocks
    let done = |h: &Hypergraph| h.num_active_nodes() <= cfg.k || (cfg.stop_at_tk && h.num_active_nodes() <= limit);

    let mut hierarchy = CoarseningHierarchy::default();
    let mut score = vec![0.0f64; n];
    let mut touched: Vec<NodeId> = Vec::new();

    'outer: loop {
        if done(h) || h.num_active_nodes() < 2 {
            break;
        }
        let mut order: Vec<NodeId> = h.active_nodes().collect();
        order.shuffle(rng);
        let mut contracted = false;
        for v in order {
            if done(h) {
                break 'outer;
            }
            if !h.is_active(v) {
                continue;
            }
            let lv = labels[v as usize];
            if policy == super::ClusterPolicy::SameClusterOnly && lv == 0 {
                continue;
            }

            for &e in h.incident_edges(v) {
                let size = h.edge_size(e);
                if size < 2 || size > cfg.max_rating_edge_size {
                    continue;
                }
                let term = rating.edge_term(h, e);
                for &u in h.pins(e) {
                    if u == v {
                        continue;
                    }
                    if score[u as usize] == 0.0 {
                        touched.push(u);
                    }
                    // keep touched nodes distinguishable from untouched ones
                    score[u as usize] += term.max(f64::MIN_POSITIVE);
                }
            }

            let wv = h.node_weight(v);
            let mut best: Option<NodeId> = None;
            let mut best_rating = f64::NEG_INFINITY;
            let mut ties = 0u32;
            for &u in &touched {
                let wu = h.node_weight(u);
                let eligible = (!cfg.respect_kappa || wu + wv <= cfg.kappa)
                    && Clustering::allows_labels(policy, lv, labels[u as usize]);
                if eligible {
                    let r = rating.finish(score[u as usize], wv, wu);
                    if r > best_rating {
                        best_rating = r;
                        best = Some(u);
                        ties = 1;
                    } else if r == best_rating {
                        ties += 1;
                        if rng.gen_range(0..ties) == 0 {
                            best = Some(u);
                        }
                    }
                }
            }
            for &u in &touched {
                score[u as usize] = 0.0;
            }
            touched.clear();

            if let Some(u) = best {
                let m = h.contract(v, u).expect("both endpoints active");
                if labels[v as usize] == 0 {
                    labels[v as usize] = labels[u as usize];
                }
                hierarchy.mementos.push(m);
                contracted = true;
            }
        }
        if !contracted {
            break;
        }
    }
    hierarchy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::tests::{h0, random_hypergraph};
    use crate::multilevel::clustering::ClusterPolicy;
    use crate::multilevel::rating::HeavyEdge;
    use crate::partition::Partition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unlimited() -> CoarseningConfig {
        CoarseningConfig { t: 1, k: 1, kappa: Weight::MAX, respect_kappa: false, stop_at_tk: false, max_rating_edge_size: 1000 }
    }

    #[test]
    fn no_levels_below_limit() {
        let mut h = h0();
        let cfg = CoarseningConfig::new(h.total_weight(), 2, 150);
        let hier = coarsen(&mut h, &cfg, &Clustering::unrestricted(4), &HeavyEdge, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(hier.is_empty());
    }

    #[test]
    fn all_zero_clusters_block_everything() {
        let mut h = h0();
        let c = Clustering::new(vec![0; 4], ClusterPolicy::SameClusterOnly);
        let hier = coarsen(&mut h, &unlimited(), &c, &HeavyEdge, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(hier.is_empty());
        assert_eq!(h, h0());
    }

    #[test]
    fn h0_cluster_guided() {
        for seed in 0..10 {
            let mut h = h0();
            let c = Clustering::new(vec![1, 1, 2, 2], ClusterPolicy::SameClusterOnly);
            let hier = coarsen(&mut h, &unlimited(), &c, &HeavyEdge, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(hier.len(), 2);
            assert_eq!(h.num_active_nodes(), 2);
            h.audit().unwrap();
            let p = Partition::new(&h, 2, vec![0, 0, 1, 1]).unwrap();
            assert_eq!(p.km1(), 2);
            hier.uncoarsen(&mut h);
            assert_eq!(h, h0());
        }
    }

    #[test]
    fn kappa_bounds_merged_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut h = random_hypergraph(&mut rng, 300, 400, 5);
        let original = h.clone();
        let mut cfg = CoarseningConfig::new(h.total_weight(), 2, 20);
        cfg.kappa = 8;
        let hier = coarsen(&mut h, &cfg, &Clustering::unrestricted(300), &HeavyEdge, &mut rng);
        assert!(!hier.is_empty());
        assert!(h.active_nodes().all(|v| h.node_weight(v) <= 8));
        assert_eq!(h.total_weight(), original.total_weight());
        h.audit().unwrap();
        hier.uncoarsen(&mut h);
        assert_eq!(h, original);
    }

    #[test]
    fn stop_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut h = random_hypergraph(&mut rng, 200, 400, 4);
        let mut cfg = CoarseningConfig::new(h.total_weight(), 2, 25);
        cfg.respect_kappa = false;
        coarsen(&mut h, &cfg, &Clustering::unrestricted(200), &HeavyEdge, &mut rng);
        assert_eq!(h.num_active_nodes(), 50);
    }

    #[test]
    fn same_cluster_only_keeps_blocks_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h = random_hypergraph(&mut rng, 120, 200, 5);
        let blocks: Vec<u32> = (0..120).map(|i| (i % 3) as u32).collect();
        let hier = coarsen(&mut h, &unlimited(), &Clustering::from_blocks(&blocks), &HeavyEdge, &mut rng);
        for m in &hier.mementos {
            assert_eq!(blocks[m.kept_node as usize], blocks[m.removed_node as usize]);
        }
    }

    #[test]
    fn zero_label_absorbs_cluster() {
        // M4-style policy: a 0-labelled node merged into cluster 1 takes label 1
        let mut h = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]], None, None).unwrap();
        let c = Clustering::new(vec![1, 0, 2], ClusterPolicy::SameClusterOrZero);
        let hier = coarsen(&mut h, &unlimited(), &c, &HeavyEdge, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(hier.len(), 1);
        assert_eq!(h.num_active_nodes(), 2);
    }
}
