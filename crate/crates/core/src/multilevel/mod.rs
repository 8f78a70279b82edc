//! Single-shot multilevel partitioning.
//!
//! [`run_pipeline`] is the common driver: coarsen a working copy under a
//! [`Clustering`] constraint and a [`Rating`], obtain a partition of the
//! coarsest hypergraph (computed or projected from a given assignment), then
//! uncontract level by level with FM refinement. The public entry points
//! [`partition_single`] and [`vcycle`] as well as every memetic operator are
//! thin configurations of it.

mod clustering;
mod coarsen;
mod fm;
mod fm2;
mod initial;
mod rating;

use rand::Rng;

pub use clustering::{ClusterPolicy, Clustering};
pub use coarsen::{coarsen, CoarseningConfig, CoarseningHierarchy};
pub use fm::{fm_refine, is_boundary, rebalance, uniform_bounds, FmConfig, FmRefiner};
pub use initial::{adaptive_epsilon, bisect, initial_partition, BisectionAlgorithm, InitialConfig, Partitioned};
pub use rating::{heavy_edge_rating, rate_pair, FrequencyRating, HeavyEdge, Rating};

use crate::hgraph::{BlockId, Hypergraph};
use crate::partition::{is_balanced, Partition};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelConfig {
    /// Contraction-limit multiplier t (coarsening stops below t·k nodes).
    pub t: usize,
    /// Edges with more pins are ignored when rating contraction partners.
    pub max_rating_edge_size: usize,
    pub initial: InitialConfig,
    pub fm: FmConfig,
}

impl Default for MultilevelConfig {
    fn default() -> Self {
        MultilevelConfig { t: 150, max_rating_edge_size: 1000, initial: InitialConfig::default(), fm: FmConfig::default() }
    }
}

impl MultilevelConfig {
    /// Standard coarsening for `h`: κ respected, stop at t·k.
    pub fn coarsening(&self, h: &Hypergraph, k: usize) -> CoarseningConfig {
        let mut c = CoarseningConfig::new(h.total_weight(), k, self.t);
        c.max_rating_edge_size = self.max_rating_edge_size;
        c
    }
}

/// How the coarsest hypergraph obtains its partition.
#[derive(Debug, Clone, Copy)]
pub enum InitialMode<'a> {
    /// Recursive-bisection initial partitioning.
    Compute,
    /// Reuse an assignment of the input nodes. Only valid when coarsening
    /// never merged nodes of different blocks.
    Project(&'a [BlockId]),
}

/// Coarsen, partition, uncoarsen with refinement.
#[allow(clippy::too_many_arguments)]
pub fn run_pipeline(
    h: &Hypergraph,
    k: usize,
    epsilon: f64,
    cfg: &MultilevelConfig,
    coarsening: &CoarseningConfig,
    clustering: &Clustering,
    rating: &dyn Rating,
    initial: InitialMode<'_>,
    rng: &mut impl Rng,
) -> Partitioned {
    let mut work = h.clone();
    let hierarchy = coarsen(&mut work, coarsening, clustering, rating, rng);
    log::trace!("coarsened {} -> {} nodes", h.num_active_nodes(), work.num_active_nodes());

    let bounds = uniform_bounds(h, k, epsilon);
    let Partitioned { partition: mut p, mut balanced } = match initial {
        InitialMode::Compute => initial_partition(&work, k, epsilon, &cfg.initial, rng),
        InitialMode::Project(assignment) => {
            let p = Partition::new(&work, k, assignment.to_vec()).expect("projected assignment is a valid partition");
            let balanced = is_balanced(&work, &p, epsilon);
            Partitioned { partition: p, balanced }
        }
    };
    if let InitialMode::Project(assignment) = initial {
        debug_assert_eq!(Partition::new(h, k, assignment.to_vec()).map(|q| q.km1()).ok(), Some(p.km1()));
    }

    let mut refiner = FmRefiner::new(h.num_nodes(), k);
    refiner.refine(&work, &mut p, &bounds, &cfg.fm);
    for m in hierarchy.mementos.iter().rev() {
        work.uncontract(m).expect("stack order");
        p.on_uncontract(&work, m);
        refiner.on_uncontract(&work, &p, m);
        let (u, v) = (m.kept_node, m.removed_node);
        if is_boundary(&work, &p, u) || is_boundary(&work, &p, v) {
            refiner.local_pass(&work, &mut p, &bounds, [u, v], &cfg.fm);
        }
    }
    if !hierarchy.is_empty() {
        refiner.refine(&work, &mut p, &bounds, &cfg.fm);
    }
    if !balanced {
        balanced = is_balanced(&work, &p, epsilon) || rebalance(&work, &mut p, &bounds);
        if balanced {
            refiner.refine(&work, &mut p, &bounds, &cfg.fm);
        }
    }
    debug_assert!(work == *h);
    Partitioned { partition: p, balanced }
}

pub(crate) fn check_k(h: &Hypergraph, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if h.num_active_nodes() < k {
        return Err(Error::TooFewNodes { nodes: h.num_active_nodes(), k });
    }
    Ok(())
}

/// The full multilevel pipeline with heavy-edge coarsening and computed
/// initial partition.
pub fn partition_single(h: &Hypergraph, k: usize, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Result<Partitioned> {
    check_k(h, k)?;
    Ok(run_pipeline(
        h,
        k,
        epsilon,
        cfg,
        &cfg.coarsening(h, k),
        &Clustering::unrestricted(h.num_nodes()),
        &HeavyEdge,
        InitialMode::Compute,
        rng,
    ))
}

/// V-cycle: re-coarsen only within the blocks of `p`, keep `p` as the
/// initial partition and refine. Never worsens the objective.
pub fn vcycle(h: &Hypergraph, p: &Partition, epsilon: f64, cfg: &MultilevelConfig, rng: &mut impl Rng) -> Partitioned {
    run_pipeline(
        h,
        p.k(),
        epsilon,
        cfg,
        &cfg.coarsening(h, p.k()),
        &Clustering::from_blocks(p.assignment()),
        &HeavyEdge,
        InitialMode::Project(p.assignment()),
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::tests::{h0, random_hypergraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn h0_single_is_optimal() {
        let h = h0();
        for seed in 0..10 {
            let r = partition_single(&h, 2, 0.0, &MultilevelConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(r.balanced);
            assert_eq!(r.partition.km1(), 2);
        }
    }

    #[test]
    fn too_few_nodes() {
        let h = h0();
        let err = partition_single(&h, 5, 0.0, &MultilevelConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::TooFewNodes { nodes: 4, k: 5 })));
    }

    #[test]
    fn deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hypergraph(&mut rng, 400, 600, 6);
        let cfg = MultilevelConfig { t: 20, ..Default::default() };
        let a = partition_single(&h, 4, 0.03, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = partition_single(&h, 4, 0.03, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.partition.assignment(), b.partition.assignment());
    }

    #[test]
    fn coarsened_pipeline_is_balanced_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hypergraph(&mut rng, 600, 900, 5);
        let cfg = MultilevelConfig { t: 10, ..Default::default() };
        for k in [2, 4, 8] {
            let r = partition_single(&h, k, 0.03, &cfg, &mut rng).unwrap();
            assert!(r.balanced);
            assert!(is_balanced(&h, &r.partition, 0.03));
            r.partition.audit(&h).unwrap();
        }
    }

    #[test]
    fn vcycle_never_worsens() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hypergraph(&mut rng, 500, 700, 5);
        let cfg = MultilevelConfig { t: 10, ..Default::default() };
        let start = partition_single(&h, 4, 0.03, &cfg, &mut rng).unwrap().partition;
        let mut current = start;
        for _ in 0..5 {
            let next = vcycle(&h, &current, 0.03, &cfg, &mut rng);
            assert!(next.balanced);
            assert!(next.partition.km1() <= current.km1());
            current = next.partition;
        }
    }

    #[test]
    fn vcycle_repairs_h0() {
        let h = h0();
        let bad = Partition::new(&h, 2, vec![0, 1, 0, 1]).unwrap();
        let fixed = vcycle(&h, &bad, 0.5, &MultilevelConfig::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(fixed.partition.km1(), 2);
        assert!(fixed.balanced);
    }
}
