//! Seeded random hypergraph generators for tests and synthetic benchmarks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hgraph::{Hypergraph, NodeId};

/// Uniform random hypergraph: `m` edges with sizes in `1..=max_size`, pins
/// drawn without replacement. With `weighted`, node weights are drawn from
/// 1..=3 and edge costs from 1..=4, otherwise everything is 1.
pub fn uniform(n: usize, m: usize, max_size: usize, weighted: bool, rng: &mut impl Rng) -> Hypergraph {
    assert!(n >= 1 && max_size >= 1);
    let edges: Vec<Vec<NodeId>> = (0..m)
        .map(|_| {
            let size = rng.gen_range(1..=max_size.min(n));
            sample(rng, n, size).into_iter().map(|x| x as NodeId).collect()
        })
        .collect();
    let (weights, costs) = if weighted {
        (Some((0..n).map(|_| rng.gen_range(1..=3)).collect()), Some((0..m).map(|_| rng.gen_range(1..=4)).collect()))
    } else {
        (None, None)
    };
    Hypergraph::new(n, edges, weights, costs).expect("generated edges are valid")
}

/// Hypergraph with a planted k-way structure: nodes are split into `k`
/// equal groups; each edge draws its pins from one group, except that with
/// probability `p_cross` it draws them from the whole node set. Edge sizes
/// lie in `2..=max_size`.
pub fn planted(n: usize, m: usize, k: usize, max_size: usize, p_cross: f64, rng: &mut impl Rng) -> Hypergraph {
    assert!(k >= 1 && n >= 2 * k && max_size >= 2);
    let group = n / k;
    let edges: Vec<Vec<NodeId>> = (0..m)
        .map(|_| {
            if rng.gen_bool(p_cross) {
                let size = rng.gen_range(2..=max_size.min(n));
                sample(rng, n, size).into_iter().map(|x| x as NodeId).collect()
            } else {
                let g = rng.gen_range(0..k);
                let lo = g * group;
                let hi = if g + 1 == k { n } else { lo + group };
                let size = rng.gen_range(2..=max_size.min(hi - lo));
                sample(rng, hi - lo, size).into_iter().map(|x| (lo + x) as NodeId).collect()
            }
        })
        .collect();
    Hypergraph::new(n, edges, None, None).expect("generated edges are valid")
}

/// [`uniform`] with its own seeded generator.
pub fn uniform_seeded(n: usize, m: usize, max_size: usize, weighted: bool, seed: u64) -> Hypergraph {
    uniform(n, m, max_size, weighted, &mut ChaCha8Rng::seed_from_u64(seed))
}
