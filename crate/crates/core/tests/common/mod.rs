//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the metric or contraction code of the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hgpart::Hypergraph;
use rand::seq::SliceRandom;
use rand::Rng;

/// Plain hypergraph: pins as node indices, no incidence structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raw {
    pub n: usize,
    pub edges: Vec<Vec<usize>>,
    pub weights: Vec<i64>,
    pub costs: Vec<i64>,
}

impl Raw {
    pub fn random(rng: &mut impl Rng, max_n: usize, max_m: usize, max_size: usize, weighted: bool) -> Raw {
        let n = rng.gen_range(2..=max_n);
        let m = rng.gen_range(0..=max_m);
        let mut nodes: Vec<usize> = (0..n).collect();
        let edges = (0..m)
            .map(|_| {
                nodes.shuffle(rng);
                let size = rng.gen_range(1..=max_size.min(n));
                nodes[..size].to_vec()
            })
            .collect();
        let weights = (0..n).map(|_| if weighted { rng.gen_range(1..=4) } else { 1 }).collect();
        let costs = (0..m).map(|_| if weighted { rng.gen_range(1..=5) } else { 1 }).collect();
        Raw { n, edges, weights, costs }
    }

    pub fn build(&self) -> Hypergraph {
        let edges = self.edges.iter().map(|e| e.iter().map(|&v| v as u32).collect()).collect();
        Hypergraph::new(self.n, edges, Some(self.weights.clone()), Some(self.costs.clone())).unwrap()
    }

    /// Snapshot of the active part of `h`, nodes renumbered in id order.
    /// Returns the snapshot and the original id of every snapshot node.
    pub fn from_active(h: &Hypergraph) -> (Raw, Vec<u32>) {
        let ids: Vec<u32> = h.active_nodes().collect();
        let index: BTreeMap<u32, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges = h.edges().map(|e| h.pins(e).iter().map(|p| index[p]).collect()).collect();
        let raw = Raw {
            n: ids.len(),
            edges,
            weights: ids.iter().map(|&v| h.node_weight(v)).collect(),
            costs: h.edges().map(|e| h.edge_cost(e)).collect(),
        };
        (raw, ids)
    }

    pub fn total_weight(&self) -> i64 {
        self.weights.iter().sum()
    }

    /// Merges `v` into `u`; `v` disappears and higher ids shift down by one.
    pub fn contract(&self, u: usize, v: usize) -> Raw {
        let rename = |x: usize| {
            let x = if x == v { u } else { x };
            if x > v {
                x - 1
            } else {
                x
            }
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let mut out: Vec<usize> = Vec::new();
                for &p in e {
                    let q = rename(p);
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
                out
            })
            .collect();
        let mut weights = self.weights.clone();
        weights[u] += weights[v];
        weights.remove(v);
        Raw { n: self.n - 1, edges, weights, costs: self.costs.clone() }
    }

    /// Edges as sorted pin sets, for order-insensitive comparison.
    pub fn canonical_edges(&self) -> Vec<(Vec<usize>, i64)> {
        self.edges
            .iter()
            .zip(&self.costs)
            .map(|(e, &c)| {
                let mut e = e.clone();
                e.sort_unstable();
                (e, c)
            })
            .collect()
    }
}

pub fn lambda(edge: &[usize], assignment: &[u32]) -> usize {
    edge.iter().map(|&v| assignment[v]).collect::<BTreeSet<_>>().len()
}

pub fn km1(raw: &Raw, assignment: &[u32]) -> i64 {
    raw.edges.iter().zip(&raw.costs).map(|(e, &c)| (lambda(e, assignment) as i64 - 1).max(0) * c).sum()
}

pub fn cut(raw: &Raw, assignment: &[u32]) -> i64 {
    raw.edges.iter().zip(&raw.costs).filter(|(e, _)| lambda(e, assignment) > 1).map(|(_, &c)| c).sum()
}

pub fn block_weights(raw: &Raw, k: usize, assignment: &[u32]) -> Vec<i64> {
    let mut w = vec![0; k];
    for (v, &b) in assignment.iter().enumerate() {
        w[b as usize] += raw.weights[v];
    }
    w
}

/// (1+ε)·⌈W/k⌉ rounded down, computed independently of the library.
pub fn bound(total: i64, k: usize, eps: f64) -> i64 {
    let avg = (total as f64 / k as f64).ceil();
    ((1.0 + eps) * avg).floor() as i64
}

pub fn balanced(raw: &Raw, k: usize, eps: f64, assignment: &[u32]) -> bool {
    let b = bound(raw.total_weight(), k, eps);
    block_weights(raw, k, assignment).iter().all(|&w| w <= b)
}

/// Every assignment of `n` nodes to `k` blocks with no block empty.
pub fn surjections(n: usize, k: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (k as u64).pow(n as u32);
    (0..total).filter_map(move |mut code| {
        let mut a = vec![0u32; n];
        let mut used = vec![false; k];
        for x in a.iter_mut() {
            *x = (code % k as u64) as u32;
            used[*x as usize] = true;
            code /= k as u64;
        }
        used.iter().all(|&u| u).then_some(a)
    })
}

/// Minimum connectivity objective over all ε-balanced k-way partitions, with
/// every assignment attaining it.
pub fn optimum(raw: &Raw, k: usize, eps: f64) -> Option<(i64, Vec<Vec<u32>>)> {
    let mut best: Option<(i64, Vec<Vec<u32>>)> = None;
    for a in surjections(raw.n, k) {
        if !balanced(raw, k, eps, &a) {
            continue;
        }
        let c = km1(raw, &a);
        match &mut best {
            Some((b, all)) if c == *b => all.push(a),
            Some((b, _)) if c > *b => {}
            _ => best = Some((c, vec![a])),
        }
    }
    best
}

/// Per-edge λ−1 of an assignment, keyed by edge id (zeros omitted).
pub fn cut_profile(raw: &Raw, assignment: &[u32]) -> BTreeMap<usize, i64> {
    raw.edges
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let l = lambda(e, assignment) as i64 - 1;
            (l > 0).then_some((i, l))
        })
        .collect()
}

/// Symmetric difference of two cut multisets.
pub fn profile_distance(a: &BTreeMap<usize, i64>, b: &BTreeMap<usize, i64>) -> i64 {
    let keys: BTreeSet<&usize> = a.keys().chain(b.keys()).collect();
    keys.into_iter().map(|e| (a.get(e).unwrap_or(&0) - b.get(e).unwrap_or(&0)).abs()).sum()
}

/// One line per acceptance criterion, so the suite output reads as a report.
pub fn report(name: &str, ok: bool, detail: &str) {
    println!("ACCEPTANCE {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}
