//! Contraction rating functions.

use crate::hgraph::{EdgeId, Hypergraph, NodeId, Weight};

/// A rating r(u, v) of the form `finish(Σ_{e ∈ N(u) ∩ N(v)} edge_term(e), w(u), w(v))`.
/// Single-pin edges never contribute.
pub trait Rating {
    fn edge_term(&self, h: &Hypergraph, e: EdgeId) -> f64;

    fn finish(&self, sum: f64, _weight_u: Weight, _weight_v: Weight) -> f64 {
        sum
    }
}

/// Heavy-edge rating: Σ c(e) / (|pins(e)| − 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct HeavyEdge;

impl Rating for HeavyEdge {
    #[inline]
    fn edge_term(&self, h: &Hypergraph, e: EdgeId) -> f64 {
        h.edge_cost(e) as f64 / (h.edge_size(e) - 1) as f64
    }
}

/// Frequency-damped rating driven by how often each edge is cut among a set
/// of good solutions: (1 / (w(u)·w(v))) · Σ exp(−γ·f(e)) / |pins(e)|.
#[derive(Debug, Clone)]
pub struct FrequencyRating {
    frequency: Vec<u32>,
    gamma: f64,
}

impl FrequencyRating {
    pub fn new(frequency: Vec<u32>, gamma: f64) -> Self {
        FrequencyRating { frequency, gamma }
    }

    pub fn frequency(&self, e: EdgeId) -> u32 {
        self.frequency[e as usize]
    }
}

impl Rating for FrequencyRating {
    #[inline]
    fn edge_term(&self, h: &Hypergraph, e: EdgeId) -> f64 {
        (-self.gamma * self.frequency[e as usize] as f64).exp() / h.edge_size(e) as f64
    }

    #[inline]
    fn finish(&self, sum: f64, weight_u: Weight, weight_v: Weight) -> f64 {
        // zero-weight nodes would divide by zero; treat them as unit weight
        sum / (weight_u.max(1) as f64 * weight_v.max(1) as f64)
    }
}

/// Rating of one pair, summing over all shared non-inert edges.
pub fn rate_pair(h: &Hypergraph, rating: &dyn Rating, u: NodeId, v: NodeId) -> f64 {
    let sum: f64 = h
        .incident_edges(u)
        .iter()
        .filter(|&&e| !h.is_inert(e) && h.pins(e).contains(&v))
        .map(|&e| rating.edge_term(h, e))
        .sum();
    rating.finish(sum, h.node_weight(u), h.node_weight(v))
}

pub fn heavy_edge_rating(h: &Hypergraph, u: NodeId, v: NodeId) -> f64 {
    rate_pair(h, &HeavyEdge, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::tests::h0;

    #[test]
    fn heavy_edge_values() {
        let h = Hypergraph::new(3, vec![vec![0, 1]], None, None).unwrap();
        assert_eq!(heavy_edge_rating(&h, 0, 1), 1.0);
        assert_eq!(heavy_edge_rating(&h, 0, 2), 0.0);
        assert_eq!(heavy_edge_rating(&h0(), 2, 3), 1.0);
    }

    #[test]
    fn frequency_rating_values() {
        let h = h0();
        let plain = FrequencyRating::new(vec![0; 3], 0.5);
        // shared e2, e3 with three pins each
        assert!((rate_pair(&h, &plain, 2, 3) - 2.0 / 3.0).abs() < 1e-15);
        let damped = FrequencyRating::new(vec![0, 4, 0], 0.5);
        let expected = ((-2.0f64).exp() + 1.0) / 3.0;
        assert!((rate_pair(&h, &damped, 2, 3) - expected).abs() < 1e-15);
        assert!(((-2.0f64).exp() - 0.1353).abs() < 1e-4);
    }

    #[test]
    fn frequency_rating_weight_normalised() {
        let h = Hypergraph::new(2, vec![vec![0, 1]], Some(vec![2, 3]), None).unwrap();
        let r = FrequencyRating::new(vec![0], 0.5);
        assert!((rate_pair(&h, &r, 0, 1) - 0.5 / 6.0).abs() < 1e-15);
    }
}
