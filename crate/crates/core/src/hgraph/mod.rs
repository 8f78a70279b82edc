//! Hypergraph storage with node contraction and exact uncontraction.
//!
//! Nodes and edges use 0-based ids internally; the hMetis reader and writers
//! in [`io`] convert at the file boundary.
//!
//! Contraction of `v` into `u` follows the usual n-level semantics: `u`
//! absorbs the weight of `v`, every edge of `N(v) \ N(u)` has `v` replaced by
//! `u` in place, and `v` is deleted from every edge of `N(v) ∩ N(u)`. Edges
//! that shrink to a single pin are kept (they are inert for rating and
//! refinement) so that uncontraction can restore them. Parallel edges are
//! never merged.

mod io;

pub use io::{parse_hmetis, read_hmetis, read_partition, write_hmetis, write_partition, ParseError};

pub type NodeId = u32;
pub type EdgeId = u32;
pub type BlockId = u32;
pub type Weight = i64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HypergraphError {
    #[error("node {0} is not active")]
    InactiveNode(NodeId),
    #[error("node {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("cannot contract node {0} with itself")]
    SelfContraction(NodeId),
    #[error("uncontraction out of stack order (memento depth {memento}, hypergraph depth {current})")]
    OutOfOrder { memento: usize, current: usize },
    #[error("edge {0} has no pins")]
    EmptyEdge(usize),
    #[error("edge {edge} repeats pin {pin}")]
    DuplicatePin { edge: usize, pin: NodeId },
    #[error("negative weight or cost")]
    NegativeWeight,
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Record of one contraction, sufficient to undo it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionMemento {
    pub kept_node: NodeId,
    pub removed_node: NodeId,
    /// Edges in which the removed node was replaced by the kept node.
    pub moved_edges: Vec<EdgeId>,
    /// Edges the removed node was deleted from, with its former pin position.
    pub shrunk_edges: Vec<(EdgeId, u32)>,
    pub removed_weight: Weight,
    depth: usize,
}

#[derive(Debug, Clone)]
pub struct Hypergraph {
    edge_pins: Vec<Vec<NodeId>>,
    node_edges: Vec<Vec<EdgeId>>,
    node_weight: Vec<Weight>,
    edge_cost: Vec<Weight>,
    active: Vec<bool>,
    num_active: usize,
    depth: usize,
    // scratch for membership tests during contraction
    edge_mark: Vec<u32>,
    stamp: u32,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.edge_pins == other.edge_pins
            && self.node_edges == other.node_edges
            && self.node_weight == other.node_weight
            && self.edge_cost == other.edge_cost
            && self.active == other.active
            && self.num_active == other.num_active
            && self.depth == other.depth
    }
}

impl Eq for Hypergraph {}

impl Hypergraph {
    /// Builds a hypergraph from edge pin lists. Absent weights and costs
    /// default to 1.
    pub fn new(
        num_nodes: usize,
        edges: Vec<Vec<NodeId>>,
        node_weight: Option<Vec<Weight>>,
        edge_cost: Option<Vec<Weight>>,
    ) -> Result<Self, HypergraphError> {
        let node_weight = node_weight.unwrap_or_else(|| vec![1; num_nodes]);
        if node_weight.len() != num_nodes {
            return Err(HypergraphError::LengthMismatch { expected: num_nodes, got: node_weight.len() });
        }
        let edge_cost = edge_cost.unwrap_or_else(|| vec![1; edges.len()]);
        if edge_cost.len() != edges.len() {
            return Err(HypergraphError::LengthMismatch { expected: edges.len(), got: edge_cost.len() });
        }
        if node_weight.iter().chain(edge_cost.iter()).any(|&w| w < 0) {
            return Err(HypergraphError::NegativeWeight);
        }

        let mut node_edges = vec![Vec::new(); num_nodes];
        let mut seen = vec![usize::MAX; num_nodes];
        for (e, pins) in edges.iter().enumerate() {
            if pins.is_empty() {
                return Err(HypergraphError::EmptyEdge(e));
            }
            for &p in pins {
                let pu = p as usize;
                if pu >= num_nodes {
                    return Err(HypergraphError::NodeOutOfRange(p));
                }
                if seen[pu] == e {
                    return Err(HypergraphError::DuplicatePin { edge: e, pin: p });
                }
                seen[pu] = e;
                node_edges[pu].push(e as EdgeId);
            }
        }

        let num_edges = edges.len();
        Ok(Hypergraph {
            edge_pins: edges,
            node_edges,
            node_weight,
            edge_cost,
            active: vec![true; num_nodes],
            num_active: num_nodes,
            depth: 0,
            edge_mark: vec![0; num_edges],
            stamp: 0,
        })
    }

    /// Total number of node ids, active or not.
    pub fn num_nodes(&self) -> usize {
        self.node_weight.len()
    }

    pub fn num_active_nodes(&self) -> usize {
        self.num_active
    }

    pub fn num_edges(&self) -> usize {
        self.edge_pins.len()
    }

    /// Current number of pins over all edges.
    pub fn num_pins(&self) -> usize {
        self.edge_pins.iter().map(Vec::len).sum()
    }

    #[inline]
    pub fn pins(&self, e: EdgeId) -> &[NodeId] {
        &self.edge_pins[e as usize]
    }

    #[inline]
    pub fn edge_size(&self, e: EdgeId) -> usize {
        self.edge_pins[e as usize].len()
    }

    #[inline]
    pub fn incident_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.node_edges[v as usize]
    }

    #[inline]
    pub fn node_weight(&self, v: NodeId) -> Weight {
        self.node_weight[v as usize]
    }

    #[inline]
    pub fn edge_cost(&self, e: EdgeId) -> Weight {
        self.edge_cost[e as usize]
    }

    #[inline]
    pub fn is_active(&self, v: NodeId) -> bool {
        self.active[v as usize]
    }

    /// Single-pin edges never count towards a metric and are skipped by
    /// ratings and refinement.
    #[inline]
    pub fn is_inert(&self, e: EdgeId) -> bool {
        self.edge_pins[e as usize].len() < 2
    }

    pub fn node_weights(&self) -> &[Weight] {
        &self.node_weight
    }

    pub fn edge_costs(&self) -> &[Weight] {
        &self.edge_cost
    }

    /// Sum of active node weights; invariant under contraction.
    pub fn total_weight(&self) -> Weight {
        self.active_nodes().map(|v| self.node_weight(v)).sum()
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.num_nodes() as NodeId).filter(move |&v| self.active[v as usize])
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        0..self.num_edges() as EdgeId
    }

    /// Number of outstanding (not yet undone) contractions.
    pub fn contraction_depth(&self) -> usize {
        self.depth
    }

    /// Merges `v` into `u`.
    pub fn contract(&mut self, u: NodeId, v: NodeId) -> Result<ContractionMemento, HypergraphError> {
        for x in [u, v] {
            if x as usize >= self.num_nodes() {
                return Err(HypergraphError::NodeOutOfRange(x));
            }
            if !self.active[x as usize] {
                return Err(HypergraphError::InactiveNode(x));
            }
        }
        if u == v {
            return Err(HypergraphError::SelfContraction(u));
        }

        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.edge_mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        for &e in &self.node_edges[u as usize] {
            self.edge_mark[e as usize] = stamp;
        }

        let mut moved_edges = Vec::new();
        let mut shrunk_edges = Vec::new();
        for &e in &self.node_edges[v as usize] {
            let pins = &mut self.edge_pins[e as usize];
            let pos = pins.iter().position(|&p| p == v).expect("incidence symmetry");
            if self.edge_mark[e as usize] == stamp {
                pins.swap_remove(pos);
                shrunk_edges.push((e, pos as u32));
            } else {
                pins[pos] = u;
                moved_edges.push(e);
            }
        }
        self.node_edges[u as usize].extend_from_slice(&moved_edges);

        let removed_weight = self.node_weight[v as usize];
        self.node_weight[u as usize] += removed_weight;
        self.active[v as usize] = false;
        self.num_active -= 1;
        self.depth += 1;

        Ok(ContractionMemento {
            kept_node: u,
            removed_node: v,
            moved_edges,
            shrunk_edges,
            removed_weight,
            depth: self.depth - 1,
        })
    }

    /// Reverts the most recent contraction.
    pub fn uncontract(&mut self, m: &ContractionMemento) -> Result<(), HypergraphError> {
        if self.depth == 0 || m.depth != self.depth - 1 {
            return Err(HypergraphError::OutOfOrder { memento: m.depth, current: self.depth });
        }
        let (u, v) = (m.kept_node, m.removed_node);
        if !self.active[u as usize] {
            return Err(HypergraphError::InactiveNode(u));
        }

        let edges_u = &mut self.node_edges[u as usize];
        edges_u.truncate(edges_u.len() - m.moved_edges.len());
        for &e in &m.moved_edges {
            let pins = &mut self.edge_pins[e as usize];
            let pos = pins.iter().position(|&p| p == u).expect("moved edge holds kept node");
            pins[pos] = v;
        }
        // reverse order undoes the swap_removes exactly
        for &(e, pos) in m.shrunk_edges.iter().rev() {
            let pins = &mut self.edge_pins[e as usize];
            let pos = pos as usize;
            if pos == pins.len() {
                pins.push(v);
            } else {
                let displaced = pins[pos];
                pins.push(displaced);
                pins[pos] = v;
            }
        }

        self.node_weight[u as usize] -= m.removed_weight;
        self.active[v as usize] = true;
        self.num_active += 1;
        self.depth -= 1;
        Ok(())
    }

    /// Full-scan consistency check of the incidence structure.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = vec![u32::MAX; self.num_nodes()];
        for (e, pins) in self.edge_pins.iter().enumerate() {
            if pins.is_empty() {
                return Err(format!("edge {e} is empty"));
            }
            for &p in pins {
                if !self.active[p as usize] {
                    return Err(format!("edge {e} holds inactive pin {p}"));
                }
                if seen[p as usize] == e as u32 {
                    return Err(format!("edge {e} repeats pin {p}"));
                }
                seen[p as usize] = e as u32;
                if !self.node_edges[p as usize].contains(&(e as EdgeId)) {
                    return Err(format!("pin {p} of edge {e} lacks back-reference"));
                }
            }
        }
        for v in self.active_nodes() {
            for &e in self.incident_edges(v) {
                if !self.pins(e).contains(&v) {
                    return Err(format!("node {v} lists edge {e} which does not contain it"));
                }
            }
        }
        if self.active.iter().filter(|&&a| a).count() != self.num_active {
            return Err("active count out of sync".into());
        }
        Ok(())
    }

    /// Sub-hypergraph induced by `nodes` (renumbered in the given order).
    /// Each edge keeps only its pins inside `nodes`; edges left with fewer
    /// than two pins are dropped since they can never be cut.
    pub fn induced(&self, nodes: &[NodeId]) -> Hypergraph {
        let mut local = vec![NodeId::MAX; self.num_nodes()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v as usize] = i as NodeId;
        }
        let mut edge_seen = vec![false; self.num_edges()];
        let mut edges = Vec::new();
        let mut costs = Vec::new();
        for &v in nodes {
            for &e in self.incident_edges(v) {
                if std::mem::replace(&mut edge_seen[e as usize], true) {
                    continue;
                }
                let pins: Vec<NodeId> = self
                    .pins(e)
                    .iter()
                    .filter_map(|&p| (local[p as usize] != NodeId::MAX).then(|| local[p as usize]))
                    .collect();
                if pins.len() >= 2 {
                    edges.push(pins);
                    costs.push(self.edge_cost(e));
                }
            }
        }
        let weights = nodes.iter().map(|&v| self.node_weight(v)).collect();
        Hypergraph::new(nodes.len(), edges, Some(weights), Some(costs)).expect("induced sub-hypergraph is valid")
    }
}
