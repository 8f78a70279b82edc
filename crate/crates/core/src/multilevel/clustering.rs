use crate::hgraph::{BlockId, NodeId};

/// How cluster labels restrict contractions. Label 0 is reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterPolicy {
    /// `u` and `v` must share a nonzero label.
    SameClusterOnly,
    /// `u` and `v` must share a label, or either one is labelled 0.
    SameClusterOrZero,
    /// Labels are ignored.
    Unrestricted,
}

/// Per-node cluster labels constraining which node pairs may be contracted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    cluster_of: Vec<u32>,
    policy: ClusterPolicy,
}

impl Clustering {
    pub fn new(cluster_of: Vec<u32>, policy: ClusterPolicy) -> Self {
        Clustering { cluster_of, policy }
    }

    pub fn unrestricted(num_nodes: usize) -> Self {
        Clustering { cluster_of: vec![0; num_nodes], policy: ClusterPolicy::Unrestricted }
    }

    /// One cluster per block, labels shifted by one so no block maps to 0.
    pub fn from_blocks(block_of: &[BlockId]) -> Self {
        Clustering {
            cluster_of: block_of.iter().map(|&b| b + 1).collect(),
            policy: ClusterPolicy::SameClusterOnly,
        }
    }

    pub fn policy(&self) -> ClusterPolicy {
        self.policy
    }

    pub fn labels(&self) -> &[u32] {
        &self.cluster_of
    }

    #[inline]
    pub fn cluster_of(&self, v: NodeId) -> u32 {
        self.cluster_of[v as usize]
    }

    #[inline]
    pub fn allows_labels(policy: ClusterPolicy, a: u32, b: u32) -> bool {
        match policy {
            ClusterPolicy::SameClusterOnly => a == b && a != 0,
            ClusterPolicy::SameClusterOrZero => a == b || a == 0 || b == 0,
            ClusterPolicy::Unrestricted => true,
        }
    }

    pub fn allows(&self, u: NodeId, v: NodeId) -> bool {
        Self::allows_labels(self.policy, self.cluster_of(u), self.cluster_of(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies() {
        let c = Clustering::new(vec![0, 0, 1, 1, 2], ClusterPolicy::SameClusterOnly);
        assert!(!c.allows(0, 1));
        assert!(c.allows(2, 3));
        assert!(!c.allows(3, 4));
        let c = Clustering::new(vec![0, 0, 1, 1, 2], ClusterPolicy::SameClusterOrZero);
        assert!(c.allows(0, 1));
        assert!(c.allows(0, 4));
        assert!(c.allows(2, 3));
        assert!(!c.allows(3, 4));
        assert!(Clustering::unrestricted(5).allows(3, 4));
    }

    #[test]
    fn block_labels_nonzero() {
        let c = Clustering::from_blocks(&[0, 1, 0]);
        assert_eq!(c.labels(), &[1, 2, 1]);
        assert!(c.allows(0, 2));
        assert!(!c.allows(0, 1));
    }
}
