//! Multilevel memetic k-way hypergraph partitioning.
//!
//! The crate is layered bottom-up:
//!
//! * [`hgraph`]: hypergraph storage, hMetis I/O and contraction with exact undo.
//! * [`partition`]: block assignment with incremental pin counts, the
//!   connectivity (λ−1) and cut metrics, balance checks.
//! * [`multilevel`]: a single-shot multilevel partitioner (coarsening under a
//!   [`multilevel::Clustering`] constraint, recursive-bisection initial
//!   partitioning, k-way FM refinement, V-cycles).
//! * [`memetic`]: steady-state evolution with the C1–C3 recombination and
//!   M1–M4 mutation operators.
//! * [`bench`]: run configuration, convergence logging and result aggregation
//!   used by the `hgpart` binary.

pub mod bench;
pub mod generate;
pub mod hgraph;
pub mod memetic;
pub mod multilevel;
pub mod partition;

pub use hgraph::{BlockId, ContractionMemento, EdgeId, Hypergraph, NodeId, Weight};
pub use memetic::{evolve, Budget, EvolveConfig, Individual, OperatorConfig, Population};
pub use multilevel::{partition_single, vcycle, Clustering, ClusterPolicy, MultilevelConfig};
pub use partition::Partition;

/// Crate-level error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Hypergraph(#[from] hgraph::HypergraphError),
    #[error(transparent)]
    Parse(#[from] hgraph::ParseError),
    #[error(transparent)]
    Partition(#[from] partition::PartitionError),
    #[error("cannot split {nodes} nodes into {k} nonempty blocks")]
    TooFewNodes { nodes: usize, k: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
