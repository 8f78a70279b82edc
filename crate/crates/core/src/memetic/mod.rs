//! Steady-state memetic evolution over multilevel partitions.
//!
//! Individuals are balanced k-way partitions ranked by the connectivity
//! objective. Each generation creates one offspring by recombination
//! (C1 agreement coarsening, C2 frequency-rated coarsening, C3 greedy block
//! selection) or mutation (M1/M2 V-cycle based, M3/M4 driven by
//! connected-component clusters), which then competes for a slot through
//! the similarity-aware replacement rule.

mod config;
mod evolve;
mod operators;
mod population;

pub use config::{Budget, EvolveConfig, Operator, OperatorConfig, PopulationSize};
pub use evolve::{evolve, evolve_observed, init_population, population_size, EvolveOutcome, OperatorStats, Progress};
pub use operators::{
    block_quality, build_mutation_clusters, c3_clusters, combine_c1, combine_c2, combine_c3, cut_frequencies, mutate, mutate_m1,
    mutate_m2, mutate_m3, mutate_m4,
};
pub use population::{tournament_select, Individual, Population};
