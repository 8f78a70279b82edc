use rand::Rng;

use crate::hgraph::{BlockId, Hypergraph, Weight};
use crate::partition::{signature, Partition, Signature};

/// A partition together with its fitness and cut-edge signature.
///
/// Only the block assignment is stored; [`Individual::partition`] rebuilds
/// the full incremental state on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    k: usize,
    assignment: Vec<BlockId>,
    objective: Weight,
    signature: Signature,
}

impl Individual {
    pub fn from_partition(h: &Hypergraph, p: &Partition) -> Self {
        Individual { k: p.k(), assignment: p.assignment().to_vec(), objective: p.km1(), signature: signature(h, p) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[BlockId] {
        &self.assignment
    }

    /// Connectivity objective; lower is fitter.
    pub fn objective(&self) -> Weight {
        self.objective
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn partition(&self, h: &Hypergraph) -> Partition {
        Partition::new(h, self.k, self.assignment.clone()).expect("individuals hold valid partitions")
    }

    /// Size of the symmetric difference of the two signatures.
    pub fn distance(&self, other: &Individual) -> u64 {
        self.signature.distance(&other.signature)
    }

    /// Checks the cached objective and signature against a recomputation.
    pub fn audit(&self, h: &Hypergraph) -> Result<(), String> {
        let p = Partition::new(h, self.k, self.assignment.clone()).map_err(|e| e.to_string())?;
        if p.km1() != self.objective {
            return Err(format!("objective {} != {}", self.objective, p.km1()));
        }
        if signature(h, &p) != self.signature {
            return Err("signature out of sync".into());
        }
        Ok(())
    }
}

/// Fixed-size set of pairwise distinct individuals.
#[derive(Debug, Clone, Default)]
pub struct Population {
    members: Vec<Individual>,
}

impl Population {
    pub fn new() -> Self {
        Population::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &Individual {
        &self.members[i]
    }

    /// Whether some member is at distance 0 from `ind`.
    pub fn contains_equivalent(&self, ind: &Individual) -> bool {
        self.members.iter().any(|m| m.distance(ind) == 0)
    }

    /// Adds `ind` unless an equivalent member exists.
    pub fn push_unique(&mut self, ind: Individual) -> bool {
        if self.contains_equivalent(&ind) {
            return false;
        }
        self.members.push(ind);
        true
    }

    /// Index of the fittest member (lowest objective, then lowest index).
    pub fn best_index(&self) -> Option<usize> {
        (0..self.members.len()).min_by_key(|&i| (self.members[i].objective, i))
    }

    /// Indices of the `count` fittest members, ties by index.
    pub fn fittest(&self, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.members.len()).collect();
        idx.sort_by_key(|&i| (self.members[i].objective, i));
        idx.truncate(count);
        idx
    }

    /// Offers `offspring` to the population. Among members at least as bad
    /// as the offspring, the one closest to it is evicted (ties: worse
    /// objective, then lower index). Returns false when the offspring is
    /// worse than every member or duplicates a member that would survive.
    pub fn replace(&mut self, offspring: Individual) -> bool {
        let evict = (0..self.members.len())
            .filter(|&i| self.members[i].objective >= offspring.objective)
            .min_by_key(|&i| (self.members[i].distance(&offspring), std::cmp::Reverse(self.members[i].objective), i));
        let Some(evict) = evict else {
            return false;
        };
        let duplicate = self.members.iter().enumerate().any(|(i, m)| i != evict && m.distance(&offspring) == 0);
        if duplicate {
            return false;
        }
        self.members[evict] = offspring;
        true
    }

    /// No two members at distance 0.
    pub fn is_unique(&self) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(i, a)| self.members[i + 1..].iter().all(|b| a.distance(b) > 0))
    }
}

fn tournament(pop: &Population, rng: &mut impl Rng) -> usize {
    let n = pop.len();
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (oa, ob) = (pop.members[a].objective, pop.members[b].objective);
    match oa.cmp(&ob) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Two parents from independent two-way tournaments, fitter first.
pub fn tournament_select(pop: &Population, rng: &mut impl Rng) -> (usize, usize) {
    assert!(pop.len() >= 2, "tournament needs two members");
    let first = tournament(pop, rng);
    let mut second = tournament(pop, rng);
    let mut retries = 0;
    while second == first && retries < 5 {
        second = tournament(pop, rng);
        retries += 1;
    }
    if second == first {
        second = rng.gen_range(0..pop.len() - 1);
        if second >= first {
            second += 1;
        }
    }
    if pop.members[second].objective < pop.members[first].objective {
        (second, first)
    } else {
        (first, second)
    }
}

/// Winner of a single two-way tournament (the population may hold one member).
pub(crate) fn tournament_single(pop: &Population, rng: &mut impl Rng) -> usize {
    if pop.len() < 2 {
        0
    } else {
        tournament(pop, rng)
    }
}
