use std::fmt;
use std::time::Duration;

use crate::multilevel::MultilevelConfig;
use crate::{Error, Result};

/// Operator tags as they appear in progress events and convergence logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Init,
    C1,
    C2,
    C3,
    M1,
    M2,
    M3,
    M4,
    /// Fresh single-shot partition (repeated baseline).
    Single,
    /// V-cycle on the current partition (repeated baseline).
    VCycle,
}

impl Operator {
    pub const COMBINE: [Operator; 3] = [Operator::C1, Operator::C2, Operator::C3];
    pub const MUTATE: [Operator; 4] = [Operator::M1, Operator::M2, Operator::M3, Operator::M4];

    pub fn tag(self) -> &'static str {
        match self {
            Operator::Init => "init",
            Operator::C1 => "C1",
            Operator::C2 => "C2",
            Operator::C3 => "C3",
            Operator::M1 => "M1",
            Operator::M2 => "M2",
            Operator::M3 => "M3",
            Operator::M4 => "M4",
            Operator::Single => "single",
            Operator::VCycle => "vcycle",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Operator selection schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorConfig {
    /// Probability that a generation recombines rather than mutates.
    pub p_combine: f64,
    /// Relative weights of C1, C2, C3.
    pub combine_weights: [f64; 3],
    /// Relative weights of M1, M2, M3, M4.
    pub mutate_weights: [f64; 4],
    /// Frequency decay γ of the C2 rating.
    pub gamma: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self::mma()
    }
}

impl OperatorConfig {
    pub fn mma() -> Self {
        OperatorConfig { p_combine: 0.8, combine_weights: [0.4, 0.2, 0.4], mutate_weights: [0.25; 4], gamma: 0.5 }
    }

    pub fn mma_m05() -> Self {
        OperatorConfig { p_combine: 0.5, ..Self::mma() }
    }

    pub fn mma_g() -> Self {
        OperatorConfig { combine_weights: [0.0, 0.0, 1.0], ..Self::mma() }
    }

    pub fn mma_eq_c() -> Self {
        OperatorConfig { combine_weights: [0.33, 0.33, 0.33], ..Self::mma() }
    }

    /// The original two-recombination, two-mutation schedule.
    pub fn kahypar_e() -> Self {
        OperatorConfig {
            p_combine: 0.5,
            combine_weights: [0.5, 0.5, 0.0],
            mutate_weights: [0.5, 0.5, 0.0, 0.0],
            gamma: 0.5,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "mma" => Some(Self::mma()),
            "mma-m-0.5" | "mma-m05" => Some(Self::mma_m05()),
            "mma-g" => Some(Self::mma_g()),
            "mma-eq-c" => Some(Self::mma_eq_c()),
            "kahypar-e" => Some(Self::kahypar_e()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.p_combine)
            && self.combine_weights.iter().chain(self.mutate_weights.iter()).all(|w| w.is_finite() && *w >= 0.0)
            && self.gamma.is_finite();
        if !ok {
            return Err(Error::Invalid(format!("invalid operator schedule {self:?}")));
        }
        let c: f64 = self.combine_weights.iter().sum();
        let m: f64 = self.mutate_weights.iter().sum();
        if (c == 0.0 || self.p_combine == 0.0) && (m == 0.0 || self.p_combine == 1.0) {
            return Err(Error::Invalid("operator schedule selects nothing".into()));
        }
        Ok(())
    }

    /// Schedule adjusted for `k` blocks: with two blocks the greedy
    /// recombination only reproduces a parent, so its weight is spread over
    /// C1 and C2 in proportion to theirs.
    pub fn for_k(&self, k: usize) -> Self {
        let mut out = self.clone();
        if k <= 2 && out.combine_weights[2] > 0.0 {
            let [c1, c2, c3] = out.combine_weights;
            if c1 + c2 > 0.0 {
                out.combine_weights = [c1 + c3 * c1 / (c1 + c2), c2 + c3 * c2 / (c1 + c2), 0.0];
            } else {
                out.combine_weights = [0.5 * c3, 0.5 * c3, 0.0];
            }
        }
        out
    }
}

/// When evolution stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Wall-clock limit.
    Time(Duration),
    /// Fixed number of generations. Progress events then carry a logical
    /// clock (the generation index) so runs are reproducible bit for bit.
    Generations(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationSize {
    /// Sized from the time budget and the duration of one single-shot run;
    /// `Budget::Generations` falls back to [`PopulationSize::GENERATION_MODE_DEFAULT`].
    Auto,
    Fixed(usize),
}

impl PopulationSize {
    pub const GENERATION_MODE_DEFAULT: usize = 10;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub budget: Budget,
    pub population: PopulationSize,
    pub operators: OperatorConfig,
    pub multilevel: MultilevelConfig,
}

impl EvolveConfig {
    pub fn with_budget(budget: Budget) -> Self {
        EvolveConfig {
            budget,
            population: PopulationSize::Auto,
            operators: OperatorConfig::mma(),
            multilevel: MultilevelConfig::default(),
        }
    }
}
