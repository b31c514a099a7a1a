//! Classification-based pre-selection MOEA.
//!
//! Each generation the population is ranked by non-dominated sorting and
//! crowding distance, the better half is labeled promising (+1) and the rest
//! unpromising (−1), and a KNN classifier trained on those labels screens
//! several DE candidates per parent. Only the chosen candidate is evaluated
//! with a power flow. Survivors are picked NSGA-II style and an external
//! archive keeps the feasible non-dominated set.

mod archive;
mod classify;
mod de;
mod run;
mod sorting;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerflow::ObjectivePair;
use crate::scalar::Scalar;

pub use archive::{update_archive, ParetoFront};
pub use classify::{knn_classify, label_population, Classification, LabeledSets};
pub use de::{choose_candidate, de_crossover, de_mutation, preselect_offspring, reflect_into, Preselection};
pub use run::{
    environmental_selection, random_population, run, run_with, EvalStats, GenerationStats, Problem,
    RunOptions, RunReport, SolutionRow,
};
pub use sorting::{
    assign_rank_and_crowding, crowded_compare, crowded_order, crowding_distance, dominates, fronts,
    nondominated_sort, pareto_dominates, Candidate, Point,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Promising,
    Unpromising,
}

impl Label {
    pub fn value(self) -> i32 {
        match self {
            Label::Promising => 1,
            Label::Unpromising => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual<T> {
    /// Control vector in unified real coding (see
    /// [`ControlBounds::to_genes`](crate::network::ControlBounds::to_genes)).
    pub genes: Vec<T>,
    pub objectives: ObjectivePair<T>,
    /// Total constraint violation; 0 when feasible.
    pub violation: T,
    pub rank: usize,
    pub crowding: T,
    pub label: Option<Label>,
}

impl<T: Scalar> Individual<T> {
    pub fn unevaluated(genes: Vec<T>) -> Self {
        Individual {
            genes,
            objectives: ObjectivePair::new(T::infinity(), T::infinity()),
            violation: T::infinity(),
            rank: 0,
            crowding: T::zero(),
            label: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoeaParams<T> {
    /// Population size.
    pub n: usize,
    /// Real (power flow) evaluations before stopping.
    pub eval_budget: usize,
    /// DE mutation factor.
    pub f: T,
    /// DE crossover rate.
    pub cr: T,
    /// KNN neighbour count.
    pub k: usize,
    /// Candidate offspring screened per parent; 1 disables pre-selection.
    pub n_cand: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for MoeaParams<T> {
    fn default() -> Self {
        MoeaParams {
            n: 100,
            eval_budget: 10_000,
            f: T::lit(0.5),
            cr: T::one(),
            k: 5,
            n_cand: 3,
            seed: 1,
        }
    }
}

impl<T: Scalar> MoeaParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n < 4 {
            return bad("population size must be at least 4");
        }
        if !(self.f > T::zero() && self.f <= T::one()) {
            return bad("mutation factor F must lie in (0, 1]");
        }
        if !(self.cr >= T::zero() && self.cr <= T::one()) {
            return bad("crossover rate Cr must lie in [0, 1]");
        }
        if self.k.is_multiple_of(2) {
            return bad("KNN neighbour count must be odd");
        }
        if self.k > self.n {
            return bad("KNN neighbour count exceeds population size");
        }
        if self.n_cand == 0 {
            return bad("candidate count must be at least 1");
        }
        if self.eval_budget == 0 {
            return bad("evaluation budget must be positive");
        }
        Ok(())
    }
}
