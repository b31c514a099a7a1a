use serde::{Deserialize, Serialize};

use super::sorting::{crowding_distance, pareto_dominates};
use super::Individual;
use crate::scalar::{total_cmp, Scalar};

/// External archive of feasible, mutually non-dominated individuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront<T> {
    pub members: Vec<Individual<T>>,
    pub capacity: usize,
}

impl<T: Scalar> ParetoFront<T> {
    pub fn new(capacity: usize) -> Self {
        ParetoFront {
            members: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<[T; 2]> {
        self.members.iter().map(|m| m.objectives.as_array()).collect()
    }

    /// Members sorted by loss, then voltage deviation.
    pub fn sorted(&self) -> Vec<&Individual<T>> {
        let mut v: Vec<&Individual<T>> = self.members.iter().collect();
        v.sort_by(|a, b| {
            total_cmp(a.objectives.p_loss, b.objectives.p_loss).then(total_cmp(a.objectives.vd, b.objectives.vd))
        });
        v
    }

    fn insert(&mut self, cand: &Individual<T>) {
        let f = cand.objectives.as_array();
        if !f.iter().all(|v| v.is_finite()) {
            return;
        }
        // an objective-space duplicate adds nothing to the front
        if self.members.iter().any(|m| {
            let g = m.objectives.as_array();
            g == f || pareto_dominates(&g, &f)
        }) {
            return;
        }
        self.members.retain(|m| !pareto_dominates(&f, &m.objectives.as_array()));
        self.members.push(cand.clone());
    }

    /// Drops the most crowded member, one at a time, until the capacity is
    /// met. Boundary members have infinite crowding and always survive.
    fn truncate(&mut self) {
        while self.members.len() > self.capacity.max(2) {
            let d = crowding_distance(&self.objectives());
            let mut worst = 0;
            for (i, &v) in d.iter().enumerate() {
                if v < d[worst] {
                    worst = i;
                }
            }
            self.members.remove(worst);
        }
        if self.capacity < 2 {
            self.members.truncate(self.capacity);
        }
    }
}

/// Merges the feasible members of `pop` into the archive, removes anything
/// they dominate and trims back to capacity by crowding distance.
pub fn update_archive<T: Scalar>(archive: &mut ParetoFront<T>, pop: &[Individual<T>]) {
    for ind in pop.iter().filter(|i| i.is_feasible()) {
        archive.insert(ind);
    }
    archive.truncate();
}
