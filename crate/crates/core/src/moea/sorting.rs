use std::cmp::Ordering;

use super::Individual;
use crate::scalar::{total_cmp, Scalar};

/// Anything with two minimized objectives and a constraint violation total.
pub trait Candidate<T> {
    fn objectives(&self) -> [T; 2];
    fn violation(&self) -> T;
}

impl<T: Scalar> Candidate<T> for Individual<T> {
    fn objectives(&self) -> [T; 2] {
        self.objectives.as_array()
    }

    fn violation(&self) -> T {
        self.violation
    }
}

/// Plain objective pair with a violation, handy for tests and post-processing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub objectives: [T; 2],
    pub violation: T,
}

impl<T: Scalar> Point<T> {
    pub fn feasible(objectives: [T; 2]) -> Self {
        Point {
            objectives,
            violation: T::zero(),
        }
    }
}

impl<T: Scalar> Candidate<T> for Point<T> {
    fn objectives(&self) -> [T; 2] {
        self.objectives
    }

    fn violation(&self) -> T {
        self.violation
    }
}

/// Constraint-domination: feasible beats infeasible, smaller violation beats
/// larger, and among feasible candidates ordinary Pareto dominance applies.
pub fn dominates<T: Scalar, C: Candidate<T> + ?Sized>(a: &C, b: &C) -> bool {
    let (va, vb) = (a.violation(), b.violation());
    let (fa, fb) = (va == T::zero(), vb == T::zero());
    match (fa, fb) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => va < vb,
        (true, true) => pareto_dominates(&a.objectives(), &b.objectives()),
    }
}

pub fn pareto_dominates<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> bool {
    let mut strictly = false;
    for k in 0..2 {
        if a[k] > b[k] {
            return false;
        }
        if a[k] < b[k] {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sorting. Returns the fronts as index lists, best first.
pub fn fronts<T: Scalar, C: Candidate<T>>(pop: &[C]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dom_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&pop[p], &pop[q]) {
                dominated_by_me[p].push(q);
                dom_count[q] += 1;
            } else if dominates(&pop[q], &pop[p]) {
                dominated_by_me[q].push(p);
                dom_count[p] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dom_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                dom_count[q] -= 1;
                if dom_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        out.push(std::mem::replace(&mut current, next));
    }
    out
}

/// Rank of every member, starting at 1 for the non-dominated set.
pub fn nondominated_sort<T: Scalar, C: Candidate<T>>(pop: &[C]) -> Vec<usize> {
    let mut rank = vec![0; pop.len()];
    for (r, front) in fronts(pop).iter().enumerate() {
        for &i in front {
            rank[i] = r + 1;
        }
    }
    rank
}

/// Crowding distance of each member of one front. Boundary members of an
/// objective get +∞; an objective with zero range contributes nothing.
pub fn crowding_distance<T: Scalar>(objectives: &[[T; 2]]) -> Vec<T> {
    let n = objectives.len();
    let mut dist = vec![T::zero(); n];
    if n == 0 {
        return dist;
    }
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..2 {
        order.sort_by(|&a, &b| total_cmp(objectives[a][k], objectives[b][k]).then(a.cmp(&b)));
        let lo = objectives[order[0]][k];
        let hi = objectives[order[n - 1]][k];
        let range = hi - lo;
        if !(range > T::zero()) {
            continue;
        }
        dist[order[0]] = T::infinity();
        dist[order[n - 1]] = T::infinity();
        for w in 1..n.saturating_sub(1) {
            let gap = (objectives[order[w + 1]][k] - objectives[order[w - 1]][k]) / range;
            dist[order[w]] += gap;
        }
    }
    dist
}

/// Crowded comparison: lower rank first, then larger crowding distance, then
/// lower population index.
pub fn crowded_compare<T: Scalar>(a: &Individual<T>, ia: usize, b: &Individual<T>, ib: usize) -> Ordering {
    a.rank
        .cmp(&b.rank)
        .then_with(|| total_cmp(b.crowding, a.crowding))
        .then(ia.cmp(&ib))
}

/// Sorts the population into fronts and stores rank and crowding distance on
/// every member.
pub fn assign_rank_and_crowding<T: Scalar>(pop: &mut [Individual<T>]) {
    for (r, front) in fronts(pop).iter().enumerate() {
        let objs: Vec<[T; 2]> = front.iter().map(|&i| pop[i].objectives.as_array()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            pop[i].rank = r + 1;
            pop[i].crowding = d;
        }
    }
}

/// Indices of the population ordered best-first by crowded comparison.
pub fn crowded_order<T: Scalar>(pop: &[Individual<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| crowded_compare(&pop[a], a, &pop[b], b));
    order
}
