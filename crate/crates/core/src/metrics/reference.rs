use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moea::{de_crossover, de_mutation, pareto_dominates, random_population, Individual, Problem};
use crate::network::NetworkCase;
use crate::scalar::{total_cmp, Scalar};

/// Settings of the single-objective DE behind each reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptions<T> {
    pub pop: usize,
    pub f: T,
    pub cr: T,
    /// Real evaluations per weight.
    pub budget: usize,
    pub seed: u64,
    /// Worker threads across weights; 0 or 1 runs them in turn.
    pub jobs: usize,
}

impl<T: Scalar> Default for ReferenceOptions<T> {
    fn default() -> Self {
        ReferenceOptions {
            pop: 30,
            f: T::lit(0.5),
            cr: T::lit(0.9),
            budget: 10_000,
            seed: 1,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRun<T> {
    /// Weight on loss; `1 − weight` goes to voltage deviation.
    pub weight: T,
    pub objectives: [T; 2],
    pub violation: T,
    pub genes: Vec<T>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFront<T> {
    /// Non-dominated feasible run results, sorted by loss.
    pub points: Vec<[T; 2]>,
    pub runs: Vec<WeightedRun<T>>,
    /// `(lower, upper)` per objective used to scale the weighted sum; `None`
    /// means raw units.
    pub scaling: Option<([T; 2], [T; 2])>,
    pub warnings: Vec<String>,
}

/// Feasibility first, then the scalar fitness. `true` when `a` is at least
/// as good as `b`.
fn no_worse<T: Scalar>(a: (T, T), b: (T, T)) -> bool {
    let (va, fa) = a;
    let (vb, fb) = b;
    match (va == T::zero(), vb == T::zero()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => va <= vb,
        (true, true) => fa <= fb,
    }
}

/// Minimizes `w · loss + (1 − w) · vd` (after scaling) with DE/rand/1/bin and
/// greedy one-to-one replacement: a trial takes its parent's slot when it is
/// no worse.
pub fn optimize_weighted<T: Scalar>(
    case: &NetworkCase<T>,
    weight: T,
    scaling: Option<([T; 2], [T; 2])>,
    opts: &ReferenceOptions<T>,
    seed: u64,
) -> Result<WeightedRun<T>> {
    if opts.pop < 4 {
        return Err(Error::InvalidParameter("reference population must be at least 4".into()));
    }
    if opts.budget < opts.pop {
        return Err(Error::InvalidParameter("reference budget is smaller than its population".into()));
    }
    if !(weight >= T::zero() && weight <= T::one()) {
        return Err(Error::InvalidParameter("weight must lie in [0, 1]".into()));
    }
    let problem = Problem::new(case);
    let fitness = |o: [T; 2]| {
        let (p, v) = match scaling {
            Some((lo, hi)) => ((o[0] - lo[0]) / (hi[0] - lo[0]), (o[1] - lo[1]) / (hi[1] - lo[1])),
            None => (o[0], o[1]),
        };
        weight * p + (T::one() - weight) * v
    };
    let score = |ind: &Individual<T>| (ind.violation, fitness(ind.objectives.as_array()));
    let eval = |genes: Vec<T>| {
        let e = problem.evaluate(&genes);
        let mut ind = Individual::unevaluated(genes);
        ind.objectives = e.objectives;
        ind.violation = e.violation.total;
        ind
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pop: Vec<Individual<T>> = random_population(&problem.bounds, opts.pop, &mut rng)
        .into_iter()
        .map(eval)
        .collect();
    let mut evaluations = opts.pop;
    while evaluations + opts.pop <= opts.budget {
        for i in 0..opts.pop {
            let donor = de_mutation(&pop, i, opts.f, &problem.bounds, &mut rng);
            let trial = de_crossover(&pop[i].genes, &donor, opts.cr, &problem.bounds, &mut rng);
            let t = eval(trial);
            evaluations += 1;
            if no_worse(score(&t), score(&pop[i])) {
                pop[i] = t;
            }
        }
    }
    let mut best = 0;
    for i in 1..pop.len() {
        if !no_worse(score(&pop[best]), score(&pop[i])) {
            best = i;
        }
    }
    let b = &pop[best];
    Ok(WeightedRun {
        weight,
        objectives: b.objectives.as_array(),
        violation: b.violation,
        genes: b.genes.clone(),
        evaluations,
    })
}

/// Weighted-sum reference front. The two single-objective anchors (`w = 1`
/// and `w = 0`) run first in raw units and fix the scaling for the interior
/// weights; run `i` uses its own seed stream derived from `opts.seed`.
pub fn build_reference_front<T: Scalar>(
    case: &NetworkCase<T>,
    n_weights: usize,
    opts: &ReferenceOptions<T>,
) -> Result<ReferenceFront<T>> {
    if n_weights < 2 {
        return Err(Error::InvalidParameter("a reference front needs at least 2 weights".into()));
    }
    let weights: Vec<T> = (0..n_weights)
        .map(|i| T::from_count(i) / T::from_count(n_weights - 1))
        .collect();
    let seed_of = |i: usize| opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64);
    let run_all = |idx: Vec<usize>, scaling| -> Result<Vec<WeightedRun<T>>> {
        let go = |&i: &usize| optimize_weighted(case, weights[i], scaling, opts, seed_of(i));
        if opts.jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(opts.jobs)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| idx.par_iter().map(go).collect())
        } else {
            idx.iter().map(go).collect()
        }
    };

    let last = n_weights - 1;
    let anchors = run_all(vec![last, 0], None)?;
    let (loss_anchor, vd_anchor) = (&anchors[0], &anchors[1]);
    let mut warnings = Vec::new();
    let lo = [loss_anchor.objectives[0], vd_anchor.objectives[1]];
    let hi = [vd_anchor.objectives[0], loss_anchor.objectives[1]];
    let scaling = if loss_anchor.violation != T::zero() || vd_anchor.violation != T::zero() {
        warnings.push("an anchor run found no feasible point; weights act on raw units".to_string());
        None
    } else if !(hi[0] > lo[0] && hi[1] > lo[1]) {
        warnings.push("anchors do not span both objectives; weights act on raw units".to_string());
        None
    } else {
        Some((lo, hi))
    };

    let mut runs = vec![None; n_weights];
    let mut anchors = anchors.into_iter();
    runs[last] = anchors.next();
    runs[0] = anchors.next();
    for (i, r) in (1..last).zip(run_all((1..last).collect(), scaling)?) {
        runs[i] = Some(r);
    }
    let runs: Vec<WeightedRun<T>> = runs.into_iter().map(|r| r.expect("every weight ran")).collect();

    let mut feasible: Vec<[T; 2]> = runs
        .iter()
        .filter(|r| r.violation == T::zero())
        .map(|r| r.objectives)
        .collect();
    if feasible.is_empty() {
        return Err(Error::Validation("no weighted run produced a feasible point".into()));
    }
    feasible.sort_by(|a, b| total_cmp(a[0], b[0]).then(total_cmp(a[1], b[1])));
    feasible.dedup();
    let points: Vec<[T; 2]> = feasible
        .iter()
        .filter(|p| !feasible.iter().any(|q| pareto_dominates(q, p)))
        .copied()
        .collect();
    Ok(ReferenceFront {
        points,
        runs,
        scaling,
        warnings,
    })
}
