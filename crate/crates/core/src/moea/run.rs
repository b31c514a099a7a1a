use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{update_archive, ParetoFront};
use super::classify::label_population;
use super::de::preselect_offspring;
use super::sorting::{crowding_distance, fronts};
use super::{Individual, Label, MoeaParams};
use crate::error::{Error, Result};
use crate::network::{apply_controls, control_bounds, ControlBounds, NetworkCase};
use crate::powerflow::{evaluate_applied, Evaluation};
use crate::scalar::{total_cmp, Scalar};

/// A case plus its control bounds: maps genes to one real evaluation.
#[derive(Debug, Clone)]
pub struct Problem<'a, T> {
    pub case: &'a NetworkCase<T>,
    pub bounds: ControlBounds<T>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    pub fn new(case: &'a NetworkCase<T>) -> Self {
        Problem {
            case,
            bounds: control_bounds(case),
        }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    /// Decodes (clamping and rounding) and evaluates a gene vector.
    pub fn evaluate(&self, genes: &[T]) -> Evaluation<T> {
        let u = self.bounds.from_genes(genes);
        let applied = apply_controls(self.case, &u).expect("decoded genes lie within bounds");
        evaluate_applied(&applied)
    }

    /// Physical control values `[V_G.., tap ratio.., Mvar..]` of a gene vector.
    pub fn physical(&self, genes: &[T]) -> Vec<T> {
        self.bounds.from_genes(genes).to_physical(self.case)
    }
}

/// Uniform random genes: continuous dimensions over their range, discrete
/// dimensions uniform over the valid steps.
pub fn random_population<T: Scalar, R: Rng + ?Sized>(bounds: &ControlBounds<T>, n: usize, rng: &mut R) -> Vec<Vec<T>> {
    (0..n)
        .map(|_| {
            (0..bounds.dimension())
                .map(|j| {
                    let (lo, hi) = (bounds.lower(j), bounds.upper(j));
                    if bounds.is_discrete(j) {
                        let max = hi.to_usize().unwrap_or(0);
                        T::from_count(rng.gen_range(0..=max))
                    } else {
                        lo + (hi - lo) * T::lit(rng.gen::<f64>())
                    }
                })
                .collect()
        })
        .collect()
}

/// NSGA-II survivor selection over parents ∪ offspring. Whole fronts are
/// admitted best first; the front that overflows is cut by descending
/// crowding distance. Survivors keep their merged order.
pub fn environmental_selection<T: Scalar>(
    parents: Vec<Individual<T>>,
    offspring: Vec<Individual<T>>,
    n: usize,
) -> Vec<Individual<T>> {
    let mut merged = parents;
    merged.extend(offspring);
    let mut keep = Vec::with_capacity(n);
    for front in fronts(&merged) {
        if keep.len() + front.len() <= n {
            keep.extend_from_slice(&front);
            if keep.len() == n {
                break;
            }
            continue;
        }
        let objs: Vec<[T; 2]> = front.iter().map(|&i| merged[i].objectives.as_array()).collect();
        let d = crowding_distance(&objs);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| total_cmp(d[b], d[a]).then(a.cmp(&b)));
        keep.extend(order[..n - keep.len()].iter().map(|&k| front[k]));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual<T>>> = merged.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("selected once")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalStats {
    pub count: usize,
    pub non_converged: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    /// Largest final mismatch among converged evaluations, p.u.
    pub max_mismatch: f64,
}

impl EvalStats {
    fn of<T: Scalar>(evals: &[Evaluation<T>]) -> Self {
        let mut s = EvalStats {
            count: evals.len(),
            ..Default::default()
        };
        for e in evals {
            if e.violation.non_convergence {
                s.non_converged += 1;
            } else {
                s.max_mismatch = s.max_mismatch.max(e.max_mismatch.as_f64());
            }
            s.max_iterations = s.max_iterations.max(e.iterations);
            s.mean_iterations += e.iterations as f64;
        }
        if !evals.is_empty() {
            s.mean_iterations /= evals.len() as f64;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Real evaluations so far.
    pub evaluations: usize,
    pub archive_size: usize,
    pub feasible: usize,
    pub best_p_loss: Option<f64>,
    pub best_vd: Option<f64>,
    /// Smallest total violation in the population.
    pub min_violation: f64,
    /// Offspring whose chosen candidate the classifier labeled promising.
    pub promising_chosen: usize,
    pub eval: EvalStats,
}

/// One solution in physical units, laid out like the front CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub p_loss: f64,
    pub vd: f64,
    pub violation: f64,
    /// `[V_G.., tap ratio.., shunt Mvar..]`
    pub controls: Vec<f64>,
}

impl SolutionRow {
    pub fn from_individual<T: Scalar>(problem: &Problem<'_, T>, ind: &Individual<T>) -> Self {
        SolutionRow {
            p_loss: ind.objectives.p_loss.as_f64(),
            vd: ind.objectives.vd.as_f64(),
            violation: ind.violation.as_f64(),
            controls: problem.physical(&ind.genes).iter().map(|v| v.as_f64()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub params: MoeaParams<f64>,
    pub evaluations: usize,
    pub generations: usize,
    pub trace: Vec<GenerationStats>,
    /// Archive objectives after every generation, when requested.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub snapshots: Vec<Vec<[f64; 2]>>,
    pub population: Vec<SolutionRow>,
    /// The reported front, sorted by loss: the archive, or the first rank of
    /// the final population if no feasible solution was ever found.
    pub front: Vec<SolutionRow>,
    pub front_from_archive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads for evaluation; 0 or 1 evaluates on the caller.
    pub jobs: usize,
    pub snapshots: bool,
}

pub fn run<T: Scalar>(case: &NetworkCase<T>, params: &MoeaParams<T>) -> Result<(ParetoFront<T>, RunReport)> {
    run_with(case, params, &RunOptions::default())
}

/// Full optimization loop. All random draws happen on the calling thread in
/// a fixed order before each batch is evaluated, so the result does not
/// depend on `opts.jobs`.
pub fn run_with<T: Scalar>(
    case: &NetworkCase<T>,
    params: &MoeaParams<T>,
    opts: &RunOptions,
) -> Result<(ParetoFront<T>, RunReport)> {
    params.validate()?;
    let problem = Problem::new(case);
    let pool = if opts.jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.jobs)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let eval_batch = |genes: Vec<Vec<T>>| -> Vec<(Vec<T>, Evaluation<T>)> {
        match &pool {
            Some(p) => p.install(|| {
                genes
                    .into_par_iter()
                    .map(|g| {
                        let e = problem.evaluate(&g);
                        (g, e)
                    })
                    .collect()
            }),
            None => genes
                .into_iter()
                .map(|g| {
                    let e = problem.evaluate(&g);
                    (g, e)
                })
                .collect(),
        }
    };
    let to_individuals = |batch: Vec<(Vec<T>, Evaluation<T>)>| -> (Vec<Individual<T>>, EvalStats) {
        let evals: Vec<Evaluation<T>> = batch.iter().map(|(_, e)| e.clone()).collect();
        let inds = batch
            .into_iter()
            .map(|(g, e)| {
                let mut ind = Individual::unevaluated(g);
                ind.objectives = e.objectives;
                ind.violation = e.violation.total;
                ind
            })
            .collect();
        (inds, EvalStats::of(&evals))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    let mut archive = ParetoFront::new(n);
    let mut trace = Vec::new();
    let mut snapshots = Vec::new();

    let genes = random_population(&problem.bounds, n, &mut rng);
    let (mut pop, stats) = to_individuals(eval_batch(genes));
    let mut evaluations = n;
    update_archive(&mut archive, &pop);
    trace.push(generation_stats(0, evaluations, &archive, &pop, 0, stats));
    if opts.snapshots {
        snapshots.push(objectives_f64(&archive));
    }

    let mut generation = 0;
    while evaluations < params.eval_budget {
        generation += 1;
        let sets = label_population(&mut pop);
        let mut promising = 0;
        let trials: Vec<Vec<T>> = (0..n)
            .map(|i| {
                let p = preselect_offspring(i, &pop, &sets, params, &problem.bounds, &mut rng);
                if p.classifications.get(p.chosen).map(|c| c.label) == Some(Label::Promising) {
                    promising += 1;
                }
                p.genes
            })
            .collect();
        let (offspring, stats) = to_individuals(eval_batch(trials));
        evaluations += n;
        update_archive(&mut archive, &offspring);
        pop = environmental_selection(pop, offspring, n);
        trace.push(generation_stats(generation, evaluations, &archive, &pop, promising, stats));
        if opts.snapshots {
            snapshots.push(objectives_f64(&archive));
        }
    }

    let rows = |inds: Vec<&Individual<T>>| -> Vec<SolutionRow> {
        inds.into_iter().map(|i| SolutionRow::from_individual(&problem, i)).collect()
    };
    let (front, front_from_archive) = if archive.is_empty() {
        let first = fronts(&pop).into_iter().next().unwrap_or_default();
        let mut members: Vec<&Individual<T>> = first.iter().map(|&i| &pop[i]).collect();
        members.sort_by(|a, b| {
            total_cmp(a.violation, b.violation)
                .then(total_cmp(a.objectives.p_loss, b.objectives.p_loss))
                .then(total_cmp(a.objectives.vd, b.objectives.vd))
        });
        (rows(members), false)
    } else {
        (rows(archive.sorted()), true)
    };
    let report = RunReport {
        seed: params.seed,
        params: MoeaParams {
            n: params.n,
            eval_budget: params.eval_budget,
            f: params.f.as_f64(),
            cr: params.cr.as_f64(),
            k: params.k,
            n_cand: params.n_cand,
            seed: params.seed,
        },
        evaluations,
        generations: generation,
        trace,
        snapshots,
        population: rows(pop.iter().collect()),
        front,
        front_from_archive,
    };
    Ok((archive, report))
}

fn objectives_f64<T: Scalar>(a: &ParetoFront<T>) -> Vec<[f64; 2]> {
    a.sorted()
        .iter()
        .map(|m| [m.objectives.p_loss.as_f64(), m.objectives.vd.as_f64()])
        .collect()
}

fn generation_stats<T: Scalar>(
    generation: usize,
    evaluations: usize,
    archive: &ParetoFront<T>,
    pop: &[Individual<T>],
    promising_chosen: usize,
    eval: EvalStats,
) -> GenerationStats {
    let feasible: Vec<&Individual<T>> = pop.iter().filter(|i| i.is_feasible()).collect();
    let best = |k: usize| {
        feasible
            .iter()
            .map(|i| i.objectives.as_array()[k].as_f64())
            .min_by(|a, b| a.total_cmp(b))
    };
    GenerationStats {
        generation,
        evaluations,
        archive_size: archive.len(),
        feasible: feasible.len(),
        best_p_loss: best(0),
        best_vd: best(1),
        min_violation: pop.iter().map(|i| i.violation.as_f64()).fold(f64::INFINITY, f64::min),
        promising_chosen,
        eval,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moea::{nondominated_sort, Point};
    use crate::network::bundled_case;
    use crate::powerflow::ObjectivePair;

    fn ind(a: f64, b: f64, tag: f64) -> Individual<f64> {
        let mut i = Individual::unevaluated(vec![tag]);
        i.objectives = ObjectivePair::new(a, b);
        i.violation = 0.0;
        i
    }

    #[test]
    fn dominated_offspring_leave_parents() {
        let parents: Vec<_> = (0..4).map(|i| ind(i as f64, 3.0 - i as f64, i as f64)).collect();
        let offspring: Vec<_> = (0..4).map(|i| ind(i as f64 + 1.0, 4.0 - i as f64, 10.0)).collect();
        let next = environmental_selection(parents.clone(), offspring, 4);
        assert_eq!(next, parents);
    }

    #[test]
    fn exact_first_front_survives() {
        let parents: Vec<_> = (0..3).map(|i| ind(10.0 + i as f64, 10.0, 0.0)).collect();
        let offspring: Vec<_> = (0..3).map(|i| ind(i as f64, 2.0 - i as f64, 1.0)).collect();
        let next = environmental_selection(parents, offspring.clone(), 3);
        assert_eq!(next, offspring);
    }

    /// Rank-1 set of N + 2 over a merged 2N: the two least crowded members
    /// of that front are the ones left out, checked against a brute-force
    /// recomputation.
    #[test]
    fn overflowing_front_drops_two_most_crowded() {
        let n = 6;
        // 8 non-dominated points with two tight pairs, plus 4 dominated ones
        let xs = [0.0, 1.0, 1.05, 3.0, 4.0, 4.02, 6.0, 7.0];
        let mut merged: Vec<_> = xs.iter().map(|&x| ind(x, 7.0 - x, x)).collect();
        merged.extend((0..4).map(|i| ind(20.0 + i as f64, 20.0, -1.0)));
        let parents = merged[..n].to_vec();
        let offspring = merged[n..].to_vec();
        let next = environmental_selection(parents, offspring, n);
        assert_eq!(next.len(), n);
        // brute force: rank, then crowding within the rank-1 set
        let pts: Vec<_> = merged.iter().map(|i| Point::feasible(i.objectives.as_array())).collect();
        let ranks = nondominated_sort(&pts);
        let first: Vec<usize> = (0..merged.len()).filter(|&i| ranks[i] == 1).collect();
        assert_eq!(first.len(), n + 2);
        let mut d: Vec<(f64, usize)> = first
            .iter()
            .map(|&i| {
                let x = merged[i].objectives.p_loss;
                let mut sorted: Vec<f64> = first.iter().map(|&k| merged[k].objectives.p_loss).collect();
                sorted.sort_by(|a, b| a.total_cmp(b));
                let p = sorted.iter().position(|&v| v == x).unwrap();
                if p == 0 || p == sorted.len() - 1 {
                    (f64::INFINITY, i)
                } else {
                    // both objectives share the same normalized gap here
                    (2.0 * (sorted[p + 1] - sorted[p - 1]) / 7.0, i)
                }
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let dropped: Vec<f64> = d[..2].iter().map(|&(_, i)| merged[i].genes[0]).collect();
        for x in &dropped {
            assert!(next.iter().all(|s| s.genes[0] != *x));
        }
        assert!(next.iter().all(|s| s.genes[0] >= 0.0));
    }

    fn small_params(evals: usize, seed: u64) -> MoeaParams<f64> {
        MoeaParams {
            n: 20,
            eval_budget: evals,
            seed,
            ..MoeaParams::default()
        }
    }

    #[test]
    fn budget_of_one_population_stops_after_init() {
        let case = bundled_case::<f64>("ieee30").unwrap();
        let (archive, report) = run(&case, &small_params(20, 5)).unwrap();
        assert_eq!(report.generations, 0);
        assert_eq!(report.evaluations, 20);
        assert!(archive.len() <= 20);
        assert_eq!(report.population.len(), 20);
    }

    #[test]
    fn seeded_runs_repeat_and_ignore_jobs() {
        let case = bundled_case::<f64>("ieee30").unwrap();
        let p = small_params(200, 11);
        let (a1, r1) = run(&case, &p).unwrap();
        let (a2, r2) = run(&case, &p).unwrap();
        let (a3, r3) = run_with(&case, &p, &RunOptions { jobs: 3, snapshots: false }).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(a1, a3);
        assert_eq!(r1, r2);
        assert_eq!(r1, r3);
        assert!(r1.evaluations <= p.eval_budget + p.n);
    }

    #[test]
    fn archive_is_mutually_nondominated_each_generation() {
        let case = bundled_case::<f64>("ieee30").unwrap();
        let (_, r) = run_with(&case, &small_params(300, 2), &RunOptions { jobs: 0, snapshots: true }).unwrap();
        assert_eq!(r.snapshots.len(), r.generations + 1);
        for snap in &r.snapshots {
            for a in snap {
                for b in snap {
                    assert!(!crate::moea::pareto_dominates(a, b));
                }
            }
        }
        // monotone quality: nothing in generation g+1 is dominated by g
        for w in r.snapshots.windows(2) {
            for new in &w[1] {
                assert!(w[0].iter().all(|old| !crate::moea::pareto_dominates(old, new)));
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let case = bundled_case::<f64>("ieee30").unwrap();
        let mut p = small_params(100, 1);
        p.k = 4;
        assert!(run(&case, &p).is_err());
    }
}
