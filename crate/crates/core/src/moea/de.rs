use rand::Rng;

use super::classify::{knn_classify, Classification, LabeledSets};
use super::{Individual, Label, MoeaParams};
use crate::network::ControlBounds;
use crate::scalar::Scalar;

/// Folds `v` back into `[lo, hi]` by mirroring at the violated bound until it
/// lands inside.
pub fn reflect_into<T: Scalar>(v: T, lo: T, hi: T) -> T {
    let span = hi - lo;
    if !(span > T::zero()) || !v.is_finite() {
        return lo;
    }
    let mut v = v;
    // a DE step moves at most one span past a bound, but keep going anyway
    for _ in 0..64 {
        if v < lo {
            v = lo + lo - v;
        } else if v > hi {
            v = hi + hi - v;
        } else {
            return v;
        }
    }
    v.max(lo).min(hi)
}

/// Three distinct population indices, none equal to `i`.
fn pick_partners<R: Rng + ?Sized>(n: usize, i: usize, rng: &mut R) -> [usize; 3] {
    debug_assert!(n >= 4);
    let mut r = [usize::MAX; 3];
    for k in 0..3 {
        loop {
            let c = rng.gen_range(0..n);
            if c != i && !r[..k].contains(&c) {
                r[k] = c;
                break;
            }
        }
    }
    r
}

/// DE/rand/1 donor `x_r1 + f (x_r2 − x_r3)` in gene space, reflected into
/// bounds. Discrete genes stay real-valued here.
pub fn de_mutation<T: Scalar, R: Rng + ?Sized>(
    pop: &[Individual<T>],
    i: usize,
    f: T,
    bounds: &ControlBounds<T>,
    rng: &mut R,
) -> Vec<T> {
    let [r1, r2, r3] = pick_partners(pop.len(), i, rng);
    let (a, b, c) = (&pop[r1].genes, &pop[r2].genes, &pop[r3].genes);
    (0..a.len())
        .map(|j| reflect_into(a[j] + f * (b[j] - c[j]), bounds.lower(j), bounds.upper(j)))
        .collect()
}

/// Binomial crossover with one forced donor index, then discrete repair:
/// round to the nearest step (exact halves go toward the target) and clamp.
///
/// Consumes one index draw plus one uniform per dimension regardless of `cr`.
pub fn de_crossover<T: Scalar, R: Rng + ?Sized>(
    target: &[T],
    donor: &[T],
    cr: T,
    bounds: &ControlBounds<T>,
    rng: &mut R,
) -> Vec<T> {
    let d = target.len();
    assert_eq!(d, donor.len(), "target and donor dimensions differ");
    let sn = rng.gen_range(0..d);
    let mut trial = Vec::with_capacity(d);
    for j in 0..d {
        // (0, 1] so that cr = 0 never passes and cr = 1 always does
        let u = T::lit(1.0 - rng.gen::<f64>());
        let v = if u <= cr || j == sn { donor[j] } else { target[j] };
        trial.push(v);
    }
    for (j, v) in trial.iter_mut().enumerate() {
        let (lo, hi) = (bounds.lower(j), bounds.upper(j));
        if bounds.is_discrete(j) {
            *v = round_toward(*v, target[j]);
        }
        *v = v.max(lo).min(hi);
    }
    trial
}

fn round_toward<T: Scalar>(v: T, target: T) -> T {
    let (fl, ce) = (v.floor(), v.ceil());
    let half = T::lit(0.5);
    if v - fl == half {
        if (fl - target).abs() <= (ce - target).abs() {
            fl
        } else {
            ce
        }
    } else {
        v.round()
    }
}

/// Index of the candidate to evaluate: the first promising one, otherwise
/// the one with the largest neighbour vote (earliest on ties).
pub fn choose_candidate(labels: &[Classification]) -> usize {
    if let Some(i) = labels.iter().position(|c| c.label == Label::Promising) {
        return i;
    }
    let mut best = 0;
    for (i, c) in labels.iter().enumerate() {
        if c.vote > labels[best].vote {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preselection<T> {
    /// Genes of the candidate picked for real evaluation.
    pub genes: Vec<T>,
    pub chosen: usize,
    /// One entry per candidate; empty when `n_cand == 1` (nothing to screen).
    pub classifications: Vec<Classification>,
}

/// Generates `n_cand` DE trials for parent `i`, screens them with the KNN
/// classifier and returns the one that should be evaluated.
pub fn preselect_offspring<T: Scalar, R: Rng + ?Sized>(
    i: usize,
    pop: &[Individual<T>],
    sets: &LabeledSets<T>,
    params: &MoeaParams<T>,
    bounds: &ControlBounds<T>,
    rng: &mut R,
) -> Preselection<T> {
    let mut candidates: Vec<Vec<T>> = (0..params.n_cand)
        .map(|_| {
            let donor = de_mutation(pop, i, params.f, bounds, rng);
            de_crossover(&pop[i].genes, &donor, params.cr, bounds, rng)
        })
        .collect();
    if candidates.len() == 1 {
        return Preselection {
            genes: candidates.pop().expect("one candidate"),
            chosen: 0,
            classifications: Vec::new(),
        };
    }
    let classifications: Vec<Classification> = candidates
        .iter()
        .map(|c| knn_classify(c, sets, params.k, bounds))
        .collect();
    let chosen = choose_candidate(&classifications);
    Preselection {
        genes: candidates.swap_remove(chosen),
        chosen,
        classifications,
    }
}
