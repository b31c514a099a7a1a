use super::sorting::{assign_rank_and_crowding, crowded_order};
use super::{Individual, Label};
use crate::network::ControlBounds;
use crate::scalar::{total_cmp, Scalar};

/// Training data for the pre-selection classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSets<T> {
    pub p_plus: Vec<Individual<T>>,
    pub p_minus: Vec<Individual<T>>,
}

impl<T: Scalar> LabeledSets<T> {
    pub fn len(&self) -> usize {
        self.p_plus.len() + self.p_minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Ranks the population, stores rank/crowding/label on every member and
/// splits it in crowded-comparison order. For odd sizes the extra member
/// goes to the promising set.
pub fn label_population<T: Scalar>(pop: &mut [Individual<T>]) -> LabeledSets<T> {
    assign_rank_and_crowding(pop);
    let order = crowded_order(pop);
    let n_plus = pop.len().div_ceil(2);
    for (pos, &i) in order.iter().enumerate() {
        pop[i].label = Some(if pos < n_plus {
            Label::Promising
        } else {
            Label::Unpromising
        });
    }
    LabeledSets {
        p_plus: order[..n_plus].iter().map(|&i| pop[i].clone()).collect(),
        p_minus: order[n_plus..].iter().map(|&i| pop[i].clone()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub label: Label,
    /// Sum of the neighbours' ±1 labels.
    pub vote: i32,
}

/// K-nearest-neighbour label of a candidate: promising when the neighbour
/// labels sum to zero or more.
///
/// Distances are Euclidean after scaling every dimension to [0, 1] by its
/// bounds. Equal distances are broken by training order (P+ first).
pub fn knn_classify<T: Scalar>(
    candidate: &[T],
    sets: &LabeledSets<T>,
    k: usize,
    bounds: &ControlBounds<T>,
) -> Classification {
    let scale: Vec<T> = (0..bounds.dimension())
        .map(|j| {
            let span = bounds.upper(j) - bounds.lower(j);
            if span > T::zero() {
                T::one() / span
            } else {
                T::zero()
            }
        })
        .collect();
    let training = sets
        .p_plus
        .iter()
        .map(|i| (i, Label::Promising))
        .chain(sets.p_minus.iter().map(|i| (i, Label::Unpromising)));
    let mut dist: Vec<(T, usize, Label)> = training
        .enumerate()
        .map(|(idx, (ind, label))| {
            let d2 = candidate
                .iter()
                .zip(&ind.genes)
                .zip(&scale)
                .map(|((&a, &b), &s)| {
                    let d = (a - b) * s;
                    d * d
                })
                .fold(T::zero(), |acc, v| acc + v);
            (d2, idx, label)
        })
        .collect();
    let k = k.min(dist.len());
    dist.sort_by(|a, b| total_cmp(a.0, b.0).then(a.1.cmp(&b.1)));
    let vote: i32 = dist[..k].iter().map(|(_, _, l)| l.value()).sum();
    Classification {
        label: if vote >= 0 {
            Label::Promising
        } else {
            Label::Unpromising
        },
        vote,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::powerflow::ObjectivePair;

    fn bounds1() -> ControlBounds<f64> {
        ControlBounds {
            gen_v: vec![(0.0, 1.0)],
            tap_steps: vec![],
            shunt_banks: vec![],
        }
    }

    fn at(x: f64, f: (f64, f64)) -> Individual<f64> {
        let mut i = Individual::unevaluated(vec![x]);
        i.objectives = ObjectivePair::new(f.0, f.1);
        i.violation = 0.0;
        i
    }

    #[test]
    fn label_split_sizes() {
        let mut pop: Vec<_> = (0..100).map(|i| at(i as f64 / 100.0, (i as f64, (100 - i) as f64))).collect();
        let sets = label_population(&mut pop);
        assert_eq!((sets.p_plus.len(), sets.p_minus.len()), (50, 50));
        let mut pop: Vec<_> = (0..5).map(|i| at(0.0, (i as f64, 0.0))).collect();
        let sets = label_population(&mut pop);
        assert_eq!((sets.p_plus.len(), sets.p_minus.len()), (3, 2));
    }

    #[test]
    fn identical_population_splits_by_index() {
        let mut pop: Vec<_> = (0..6).map(|_| at(0.5, (1.0, 1.0))).collect();
        label_population(&mut pop);
        let labels: Vec<_> = pop.iter().map(|i| i.label.unwrap()).collect();
        assert_eq!(&labels[..3], &[Label::Promising; 3]);
        assert_eq!(&labels[3..], &[Label::Unpromising; 3]);
    }

    fn sets(plus: &[f64], minus: &[f64]) -> LabeledSets<f64> {
        LabeledSets {
            p_plus: plus.iter().map(|&x| at(x, (0.0, 0.0))).collect(),
            p_minus: minus.iter().map(|&x| at(x, (0.0, 0.0))).collect(),
        }
    }

    #[test]
    fn knn_votes() {
        let b = bounds1();
        let s = sets(&[0.5], &[0.9]);
        assert_eq!(knn_classify(&[0.5], &s, 1, &b).label, Label::Promising);
        // neighbours +1, -1, -1
        let s = sets(&[0.1, 0.9], &[0.2, 0.3]);
        let c = knn_classify(&[0.15], &s, 3, &b);
        assert_eq!((c.label, c.vote), (Label::Unpromising, -1));
        // tie sum 0 counts as promising
        let s = sets(&[0.1], &[0.3]);
        let c = knn_classify(&[0.2], &s, 2, &b);
        assert_eq!((c.label, c.vote), (Label::Promising, 0));
    }

    #[test]
    fn knn_scales_by_bounds() {
        // dimension 1 spans 0..20 steps, dimension 0 spans 0.2 p.u.
        let b = ControlBounds {
            gen_v: vec![(0.9, 1.1)],
            tap_steps: vec![20],
            shunt_banks: vec![],
        };
        let mut plus = at(0.0, (0.0, 0.0));
        plus.genes = vec![1.0, 10.0];
        let mut minus = at(0.0, (0.0, 0.0));
        minus.genes = vec![0.9, 11.0];
        let s = LabeledSets {
            p_plus: vec![plus],
            p_minus: vec![minus],
        };
        // raw distances: 1 step to P+, 0.1 p.u. to P-; scaled: 0.05 vs 0.5
        let c = knn_classify(&[1.0, 11.0], &s, 1, &b);
        assert_eq!(c.label, Label::Promising);
    }
}
