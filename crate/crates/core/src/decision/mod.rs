//! Picking best compromise solutions from a Pareto front.
//!
//! The front is min-max normalized and split into preference clusters with
//! fuzzy c-means; clusters are numbered by mean normalized loss, so cluster 0
//! is the economy group and the last one the security group. Inside every
//! cluster, grey relational projection onto the ideal and negative-ideal
//! references yields a priority membership, and the member with the highest
//! one is that cluster's best compromise solution (BCS).

mod fcm;
mod grp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

pub use fcm::{assign_clusters, centers, fcm, memberships, objective, FcmParams, FcmResult};
pub use grp::{
    grey_relational_coefficients, grp_projection, normalize_objectives, priority_membership, project, Reference,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionParams<T> {
    pub fcm: FcmParams<T>,
    /// Indicator weights for (loss, voltage deviation).
    pub weights: [T; 2],
    /// Distinguishing coefficient of the grey relational coefficient.
    pub rho: T,
}

impl<T: Scalar> Default for DecisionParams<T> {
    fn default() -> Self {
        DecisionParams {
            fcm: FcmParams::default(),
            weights: [T::lit(0.5); 2],
            rho: T::lit(0.5),
        }
    }
}

impl<T: Scalar> DecisionParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.fcm.validate()?;
        if !self.weights.iter().all(|&w| w > T::zero() && w.is_finite()) {
            return Err(Error::InvalidParameter("decision weights must be positive".into()));
        }
        if !(self.rho > T::zero() && self.rho <= T::one()) {
            return Err(Error::InvalidParameter("grey coefficient rho must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsChoice<T> {
    pub cluster: usize,
    /// Index into the analyzed front.
    pub index: usize,
    pub priority: T,
    pub objectives: [T; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsReport<T> {
    /// Whole-front min-max normalized objectives.
    pub normalized: Vec<[T; 2]>,
    /// Membership rows with columns in canonical cluster order.
    pub memberships: Vec<Vec<T>>,
    pub centers: Vec<[T; 2]>,
    pub clusters: Vec<usize>,
    pub fcm_iterations: usize,
    pub objective_history: Vec<T>,
    /// Cluster-local grey relational quantities, per solution.
    pub gr_plus: Vec<[T; 2]>,
    pub gr_minus: Vec<[T; 2]>,
    pub pr_plus: Vec<T>,
    pub pr_minus: Vec<T>,
    pub priority: Vec<T>,
    /// Priority membership computed over the whole front.
    pub global_priority: Vec<T>,
    /// One choice per cluster in cluster order, or a single whole-front
    /// choice if clustering degenerated.
    pub bcs: Vec<BcsChoice<T>>,
    pub warnings: Vec<String>,
}

/// Per-cluster argmax of `p`; ties go to lower loss, then lower index.
/// Empty clusters yield `None`.
pub fn select_bcs<T: Scalar>(front: &[[T; 2]], labels: &[usize], p: &[T], n_clusters: usize) -> Vec<Option<usize>> {
    let mut best: Vec<Option<usize>> = vec![None; n_clusters];
    for (i, &c) in labels.iter().enumerate() {
        let better = match best[c] {
            None => true,
            Some(b) => {
                p[i] > p[b] || (p[i] == p[b] && total_cmp(front[i][0], front[b][0]).is_lt())
            }
        };
        if better {
            best[c] = Some(i);
        }
    }
    best
}

struct Grp<T> {
    gr_plus: Vec<[T; 2]>,
    gr_minus: Vec<[T; 2]>,
    pr_plus: Vec<T>,
    pr_minus: Vec<T>,
    p: Vec<T>,
}

fn grp_over<T: Scalar>(objs: &[[T; 2]], params: &DecisionParams<T>) -> Grp<T> {
    let n = normalize_objectives(objs);
    let gr_plus = grey_relational_coefficients(&n, Reference::Ideal, params.rho);
    let gr_minus = grey_relational_coefficients(&n, Reference::Negative, params.rho);
    let (pr_plus, pr_minus) = grp_projection(&gr_plus, &gr_minus, &params.weights);
    let p = priority_membership(&pr_plus, &pr_minus);
    Grp {
        gr_plus,
        gr_minus,
        pr_plus,
        pr_minus,
        p,
    }
}

/// Clusters the front, runs grey relational projection inside every cluster
/// and picks one BCS per cluster.
pub fn analyze<T: Scalar>(front: &[[T; 2]], params: &DecisionParams<T>) -> Result<BcsReport<T>> {
    params.validate()?;
    if front.is_empty() {
        return Err(Error::InvalidParameter("cannot analyze an empty front".into()));
    }
    let c = params.fcm.n_clusters;
    let normalized = normalize_objectives(front);
    let global = grp_over(front, params);
    let mut warnings = Vec::new();

    let single = |warnings: Vec<String>, normalized: Vec<[T; 2]>, global: Grp<T>| {
        let labels = vec![0; front.len()];
        let pick = select_bcs(front, &labels, &global.p, 1)[0].expect("non-empty front");
        BcsReport {
            memberships: vec![vec![T::one()]; front.len()],
            centers: Vec::new(),
            clusters: labels,
            fcm_iterations: 0,
            objective_history: Vec::new(),
            gr_plus: global.gr_plus,
            gr_minus: global.gr_minus,
            pr_plus: global.pr_plus,
            pr_minus: global.pr_minus,
            priority: global.p.clone(),
            bcs: vec![BcsChoice {
                cluster: 0,
                index: pick,
                priority: global.p[pick],
                objectives: front[pick],
            }],
            global_priority: global.p,
            normalized,
            warnings,
        }
    };

    if front.len() < c {
        warnings.push(format!("{} solutions cannot form {c} clusters; single BCS reported", front.len()));
        return Ok(single(warnings, normalized, global));
    }
    let fcm_out = fcm(&normalized, &params.fcm)?;
    warnings.extend(fcm_out.warnings.iter().cloned());
    let raw = assign_clusters(&fcm_out.memberships);

    // canonical numbering: ascending mean normalized loss, empty clusters last
    let mut mean = vec![(T::zero(), 0usize); c];
    for (i, &q) in raw.iter().enumerate() {
        mean[q].0 += normalized[i][0];
        mean[q].1 += 1;
    }
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| {
        let key = |q: usize| {
            let (s, n) = mean[q];
            if n == 0 {
                T::infinity()
            } else {
                s / T::from_count(n)
            }
        };
        total_cmp(key(a), key(b)).then(a.cmp(&b))
    });
    let mut rank = vec![0; c];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let clusters: Vec<usize> = raw.iter().map(|&q| rank[q]).collect();
    let memberships: Vec<Vec<T>> = fcm_out
        .memberships
        .iter()
        .map(|row| order.iter().map(|&old| row[old]).collect())
        .collect();
    let centers: Vec<[T; 2]> = order.iter().map(|&old| fcm_out.centers[old]).collect();

    if mean.iter().any(|&(_, n)| n == 0) {
        warnings.push("a cluster ended up empty; single BCS reported".into());
        let mut r = single(warnings, normalized, global);
        r.memberships = memberships;
        r.centers = centers;
        r.fcm_iterations = fcm_out.iterations;
        r.objective_history = fcm_out.objective_history;
        return Ok(r);
    }

    let n = front.len();
    let mut gr_plus = vec![[T::zero(); 2]; n];
    let mut gr_minus = vec![[T::zero(); 2]; n];
    let mut pr_plus = vec![T::zero(); n];
    let mut pr_minus = vec![T::zero(); n];
    let mut priority = vec![T::zero(); n];
    for q in 0..c {
        let members: Vec<usize> = (0..n).filter(|&i| clusters[i] == q).collect();
        let objs: Vec<[T; 2]> = members.iter().map(|&i| front[i]).collect();
        let g = grp_over(&objs, params);
        for (k, &i) in members.iter().enumerate() {
            gr_plus[i] = g.gr_plus[k];
            gr_minus[i] = g.gr_minus[k];
            pr_plus[i] = g.pr_plus[k];
            pr_minus[i] = g.pr_minus[k];
            priority[i] = g.p[k];
        }
    }
    let bcs = select_bcs(front, &clusters, &priority, c)
        .into_iter()
        .enumerate()
        .map(|(q, i)| {
            let i = i.expect("every cluster has members");
            BcsChoice {
                cluster: q,
                index: i,
                priority: priority[i],
                objectives: front[i],
            }
        })
        .collect();
    Ok(BcsReport {
        normalized,
        memberships,
        centers,
        clusters,
        fcm_iterations: fcm_out.iterations,
        objective_history: fcm_out.objective_history,
        gr_plus,
        gr_minus,
        pr_plus,
        pr_minus,
        priority,
        global_priority: global.p,
        bcs,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                [16.0 + 1.5 * x, 1.7 + 2.5 * (1.0 - x).powi(2)]
            })
            .collect()
    }

    #[test]
    fn two_preferences_on_a_convex_front() {
        let front = curve(60);
        let r = analyze(&front, &DecisionParams::default()).unwrap();
        assert_eq!(r.bcs.len(), 2);
        let (eco, sec) = (&r.bcs[0], &r.bcs[1]);
        assert!(eco.objectives[0] < sec.objectives[0]);
        assert!(sec.objectives[1] < eco.objectives[1]);
        assert!(r.priority.iter().chain(&r.global_priority).all(|&p| (0.0..=1.0).contains(&p)));
        assert_eq!(r.clusters[0], 0);
        assert_eq!(r.clusters[59], 1);
    }

    #[test]
    fn single_member_cluster_is_its_own_bcs() {
        let front = [[0.0, 10.0], [10.0, 0.0], [10.1, 0.0]];
        let r = analyze(&front, &DecisionParams::default()).unwrap();
        assert_eq!(r.bcs[0].index, 0);
        assert_eq!(r.bcs[0].priority, 0.5);
    }

    #[test]
    fn degenerate_fronts_fall_back_to_one_bcs() {
        let r = analyze(&[[1.0, 1.0]], &DecisionParams::default()).unwrap();
        assert_eq!(r.bcs.len(), 1);
        assert!(!r.warnings.is_empty());
        let r = analyze(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]], &DecisionParams::default()).unwrap();
        assert_eq!(r.bcs.len(), 1);
        assert!(analyze::<f64>(&[], &DecisionParams::default()).is_err());
    }

    #[test]
    fn tie_break_prefers_lower_loss() {
        let front = [[2.0, 0.0], [1.0, 0.0]];
        assert_eq!(select_bcs(&front, &[0, 0], &[0.5, 0.5], 1), vec![Some(1)]);
        assert_eq!(select_bcs(&front, &[0, 0], &[0.6, 0.5], 2), vec![Some(0), None]);
    }
}
