use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmParams<T> {
    pub n_clusters: usize,
    /// Fuzziness exponent, > 1.
    pub fuzziness: T,
    /// Stop once no center moves farther than this.
    pub tolerance: T,
    pub max_iter: usize,
    /// Extra runs from random data points; the lowest final objective wins.
    pub restarts: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for FcmParams<T> {
    fn default() -> Self {
        FcmParams {
            n_clusters: 2,
            fuzziness: T::lit(2.0),
            tolerance: T::lit(1e-6),
            max_iter: 300,
            restarts: 0,
            seed: 1,
        }
    }
}

impl<T: Scalar> FcmParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters < 2 {
            return Err(Error::InvalidParameter("at least 2 clusters are needed".into()));
        }
        if !(self.fuzziness > T::one()) {
            return Err(Error::InvalidParameter("fuzziness must exceed 1".into()));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidParameter("clustering tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmResult<T> {
    /// `memberships[p][q]`: degree of point `p` in cluster `q`; rows sum to 1.
    pub memberships: Vec<Vec<T>>,
    pub centers: Vec<[T; 2]>,
    pub iterations: usize,
    /// Objective value after every membership update.
    pub objective_history: Vec<T>,
    pub warnings: Vec<String>,
}

fn dist2<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Memberships for fixed centers. A point sitting exactly on a center
/// belongs to it (the first such center) with degree 1.
pub fn memberships<T: Scalar>(points: &[[T; 2]], centers: &[[T; 2]], fuzziness: T) -> Vec<Vec<T>> {
    let e = T::one() / (fuzziness - T::one());
    points
        .iter()
        .map(|p| {
            let d: Vec<T> = centers.iter().map(|c| dist2(p, c)).collect();
            if let Some(hit) = d.iter().position(|&v| v == T::zero()) {
                let mut row = vec![T::zero(); centers.len()];
                row[hit] = T::one();
                return row;
            }
            // (d_q / d_r)^(2/(n-1)) with squared distances → exponent 1/(n-1)
            let inv: Vec<T> = d.iter().map(|&v| v.powf(-e)).collect();
            let total = inv.iter().fold(T::zero(), |a, &b| a + b);
            inv.iter().map(|&v| v / total).collect()
        })
        .collect()
}

/// Weighted means of the points under `u^n`.
pub fn centers<T: Scalar>(points: &[[T; 2]], u: &[Vec<T>], fuzziness: T, n_clusters: usize) -> Vec<[T; 2]> {
    (0..n_clusters)
        .map(|q| {
            let mut num = [T::zero(); 2];
            let mut den = T::zero();
            for (p, row) in points.iter().zip(u) {
                let w = row[q].powf(fuzziness);
                num[0] += w * p[0];
                num[1] += w * p[1];
                den += w;
            }
            if den > T::zero() {
                [num[0] / den, num[1] / den]
            } else {
                [T::nan(), T::nan()]
            }
        })
        .collect()
}

/// `J = Σ_p Σ_q u_pq^n ‖s_p − c_q‖²`
pub fn objective<T: Scalar>(points: &[[T; 2]], u: &[Vec<T>], centers: &[[T; 2]], fuzziness: T) -> T {
    let mut j = T::zero();
    for (p, row) in points.iter().zip(u) {
        for (c, &m) in centers.iter().zip(row) {
            j += m.powf(fuzziness) * dist2(p, c);
        }
    }
    j
}

/// Starting centers spread along the first objective: for two clusters these
/// are the two ends of the front.
fn spread_init<T: Scalar>(points: &[[T; 2]], c: usize) -> Vec<[T; 2]> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        total_cmp(points[a][0], points[b][0])
            .then(total_cmp(points[b][1], points[a][1]))
            .then(a.cmp(&b))
    });
    let last = points.len() - 1;
    (0..c)
        .map(|q| {
            let pos = (q * last + (c - 1) / 2) / (c - 1);
            points[order[pos]]
        })
        .collect()
}

fn iterate<T: Scalar>(points: &[[T; 2]], init: Vec<[T; 2]>, params: &FcmParams<T>) -> FcmResult<T> {
    let c = params.n_clusters;
    let mut ctr = init;
    let mut u = memberships(points, &ctr, params.fuzziness);
    let mut history = vec![objective(points, &u, &ctr, params.fuzziness)];
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let next = centers(points, &u, params.fuzziness, c);
        // a center that lost all weight stays put
        let next: Vec<[T; 2]> = next
            .into_iter()
            .zip(&ctr)
            .map(|(n, old)| if n[0].is_finite() && n[1].is_finite() { n } else { *old })
            .collect();
        let moved = next
            .iter()
            .zip(&ctr)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(T::zero(), |a, b| a.max(b));
        ctr = next;
        u = memberships(points, &ctr, params.fuzziness);
        history.push(objective(points, &u, &ctr, params.fuzziness));
        if moved <= params.tolerance {
            break;
        }
    }
    FcmResult {
        memberships: u,
        centers: ctr,
        iterations,
        objective_history: history,
        warnings: Vec::new(),
    }
}

/// Fuzzy c-means by alternating center and membership updates.
pub fn fcm<T: Scalar>(points: &[[T; 2]], params: &FcmParams<T>) -> Result<FcmResult<T>> {
    params.validate()?;
    let c = params.n_clusters;
    if points.len() < c {
        return Err(Error::InvalidParameter(format!(
            "{} points cannot form {c} clusters",
            points.len()
        )));
    }
    let mut best = iterate(points, spread_init(points, c), params);
    if params.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        for _ in 0..params.restarts {
            let init = sample(&mut rng, points.len(), c).into_iter().map(|i| points[i]).collect();
            let r = iterate(points, init, params);
            let (jr, jb) = (r.objective_history.last().copied(), best.objective_history.last().copied());
            if let (Some(a), Some(b)) = (jr, jb) {
                if a < b {
                    best = r;
                }
            }
        }
    }
    let mut distinct: Vec<[T; 2]> = Vec::new();
    for p in points {
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < c {
        best.warnings.push(format!(
            "only {} distinct points for {c} clusters; some centers coincide",
            distinct.len()
        ));
    }
    Ok(best)
}

/// Cluster of largest membership per point; ties go to the lower index.
pub fn assign_clusters<T: Scalar>(memberships: &[Vec<T>]) -> Vec<usize> {
    memberships
        .iter()
        .map(|row| {
            let mut best = 0;
            for (q, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = q;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn separated_groups() {
        let mut pts = Vec::new();
        for k in 0..10 {
            let e = (k as f64 - 4.5) * 2e-4;
            pts.push([e, -e]);
            pts.push([1.0 + e, 1.0 - e]);
        }
        let r = fcm(&pts, &FcmParams::default()).unwrap();
        let labels = assign_clusters(&r.memberships);
        for (i, row) in r.memberships.iter().enumerate() {
            assert!(row.iter().cloned().fold(0.0, f64::max) >= 0.99);
            assert_eq!(labels[i], labels[i % 2]);
        }
        assert_ne!(labels[0], labels[1]);
    }

    #[test]
    fn point_on_center() {
        let u: Vec<Vec<f64>> = memberships(&[[0.2, 0.3], [0.5, 0.5]], &[[0.2, 0.3], [1.0, 1.0]], 2.0);
        assert_eq!(u[0], vec![1.0, 0.0]);
        // equidistant-free point: 1/d² weights
        let (d1, d2) = (0.09 + 0.04, 0.25 + 0.25);
        assert!((u[1][0] - (1.0 / d1) / (1.0 / d1 + 1.0 / d2)).abs() < 1e-15);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(assign_clusters(&[vec![0.9, 0.1], vec![0.1, 0.9], vec![0.5, 0.5]]), vec![0, 1, 0]);
    }

    #[test]
    fn too_few_points() {
        assert!(fcm(&[[0.0, 0.0]], &FcmParams::default()).is_err());
        let r = fcm(&[[0.5, 0.5], [0.5, 0.5]], &FcmParams::<f64>::default()).unwrap();
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn spread_init_picks_ends() {
        let pts = [[0.3, 0.7], [0.0, 1.0], [1.0, 0.0], [0.6, 0.2]];
        assert_eq!(spread_init(&pts, 2), vec![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(spread_init(&pts, 3)[1], [0.6, 0.2]);
    }

    fn arb_points() -> impl Strategy<Value = Vec<[f64; 2]>> {
        proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| [a, b]), 2..60)
    }

    proptest! {
        #[test]
        fn rows_sum_to_one_and_objective_descends(pts in arb_points(), restarts in 0usize..3) {
            let params = FcmParams { restarts, ..FcmParams::default() };
            let r = fcm(&pts, &params).unwrap();
            for row in &r.memberships {
                let s: f64 = row.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-9);
                prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            for w in r.objective_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", w[0], w[1]);
            }
        }
    }
}
