use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Reference series for grey relational coefficients in cost-type
/// normalized space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    /// `(0, 0)`: best observed value of every indicator.
    Ideal,
    /// `(1, 1)`: worst observed value of every indicator.
    Negative,
}

/// Min-max scaling per objective over the given set. An objective with no
/// spread maps to 0 everywhere.
pub fn normalize_objectives<T: Scalar>(front: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for p in front {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    front
        .iter()
        .map(|p| {
            let mut out = [T::zero(); 2];
            for k in 0..2 {
                let span = hi[k] - lo[k];
                if span > T::zero() {
                    out[k] = (p[k] - lo[k]) / span;
                }
            }
            out
        })
        .collect()
}

/// Grey relational coefficient `(Δmin + ρ Δmax) / (Δ + ρ Δmax)` with global extrema
/// of `Δ = |x − ref|`. Returns all ones when every Δ is equal.
pub fn grey_relational_coefficients<T: Scalar>(normalized: &[[T; 2]], reference: Reference, rho: T) -> Vec<[T; 2]> {
    let r = match reference {
        Reference::Ideal => T::zero(),
        Reference::Negative => T::one(),
    };
    let delta: Vec<[T; 2]> = normalized.iter().map(|p| [(p[0] - r).abs(), (p[1] - r).abs()]).collect();
    let mut dmin = T::infinity();
    let mut dmax = T::neg_infinity();
    for d in delta.iter().flatten() {
        dmin = dmin.min(*d);
        dmax = dmax.max(*d);
    }
    if !(dmax > dmin) {
        return vec![[T::one(); 2]; normalized.len()];
    }
    delta
        .iter()
        .map(|d| {
            let f = |x: T| (dmin + rho * dmax) / (x + rho * dmax);
            [f(d[0]), f(d[1])]
        })
        .collect()
}

/// `Σ_k gr_k λ_k² / sqrt(Σ_k λ_k²)` for every row.
pub fn project<T: Scalar>(gr: &[[T; 2]], weights: &[T; 2]) -> Vec<T> {
    let norm = (weights[0] * weights[0] + weights[1] * weights[1]).sqrt();
    gr.iter()
        .map(|g| (g[0] * weights[0] * weights[0] + g[1] * weights[1] * weights[1]) / norm)
        .collect()
}

/// Projections onto the ideal and the negative reference.
pub fn grp_projection<T: Scalar>(gr_plus: &[[T; 2]], gr_minus: &[[T; 2]], weights: &[T; 2]) -> (Vec<T>, Vec<T>) {
    (project(gr_plus, weights), project(gr_minus, weights))
}

/// `p = pr⁺ / (pr⁺ + pr⁻)`; 0.5 if both vanish.
pub fn priority_membership<T: Scalar>(pr_plus: &[T], pr_minus: &[T]) -> Vec<T> {
    pr_plus
        .iter()
        .zip(pr_minus)
        .map(|(&a, &b)| {
            let s = a + b;
            if s > T::zero() {
                a / s
            } else {
                T::lit(0.5)
            }
        })
        .collect()
}
