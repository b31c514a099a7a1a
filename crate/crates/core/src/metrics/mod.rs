//! Front quality indicators and weighted-sum reference fronts.

mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

pub use reference::{build_reference_front, optimize_weighted, ReferenceFront, ReferenceOptions, WeightedRun};

fn dist<T: Scalar>(a: &[T; 2], b: &[T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn nearest<T: Scalar>(x: &[T; 2], set: &[[T; 2]]) -> T {
    set.iter().map(|s| dist(x, s)).fold(T::infinity(), |a, b| a.min(b))
}

fn non_empty<T>(set: &[[T; 2]], what: &str) -> Result<()> {
    if set.is_empty() {
        Err(Error::InvalidParameter(format!("{what} set is empty")))
    } else {
        Ok(())
    }
}

/// Mean distance from each approximate point to its nearest reference point.
pub fn gd<T: Scalar>(approx: &[[T; 2]], reference: &[[T; 2]]) -> Result<T> {
    non_empty(approx, "approximation")?;
    non_empty(reference, "reference")?;
    let total = approx.iter().map(|x| nearest(x, reference)).fold(T::zero(), |a, b| a + b);
    Ok(total / T::from_count(approx.len()))
}

/// Mean distance from each reference point to its nearest approximate point.
pub fn igd<T: Scalar>(approx: &[[T; 2]], reference: &[[T; 2]]) -> Result<T> {
    gd(reference, approx)
}

/// The per-objective minimal points of a set: lowest first objective (ties
/// by second) and lowest second objective (ties by first).
pub fn extremes<T: Scalar>(set: &[[T; 2]]) -> Option<([T; 2], [T; 2])> {
    let f = set
        .iter()
        .min_by(|a, b| total_cmp(a[0], b[0]).then(total_cmp(a[1], b[1])))?;
    let l = set
        .iter()
        .min_by(|a, b| total_cmp(a[1], b[1]).then(total_cmp(a[0], b[0])))?;
    Some((*f, *l))
}

/// Distribution indicator
/// `(d_f + d_l + Σ|d_i − d̄|) / (d_f + d_l + (N−1) d̄)`.
///
/// The front is sorted by its first objective; `d_i` are consecutive gaps,
/// `d_f` runs from the first point to the reference point of lowest first
/// objective and `d_l` from the last point to the reference point of lowest
/// second objective. A zero denominator gives 0.
pub fn spread<T: Scalar>(front: &[[T; 2]], reference: &[[T; 2]]) -> Result<T> {
    if front.len() < 2 {
        return Err(Error::InvalidParameter("spread needs at least two points".into()));
    }
    let (ref_f, ref_l) = extremes(reference).ok_or_else(|| Error::InvalidParameter("reference set is empty".into()))?;
    let mut pts = front.to_vec();
    pts.sort_by(|a, b| total_cmp(a[0], b[0]).then(total_cmp(b[1], a[1])));
    let gaps: Vec<T> = pts.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let mean = gaps.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(gaps.len());
    let d_f = dist(&pts[0], &ref_f);
    let d_l = dist(&pts[pts.len() - 1], &ref_l);
    let dev = gaps.iter().map(|&g| (g - mean).abs()).fold(T::zero(), |a, b| a + b);
    let den = d_f + d_l + T::from_count(gaps.len()) * mean;
    if den == T::zero() {
        return Ok(T::zero());
    }
    Ok((d_f + d_l + dev) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    /// Objective units as they are (MW and dimensionless deviation).
    #[default]
    Raw,
    /// Both sets scaled by the reference set's per-objective range.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub gd: T,
    /// `None` for fronts with fewer than two points.
    pub spread: Option<T>,
    pub igd: T,
    pub n_approx: usize,
    pub n_reference: usize,
    pub mode: MetricMode,
}

/// Scales both sets by the reference's min-max range; objectives without
/// spread are left unscaled.
pub fn normalize_pair<T: Scalar>(approx: &[[T; 2]], reference: &[[T; 2]]) -> (Vec<[T; 2]>, Vec<[T; 2]>) {
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for p in reference {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = |p: &[T; 2]| {
        let mut o = *p;
        for k in 0..2 {
            let span = hi[k] - lo[k];
            if span > T::zero() {
                o[k] = (p[k] - lo[k]) / span;
            }
        }
        o
    };
    (approx.iter().map(scale).collect(), reference.iter().map(scale).collect())
}

pub fn evaluate_front<T: Scalar>(approx: &[[T; 2]], reference: &[[T; 2]], mode: MetricMode) -> Result<MetricReport<T>> {
    non_empty(approx, "approximation")?;
    non_empty(reference, "reference")?;
    let (a, r) = match mode {
        MetricMode::Raw => (approx.to_vec(), reference.to_vec()),
        MetricMode::Normalized => normalize_pair(approx, reference),
    };
    Ok(MetricReport {
        gd: gd(&a, &r)?,
        spread: if a.len() >= 2 { Some(spread(&a, &r)?) } else { None },
        igd: igd(&a, &r)?,
        n_approx: a.len(),
        n_reference: r.len(),
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gd_examples() {
        assert_eq!(gd(&[[1.0, 0.0]], &[[0.0, 0.0]]).unwrap(), 1.0);
        assert_eq!(gd(&[[0.0, 0.0], [3.0, 4.0]], &[[0.0, 0.0]]).unwrap(), 2.5);
        assert_eq!(gd(&[[1.0, 2.0]], &[[1.0, 2.0], [5.0, 5.0]]).unwrap(), 0.0);
        assert!(gd::<f64>(&[], &[[0.0, 0.0]]).is_err());
    }

    #[test]
    fn igd_examples() {
        let r = [[0.0, 0.0], [2.0, 0.0]];
        let a = [[1.0, 0.0]];
        assert_eq!(igd(&a, &r).unwrap(), 1.0);
        let a = [[1.0, 0.0], [2.0, 0.0]];
        assert_eq!(igd(&a, &r).unwrap(), 0.5);
        assert_eq!(gd(&a, &r).unwrap(), 0.5);
        // the two indicators differ once the sets do
        let a: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert_eq!(igd(&a, &r).unwrap(), 0.0);
        assert!((gd(&a, &r).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spread_examples() {
        let f = [[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]];
        assert_eq!(spread(&f, &f).unwrap(), 0.0);
        let g = [[0.0, 2.0], [1.5, 0.5], [2.0, 0.0]];
        let (a, b) = (1.5f64.hypot(1.5), 0.5f64.hypot(0.5));
        let m = (a + b) / 2.0;
        let expect = ((a - m).abs() + (b - m).abs()) / (2.0 * m);
        assert!((spread(&g, &f).unwrap() - expect).abs() < 1e-15);
        assert!(spread(&g, &f).unwrap() > 0.0);
        assert!(spread(&f[..1], &f).is_err());
        // unsorted input is sorted first
        let h = [[2.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
        assert_eq!(spread(&h, &f).unwrap(), 0.0);
    }

    #[test]
    fn spread_counts_boundary_offsets() {
        let f = [[1.0, 1.0], [2.0, 0.5]];
        let r = [[0.0, 2.0], [3.0, 0.0]];
        let d_f = 1.0f64.hypot(1.0);
        let d_l = 1.0f64.hypot(0.5);
        let g = 1.0f64.hypot(0.5);
        let expect = (d_f + d_l) / (d_f + d_l + g);
        assert!((spread(&f, &r).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn normalized_mode() {
        let r = [[10.0, 1.0], [20.0, 3.0]];
        let a = [[15.0, 2.0]];
        let m = evaluate_front(&a, &r, MetricMode::Normalized).unwrap();
        assert!((m.gd - 0.5f64.hypot(0.5)).abs() < 1e-15);
        assert_eq!(m.spread, None);
    }

    // independent restatement: full distance matrix, then row/column minima
    fn oracle(a: &[[f64; 2]], r: &[[f64; 2]]) -> (f64, f64) {
        let mut m = vec![vec![0.0; r.len()]; a.len()];
        for i in 0..a.len() {
            for j in 0..r.len() {
                let dx = a[i][0] - r[j][0];
                let dy = a[i][1] - r[j][1];
                m[i][j] = (dx * dx + dy * dy).sqrt();
            }
        }
        let gd: f64 = m.iter().map(|row| row.iter().cloned().fold(f64::MAX, f64::min)).sum::<f64>() / a.len() as f64;
        let mut igd = 0.0;
        for j in 0..r.len() {
            let mut best = f64::MAX;
            for row in &m {
                best = best.min(row[j]);
            }
            igd += best;
        }
        (gd, igd / r.len() as f64)
    }

    fn arb_set(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
        proptest::collection::vec((0.0f64..100.0, 0.0f64..10.0).prop_map(|(a, b)| [a, b]), 1..max)
    }

    proptest! {
        #[test]
        fn matches_distance_matrix(a in arb_set(200), r in arb_set(200)) {
            let (g, i) = oracle(&a, &r);
            let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1e-300);
            prop_assert!(rel(gd(&a, &r).unwrap(), g));
            prop_assert!(rel(igd(&a, &r).unwrap(), i));
        }

        #[test]
        fn self_distance_is_zero(a in arb_set(100)) {
            prop_assert_eq!(gd(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(igd(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn order_does_not_matter(a in arb_set(50), r in arb_set(50)) {
            let mut a2 = a.clone();
            a2.reverse();
            let mut r2 = r.clone();
            r2.rotate_left(r.len() / 2);
            prop_assert!((gd(&a, &r).unwrap() - gd(&a2, &r2).unwrap()).abs() <= 1e-12);
            prop_assert!((igd(&a, &r).unwrap() - igd(&a2, &r2).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn duplicate_reference_point_never_raises_gd(a in arb_set(50), r in arb_set(50), k in 0usize..50) {
            let mut r2 = r.clone();
            r2.push(r[k % r.len()]);
            prop_assert!(gd(&a, &r2).unwrap() <= gd(&a, &r).unwrap());
        }
    }
}
