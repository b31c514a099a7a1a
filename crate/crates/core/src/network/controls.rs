use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkCase;
use crate::scalar::Scalar;

/// Hybrid control vector: generator voltage setpoints (continuous), then
/// transformer tap positions and switched shunt bank counts (integer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector<T> {
    pub gen_v: Vec<T>,
    pub tap_steps: Vec<u32>,
    pub shunt_banks: Vec<u32>,
}

impl<T: Scalar> ControlVector<T> {
    pub fn dimension(&self) -> usize {
        self.gen_v.len() + self.tap_steps.len() + self.shunt_banks.len()
    }

    /// The settings currently stored in the case. Tap ratios are snapped to
    /// the nearest step.
    pub fn from_case(case: &NetworkCase<T>) -> Self {
        ControlVector {
            gen_v: case.generators.iter().map(|g| g.v_set).collect(),
            tap_steps: case
                .transformers
                .iter()
                .map(|t| t.nearest_step(case.branches[t.branch].ratio))
                .collect(),
            shunt_banks: case.shunts.iter().map(|s| s.in_service).collect(),
        }
    }

    /// Builds a vector from physical values laid out as
    /// `[V_G (p.u.).., tap ratio (p.u.).., shunt Q_C (Mvar)..]`.
    ///
    /// Tap ratios and Mvar values must sit on their step grid.
    pub fn from_physical(case: &NetworkCase<T>, values: &[T]) -> Result<Self> {
        let (ng, nt, nc) = (case.generators.len(), case.transformers.len(), case.shunts.len());
        if values.len() != ng + nt + nc {
            return Err(Error::Dimension {
                expected: ng + nt + nc,
                got: values.len(),
            });
        }
        let grid_tol = T::lit(1e-6);
        let mut tap_steps = Vec::with_capacity(nt);
        for (k, t) in case.transformers.iter().enumerate() {
            let ratio = values[ng + k];
            let pos = (ratio - t.t_min) / t.step;
            if (pos - pos.round()).abs() > grid_tol || pos.round() < T::zero() {
                return Err(Error::OutOfBounds {
                    index: ng + k,
                    message: format!("tap ratio {ratio} is not on the {} p.u. grid above {}", t.step, t.t_min),
                });
            }
            tap_steps.push(pos.round().to_u32().unwrap_or(u32::MAX));
        }
        let mut shunt_banks = Vec::with_capacity(nc);
        for (k, s) in case.shunts.iter().enumerate() {
            let q = values[ng + nt + k];
            let pos = q / s.mvar_per_bank;
            if (pos - pos.round()).abs() > grid_tol || pos.round() < T::zero() {
                return Err(Error::OutOfBounds {
                    index: ng + nt + k,
                    message: format!("{q} Mvar is not a whole number of {} Mvar banks", s.mvar_per_bank),
                });
            }
            shunt_banks.push(pos.round().to_u32().unwrap_or(u32::MAX));
        }
        let u = ControlVector {
            gen_v: values[..ng].to_vec(),
            tap_steps,
            shunt_banks,
        };
        control_bounds(case).check(&u)?;
        Ok(u)
    }

    /// Inverse of [`ControlVector::from_physical`].
    pub fn to_physical(&self, case: &NetworkCase<T>) -> Vec<T> {
        let mut out = self.gen_v.clone();
        out.extend(
            self.tap_steps
                .iter()
                .zip(&case.transformers)
                .map(|(&k, t)| t.ratio_at(k)),
        );
        out.extend(
            self.shunt_banks
                .iter()
                .zip(&case.shunts)
                .map(|(&k, s)| T::from_count(k as usize) * s.mvar_per_bank),
        );
        out
    }
}

/// Per-dimension search bounds. Continuous dimensions carry `(lower, upper)`
/// in p.u.; discrete dimensions carry the largest valid step index (the
/// lower end is always 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds<T> {
    pub gen_v: Vec<(T, T)>,
    pub tap_steps: Vec<u32>,
    pub shunt_banks: Vec<u32>,
}

impl<T: Scalar> ControlBounds<T> {
    pub fn dimension(&self) -> usize {
        self.gen_v.len() + self.tap_steps.len() + self.shunt_banks.len()
    }

    pub fn n_continuous(&self) -> usize {
        self.gen_v.len()
    }

    pub fn is_discrete(&self, j: usize) -> bool {
        j >= self.gen_v.len()
    }

    fn discrete_max(&self, j: usize) -> u32 {
        let k = j - self.gen_v.len();
        if k < self.tap_steps.len() {
            self.tap_steps[k]
        } else {
            self.shunt_banks[k - self.tap_steps.len()]
        }
    }

    pub fn lower(&self, j: usize) -> T {
        if self.is_discrete(j) {
            T::zero()
        } else {
            self.gen_v[j].0
        }
    }

    pub fn upper(&self, j: usize) -> T {
        if self.is_discrete(j) {
            T::from_count(self.discrete_max(j) as usize)
        } else {
            self.gen_v[j].1
        }
    }

    /// Flattens a control vector into the unified real coding used by the
    /// search operators: discrete positions become integral reals.
    pub fn to_genes(&self, u: &ControlVector<T>) -> Vec<T> {
        let mut g = u.gen_v.clone();
        g.extend(u.tap_steps.iter().map(|&k| T::from_count(k as usize)));
        g.extend(u.shunt_banks.iter().map(|&k| T::from_count(k as usize)));
        g
    }

    /// Decodes genes, clamping continuous values and rounding/clamping
    /// discrete ones.
    pub fn from_genes(&self, genes: &[T]) -> ControlVector<T> {
        debug_assert_eq!(genes.len(), self.dimension());
        let nc = self.gen_v.len();
        let nt = self.tap_steps.len();
        let gen_v = genes[..nc]
            .iter()
            .zip(&self.gen_v)
            .map(|(&v, &(lo, hi))| v.max(lo).min(hi))
            .collect();
        let snap = |v: T, max: u32| -> u32 {
            let r = v.round().max(T::zero()).min(T::from_count(max as usize));
            r.to_u32().unwrap_or(0)
        };
        let tap_steps = genes[nc..nc + nt]
            .iter()
            .zip(&self.tap_steps)
            .map(|(&v, &m)| snap(v, m))
            .collect();
        let shunt_banks = genes[nc + nt..]
            .iter()
            .zip(&self.shunt_banks)
            .map(|(&v, &m)| snap(v, m))
            .collect();
        ControlVector {
            gen_v,
            tap_steps,
            shunt_banks,
        }
    }

    /// Errors on the first element outside its bound (flat index reported).
    pub fn check(&self, u: &ControlVector<T>) -> Result<()> {
        if u.gen_v.len() != self.gen_v.len()
            || u.tap_steps.len() != self.tap_steps.len()
            || u.shunt_banks.len() != self.shunt_banks.len()
        {
            return Err(Error::Dimension {
                expected: self.dimension(),
                got: u.dimension(),
            });
        }
        for (j, (&v, &(lo, hi))) in u.gen_v.iter().zip(&self.gen_v).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::OutOfBounds {
                    index: j,
                    message: format!("voltage setpoint {v} outside [{lo}, {hi}]"),
                });
            }
        }
        let base = self.gen_v.len();
        let discrete = u.tap_steps.iter().chain(&u.shunt_banks);
        let maxes = self.tap_steps.iter().chain(&self.shunt_banks);
        for (k, (&v, &m)) in discrete.zip(maxes).enumerate() {
            if v > m {
                return Err(Error::OutOfBounds {
                    index: base + k,
                    message: format!("step {v} outside 0..={m}"),
                });
            }
        }
        Ok(())
    }
}

pub fn control_bounds<T: Scalar>(case: &NetworkCase<T>) -> ControlBounds<T> {
    ControlBounds {
        gen_v: case.generators.iter().map(|g| (g.v_min, g.v_max)).collect(),
        tap_steps: case.transformers.iter().map(|t| t.steps()).collect(),
        shunt_banks: case.shunts.iter().map(|s| s.bank_count).collect(),
    }
}

/// Returns a copy of `case` with the control settings of `u` substituted.
pub fn apply_controls<T: Scalar>(case: &NetworkCase<T>, u: &ControlVector<T>) -> Result<NetworkCase<T>> {
    control_bounds(case).check(u)?;
    let mut out = case.clone();
    for (g, &v) in out.generators.iter_mut().zip(&u.gen_v) {
        g.v_set = v;
    }
    for (t, &k) in case.transformers.iter().zip(&u.tap_steps) {
        out.branches[t.branch].ratio = t.ratio_at(k);
    }
    for (s, &k) in out.shunts.iter_mut().zip(&u.shunt_banks) {
        s.in_service = k;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::bundled_case;
    use proptest::prelude::*;

    fn ieee30() -> NetworkCase<f64> {
        bundled_case("ieee30").unwrap()
    }

    #[test]
    fn ieee30_bounds() {
        let b = control_bounds(&ieee30());
        assert_eq!(b.dimension(), 13);
        assert!(b.gen_v.iter().all(|&(lo, hi)| lo == 0.9 && hi == 1.1));
        assert_eq!(b.tap_steps, vec![20; 4]);
        assert_eq!(b.shunt_banks, vec![20; 3]);
    }

    #[test]
    fn ieee118_dimension() {
        let case: NetworkCase<f64> = bundled_case("ieee118").unwrap();
        assert_eq!(control_bounds(&case).dimension(), 78);
    }

    #[test]
    fn identity_controls_leave_case_unchanged() {
        let case = ieee30();
        let u = ControlVector::from_case(&case);
        assert_eq!(apply_controls(&case, &u).unwrap(), case);
    }

    #[test]
    fn tap_step_out_of_range_is_reported() {
        let case = ieee30();
        let mut u = ControlVector::from_case(&case);
        u.tap_steps[2] = 21;
        match apply_controls(&case, &u) {
            Err(Error::OutOfBounds { index, .. }) => assert_eq!(index, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn physical_round_trip() {
        let case = ieee30();
        let phys = [1.06, 1.043, 1.01, 1.01, 1.082, 1.071, 0.98, 0.97, 0.93, 0.97, 5.0, 19.0, 4.0];
        let u = ControlVector::from_physical(&case, &phys).unwrap();
        assert_eq!(u.tap_steps, vec![8, 7, 3, 7]);
        assert_eq!(u.shunt_banks, vec![5, 19, 4]);
        let back = u.to_physical(&case);
        for (a, b) in back.iter().zip(phys) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ControlVector::from_physical(&case, &phys[..12]).is_err());
        let mut off_grid = phys;
        off_grid[6] = 0.985;
        assert!(ControlVector::from_physical(&case, &off_grid).is_err());
    }

    fn arb_controls() -> impl Strategy<Value = ControlVector<f64>> {
        (
            proptest::collection::vec(0.9f64..=1.1, 6),
            proptest::collection::vec(0u32..=20, 4),
            proptest::collection::vec(0u32..=20, 3),
        )
            .prop_map(|(gen_v, tap_steps, shunt_banks)| ControlVector {
                gen_v,
                tap_steps,
                shunt_banks,
            })
    }

    proptest! {
        #[test]
        fn apply_is_pure_and_preserves_bounds(u in arb_controls()) {
            let case = ieee30();
            let a = apply_controls(&case, &u).unwrap();
            let b = apply_controls(&case, &u).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(control_bounds(&a), control_bounds(&case));
            for t in &a.transformers {
                let ratio = a.branches[t.branch].ratio;
                prop_assert!(ratio >= t.t_min - 1e-12 && ratio <= t.t_max + 1e-12);
                let k = (ratio - t.t_min) / t.step;
                prop_assert!((k - k.round()).abs() < 1e-9);
            }
        }

        #[test]
        fn genes_round_trip(u in arb_controls()) {
            let b = control_bounds(&ieee30());
            prop_assert_eq!(b.from_genes(&b.to_genes(&u)), u);
        }
    }
}
