use num_complex::Complex;

use crate::error::{Error, Result};
use crate::network::NetworkCase;
use crate::scalar::Scalar;

/// Sparse bus admittance matrix, one sorted row per bus.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix<T> {
    rows: Vec<Vec<(usize, Complex<T>)>>,
}

impl<T: Scalar> AdmittanceMatrix<T> {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex<T>)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or_else(|_| Complex::new(T::zero(), T::zero()))
    }

    /// Conductance `G_ij`.
    pub fn g(&self, i: usize, j: usize) -> T {
        self.get(i, j).re
    }

    /// Susceptance `B_ij`.
    pub fn b(&self, i: usize, j: usize) -> T {
        self.get(i, j).im
    }

    /// Number of unordered bus pairs with a stored off-diagonal entry.
    pub fn off_diagonal_pairs(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().filter(|&&(j, _)| j > i).count())
            .sum()
    }

    fn add(&mut self, i: usize, j: usize, y: Complex<T>) {
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => row[k].1 += y,
            Err(k) => row.insert(k, (j, y)),
        }
    }
}

/// `(y_ff, y_ft, y_tf, y_tt)`
pub type TwoPort<T> = (Complex<T>, Complex<T>, Complex<T>, Complex<T>);

/// Two-port admittances of a branch.
///
/// Standard pi model with the off-nominal ratio on the from side.
pub fn branch_admittance<T: Scalar>(
    r: T,
    x: T,
    b_charging: T,
    ratio: T,
) -> Option<TwoPort<T>> {
    let z = Complex::new(r, x);
    if z.norm_sqr() == T::zero() {
        return None;
    }
    let ys = Complex::new(T::one(), T::zero()) / z;
    let half_b = Complex::new(T::zero(), b_charging / T::lit(2.0));
    let tt = ys + half_b;
    let ff = tt / (ratio * ratio);
    let ft = -ys / ratio;
    Some((ff, ft, ft, tt))
}

pub fn build_ybus<T: Scalar>(case: &NetworkCase<T>) -> Result<AdmittanceMatrix<T>> {
    let n = case.bus_count();
    let mut y = AdmittanceMatrix {
        rows: vec![Vec::new(); n],
    };
    for (i, bus) in case.buses.iter().enumerate() {
        let ysh = Complex::new(bus.g_shunt, bus.b_shunt) / case.base_mva;
        if ysh.norm_sqr() > T::zero() {
            y.add(i, i, ysh);
        }
    }
    for s in &case.shunts {
        if s.in_service > 0 {
            let i = case.idx(s.bus);
            y.add(i, i, Complex::new(T::zero(), s.mvar() / case.base_mva));
        }
    }
    for (k, br) in case.branches.iter().enumerate() {
        let (ff, ft, tf, tt) = branch_admittance(br.r, br.x, br.b_charging, br.ratio)
            .ok_or(Error::ZeroImpedance { branch: k + 1 })?;
        let (f, t) = (case.idx(br.from_bus), case.idx(br.to_bus));
        y.add(f, f, ff);
        y.add(f, t, ft);
        y.add(t, f, tf);
        y.add(t, t, tt);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{bundled_case, parse_case};

    #[test]
    fn lossless_line_susceptance() {
        let text = "[base_mva]\n100\n[bus]\n1 3 0 0 0 0\n2 1 0 0 0 0\n[generator]\n1 0 1 -9 9\n[branch]\n1 2 0 0.1 0\n";
        let case: NetworkCase<f64> = parse_case(text, "t").unwrap();
        let y = build_ybus(&case).unwrap();
        assert!((y.b(0, 1) - 10.0).abs() < 1e-12);
        assert_eq!(y.g(0, 1), 0.0);
        assert!((y.b(0, 0) + 10.0).abs() < 1e-12);
    }

    #[test]
    fn shunts_only_on_diagonal() {
        let text = "[base_mva]\n100\n[bus]\n1 3 0 0 0 0\n[generator]\n1 0 1 -9 9\n[shunt]\n1 20 1 5\n";
        let case: NetworkCase<f64> = parse_case(text, "t").unwrap();
        let y = build_ybus(&case).unwrap();
        assert_eq!(y.size(), 1);
        assert_eq!(y.off_diagonal_pairs(), 0);
        assert!((y.b(0, 0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn ieee30_structure() {
        let case: NetworkCase<f64> = bundled_case("ieee30").unwrap();
        let y = build_ybus(&case).unwrap();
        assert_eq!(y.size(), 30);
        assert_eq!(y.off_diagonal_pairs(), 41);
        // symmetric for real taps
        for i in 0..30 {
            for &(j, v) in y.row(i) {
                let w = y.get(j, i);
                assert!((v - w).norm() < 1e-12);
            }
        }
    }
}
