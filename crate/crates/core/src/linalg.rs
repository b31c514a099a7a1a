use crate::scalar::Scalar;

/// Dense row-major square matrix, just enough for Newton steps.
#[derive(Debug, Clone)]
pub(crate) struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] += v;
    }

    /// Solves `A x = b` in place by Gaussian elimination with partial
    /// pivoting; `b` is overwritten by `x`. Returns `false` when a pivot
    /// vanishes. `A` is destroyed.
    pub fn solve_in_place(&mut self, b: &mut [T]) -> bool {
        let n = self.n;
        let a = &mut self.data;
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_count(n.max(1));
        if !(scale > T::zero()) {
            return n == 0;
        }
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if !(best > tiny) {
                return false;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                b.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == T::zero() {
                    continue;
                }
                a[r * n + col] = T::zero();
                for c in col + 1..n {
                    let v = a[col * n + c];
                    a[r * n + c] -= f * v;
                }
                let bc = b[col];
                b[r] -= f * bc;
            }
        }
        for col in (0..n).rev() {
            let mut s = b[col];
            for c in col + 1..n {
                s -= a[col * n + c] * b[c];
            }
            b[col] = s / a[col * n + col];
        }
        b.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut m = DenseMatrix::<f64>::zeros(3);
        let rows = [[0.0, 2.0, 1.0], [1.0, 1.0, 1.0], [4.0, -1.0, 3.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.add(i, j, v);
            }
        }
        let x = [1.0, -2.0, 3.0];
        let mut b: Vec<f64> = rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
        assert!(m.solve_in_place(&mut b));
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_detected() {
        let mut m = DenseMatrix::<f64>::zeros(2);
        m.add(0, 0, 1.0);
        m.add(0, 1, 2.0);
        m.add(1, 0, 2.0);
        m.add(1, 1, 4.0);
        assert!(!m.solve_in_place(&mut [1.0, 1.0]));
    }
}
