use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::ybus::{branch_admittance, build_ybus, AdmittanceMatrix};
use crate::linalg::DenseMatrix;
use crate::network::{BusKind, NetworkCase};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions<T> {
    /// Largest acceptable |ΔP|, |ΔQ| in p.u.
    pub tolerance: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tolerance: T::lit(1e-6),
            max_iter: 30,
        }
    }
}

/// Complex power at both ends of a branch, MW / Mvar, flowing into the branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchFlow<T> {
    pub p_from: T,
    pub q_from: T,
    pub p_to: T,
    pub q_to: T,
}

impl<T: Scalar> BranchFlow<T> {
    pub fn s_from(&self) -> T {
        self.p_from.hypot(self.q_from)
    }

    pub fn s_to(&self) -> T {
        self.p_to.hypot(self.q_to)
    }

    /// Active power consumed by the branch, MW.
    pub fn loss(&self) -> T {
        self.p_from + self.p_to
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowSolution<T> {
    /// Voltage magnitude per bus, p.u.
    pub v: Vec<T>,
    /// Voltage angle per bus, radians.
    pub theta: Vec<T>,
    /// Reactive output per generator, Mvar.
    pub q_gen: Vec<T>,
    /// Slack active output, MW.
    pub p_slack: T,
    pub branch_flows: Vec<BranchFlow<T>>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest bus power mismatch at the returned state, p.u.
    pub max_mismatch: T,
}

impl<T: Scalar> PowerFlowSolution<T> {
    /// Active output per generator, MW (slack output is solved for).
    pub fn p_gen(&self, case: &NetworkCase<T>) -> Vec<T> {
        let slack = case.buses[case.slack_index()].id;
        case.generators
            .iter()
            .map(|g| if g.bus == slack { self.p_slack } else { g.p_gen })
            .collect()
    }
}

/// Bus power injections `P_i + jQ_i` (p.u.) for the given state.
pub(crate) fn injections<T: Scalar>(y: &AdmittanceMatrix<T>, v: &[T], theta: &[T]) -> (Vec<T>, Vec<T>) {
    let n = y.size();
    let mut p = vec![T::zero(); n];
    let mut q = vec![T::zero(); n];
    for i in 0..n {
        let (mut pi, mut qi) = (T::zero(), T::zero());
        for &(j, yij) in y.row(i) {
            let (s, c) = (theta[i] - theta[j]).sin_cos();
            pi += v[j] * (yij.re * c + yij.im * s);
            qi += v[j] * (yij.re * s - yij.im * c);
        }
        p[i] = v[i] * pi;
        q[i] = v[i] * qi;
    }
    (p, q)
}

/// Newton-Raphson power flow in polar coordinates from a flat start.
///
/// Singular Jacobians and non-finite iterates end the iteration with
/// `converged = false`; nothing panics.
pub fn solve<T: Scalar>(case: &NetworkCase<T>) -> PowerFlowSolution<T> {
    solve_with(case, &SolverOptions::default())
}

pub fn solve_with<T: Scalar>(case: &NetworkCase<T>, opts: &SolverOptions<T>) -> PowerFlowSolution<T> {
    let n = case.bus_count();
    let base = case.base_mva;
    let gen_at = case.generator_at();

    let mut v = vec![T::one(); n];
    let mut theta = vec![T::zero(); n];
    let mut p_spec = vec![T::zero(); n];
    let mut q_spec = vec![T::zero(); n];
    for (i, bus) in case.buses.iter().enumerate() {
        let pg = gen_at[i].map(|g| case.generators[g].p_gen).unwrap_or(T::zero());
        p_spec[i] = (pg - bus.p_load) / base;
        q_spec[i] = -bus.q_load / base;
        if bus.kind != BusKind::Pq {
            v[i] = case.generators[gen_at[i].expect("validated")].v_set;
        }
    }

    let Ok(y) = build_ybus(case) else {
        return finish(case, None, v, theta, false, 0, T::infinity());
    };

    // unknown layout: theta of every non-slack bus, then V of every PQ bus
    let mut theta_col = vec![usize::MAX; n];
    let mut v_col = vec![usize::MAX; n];
    let mut m = 0;
    for (i, bus) in case.buses.iter().enumerate() {
        if bus.kind != BusKind::Slack {
            theta_col[i] = m;
            m += 1;
        }
    }
    for (i, bus) in case.buses.iter().enumerate() {
        if bus.kind == BusKind::Pq {
            v_col[i] = m;
            m += 1;
        }
    }

    let mut jac = DenseMatrix::zeros(m);
    let mut rhs = vec![T::zero(); m];
    let mut iterations = 0;
    let mut converged = false;
    let mut max_mismatch;

    loop {
        let (p, q) = injections(&y, &v, &theta);
        max_mismatch = T::zero();
        for i in 0..n {
            if theta_col[i] != usize::MAX {
                let d = p[i] - p_spec[i];
                rhs[theta_col[i]] = -d;
                max_mismatch = max_mismatch.max(d.abs());
            }
            if v_col[i] != usize::MAX {
                let d = q[i] - q_spec[i];
                rhs[v_col[i]] = -d;
                max_mismatch = max_mismatch.max(d.abs());
            }
        }
        if !max_mismatch.is_finite() {
            break;
        }
        if max_mismatch <= opts.tolerance {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }

        jac.fill_zero();
        for i in 0..n {
            let (ti, vi) = (theta_col[i], v_col[i]);
            if ti == usize::MAX {
                continue;
            }
            for &(j, yij) in y.row(i) {
                let (g, b) = (yij.re, yij.im);
                if j == i {
                    jac.add(ti, ti, -q[i] - b * v[i] * v[i]);
                    if vi != usize::MAX {
                        jac.add(ti, vi, p[i] / v[i] + g * v[i]);
                        jac.add(vi, ti, p[i] - g * v[i] * v[i]);
                        jac.add(vi, vi, q[i] / v[i] - b * v[i]);
                    }
                    continue;
                }
                let (s, c) = (theta[i] - theta[j]).sin_cos();
                let (tj, vj) = (theta_col[j], v_col[j]);
                let a = g * s - b * c;
                let bb = g * c + b * s;
                if tj != usize::MAX {
                    jac.add(ti, tj, v[i] * v[j] * a);
                    if vi != usize::MAX {
                        jac.add(vi, tj, -v[i] * v[j] * bb);
                    }
                }
                if vj != usize::MAX {
                    jac.add(ti, vj, v[i] * bb);
                    if vi != usize::MAX {
                        jac.add(vi, vj, v[i] * a);
                    }
                }
            }
        }
        if !jac.solve_in_place(&mut rhs) {
            break;
        }
        for i in 0..n {
            if theta_col[i] != usize::MAX {
                theta[i] += rhs[theta_col[i]];
            }
            if v_col[i] != usize::MAX {
                v[i] += rhs[v_col[i]];
            }
        }
        iterations += 1;
    }

    finish(case, Some(&y), v, theta, converged, iterations, max_mismatch)
}

fn finish<T: Scalar>(
    case: &NetworkCase<T>,
    y: Option<&AdmittanceMatrix<T>>,
    v: Vec<T>,
    theta: Vec<T>,
    converged: bool,
    iterations: usize,
    max_mismatch: T,
) -> PowerFlowSolution<T> {
    let base = case.base_mva;
    let slack = case.slack_index();
    let (p, q) = match y {
        Some(y) => injections(y, &v, &theta),
        None => (vec![T::nan(); v.len()], vec![T::nan(); v.len()]),
    };
    let q_gen = case
        .generators
        .iter()
        .map(|g| {
            let i = case.idx(g.bus);
            q[i] * base + case.buses[i].q_load
        })
        .collect();
    let p_slack = p[slack] * base + case.buses[slack].p_load;

    let branch_flows = case
        .branches
        .iter()
        .map(|br| {
            let (f, t) = (case.idx(br.from_bus), case.idx(br.to_bus));
            let vf = Complex::from_polar(v[f], theta[f]);
            let vt = Complex::from_polar(v[t], theta[t]);
            match branch_admittance(br.r, br.x, br.b_charging, br.ratio) {
                Some((ff, ft, tf, tt)) => {
                    let sf = vf * (ff * vf + ft * vt).conj() * base;
                    let st = vt * (tf * vf + tt * vt).conj() * base;
                    BranchFlow {
                        p_from: sf.re,
                        q_from: sf.im,
                        p_to: st.re,
                        q_to: st.im,
                    }
                }
                None => BranchFlow {
                    p_from: T::nan(),
                    q_from: T::nan(),
                    p_to: T::nan(),
                    q_to: T::nan(),
                },
            }
        })
        .collect();

    PowerFlowSolution {
        v,
        theta,
        q_gen,
        p_slack,
        branch_flows,
        converged,
        iterations,
        max_mismatch,
    }
}
