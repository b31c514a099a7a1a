//! AC power flow and the two dispatch objectives.

mod newton;
mod ybus;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{apply_controls, ControlVector, NetworkCase};
use crate::scalar::Scalar;

pub use newton::{solve, solve_with, BranchFlow, PowerFlowSolution, SolverOptions};
pub use ybus::{branch_admittance, build_ybus, AdmittanceMatrix, TwoPort};

/// Violation total assigned to evaluations whose power flow failed.
pub const NON_CONVERGENCE_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePair<T> {
    /// Active power loss, MW.
    pub p_loss: T,
    /// Load-bus voltage deviation, dimensionless.
    pub vd: T,
}

impl<T: Scalar> ObjectivePair<T> {
    pub fn new(p_loss: T, vd: T) -> Self {
        ObjectivePair { p_loss, vd }
    }

    pub fn as_array(&self) -> [T; 2] {
        [self.p_loss, self.vd]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport<T> {
    pub total: T,
    pub generator_q: T,
    pub load_voltage: T,
    pub branch_loading: T,
    pub non_convergence: bool,
}

impl<T: Scalar> ViolationReport<T> {
    pub fn is_feasible(&self) -> bool {
        !self.non_convergence && self.total == T::zero()
    }
}

/// Total active power loss in MW, summed over branches from the terminal
/// injections. On untapped branches each term equals
/// `g_k (V_i² + V_j² − 2 V_i V_j cos(δ_i − δ_j))`; on tapped branches the
/// terminal form keeps the total equal to generation minus load.
pub fn active_power_loss<T: Scalar>(sol: &PowerFlowSolution<T>, _case: &NetworkCase<T>) -> Result<T> {
    if !sol.converged {
        return Err(Error::NotConverged);
    }
    Ok(sol.branch_flows.iter().map(|f| f.loss()).sum())
}

/// Sum of `|V_k − 1| / (V_max − V_min)` over load (PQ) buses.
pub fn voltage_deviation<T: Scalar>(sol: &PowerFlowSolution<T>, case: &NetworkCase<T>) -> Result<T> {
    if !sol.converged {
        return Err(Error::NotConverged);
    }
    let mut vd = T::zero();
    for i in case.load_bus_indices() {
        let bus = &case.buses[i];
        let span = bus.v_max - bus.v_min;
        if span == T::zero() {
            return Err(Error::InvalidParameter(format!(
                "bus {} has equal voltage limits",
                bus.id
            )));
        }
        vd += (sol.v[i] - T::one()).abs() / span;
    }
    Ok(vd)
}

#[inline]
fn excess<T: Scalar>(value: T, lo: T, hi: T) -> T {
    (value - hi).max(lo - value).max(T::zero())
}

/// Normalized constraint excess for generator reactive limits, load-bus
/// voltages and branch ratings.
pub fn constraint_violation<T: Scalar>(sol: &PowerFlowSolution<T>, case: &NetworkCase<T>) -> ViolationReport<T> {
    if !sol.converged {
        return ViolationReport {
            total: T::lit(NON_CONVERGENCE_PENALTY),
            generator_q: T::zero(),
            load_voltage: T::zero(),
            branch_loading: T::zero(),
            non_convergence: true,
        };
    }
    let generator_q = case
        .generators
        .iter()
        .zip(&sol.q_gen)
        .map(|(g, &q)| excess(q, g.q_min, g.q_max) / (g.q_max - g.q_min))
        .fold(T::zero(), |a, b| a + b);
    let load_voltage = case
        .load_bus_indices()
        .map(|i| {
            let b = &case.buses[i];
            excess(sol.v[i], b.v_min, b.v_max) / (b.v_max - b.v_min)
        })
        .fold(T::zero(), |a, b| a + b);
    let branch_loading = case
        .branches
        .iter()
        .zip(&sol.branch_flows)
        .filter_map(|(br, f)| br.s_max.map(|s| (s, f.s_from().max(f.s_to()))))
        .map(|(s_max, s)| (s - s_max).max(T::zero()) / s_max)
        .fold(T::zero(), |a, b| a + b);
    let total = generator_q + load_voltage + branch_loading;
    let broken = !total.is_finite();
    ViolationReport {
        total: if broken { T::lit(NON_CONVERGENCE_PENALTY) } else { total },
        generator_q,
        load_voltage,
        branch_loading,
        non_convergence: broken,
    }
}

/// One real function evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation<T> {
    pub objectives: ObjectivePair<T>,
    pub violation: ViolationReport<T>,
    pub iterations: usize,
    pub max_mismatch: T,
}

/// Applies `u`, solves the power flow and scores both objectives and all
/// dependent-variable constraints. A failed power flow is reported through
/// the violation sentinel, with both objectives set to the same value so no
/// NaN leaks into sorting.
pub fn evaluate<T: Scalar>(case: &NetworkCase<T>, u: &ControlVector<T>) -> Result<Evaluation<T>> {
    let applied = apply_controls(case, u)?;
    Ok(evaluate_applied(&applied))
}

pub(crate) fn evaluate_applied<T: Scalar>(case: &NetworkCase<T>) -> Evaluation<T> {
    let sol = solve(case);
    let violation = constraint_violation(&sol, case);
    let objectives = match (active_power_loss(&sol, case), voltage_deviation(&sol, case)) {
        (Ok(p), Ok(vd)) if p.is_finite() && vd.is_finite() => ObjectivePair::new(p, vd),
        _ => ObjectivePair::new(T::lit(NON_CONVERGENCE_PENALTY), T::lit(NON_CONVERGENCE_PENALTY)),
    };
    Evaluation {
        objectives,
        violation,
        iterations: sol.iterations,
        max_mismatch: sol.max_mismatch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{bundled_case, parse_case};

    fn two_bus(load_mw: f64) -> NetworkCase<f64> {
        let text = format!(
            "[base_mva]\n100\n[bus]\n1 3 0 0 0 0\n2 1 {load_mw} 0 0 0\n[generator]\n1 0 1.0 -500 500\n[branch]\n1 2 0 0.1 0\n"
        );
        parse_case(&text, "two-bus").unwrap()
    }

    #[test]
    fn no_load_is_flat() {
        let case = two_bus(0.0);
        let sol = solve(&case);
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.v, vec![1.0, 1.0]);
        assert_eq!(sol.theta, vec![0.0, 0.0]);
        assert_eq!(active_power_loss(&sol, &case).unwrap(), 0.0);
    }

    /// Gauss-Seidel on the same two-bus case, written independently of the
    /// Newton solver.
    fn gauss_seidel_two_bus(p_load: f64, x: f64) -> (f64, f64) {
        use num_complex::Complex;
        let y = Complex::new(1.0, 0.0) / Complex::new(0.0, x);
        let (y22, y21) = (y, -y);
        let v1 = Complex::new(1.0, 0.0);
        let s2 = Complex::new(-p_load, 0.0);
        let mut v2 = Complex::new(1.0, 0.0);
        for _ in 0..10_000 {
            v2 = ((s2 / v2).conj() - y21 * v1) / y22;
        }
        (v2.norm(), v2.arg())
    }

    #[test]
    fn two_bus_matches_gauss_seidel() {
        let case = two_bus(100.0);
        let sol = solve(&case);
        assert!(sol.converged);
        let (v2, th2) = gauss_seidel_two_bus(1.0, 0.1);
        assert!((sol.v[1] - v2).abs() < 1e-7, "{} vs {}", sol.v[1], v2);
        assert!((sol.theta[1] - th2).abs() < 1e-7);
        // real-power balance across a lossless line: V1 V2 sin(θ1−θ2)/x = P
        let p = sol.v[1] * (0.0 - sol.theta[1]).sin() / 0.1;
        assert!((p - 1.0).abs() < 1e-6);
        assert!(active_power_loss(&sol, &case).unwrap().abs() < 1e-6);
    }

    #[test]
    fn voltage_deviation_single_bus() {
        let case = two_bus(0.0);
        let mut sol = solve(&case);
        sol.v[1] = 1.02;
        assert!((voltage_deviation(&sol, &case).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn load_voltage_violation_term() {
        let case = two_bus(0.0);
        let mut sol = solve(&case);
        assert_eq!(constraint_violation(&sol, &case).total, 0.0);
        sol.v[1] = 1.07;
        let r = constraint_violation(&sol, &case);
        assert!((r.load_voltage - 0.2).abs() < 1e-12);
        assert!((r.total - 0.2).abs() < 1e-12);
    }

    #[test]
    fn non_converged_is_sentinel() {
        let case = two_bus(0.0);
        let mut sol = solve(&case);
        sol.converged = false;
        let r = constraint_violation(&sol, &case);
        assert!(r.non_convergence);
        assert_eq!(r.total, 1e6);
        assert!(active_power_loss(&sol, &case).is_err());
        assert!(voltage_deviation(&sol, &case).is_err());
    }

    #[test]
    fn impossible_load_does_not_converge() {
        // far beyond the nose of a 0.1 p.u. line
        let case = two_bus(2000.0);
        let ev = evaluate_applied(&case);
        assert!(ev.violation.non_convergence);
        assert_eq!(ev.violation.total, 1e6);
        assert!(ev.objectives.p_loss.is_finite());
    }

    #[test]
    fn ieee30_power_balance_and_loss_accounting() {
        let case: NetworkCase<f64> = bundled_case("ieee30").unwrap();
        let sol = solve(&case);
        assert!(sol.converged);
        let y = build_ybus(&case).unwrap();
        let (p, q) = newton::injections(&y, &sol.v, &sol.theta);
        let gen_at = case.generator_at();
        for (i, bus) in case.buses.iter().enumerate() {
            let pg = match bus.kind {
                crate::network::BusKind::Slack => sol.p_slack,
                _ => gen_at[i].map(|g| case.generators[g].p_gen).unwrap_or(0.0),
            };
            assert!((p[i] * 100.0 - (pg - bus.p_load)).abs() < 1e-4);
            if bus.kind == crate::network::BusKind::Pq {
                assert!((q[i] * 100.0 + bus.q_load).abs() < 1e-4);
            }
        }
        let loss = active_power_loss(&sol, &case).unwrap();
        let gen: f64 = sol.p_gen(&case).iter().sum();
        assert!((loss - (gen - case.total_load_mw())).abs() < 1e-6 * 100.0);
        // untapped branches agree with the conductance form
        for (br, f) in case.branches.iter().zip(&sol.branch_flows) {
            if br.ratio != 1.0 {
                continue;
            }
            let (i, j) = (case.index_of(br.from_bus).unwrap(), case.index_of(br.to_bus).unwrap());
            let (vi, vj) = (sol.v[i], sol.v[j]);
            let g = br.conductance();
            let eq = g * (vi * vi + vj * vj - 2.0 * vi * vj * (sol.theta[i] - sol.theta[j]).cos()) * 100.0;
            assert!((eq - f.loss()).abs() < 1e-9, "{eq} vs {}", f.loss());
        }
    }
}
