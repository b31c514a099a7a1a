//! Power system case model.
//!
//! A [`NetworkCase`] is immutable once loaded. Optimizers never mutate it;
//! [`apply_controls`] hands back an independent copy with the control
//! settings substituted.

mod controls;
mod parse;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use controls::{apply_controls, control_bounds, ControlBounds, ControlVector};
pub use parse::{bundled_case, load_case, parse_case, BUNDLED_CASES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

impl BusKind {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(BusKind::Pq),
            2 => Some(BusKind::Pv),
            3 => Some(BusKind::Slack),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus<T> {
    pub id: usize,
    pub kind: BusKind,
    /// MW
    pub p_load: T,
    /// Mvar
    pub q_load: T,
    /// Fixed shunt conductance, MW at 1 p.u.
    pub g_shunt: T,
    /// Fixed shunt susceptance, Mvar at 1 p.u.
    pub b_shunt: T,
    pub v_min: T,
    pub v_max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub from_bus: usize,
    pub to_bus: usize,
    pub r: T,
    pub x: T,
    /// Total line charging susceptance, p.u.
    pub b_charging: T,
    /// MVA rating; `None` leaves the branch unchecked.
    pub s_max: Option<T>,
    /// Off-nominal turns ratio on the from side (1 for lines).
    pub ratio: T,
    /// Index into [`NetworkCase::transformers`] when the tap is a control.
    pub tap_index: Option<usize>,
}

impl<T: Scalar> Branch<T> {
    /// Series conductance `g = r / (r² + x²)`.
    pub fn conductance(&self) -> T {
        self.r / (self.r * self.r + self.x * self.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator<T> {
    pub bus: usize,
    /// Scheduled active output, MW (ignored at the slack).
    pub p_gen: T,
    /// Voltage setpoint, p.u.
    pub v_set: T,
    pub v_min: T,
    pub v_max: T,
    /// Mvar
    pub q_min: T,
    /// Mvar
    pub q_max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transformer<T> {
    /// Index into [`NetworkCase::branches`].
    pub branch: usize,
    pub t_min: T,
    pub t_max: T,
    pub step: T,
}

impl<T: Scalar> Transformer<T> {
    /// Number of tap steps between `t_min` and `t_max`.
    pub fn steps(&self) -> u32 {
        ((self.t_max - self.t_min) / self.step)
            .round()
            .to_u32()
            .unwrap_or(0)
    }

    pub fn ratio_at(&self, step: u32) -> T {
        // snap to 1e-9 so 0.9 + 5 * 0.01 prints as 0.95
        let r = self.t_min + T::from_count(step as usize) * self.step;
        (r * T::lit(1e9)).round() / T::lit(1e9)
    }

    /// Nearest tap step for a ratio, clamped to the valid range.
    pub fn nearest_step(&self, ratio: T) -> u32 {
        let k = ((ratio - self.t_min) / self.step).round();
        let k = k.max(T::zero()).min(T::from_count(self.steps() as usize));
        k.to_u32().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuntBank<T> {
    pub bus: usize,
    pub bank_count: u32,
    /// Mvar per bank at 1 p.u.
    pub mvar_per_bank: T,
    /// Banks currently switched in.
    pub in_service: u32,
}

impl<T: Scalar> ShuntBank<T> {
    pub fn mvar(&self) -> T {
        T::from_count(self.in_service as usize) * self.mvar_per_bank
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase<T> {
    pub base_mva: T,
    pub buses: Vec<Bus<T>>,
    pub branches: Vec<Branch<T>>,
    pub generators: Vec<Generator<T>>,
    pub transformers: Vec<Transformer<T>>,
    pub shunts: Vec<ShuntBank<T>>,
    bus_index: HashMap<usize, usize>,
}

impl<T: Scalar> NetworkCase<T> {
    /// Assembles and validates a case. Bus ids referenced by the other tables
    /// must exist; see [`NetworkCase::validate`] for the full list of checks.
    pub fn new(
        base_mva: T,
        buses: Vec<Bus<T>>,
        mut branches: Vec<Branch<T>>,
        generators: Vec<Generator<T>>,
        transformers: Vec<Transformer<T>>,
        shunts: Vec<ShuntBank<T>>,
    ) -> Result<Self> {
        let mut bus_index = HashMap::with_capacity(buses.len());
        for (i, b) in buses.iter().enumerate() {
            if bus_index.insert(b.id, i).is_some() {
                return Err(Error::Validation(format!("duplicate bus id {}", b.id)));
            }
        }
        for br in branches.iter_mut() {
            br.tap_index = None;
        }
        for (k, t) in transformers.iter().enumerate() {
            let br = branches.get_mut(t.branch).ok_or_else(|| {
                Error::Validation(format!("transformer {} references missing branch", k + 1))
            })?;
            if br.tap_index.is_some() {
                return Err(Error::Validation(format!(
                    "branch {}-{} carries two tap controls",
                    br.from_bus, br.to_bus
                )));
            }
            br.tap_index = Some(k);
        }
        let case = NetworkCase {
            base_mva,
            buses,
            branches,
            generators,
            transformers,
            shunts,
            bus_index,
        };
        case.validate()?;
        Ok(case)
    }

    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Position of a bus id in [`NetworkCase::buses`].
    pub fn index_of(&self, bus_id: usize) -> Option<usize> {
        self.bus_index.get(&bus_id).copied()
    }

    pub(crate) fn idx(&self, bus_id: usize) -> usize {
        self.bus_index[&bus_id]
    }

    pub fn slack_index(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated case has a slack bus")
    }

    /// Generator attached to each bus, by bus position.
    pub fn generator_at(&self) -> Vec<Option<usize>> {
        let mut at = vec![None; self.buses.len()];
        for (g, gen) in self.generators.iter().enumerate() {
            at[self.idx(gen.bus)] = Some(g);
        }
        at
    }

    pub fn load_bus_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BusKind::Pq)
            .map(|(i, _)| i)
    }

    pub fn total_load_mw(&self) -> T {
        self.buses.iter().map(|b| b.p_load).sum()
    }

    /// Checks every structural invariant of the case.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if !(self.base_mva > T::zero()) {
            return fail("base_mva must be positive".into());
        }
        if self.buses.is_empty() {
            return fail("case has no buses".into());
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 {
            return fail(format!("expected exactly one slack bus, found {slacks}"));
        }
        for b in &self.buses {
            if !(b.v_min < b.v_max) {
                return fail(format!("bus {}: v_min must be below v_max", b.id));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            let tag = format!("branch {} ({}-{})", k + 1, br.from_bus, br.to_bus);
            if br.from_bus == br.to_bus {
                return fail(format!("{tag}: from_bus equals to_bus"));
            }
            if self.index_of(br.from_bus).is_none() || self.index_of(br.to_bus).is_none() {
                return fail(format!("{tag}: references unknown bus"));
            }
            if br.x == T::zero() {
                return fail(format!("{tag}: zero series reactance"));
            }
            if let Some(s) = br.s_max {
                if !(s > T::zero()) {
                    return fail(format!("{tag}: rating must be positive"));
                }
            }
            if !(br.ratio > T::zero()) {
                return fail(format!("{tag}: ratio must be positive"));
            }
        }
        let mut gen_seen = vec![false; self.buses.len()];
        for gen in &self.generators {
            let Some(i) = self.index_of(gen.bus) else {
                return fail(format!("generator at unknown bus {}", gen.bus));
            };
            if self.buses[i].kind == BusKind::Pq {
                return fail(format!("generator at bus {} which is a PQ bus", gen.bus));
            }
            if gen_seen[i] {
                return fail(format!("more than one generator at bus {}", gen.bus));
            }
            gen_seen[i] = true;
            if !(gen.q_min < gen.q_max) {
                return fail(format!("generator at bus {}: q_min must be below q_max", gen.bus));
            }
            if !(gen.v_min < gen.v_max) {
                return fail(format!("generator at bus {}: v_min must be below v_max", gen.bus));
            }
        }
        for (i, b) in self.buses.iter().enumerate() {
            if b.kind != BusKind::Pq && !gen_seen[i] {
                return fail(format!("bus {} is slack/PV but has no generator", b.id));
            }
        }
        for (k, t) in self.transformers.iter().enumerate() {
            if !(t.t_min < t.t_max) {
                return fail(format!("transformer {}: t_min must be below t_max", k + 1));
            }
            if !(t.step > T::zero()) {
                return fail(format!("transformer {}: step must be positive", k + 1));
            }
            let n = (t.t_max - t.t_min) / t.step;
            if (n - n.round()).abs() > T::lit(1e-6) {
                return fail(format!(
                    "transformer {}: range is not an integer number of steps",
                    k + 1
                ));
            }
        }
        for s in &self.shunts {
            if self.index_of(s.bus).is_none() {
                return fail(format!("shunt at unknown bus {}", s.bus));
            }
            if s.bank_count < 1 {
                return fail(format!("shunt at bus {}: bank_count must be at least 1", s.bus));
            }
            if !(s.mvar_per_bank > T::zero()) {
                return fail(format!("shunt at bus {}: mvar_per_bank must be positive", s.bus));
            }
            if s.in_service > s.bank_count {
                return fail(format!("shunt at bus {}: more banks in service than installed", s.bus));
            }
        }
        self.check_connected()
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            let (f, t) = (self.idx(br.from_bus), self.idx(br.to_bus));
            adj[f].push(t);
            adj[t].push(f);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.slack_index()];
        seen[stack[0]] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(Error::Validation(format!(
                "bus {} is not connected to the slack bus",
                self.buses[i].id
            ))),
            None => Ok(()),
        }
    }
}
