//! Multi-objective optimal reactive power dispatch.
//!
//! The crate chains four stages:
//!
//! * [`network`] and [`powerflow`]: case model, Newton-Raphson AC power
//!   flow, active power loss and load-bus voltage deviation objectives;
//! * [`moea`]: a Pareto-domination evolutionary algorithm whose differential
//!   evolution offspring are screened by a KNN classifier before the real
//!   (power flow) evaluation;
//! * [`decision`]: fuzzy c-means clustering of the front and grey relational
//!   projection to pick one best compromise solution per preference cluster;
//! * [`metrics`]: GD, spread and IGD against a weighted-sum reference front.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix it
//! to `f64`, which is what the command-line tool uses.

pub mod decision;
pub mod error;
mod linalg;
pub mod metrics;
pub mod moea;
pub mod network;
pub mod powerflow;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Case = network::NetworkCase<f64>;
pub type Controls = network::ControlVector<f64>;
pub type Bounds = network::ControlBounds<f64>;
pub type Solution = powerflow::PowerFlowSolution<f64>;
pub type Objectives = powerflow::ObjectivePair<f64>;
pub type Params = moea::MoeaParams<f64>;
pub type Front = moea::ParetoFront<f64>;
pub type Report = decision::BcsReport<f64>;
