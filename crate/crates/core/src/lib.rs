//! Stationary d-vine (s-vine) copula processes: pair copulas, Rosenblatt
//! recursions, Gaussian oracles, simulation and pseudo-maximum-likelihood
//! fitting.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inference;
pub mod linear_oracle;
pub mod paircopula;
pub mod process;
pub mod rosenblatt;
pub mod special;

pub use error::{Error, Result};
pub use inference::{FitReport, MarginFit, MarginKind, MarginalModel};
pub use linear_oracle::{KpacfKind, KpacfSpec};
pub use paircopula::{Family, NegativeRule, PairCopula, Rotation};
pub use process::{ExperimentRow, KpacfModel, SVineModel, SimulationPath};
pub use rosenblatt::{CopulaSequence, RosenblattWorkspace};
