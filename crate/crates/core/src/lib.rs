//! increlab: simulation and incremental-dissipativity analysis of nonlinear
//! state-space systems.
//!
//! The crate simulates one-port circuit and biophysical models, evaluates
//! dissipation inequalities (non-incremental, incremental and differential),
//! and searches for certified counterexamples to input-output monotonicity,
//! the property `<P_T(u1 - u2), P_T(H u1 - H u2)> >= 0` for all input pairs
//! and horizons.
//!
//! Modules:
//! * [`signals`]: sampled signals, truncation, L2 inner products.
//! * [`models`]: state-space models and the preset zoo.
//! * [`sim`]: fixed-step RK4 simulation and variational dynamics.
//! * [`dissipativity`]: supply rates, storages, dissipation checks.
//! * [`falsify`]: monotonicity falsification and gain lower bounds.
//! * [`optim`]: the Nelder-Mead engine behind the searches.

pub mod dissipativity;
pub mod error;
pub mod falsify;
pub mod models;
pub mod optim;
pub mod signals;
pub mod sim;

pub use error::{Error, Result};
pub use models::{zoo, Jacobians, StateSpaceModel, StaticMap};
pub use signals::{Signal, SignalKind};
pub use sim::{simulate, simulate_pair, simulate_variational, Trajectory, TrajectoryPair};
