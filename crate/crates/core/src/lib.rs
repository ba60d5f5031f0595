//! Link-availability inference and cooperative spectrum sensing for cognitive
//! radio networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`indicators`]: the no-cooperation Bayesian rule and the Laplace estimator.
//! * [`coop_single`]: one cooperative node and its four-way rule.
//! * [`pmf_algebra`]: subset indexing and joint/marginal pmf conversions.
//! * [`fusion`]: optimal and independent-node fusion of `K` nodes.
//! * [`robust`]: minimax fusion when only low-order marginals are known.
//! * [`geo`]: log-normal received-power model, neighborhoods and connectivity.
//! * [`harness`]: experiment drivers and CSV output used by the CLI.

pub mod coop_single;
pub mod error;
pub mod fusion;
pub mod geo;
pub mod harness;
pub mod indicators;
pub mod pmf_algebra;
pub mod robust;

pub use error::{Error, Result};
