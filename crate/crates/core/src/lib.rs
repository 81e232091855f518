//! Exact simulation, couplings and convergence bounds for the TCP
//! window-size process and two related piecewise deterministic Markov
//! processes (constant-rate TCP and a storage model).

// `!(a > b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod couplings;
pub mod error;
pub mod montecarlo;
pub mod processes;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use processes::{simulate_path, ModelKind, ModelSpec, Trajectory};
pub use rng::RngStream;
