//! Classical fidelity benchmarks and protocol simulation for remote state
//! preparation (RSP) of qubit ensembles.
//!
//! The library answers two questions about an RSP task in which Alice must
//! steer Bob toward target qubit states using c classical bits:
//!
//! * what average fidelity is achievable **without** shared entanglement
//!   (the classical benchmark), for finite ensembles, the uniform continuum
//!   of pure states, and fixed-radius mixed ensembles; and
//! * what a deterministic, POVM-based entanglement protocol delivers on the
//!   same ensembles, simulated from ideal or noisy two-qubit sources,
//!   including six-setting tomography of Bob's output.
//!
//! Modules follow that split: [`qstate`] holds the state algebra,
//! [`ensembles`] builds and serializes target sets, [`classical`] computes
//! thresholds, [`continuum`] bounds the all-pure-states ensemble,
//! [`protocol`] simulates the quantum protocol, and [`report`] lines both
//! sides up in comparison tables.

pub mod classical;
pub mod continuum;
pub mod ensembles;
pub mod error;
pub mod matrix;
pub mod protocol;
pub mod qstate;
pub mod report;

pub use error::{Result, RspError};
