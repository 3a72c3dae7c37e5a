//! Secure connectivity of the Eschenauer–Gligor key predistribution scheme
//! over unreliable links.
//!
//! A network of `n` sensors draws key rings of size `K` from a pool of `P`
//! keys; two sensors can talk securely when their rings overlap *and* the
//! channel between them is up. The channel is either an independent on/off
//! link (probability `alpha`) or a disk of radius `rho` on the unit torus.
//!
//! - [`model`]: closed-form edge, isolation and threshold quantities.
//! - [`sampling`] and [`graph`]: random instances of the intersection graphs.
//! - [`analysis`]: connectivity and isolated-node queries.
//! - [`oracle`]: exact rational enumeration and inequality verifiers.
//! - [`experiment`]: reproducible Monte Carlo sweeps.
//! - [`report`]: CSV / JSON serialization of sweep and probe results.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
