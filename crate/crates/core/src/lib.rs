//! Rate regions and minimum communication cost for correlated sources routed
//! over a weighted network to multiple sinks.
//!
//! The crate is organised around the pipeline used by the `dirnet` CLI:
//!
//! 1. [`probkit`] evaluates every entropic constant exactly from a discrete
//!    joint pmf.
//! 2. [`netgraph`] turns the network into per-packet effective costs using
//!    exact minimum Steiner trees.
//! 3. [`regions`] generates the linear rate-region constraints for broadcast
//!    routing, power binning, the general auxiliary-variable region and the
//!    two-sink single-helper region.
//! 4. [`lpsolve`] minimises the total cost over a region.
//! 5. [`binsim`] runs the power-binning code at small blocklength to look at
//!    the empirical block error rate.

pub mod binsim;
pub mod error;
pub mod lpsolve;
pub mod netgraph;
pub mod probkit;
pub mod regions;
pub mod sinkset;

pub use error::{Error, Result};
pub use lpsolve::{minimize, vertex_oracle, LinearProgram, LpSolution, LpStatus};
pub use netgraph::{DemandMap, EffectiveCostTable, Network, NodeRole};
pub use probkit::{JointPmf, VarRole, VarSubset, Variable};
pub use regions::{LinearConstraint, Provenance, RateRegion, RateVar, SubsetFamily};
pub use sinkset::{PacketId, SinkSet};
