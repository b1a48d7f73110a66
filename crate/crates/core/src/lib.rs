//! Modeling and fault-diagnosability analysis of multi-hop control networks.
//!
//! A multi-hop control network (MCN) is an LTI plant whose actuation and
//! sensing data travel over TDMA-scheduled, weighted, multi-path wireless
//! relay networks. This crate models the full tuple (plant, radio graphs,
//! per-component schedules and weights, slot timing), derives the network
//! blocks' FIR transfer functions and state-space realizations, and decides
//! whether failures or attacks on communication nodes can be detected and
//! isolated:
//!
//! - [`model`] — domain types, configuration ingestion, routing-shape
//!   validation;
//! - [`dynamics`] — FIR coefficients of the network blocks, shift-register
//!   realizations, zero-order-hold plant discretization, block cascade;
//! - [`structured`] — structured-graph representations of the blocks, the
//!   full cascade, and the per-schedule analysis graph with its copy maps;
//! - [`linking`] — vertex-disjoint path (linking) engines, structural
//!   observability, directed vertex connectivity;
//! - [`fdi`] — the diagnosability decision procedures, scenario enumeration,
//!   and the cross-check between the two equivalent graph criteria;
//! - [`oracle`] — numeric ground truth: simulation of the fault-augmented
//!   cascade and generic-rank probing of the fault-to-output transfer matrix;
//! - [`synth`] — seeded random instance generation for property harnesses
//!   and benchmarks.
//!
//! Scenario sweeps and oracle trials run on rayon when the `parallel`
//! feature (default) is enabled; sequential variants are always available
//! and produce identical output.

pub mod config;
pub mod dynamics;
pub mod fdi;
pub mod linking;
pub mod model;
pub mod oracle;
pub mod structured;
pub mod synth;

pub use config::{load_mcn, load_mcn_str, ConfigError};
pub use model::{FaultNode, Link, Mcn, ModelError, NodeId, Plant, PlantKind, Side};
