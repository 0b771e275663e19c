//! Exact extension of differentially private mechanisms on finite metric
//! spaces.
//!
//! A mechanism that is eps-private only on a hypothesis subset of its
//! input space extends to the whole space at cost 2*eps, agreeing exactly
//! with the original on the subset. This crate builds that extension for
//! finite spaces, where every quantity is an explicit table, and verifies
//! all of its guarantees by exhaustive computation: the privacy level is
//! the worst log-ratio over all dataset pairs and outputs, the normalizer
//! identities are checked pair by pair, and an independent probability-
//! domain oracle reproduces the construction.
//!
//! Modules:
//! - [`space`]: finite metric spaces (explicit, Hamming, graph node distance)
//! - [`graph`]: labeled graphs, node/edge distance, enumeration
//! - [`mechanism`]: probability tables, density views, privacy measurement
//! - [`extension`]: the scaled-minimum-density extension
//! - [`verifier`]: brute-force oracles and audit reports
//! - [`edge_density`]: bounded-degree edge-count release and the G(n,p)
//!   estimation experiment
//! - [`io`]: JSON wire formats

pub mod edge_density;
pub mod extension;
pub mod graph;
pub mod io;
pub mod mechanism;
pub mod space;
pub mod verifier;

pub use extension::{extend, extend_row, extend_with_base, ExtensionResult};
pub use graph::LabeledGraph;
pub use mechanism::{FiniteMechanism, PartialMechanism, PrivacyReport};
pub use space::{HypothesisSet, MetricSpace};
pub use verifier::{audit_extension, audit_set_level, AuditReport, PairCheck};
