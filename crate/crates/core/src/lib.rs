//! Attack-graph / IDS integration lifecycle.
//!
//! The crate couples a signature-and-tree network intrusion detector with
//! host-based attack graphs in three ways: graphs generated from the
//! detector's alerts instead of the full vulnerability inventory, a
//! path-existence feature injected into detector training, and a post-hoc
//! rule that flips attack predictions lacking a supporting path back to
//! benign. A lifecycle state machine iterates these couplings over flow
//! batches, and an experiment harness sweeps the knobs (noise, graph
//! variants, data volume, feature sets, tree settings) into CSV/SVG reports.

pub mod anova;
pub mod chart;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod graph;
pub mod integrate;
pub mod lifecycle;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod threat;
pub mod tree;

pub use error::{Error, Result};
pub use flow::{ClassLabel, Dataset, FlowRecord, Protocol};
pub use graph::{AttackGraph, AttackPath, EdgeProvenance};
pub use matrix::Matrix;
pub use metrics::{Metrics, MetricsDelta};
pub use threat::{Alert, NetworkInventory, SignatureRule, VulnDatabase};
pub use tree::{DecisionTreeModel, TreeHyperparams};
