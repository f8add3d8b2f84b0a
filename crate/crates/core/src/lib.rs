//! Estimation and minimization of worst-case execution time for binary
//! decision-tree inference code.
//!
//! The crate models a tree's if-else realization as a taken/untaken labeling
//! of its edges, estimates a path's cycle count linearly from its depth and
//! taken-branch count, constructs cost-minimizing (and cost-maximizing)
//! labelings, fits the estimate's parameters from per-path timing samples,
//! and emits C source realizing a chosen labeling.
//!
//! Multi-tree and search-space loops run on rayon by default; build with
//! `--no-default-features` for a fully sequential core.

pub mod codegen;
pub mod error;
pub mod fitting;
pub mod optimizer;
pub mod oracle;
pub mod surrogate;
pub mod synthesis;
pub mod tree;

pub use error::Error;
pub use fitting::{FitResult, PathSample};
pub use optimizer::{LabelingStrategy, Objective};
pub use oracle::CostModelConfig;
pub use surrogate::{ModelTable, SurrogateModel};
pub use synthesis::GenConfig;
pub use tree::{ChildSide, DecisionTree, Labeling, Node, NodeId, PathStats};
