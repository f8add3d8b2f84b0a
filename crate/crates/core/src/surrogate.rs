//! Linear per-path execution-time estimate and the depth-indexed table of
//! fitted model parameters.
//!
//! A path of depth `d` with `t` taken branches is estimated to cost
//! `sigma + delta * d + gamma * t` cycles. The whole-tree cost is the
//! constant offset plus the maximum of the per-path terms over all leaves;
//! the arg-max leaf is the estimated worst-case path.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::{DecisionTree, Labeling, NodeId, PathStats};

/// Parameters of the linear path-cost estimate, fitted for trees of one
/// target depth.
///
/// `delta` and `gamma` are non-negative for every fitted model shipped with
/// the crate; the optimizer's optimality guarantee assumes
/// `delta + gamma >= delta >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    #[serde(rename = "depth")]
    pub target_depth: usize,
    pub sigma: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl SurrogateModel {
    pub fn new(target_depth: usize, sigma: f64, delta: f64, gamma: f64) -> Self {
        SurrogateModel { target_depth, sigma, delta, gamma }
    }

    /// Combined per-taken-edge cost in the untaken/taken reformulation.
    pub fn pi(&self) -> f64 {
        self.delta + self.gamma
    }

    /// The path-dependent part of the estimate: `delta * d + gamma * t`.
    ///
    /// Shared by every cost evaluation in the crate so that greedy, brute
    /// force, and reporting all agree bit for bit.
    #[inline]
    pub fn path_value(&self, depth: usize, taken: usize) -> f64 {
        self.delta * depth as f64 + self.gamma * taken as f64
    }

    /// Estimated cycles for one path: `sigma + delta * d + gamma * t`.
    pub fn estimate_path(&self, stats: &PathStats) -> f64 {
        self.sigma + self.path_value(stats.depth, stats.taken)
    }

    /// Estimated worst-case cost of the whole tree under `labeling`, plus the
    /// leaf attaining it (lowest id on ties).
    ///
    /// The constant offset is added exactly once, at the root.
    pub fn tree_cost(
        &self,
        tree: &DecisionTree,
        labeling: &Labeling,
    ) -> Result<(f64, NodeId), Error> {
        let stats = tree.enumerate_paths(labeling)?;
        let mut best_value = f64::NEG_INFINITY;
        let mut best_leaf = tree.root();
        for s in &stats {
            let value = self.path_value(s.depth, s.taken);
            if value > best_value {
                best_value = value;
                best_leaf = s.leaf;
            }
        }
        Ok((self.sigma + best_value, best_leaf))
    }
}

/// Fitted models sorted by strictly increasing target depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelTable {
    models: Vec<SurrogateModel>,
}

impl ModelTable {
    pub fn new(models: Vec<SurrogateModel>) -> Result<Self, Error> {
        if models.is_empty() {
            return Err(Error::EmptyTable);
        }
        for pair in models.windows(2) {
            if pair[0].target_depth >= pair[1].target_depth {
                return Err(Error::InvalidTable {
                    reason: format!(
                        "target depths must be strictly increasing ({} then {})",
                        pair[0].target_depth, pair[1].target_depth
                    ),
                });
            }
        }
        Ok(ModelTable { models })
    }

    pub fn models(&self) -> &[SurrogateModel] {
        &self.models
    }

    /// Model for the largest target depth not exceeding `depth`, clamped to
    /// the first entry below the table and to the last entry above it.
    pub fn select_for_depth(&self, depth: usize) -> &SurrogateModel {
        let mut chosen = &self.models[0];
        for model in &self.models {
            if model.target_depth <= depth {
                chosen = model;
            } else {
                break;
            }
        }
        chosen
    }

    /// Model selection keyed by the tree's actual depth.
    pub fn select_for_tree(&self, tree: &DecisionTree) -> &SurrogateModel {
        self.select_for_depth(tree.depth())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct File<'a> {
            models: &'a [SurrogateModel],
        }
        let mut out = serde_json::to_string_pretty(&File { models: &self.models })
            .expect("model table serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct File {
            models: Vec<SurrogateModel>,
        }
        let file: File = serde_json::from_str(text)?;
        ModelTable::new(file.models)
    }
}

impl Default for ModelTable {
    /// The built-in table: models fitted for even target depths 2 through 18.
    /// The depth-2 row has no usable depth variation in its source data, so
    /// its per-edge cost is fixed at 0.
    fn default() -> Self {
        ModelTable::new(vec![
            SurrogateModel::new(2, 269.75, 0.0, 5.00),
            SurrogateModel::new(4, 226.06, 28.84, 3.54),
            SurrogateModel::new(6, 239.40, 25.17, 5.81),
            SurrogateModel::new(8, 251.84, 25.62, 8.78),
            SurrogateModel::new(10, 235.53, 27.38, 8.76),
            SurrogateModel::new(12, 245.21, 26.45, 11.06),
            SurrogateModel::new(14, 240.58, 26.19, 11.04),
            SurrogateModel::new(16, 241.08, 27.60, 9.56),
            SurrogateModel::new(18, 232.68, 27.04, 10.99),
        ])
        .expect("built-in table is well formed")
    }
}
