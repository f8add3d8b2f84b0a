//! A deliberately simple per-path cycle-count model, so the full
//! generate / time / fit / validate pipeline runs without an external
//! static analyzer.
//!
//! Each evaluated node costs a fixed number of cycles. A taken branch adds a
//! flush penalty, plus a miss latency when the branch target's code block
//! lands on a different instruction-cache line than the branch itself. Code
//! blocks are laid out in the emitter's order (each node's block followed by
//! its untaken subtree, then its taken subtree), and a cache line holds a
//! fixed number of blocks. This is a documented toy model, not a timing
//! analysis; its one job is producing plausible, deterministic per-path
//! cycle counts whose structure the linear estimate can fit.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fitting::PathSample;
use crate::optimizer::LabelingStrategy;
use crate::surrogate::ModelTable;
use crate::tree::{DecisionTree, Labeling, Node, NodeId};

/// Parameters of the cycle-count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModelConfig {
    /// Cycles per inner node evaluated on the path.
    pub node_base_cycles: f64,
    /// Pipeline-flush cost per taken branch.
    pub taken_penalty_cycles: f64,
    /// Node code blocks per instruction-cache line.
    pub line_size_nodes: usize,
    /// Added when a taken branch crosses a cache-line boundary.
    pub miss_cycles: f64,
    /// Call/return overhead added once per path.
    pub constant_overhead: f64,
}

impl Default for CostModelConfig {
    fn default() -> Self {
        CostModelConfig {
            node_base_cycles: 25.0,
            taken_penalty_cycles: 6.0,
            line_size_nodes: 2,
            miss_cycles: 5.0,
            constant_overhead: 235.0,
        }
    }
}

impl CostModelConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            ("node_base_cycles", self.node_base_cycles),
            ("taken_penalty_cycles", self.taken_penalty_cycles),
            ("miss_cycles", self.miss_cycles),
            ("constant_overhead", self.constant_overhead),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidConfig {
                    reason: format!("{name} must be non-negative, got {value}"),
                });
            }
        }
        if self.line_size_nodes < 1 {
            return Err(Error::InvalidConfig {
                reason: "line_size_nodes must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let config: CostModelConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

/// Code-block position of every node in emission order: a node's block,
/// then its untaken subtree, then its taken subtree.
fn layout_positions(tree: &DecisionTree, labeling: &Labeling) -> Vec<usize> {
    let mut position = vec![0usize; tree.len()];
    let mut counter = 0usize;
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        position[id] = counter;
        counter += 1;
        if let Node::Inner { left, right, .. } = tree.node(id) {
            let taken = labeling.taken_side(id).expect("validated domain");
            let (untaken_child, taken_child) = match taken {
                crate::tree::ChildSide::Left => (*right, *left),
                crate::tree::ChildSide::Right => (*left, *right),
            };
            stack.push(taken_child);
            stack.push(untaken_child);
        }
    }
    position
}

/// Cycle count for the root-to-`leaf` path under `labeling`.
pub fn path_cycles(
    tree: &DecisionTree,
    labeling: &Labeling,
    leaf: NodeId,
    config: &CostModelConfig,
) -> Result<f64, Error> {
    labeling.validate_for(tree)?;
    config.validate()?;
    let path = tree.path_to(leaf).ok_or(Error::NotALeaf { node: leaf })?;
    let position = layout_positions(tree, labeling);
    let depth = path.len() - 1;
    let mut extra = 0.0;
    for pair in path.windows(2) {
        let (node, child) = (pair[0], pair[1]);
        if labeling.taken_child(tree, node) == Some(child) {
            extra += config.taken_penalty_cycles;
            if position[node] / config.line_size_nodes != position[child] / config.line_size_nodes {
                extra += config.miss_cycles;
            }
        }
    }
    Ok(config.constant_overhead + config.node_base_cycles * depth as f64 + extra)
}

/// One sample per leaf of one tree, ordered by leaf id. Positions are
/// computed once per tree.
fn tree_samples(
    tree: &DecisionTree,
    labeling: &Labeling,
    config: &CostModelConfig,
) -> Result<Vec<PathSample>, Error> {
    labeling.validate_for(tree)?;
    let position = layout_positions(tree, labeling);
    let mut rows: Vec<(NodeId, PathSample)> = Vec::new();
    let mut stack = vec![(tree.root(), 0usize, 0usize, 0.0f64)];
    while let Some((id, depth, taken, extra)) = stack.pop() {
        match tree.node(id) {
            Node::Leaf { .. } => {
                let wcet =
                    config.constant_overhead + config.node_base_cycles * depth as f64 + extra;
                rows.push((id, PathSample::new(depth, taken, wcet)));
            }
            Node::Inner { left, right, .. } => {
                for &child in [left, right] {
                    let is_taken = labeling.taken_child(tree, id) == Some(child);
                    let mut child_extra = extra;
                    let mut child_taken = taken;
                    if is_taken {
                        child_taken += 1;
                        child_extra += config.taken_penalty_cycles;
                        if position[id] / config.line_size_nodes
                            != position[child] / config.line_size_nodes
                        {
                            child_extra += config.miss_cycles;
                        }
                    }
                    stack.push((child, depth + 1, child_taken, child_extra));
                }
            }
        }
    }
    rows.sort_by_key(|(leaf, _)| *leaf);
    Ok(rows.into_iter().map(|(_, sample)| sample).collect())
}

/// Labels every tree with `strategy` and collects one sample per leaf,
/// concatenated in tree order then leaf order.
pub fn collect_samples(
    trees: &[DecisionTree],
    strategy: LabelingStrategy,
    table: &ModelTable,
    config: &CostModelConfig,
) -> Result<Vec<PathSample>, Error> {
    config.validate()?;
    #[cfg(feature = "parallel")]
    {
        // Scheduling a single tree is pure overhead.
        if trees.len() > 1 {
            use rayon::prelude::*;
            let per_tree: Result<Vec<Vec<PathSample>>, Error> = trees
                .par_iter()
                .map(|tree| {
                    let labeling = strategy.label(tree, table)?;
                    tree_samples(tree, &labeling, config)
                })
                .collect();
            return Ok(per_tree?.into_iter().flatten().collect());
        }
    }
    collect_samples_seq(trees, strategy, table, config)
}

/// Single-threaded [`collect_samples`]; identical output.
pub fn collect_samples_seq(
    trees: &[DecisionTree],
    strategy: LabelingStrategy,
    table: &ModelTable,
    config: &CostModelConfig,
) -> Result<Vec<PathSample>, Error> {
    config.validate()?;
    let mut samples = Vec::new();
    for tree in trees {
        let labeling = strategy.label(tree, table)?;
        samples.extend(tree_samples(tree, &labeling, config)?);
    }
    Ok(samples)
}
