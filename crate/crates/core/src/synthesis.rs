//! Synthetic tree generation and per-path input synthesis.
//!
//! Generation mimics recursive training with a depth budget: the upper half
//! of the tree always splits, the lower half splits with a configurable
//! probability, and the budget caps the depth. Thresholds are drawn strictly
//! inside the feature box accumulated along the path, so every leaf of a
//! generated tree is reachable by construction.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::{ChildSide, DecisionTree, Node, NodeId};

/// SplitMix64: a small, portable, seedable 64-bit generator. Each tree node
/// owns one stream; the last two draws of a node's stream seed its children.
/// That splitting rule makes generated trees byte-identical across platforms
/// and independent of traversal order.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, n)` by the multiply-shift reduction.
    pub fn next_below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// Per-feature admissible intervals `(lo, hi]` accumulated along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FeatureBox {
    /// The default domain: `(0, 1]` for every feature.
    pub fn unit(num_features: usize) -> Self {
        FeatureBox { lo: vec![0.0; num_features], hi: vec![1.0; num_features] }
    }

    pub fn lo(&self, feature: usize) -> f64 {
        self.lo[feature]
    }

    pub fn hi(&self, feature: usize) -> f64 {
        self.hi[feature]
    }

    /// Restricts to `x[feature] <= threshold`.
    pub fn constrain_le(&mut self, feature: usize, threshold: f64) {
        self.hi[feature] = self.hi[feature].min(threshold);
    }

    /// Restricts to `x[feature] > threshold`.
    pub fn constrain_gt(&mut self, feature: usize, threshold: f64) {
        self.lo[feature] = self.lo[feature].max(threshold);
    }

    pub fn is_feasible(&self, feature: usize) -> bool {
        self.lo[feature] < self.hi[feature]
    }

    /// A point strictly above `lo` and at most `hi`, or `None` for an empty
    /// interval. Falls back to `hi` when the interval is too narrow for the
    /// midpoint to clear `lo`.
    pub fn pick(&self, feature: usize) -> Option<f64> {
        let (lo, hi) = (self.lo[feature], self.hi[feature]);
        if !self.is_feasible(feature) {
            return None;
        }
        let mid = lo + (hi - lo) / 2.0;
        if mid > lo && mid <= hi {
            Some(mid)
        } else {
            Some(hi)
        }
    }
}

/// Configuration for [`generate_tree`]. Construct via [`GenConfig::new`],
/// which enforces the field invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub max_depth: usize,
    pub num_features: usize,
    pub seed: u64,
    pub split_prob: f64,
}

impl GenConfig {
    pub fn new(max_depth: usize, num_features: usize, seed: u64) -> Result<Self, Error> {
        let config = GenConfig { max_depth, num_features, seed, split_prob: 0.5 };
        config.validate()?;
        Ok(config)
    }

    pub fn with_split_prob(mut self, split_prob: f64) -> Result<Self, Error> {
        self.split_prob = split_prob;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig { reason: "max_depth must be at least 1".into() });
        }
        if self.num_features < 1 {
            return Err(Error::InvalidConfig { reason: "num_features must be at least 1".into() });
        }
        if !self.split_prob.is_finite() || self.split_prob <= 0.0 || self.split_prob > 1.0 {
            return Err(Error::InvalidConfig {
                reason: format!("split_prob must be in (0, 1], got {}", self.split_prob),
            });
        }
        Ok(())
    }
}

struct PendingNode {
    /// Slot in the parent to patch once this node gets its id.
    parent: Option<(NodeId, ChildSide)>,
    depth: usize,
    feature_box: FeatureBox,
    seed: u64,
}

/// Generates a random full binary tree.
///
/// Nodes in the upper half of the depth budget (`depth <= max_depth / 2`)
/// always split; below that they split with probability `split_prob` until
/// the budget forces a leaf. Node ids follow preorder (left subtree before
/// right) and leaf predictions are sequential integers in that order.
/// Deterministic for a fixed configuration.
pub fn generate_tree(config: &GenConfig) -> DecisionTree {
    config.validate().expect("validated configuration");
    let half_depth = config.max_depth as f64 / 2.0;
    let mut nodes: Vec<Node> = Vec::new();
    let mut next_prediction = 0u64;
    let mut stack = vec![PendingNode {
        parent: None,
        depth: 0,
        feature_box: FeatureBox::unit(config.num_features),
        seed: config.seed,
    }];

    while let Some(pending) = stack.pop() {
        let id = nodes.len();
        if let Some((parent_id, side)) = pending.parent {
            if let Node::Inner { left, right, .. } = &mut nodes[parent_id] {
                match side {
                    ChildSide::Left => *left = id,
                    ChildSide::Right => *right = id,
                }
            }
        }

        let mut rng = SplitMix64::new(pending.seed);
        let splits = if pending.depth >= config.max_depth {
            false
        } else if pending.depth as f64 <= half_depth {
            true
        } else {
            rng.next_f64() < config.split_prob
        };

        if !splits {
            nodes.push(Node::leaf(next_prediction as f64));
            next_prediction += 1;
            continue;
        }

        let feature = rng.next_below(config.num_features as u64) as usize;
        let lo = pending.feature_box.lo(feature);
        let hi = pending.feature_box.hi(feature);
        let mut threshold = lo + rng.next_f64() * (hi - lo);
        if !(threshold > lo && threshold < hi) {
            threshold = lo + (hi - lo) / 2.0;
        }
        if !(threshold > lo && threshold < hi) {
            // Interval too narrow for a representable interior point; both
            // children could not stay reachable, so stop splitting here.
            nodes.push(Node::leaf(next_prediction as f64));
            next_prediction += 1;
            continue;
        }

        let left_seed = rng.next_u64();
        let right_seed = rng.next_u64();
        // Child ids are patched when the children are popped.
        nodes.push(Node::inner(feature, threshold, usize::MAX, usize::MAX));

        let mut left_box = pending.feature_box.clone();
        left_box.constrain_le(feature, threshold);
        let mut right_box = pending.feature_box;
        right_box.constrain_gt(feature, threshold);

        // Right first so the left child pops first and ids stay preorder.
        stack.push(PendingNode {
            parent: Some((id, ChildSide::Right)),
            depth: pending.depth + 1,
            feature_box: right_box,
            seed: right_seed,
        });
        stack.push(PendingNode {
            parent: Some((id, ChildSide::Left)),
            depth: pending.depth + 1,
            feature_box: left_box,
            seed: left_seed,
        });
    }

    DecisionTree::new(nodes, 0, config.num_features).expect("generated trees are well formed")
}

/// A feature vector that forces inference through exactly the path ending in
/// `leaf`, assuming the default `(0, 1]` feature domain. Externally supplied
/// trees can carry contradictory constraints, which surface as
/// [`Error::InfeasiblePath`].
pub fn synthesize_input(tree: &DecisionTree, leaf: NodeId) -> Result<Vec<f64>, Error> {
    let path = tree.path_to(leaf).ok_or(Error::NotALeaf { node: leaf })?;
    let mut feature_box = FeatureBox::unit(tree.num_features());
    for pair in path.windows(2) {
        let (node, next) = (pair[0], pair[1]);
        if let Node::Inner { feature, threshold, left, .. } = tree.node(node) {
            if next == *left {
                feature_box.constrain_le(*feature, *threshold);
            } else {
                feature_box.constrain_gt(*feature, *threshold);
            }
            if !feature_box.is_feasible(*feature) {
                return Err(Error::InfeasiblePath { leaf, feature: *feature });
            }
        }
    }
    let x = (0..tree.num_features())
        .map(|feature| feature_box.pick(feature).expect("checked along the path"))
        .collect();
    Ok(x)
}

/// Copies the tree with uniform leaf probabilities (`1 / leaf_count` each)
/// and inner-node probabilities equal to the sum over their subtrees'
/// leaves. Lets probability-driven strategies run on synthetic trees.
pub fn annotate_uniform_probabilities(tree: &DecisionTree) -> DecisionTree {
    let leaf_count = tree.leaves().len();
    let per_leaf = 1.0 / leaf_count as f64;
    let mut probability = vec![0.0f64; tree.len()];

    // Children before parents: reversed preorder.
    let mut order = Vec::with_capacity(tree.len());
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        order.push(id);
        if let Node::Inner { left, right, .. } = tree.node(id) {
            stack.push(*left);
            stack.push(*right);
        }
    }
    for &id in order.iter().rev() {
        probability[id] = match tree.node(id) {
            Node::Leaf { .. } => per_leaf,
            Node::Inner { left, right, .. } => probability[*left] + probability[*right],
        };
    }

    let nodes = tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| node.clone().with_probability(probability[id]))
        .collect();
    DecisionTree::new(nodes, tree.root(), tree.num_features())
        .expect("annotation preserves structure")
}
