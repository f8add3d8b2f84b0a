//! Binary decision trees: representation, validation, inference, path
//! enumeration, and taken/untaken edge labelings.
//!
//! A tree is an index-addressed array of nodes; [`NodeId`] is the array
//! index, which keeps labeling maps and the JSON wire format stable.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Index of a node within one tree's node array.
pub type NodeId = usize;

/// Children probabilities must sum to the parent's within this bound.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// One node of a binary decision tree.
///
/// Inner nodes split on `x[feature] <= threshold` (left on true, right on
/// strictly greater). Probabilities are optional annotations describing how
/// much of the training data reaches the node; operations that need them
/// fail explicitly when they are absent.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Inner { feature: usize, threshold: f64, left: NodeId, right: NodeId, probability: Option<f64> },
    Leaf { prediction: f64, probability: Option<f64> },
}

impl Node {
    pub fn inner(feature: usize, threshold: f64, left: NodeId, right: NodeId) -> Self {
        Node::Inner { feature, threshold, left, right, probability: None }
    }

    pub fn leaf(prediction: f64) -> Self {
        Node::Leaf { prediction, probability: None }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        match &mut self {
            Node::Inner { probability, .. } | Node::Leaf { probability, .. } => {
                *probability = Some(p)
            }
        }
        self
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    pub fn probability(&self) -> Option<f64> {
        match self {
            Node::Inner { probability, .. } | Node::Leaf { probability, .. } => *probability,
        }
    }
}

/// A structural defect found while validating a tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RootOutOfRange { root: NodeId, len: usize },
    DanglingChild { node: NodeId, child: NodeId },
    IdenticalChildren { node: NodeId },
    SharedChild { child: NodeId },
    RootHasParent,
    Cycle { node: NodeId },
    Unreachable { node: NodeId },
    BadFeatureIndex { node: NodeId, feature: usize, num_features: usize },
    ProbabilitySumMismatch { node: NodeId, expected: f64, got: f64 },
    RootProbabilityNotOne { got: f64 },
    DuplicateNodeId { id: NodeId },
    NodeIdOutOfRange { id: NodeId, len: usize },
    AmbiguousNode { id: NodeId },
    IncompleteNode { id: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootOutOfRange { root, len } => {
                write!(f, "root id {root} out of range (tree has {len} nodes)")
            }
            Violation::DanglingChild { node, child } => {
                write!(f, "node {node} references missing child {child}")
            }
            Violation::IdenticalChildren { node } => {
                write!(f, "node {node} lists the same node as both children")
            }
            Violation::SharedChild { child } => {
                write!(f, "node {child} has more than one parent")
            }
            Violation::RootHasParent => write!(f, "root node has a parent"),
            Violation::Cycle { node } => write!(f, "cycle through node {node}"),
            Violation::Unreachable { node } => {
                write!(f, "node {node} is not reachable from the root")
            }
            Violation::BadFeatureIndex { node, feature, num_features } => write!(
                f,
                "node {node} splits on feature {feature}, but the tree has {num_features} features"
            ),
            Violation::ProbabilitySumMismatch { node, expected, got } => write!(
                f,
                "children of node {node} have probabilities summing to {got}, parent says {expected}"
            ),
            Violation::RootProbabilityNotOne { got } => {
                write!(f, "root probability is {got}, expected 1")
            }
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id}"),
            Violation::NodeIdOutOfRange { id, len } => {
                write!(f, "node id {id} out of range for {len} nodes")
            }
            Violation::AmbiguousNode { id } => {
                write!(f, "node {id} has both split fields and a prediction")
            }
            Violation::IncompleteNode { id } => {
                write!(f, "node {id} has neither a complete split nor a prediction")
            }
        }
    }
}

/// An immutable, validated binary decision tree.
///
/// Every inner node has exactly two distinct children, the node graph is a
/// single rooted tree, and all feature indices are in range. Construction
/// via [`DecisionTree::new`] or the JSON loader enforces this, so traversals
/// never have to re-check for cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    root: NodeId,
    num_features: usize,
}

impl DecisionTree {
    /// Validates and constructs a tree. Returns every violation found, not
    /// just the first.
    pub fn new(nodes: Vec<Node>, root: NodeId, num_features: usize) -> Result<Self, Error> {
        let violations = validate_structure(&nodes, root, num_features);
        if violations.is_empty() {
            Ok(DecisionTree { nodes, root, num_features })
        } else {
            Err(Error::MalformedTree { violations })
        }
    }

    /// Single leaf tree; useful as the degenerate base case.
    pub fn single_leaf(prediction: f64, num_features: usize) -> Self {
        DecisionTree { nodes: vec![Node::leaf(prediction)], root: 0, num_features }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].is_leaf()
    }

    /// Leaf ids in increasing order.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    /// Inner-node ids in increasing order.
    pub fn inner_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].is_leaf()).collect()
    }

    /// Re-runs structural validation (for trees loaded from external files).
    pub fn validate(&self) -> Result<(), Error> {
        let violations = validate_structure(&self.nodes, self.root, self.num_features);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::MalformedTree { violations })
        }
    }

    /// Length of the longest root-to-leaf path, in edges. A root-only tree
    /// has depth 0.
    pub fn depth(&self) -> usize {
        let mut max_depth = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { .. } => max_depth = max_depth.max(d),
                Node::Inner { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        max_depth
    }

    /// Follows the split rule from the root: left on `x[feature] <= threshold`,
    /// right on strictly greater. Returns the leaf's prediction and the full
    /// node path including root and leaf.
    pub fn infer(&self, x: &[f64]) -> Result<(f64, Vec<NodeId>), Error> {
        if x.len() != self.num_features {
            return Err(Error::DimensionMismatch { expected: self.num_features, got: x.len() });
        }
        let mut path = Vec::new();
        let mut current = self.root;
        loop {
            path.push(current);
            match &self.nodes[current] {
                Node::Leaf { prediction, .. } => return Ok((*prediction, path)),
                Node::Inner { feature, threshold, left, right, .. } => {
                    current = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Node ids from the root to `leaf`, inclusive. `None` if `leaf` is not a
    /// leaf of this tree.
    pub fn path_to(&self, leaf: NodeId) -> Option<Vec<NodeId>> {
        if leaf >= self.nodes.len() || !self.nodes[leaf].is_leaf() {
            return None;
        }
        // Parent pointers are cheap to rebuild; trees are small.
        let mut parent = vec![usize::MAX; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Inner { left, right, .. } = node {
                parent[*left] = id;
                parent[*right] = id;
            }
        }
        let mut path = vec![leaf];
        let mut current = leaf;
        while current != self.root {
            current = parent[current];
            path.push(current);
        }
        path.reverse();
        Some(path)
    }

    /// Per-leaf path statistics under `labeling`, ordered by leaf id.
    pub fn enumerate_paths(&self, labeling: &Labeling) -> Result<Vec<PathStats>, Error> {
        labeling.validate_for(self)?;
        let mut stats = Vec::new();
        let mut stack = vec![(self.root, 0usize, 0usize)];
        while let Some((id, depth, taken)) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { .. } => stats.push(PathStats { leaf: id, depth, taken }),
                Node::Inner { left, right, .. } => {
                    let taken_side = labeling.taken_side(id).expect("validated domain");
                    let (lt, rt) = match taken_side {
                        ChildSide::Left => (taken + 1, taken),
                        ChildSide::Right => (taken, taken + 1),
                    };
                    stack.push((*left, depth + 1, lt));
                    stack.push((*right, depth + 1, rt));
                }
            }
        }
        stats.sort_by_key(|s| s.leaf);
        Ok(stats)
    }

    pub fn to_json(&self) -> String {
        let file = TreeFile::from_tree(self);
        let mut out = serde_json::to_string_pretty(&file).expect("tree serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let file: TreeFile = serde_json::from_str(text)?;
        file.into_tree()
    }
}

/// Which child edge of an inner node sits in the taken slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChildSide {
    Left,
    Right,
}

impl ChildSide {
    pub fn opposite(self) -> ChildSide {
        match self {
            ChildSide::Left => ChildSide::Right,
            ChildSide::Right => ChildSide::Left,
        }
    }
}

/// Per-inner-node assignment of the taken slot; the sibling edge is untaken.
///
/// A labeling is only meaningful relative to one tree: its domain must be
/// exactly that tree's inner-node set. The map is ordered so serialization
/// is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Labeling {
    taken: BTreeMap<NodeId, ChildSide>,
}

impl Labeling {
    pub fn new(taken: BTreeMap<NodeId, ChildSide>) -> Self {
        Labeling { taken }
    }

    /// Empty labeling: valid only for a root-only tree.
    pub fn empty() -> Self {
        Labeling::default()
    }

    /// Builds a labeling by evaluating `pick` on every inner node.
    pub fn from_fn(tree: &DecisionTree, mut pick: impl FnMut(NodeId) -> ChildSide) -> Self {
        let taken = tree.inner_nodes().into_iter().map(|id| (id, pick(id))).collect();
        Labeling { taken }
    }

    pub fn len(&self) -> usize {
        self.taken.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taken.is_empty()
    }

    pub fn taken_side(&self, node: NodeId) -> Option<ChildSide> {
        self.taken.get(&node).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, ChildSide)> + '_ {
        self.taken.iter().map(|(k, v)| (*k, *v))
    }

    /// The child in the taken slot of `node`.
    pub fn taken_child(&self, tree: &DecisionTree, node: NodeId) -> Option<NodeId> {
        match (tree.node(node), self.taken_side(node)?) {
            (Node::Inner { left, .. }, ChildSide::Left) => Some(*left),
            (Node::Inner { right, .. }, ChildSide::Right) => Some(*right),
            (Node::Leaf { .. }, _) => None,
        }
    }

    /// Checks the domain is exactly the tree's inner-node set.
    pub fn validate_for(&self, tree: &DecisionTree) -> Result<(), Error> {
        for &id in self.taken.keys() {
            if id >= tree.len() || tree.is_leaf(id) {
                return Err(Error::LabelingMismatch {
                    reason: format!("labeled node {id} is not an inner node of the tree"),
                });
            }
        }
        let inner_count = tree.inner_nodes().len();
        if self.taken.len() != inner_count {
            return Err(Error::LabelingMismatch {
                reason: format!(
                    "labeling covers {} nodes, tree has {} inner nodes",
                    self.taken.len(),
                    inner_count
                ),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("labeling serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Statistics of one root-to-leaf path under a fixed labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStats {
    pub leaf: NodeId,
    /// Edge count of the path.
    pub depth: usize,
    /// Number of taken edges on the path.
    pub taken: usize,
}

impl PathStats {
    /// Untaken edges; `taken + untaken == depth` always.
    pub fn untaken(&self) -> usize {
        self.depth - self.taken
    }
}

fn validate_structure(nodes: &[Node], root: NodeId, num_features: usize) -> Vec<Violation> {
    let mut violations = Vec::new();
    let len = nodes.len();
    if root >= len {
        violations.push(Violation::RootOutOfRange { root, len });
        return violations;
    }

    let mut indegree = vec![0usize; len];
    for (id, node) in nodes.iter().enumerate() {
        if let Node::Inner { feature, left, right, .. } = node {
            if left == right {
                violations.push(Violation::IdenticalChildren { node: id });
            }
            for &child in [left, right] {
                if child >= len {
                    violations.push(Violation::DanglingChild { node: id, child });
                } else {
                    indegree[child] += 1;
                }
            }
            if *feature >= num_features {
                violations.push(Violation::BadFeatureIndex {
                    node: id,
                    feature: *feature,
                    num_features,
                });
            }
        }
    }

    if indegree[root] > 0 {
        violations.push(Violation::RootHasParent);
    }
    for (id, &deg) in indegree.iter().enumerate() {
        if deg > 1 {
            violations.push(Violation::SharedChild { child: id });
        }
    }

    // Walk from the root; a revisited node means a cycle, an unvisited node
    // means a disconnected component.
    let mut visited = vec![false; len];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if visited[id] {
            violations.push(Violation::Cycle { node: id });
            continue;
        }
        visited[id] = true;
        if let Node::Inner { left, right, .. } = &nodes[id] {
            for &child in [left, right] {
                if child < len {
                    if visited[child] {
                        violations.push(Violation::Cycle { node: child });
                    } else {
                        stack.push(child);
                    }
                }
            }
        }
    }
    for (id, &seen) in visited.iter().enumerate() {
        if !seen {
            violations.push(Violation::Unreachable { node: id });
        }
    }

    for (id, node) in nodes.iter().enumerate() {
        if let Node::Inner { left, right, probability, .. } = node {
            if *left >= len || *right >= len {
                continue;
            }
            if let (Some(p), Some(pl), Some(pr)) =
                (probability, nodes[*left].probability(), nodes[*right].probability())
            {
                if (pl + pr - p).abs() > PROBABILITY_TOLERANCE {
                    violations.push(Violation::ProbabilitySumMismatch {
                        node: id,
                        expected: *p,
                        got: pl + pr,
                    });
                }
            }
        }
    }
    if let Some(p) = nodes[root].probability() {
        if (p - 1.0).abs() > PROBABILITY_TOLERANCE {
            violations.push(Violation::RootProbabilityNotOne { got: p });
        }
    }

    violations
}

// --- JSON wire format -------------------------------------------------------
//
// {"num_features": N, "root": 0, "nodes": [
//   {"id":0,"feature":3,"threshold":0.5,"left":1,"right":2,"probability":1.0},
//   {"id":1,"prediction":2.0}, ...]}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    num_features: usize,
    root: NodeId,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prediction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
}

impl TreeFile {
    fn from_tree(tree: &DecisionTree) -> TreeFile {
        let nodes = tree
            .nodes
            .iter()
            .enumerate()
            .map(|(id, node)| match node {
                Node::Inner { feature, threshold, left, right, probability } => NodeRecord {
                    id,
                    feature: Some(*feature),
                    threshold: Some(*threshold),
                    left: Some(*left),
                    right: Some(*right),
                    prediction: None,
                    probability: *probability,
                },
                Node::Leaf { prediction, probability } => NodeRecord {
                    id,
                    feature: None,
                    threshold: None,
                    left: None,
                    right: None,
                    prediction: Some(*prediction),
                    probability: *probability,
                },
            })
            .collect();
        TreeFile { num_features: tree.num_features, root: tree.root, nodes }
    }

    fn into_tree(self) -> Result<DecisionTree, Error> {
        let len = self.nodes.len();
        let mut violations = Vec::new();
        let mut slots: Vec<Option<Node>> = vec![None; len];
        for record in self.nodes {
            if record.id >= len {
                violations.push(Violation::NodeIdOutOfRange { id: record.id, len });
                continue;
            }
            if slots[record.id].is_some() {
                violations.push(Violation::DuplicateNodeId { id: record.id });
                continue;
            }
            let split = (record.feature, record.threshold, record.left, record.right);
            let node = match (split, record.prediction) {
                ((Some(feature), Some(threshold), Some(left), Some(right)), None) => {
                    Node::Inner { feature, threshold, left, right, probability: record.probability }
                }
                ((None, None, None, None), Some(prediction)) => {
                    Node::Leaf { prediction, probability: record.probability }
                }
                (_, Some(_)) => {
                    violations.push(Violation::AmbiguousNode { id: record.id });
                    continue;
                }
                (_, None) => {
                    violations.push(Violation::IncompleteNode { id: record.id });
                    continue;
                }
            };
            slots[record.id] = node.into();
        }
        if !violations.is_empty() {
            return Err(Error::MalformedTree { violations });
        }
        let nodes = slots.into_iter().map(|slot| slot.expect("all ids seen")).collect();
        DecisionTree::new(nodes, self.root, self.num_features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three-leaf tree: root splits feature 0 at 0.5; its right child splits
    /// feature 0 at 0.8. Node ids: 0 root, 1 left leaf, 2 right inner,
    /// 3 and 4 its leaves.
    pub(crate) fn three_leaf_tree() -> DecisionTree {
        DecisionTree::new(
            vec![
                Node::inner(0, 0.5, 1, 2),
                Node::leaf(0.0),
                Node::inner(0, 0.8, 3, 4),
                Node::leaf(1.0),
                Node::leaf(2.0),
            ],
            0,
            1,
        )
        .unwrap()
    }

    fn right_taken(tree: &DecisionTree) -> Labeling {
        Labeling::from_fn(tree, |_| ChildSide::Right)
    }

    #[test]
    fn root_only_tree_is_valid_with_depth_zero() {
        let tree = DecisionTree::single_leaf(7.0, 0);
        assert!(tree.validate().is_ok());
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn self_loop_is_reported_as_cycle() {
        let err =
            DecisionTree::new(vec![Node::inner(0, 0.5, 0, 1), Node::leaf(1.0)], 0, 1).unwrap_err();
        match err {
            Error::MalformedTree { violations } => {
                assert!(violations.iter().any(|v| matches!(v, Violation::Cycle { .. })));
            }
            other => panic!("expected MalformedTree, got {other:?}"),
        }
    }

    #[test]
    fn five_node_tree_is_valid_with_depth_two() {
        let tree = three_leaf_tree();
        assert_eq!(tree.depth(), 2);
        assert_eq!(tree.leaves(), vec![1, 3, 4]);
        assert_eq!(tree.inner_nodes(), vec![0, 2]);
    }

    #[test]
    fn shared_child_and_bad_feature_are_reported() {
        let err =
            DecisionTree::new(vec![Node::inner(3, 0.5, 1, 1), Node::leaf(1.0)], 0, 2).unwrap_err();
        let Error::MalformedTree { violations } = err else { panic!() };
        assert!(violations.iter().any(|v| matches!(v, Violation::IdenticalChildren { .. })));
        assert!(violations.iter().any(|v| matches!(v, Violation::SharedChild { .. })));
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::BadFeatureIndex { feature: 3, .. })));
    }

    #[test]
    fn dangling_child_is_reported() {
        let err =
            DecisionTree::new(vec![Node::inner(0, 0.5, 1, 9), Node::leaf(1.0)], 0, 1).unwrap_err();
        let Error::MalformedTree { violations } = err else { panic!() };
        assert!(violations.iter().any(|v| matches!(v, Violation::DanglingChild { child: 9, .. })));
    }

    #[test]
    fn infer_boundary_goes_left() {
        let tree = DecisionTree::new(
            vec![Node::inner(0, 0.5, 1, 2), Node::leaf(1.0), Node::leaf(2.0)],
            0,
            1,
        )
        .unwrap();
        let (p, path) = tree.infer(&[0.5]).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(path, vec![0, 1]);
        let (p, _) = tree.infer(&[0.6]).unwrap();
        assert_eq!(p, 2.0);
    }

    #[test]
    fn infer_on_leaf_tree_with_no_features() {
        let tree = DecisionTree::single_leaf(7.0, 0);
        let (p, path) = tree.infer(&[]).unwrap();
        assert_eq!(p, 7.0);
        assert_eq!(path, vec![0]);
    }

    #[test]
    fn infer_rejects_wrong_dimension() {
        let tree = three_leaf_tree();
        assert_eq!(tree.infer(&[0.1, 0.2]), Err(Error::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn enumerate_paths_right_taken_labeling() {
        let tree = three_leaf_tree();
        let stats = tree.enumerate_paths(&right_taken(&tree)).unwrap();
        assert_eq!(
            stats,
            vec![
                PathStats { leaf: 1, depth: 1, taken: 0 },
                PathStats { leaf: 3, depth: 2, taken: 1 },
                PathStats { leaf: 4, depth: 2, taken: 2 },
            ]
        );
    }

    #[test]
    fn enumerate_paths_flipped_root_labeling() {
        let tree = three_leaf_tree();
        let mut taken = BTreeMap::new();
        taken.insert(0, ChildSide::Left);
        taken.insert(2, ChildSide::Right);
        let stats = tree.enumerate_paths(&Labeling::new(taken)).unwrap();
        assert_eq!(
            stats,
            vec![
                PathStats { leaf: 1, depth: 1, taken: 1 },
                PathStats { leaf: 3, depth: 2, taken: 0 },
                PathStats { leaf: 4, depth: 2, taken: 1 },
            ]
        );
    }

    #[test]
    fn enumerate_paths_on_leaf_tree() {
        let tree = DecisionTree::single_leaf(1.0, 0);
        let stats = tree.enumerate_paths(&Labeling::empty()).unwrap();
        assert_eq!(stats, vec![PathStats { leaf: 0, depth: 0, taken: 0 }]);
    }

    #[test]
    fn labeling_domain_must_match_inner_nodes() {
        let tree = three_leaf_tree();
        let mut taken = BTreeMap::new();
        taken.insert(0, ChildSide::Left);
        let err = tree.enumerate_paths(&Labeling::new(taken)).unwrap_err();
        assert!(matches!(err, Error::LabelingMismatch { .. }));

        let mut taken = BTreeMap::new();
        taken.insert(0, ChildSide::Left);
        taken.insert(1, ChildSide::Left); // a leaf
        let err = Labeling::new(taken).validate_for(&tree).unwrap_err();
        assert!(matches!(err, Error::LabelingMismatch { .. }));
    }

    #[test]
    fn perfect_tree_depth_three() {
        // 15 nodes: 7 inner + 8 leaves, every root-to-leaf path has 3 edges.
        let mut nodes = Vec::new();
        for i in 0..7 {
            nodes.push(Node::inner(0, 0.5, 2 * i + 1, 2 * i + 2));
        }
        for i in 0..8 {
            nodes.push(Node::leaf(i as f64));
        }
        let tree = DecisionTree::new(nodes, 0, 1).unwrap();
        assert_eq!(tree.depth(), 3);
        assert_eq!(tree.leaves().len(), 8);
    }

    #[test]
    fn json_round_trip_preserves_tree() {
        let tree = three_leaf_tree();
        let text = tree.to_json();
        let back = DecisionTree::from_json(&text).unwrap();
        assert_eq!(tree, back);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_rejects_node_with_both_kinds() {
        let text = r#"{"num_features":1,"root":0,"nodes":[
            {"id":0,"feature":0,"threshold":0.5,"left":1,"right":2,"prediction":3.0},
            {"id":1,"prediction":1.0},{"id":2,"prediction":2.0}]}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        let Error::MalformedTree { violations } = err else { panic!() };
        assert!(violations.iter().any(|v| matches!(v, Violation::AmbiguousNode { id: 0 })));
    }

    #[test]
    fn probability_sum_is_checked() {
        let err = DecisionTree::new(
            vec![
                Node::inner(0, 0.5, 1, 2).with_probability(1.0),
                Node::leaf(0.0).with_probability(0.4),
                Node::leaf(1.0).with_probability(0.5),
            ],
            0,
            1,
        )
        .unwrap_err();
        let Error::MalformedTree { violations } = err else { panic!() };
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::ProbabilitySumMismatch { node: 0, .. })));
    }

    #[test]
    fn path_to_returns_root_to_leaf_order() {
        let tree = three_leaf_tree();
        assert_eq!(tree.path_to(4), Some(vec![0, 2, 4]));
        assert_eq!(tree.path_to(0), None);
    }

    #[test]
    fn labeling_json_round_trip() {
        let tree = three_leaf_tree();
        let mut taken = BTreeMap::new();
        taken.insert(0, ChildSide::Left);
        taken.insert(2, ChildSide::Right);
        let labeling = Labeling::new(taken);
        let text = labeling.to_json();
        assert!(text.contains("\"0\": \"left\""));
        let back = Labeling::from_json(&text).unwrap();
        assert_eq!(labeling, back);
        back.validate_for(&tree).unwrap();
    }
}
