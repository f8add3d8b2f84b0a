//! Labeling construction: the greedy cost-minimizing pass, its worst-case
//! inverted variant, the two baselines, and an exhaustive search used as a
//! verification oracle.
//!
//! The greedy pass works bottom-up. At each inner node the child whose
//! subtree is cheaper absorbs the taken slot: with per-edge cost `delta` and
//! per-taken-edge cost `pi = delta + gamma`, placing the cheaper subtree in
//! the taken slot minimizes `max(pi + cheap, delta + expensive)`. Under
//! `pi >= delta >= 0` this local rule is globally optimal over all `2^k`
//! labelings, and inverting the comparison yields the cost-maximizing
//! labeling instead.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::surrogate::{ModelTable, SurrogateModel};
use crate::tree::{ChildSide, DecisionTree, Labeling, Node, NodeId};

/// Exhaustive search refuses trees with more inner nodes than this unless
/// the caller raises the limit explicitly.
pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 20;

/// How a labeling is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelingStrategy {
    /// Right child in the taken slot everywhere (the plain if-else layout).
    Standard,
    /// The higher-probability child stays in the untaken slot.
    Swap,
    /// Greedy cost minimization.
    SurrogateOpt,
    /// Greedy cost maximization (upper bound).
    Inverted,
    /// Exhaustive minimum, for verification.
    BruteForceMin,
    /// Exhaustive maximum, for verification.
    BruteForceMax,
}

impl LabelingStrategy {
    pub fn requires_probabilities(self) -> bool {
        matches!(self, LabelingStrategy::Swap)
    }

    /// Applies the strategy, selecting the model for the tree's depth where
    /// one is needed.
    pub fn label(self, tree: &DecisionTree, table: &ModelTable) -> Result<Labeling, Error> {
        match self {
            LabelingStrategy::Standard => Ok(standard_labeling(tree)),
            LabelingStrategy::Swap => swap_labeling(tree),
            LabelingStrategy::SurrogateOpt => Ok(surrogate_opt(tree, table.select_for_tree(tree))),
            LabelingStrategy::Inverted => Ok(inverted_opt(tree, table.select_for_tree(tree))),
            LabelingStrategy::BruteForceMin => {
                let model = table.select_for_tree(tree);
                brute_force(tree, model, Objective::Min, DEFAULT_BRUTE_FORCE_LIMIT)
                    .map(|(labeling, _)| labeling)
            }
            LabelingStrategy::BruteForceMax => {
                let model = table.select_for_tree(tree);
                brute_force(tree, model, Objective::Max, DEFAULT_BRUTE_FORCE_LIMIT)
                    .map(|(labeling, _)| labeling)
            }
        }
    }
}

/// Greedy labeling minimizing the estimated tree cost.
///
/// Requires `model.pi() >= model.delta >= 0` for the optimality guarantee;
/// on ties the left child takes the taken slot.
pub fn surrogate_opt(tree: &DecisionTree, model: &SurrogateModel) -> Labeling {
    greedy(tree, model, false)
}

/// Greedy labeling maximizing the estimated tree cost.
pub fn inverted_opt(tree: &DecisionTree, model: &SurrogateModel) -> Labeling {
    greedy(tree, model, true)
}

fn greedy(tree: &DecisionTree, model: &SurrogateModel, invert: bool) -> Labeling {
    let delta = model.delta;
    let pi = model.pi();
    // Accumulated subtree costs exclude the constant offset; comparisons are
    // unaffected by it.
    let mut subtree_cost = vec![0.0f64; tree.len()];
    let mut taken = BTreeMap::new();
    for id in post_order(tree) {
        if let Node::Inner { left, right, .. } = tree.node(id) {
            let (cost_left, cost_right) = (subtree_cost[*left], subtree_cost[*right]);
            let left_taken = if invert { cost_left > cost_right } else { cost_left <= cost_right };
            let (cost_taken, cost_untaken) =
                if left_taken { (cost_left, cost_right) } else { (cost_right, cost_left) };
            subtree_cost[id] = (pi + cost_taken).max(delta + cost_untaken);
            taken.insert(id, if left_taken { ChildSide::Left } else { ChildSide::Right });
        }
    }
    Labeling::new(taken)
}

/// Children-before-parent order, computed with an explicit stack so deep
/// trees cannot overflow the call stack.
fn post_order(tree: &DecisionTree) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(tree.len());
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        order.push(id);
        if let Node::Inner { left, right, .. } = tree.node(id) {
            stack.push(*left);
            stack.push(*right);
        }
    }
    // Reversed preorder (parent before children) is a valid post order for
    // our purposes: every child appears before its parent after reversal.
    order.reverse();
    order
}

/// Right child taken at every inner node: the layout a plain left-subtree-
/// first if-else translation produces.
pub fn standard_labeling(tree: &DecisionTree) -> Labeling {
    Labeling::from_fn(tree, |_| ChildSide::Right)
}

/// Probability-greedy baseline: keeps the more probable child adjacent to
/// the branch (untaken slot), sending the less probable one to the taken
/// slot. Ties keep the left child untaken.
pub fn swap_labeling(tree: &DecisionTree) -> Result<Labeling, Error> {
    for (id, node) in tree.nodes().iter().enumerate() {
        if node.probability().is_none() {
            return Err(Error::MissingProbability { node: id });
        }
    }
    let mut taken = BTreeMap::new();
    for id in tree.inner_nodes() {
        if let Node::Inner { left, right, .. } = tree.node(id) {
            let p_left = tree.node(*left).probability().expect("checked above");
            let p_right = tree.node(*right).probability().expect("checked above");
            let side = if p_left < p_right { ChildSide::Left } else { ChildSide::Right };
            taken.insert(id, side);
        }
    }
    Ok(Labeling::new(taken))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Min,
    Max,
}

/// Exhaustive search over all `2^k` labelings of the `k` inner nodes.
///
/// Returns the objective-optimal labeling and its exact tree cost.
/// Deterministic: among equal-cost labelings the one whose bitmask (bit `i`
/// set means the `i`-th inner node in id order takes its left child) is
/// smallest wins, regardless of how the search space was partitioned.
pub fn brute_force(
    tree: &DecisionTree,
    model: &SurrogateModel,
    objective: Objective,
    limit: usize,
) -> Result<(Labeling, f64), Error> {
    let space = SearchSpace::build(tree, limit)?;
    #[cfg(feature = "parallel")]
    {
        // Tiny spaces are not worth scheduling.
        if space.inner.len() >= 12 {
            return Ok(space.run_parallel(tree, model, objective));
        }
    }
    Ok(space.run_sequential(tree, model, objective))
}

/// Single-threaded exhaustive search; same contract and same result as
/// [`brute_force`].
pub fn brute_force_seq(
    tree: &DecisionTree,
    model: &SurrogateModel,
    objective: Objective,
    limit: usize,
) -> Result<(Labeling, f64), Error> {
    let space = SearchSpace::build(tree, limit)?;
    Ok(space.run_sequential(tree, model, objective))
}

/// Per-leaf path summary over inner-node bit positions, so one labeling
/// evaluation is a handful of bit operations per leaf.
struct LeafPath {
    depth: usize,
    on_path: u64,
    went_left: u64,
}

struct SearchSpace {
    inner: Vec<NodeId>,
    leaves: Vec<LeafPath>,
}

impl SearchSpace {
    fn build(tree: &DecisionTree, limit: usize) -> Result<SearchSpace, Error> {
        let inner = tree.inner_nodes();
        if inner.len() > limit || inner.len() > 63 {
            return Err(Error::TooLarge { inner_nodes: inner.len(), limit: limit.min(63) });
        }
        let mut position = vec![usize::MAX; tree.len()];
        for (bit, &id) in inner.iter().enumerate() {
            position[id] = bit;
        }
        let mut leaves = Vec::new();
        let mut stack = vec![(tree.root(), 0usize, 0u64, 0u64)];
        while let Some((id, depth, on_path, went_left)) = stack.pop() {
            match tree.node(id) {
                Node::Leaf { .. } => leaves.push(LeafPath { depth, on_path, went_left }),
                Node::Inner { left, right, .. } => {
                    let bit = 1u64 << position[id];
                    stack.push((*left, depth + 1, on_path | bit, went_left | bit));
                    stack.push((*right, depth + 1, on_path | bit, went_left));
                }
            }
        }
        Ok(SearchSpace { inner, leaves })
    }

    /// Tree cost of the labeling encoded by `mask`, bit-identical to
    /// [`SurrogateModel::tree_cost`] on the decoded labeling.
    #[inline]
    fn cost(&self, model: &SurrogateModel, mask: u64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for leaf in &self.leaves {
            // An edge is taken when the direction walked matches the side the
            // mask puts in the taken slot.
            let taken = (!(mask ^ leaf.went_left) & leaf.on_path).count_ones() as usize;
            let value = model.path_value(leaf.depth, taken);
            if value > best {
                best = value;
            }
        }
        model.sigma + best
    }

    fn decode(&self, mask: u64) -> Labeling {
        let taken = self
            .inner
            .iter()
            .enumerate()
            .map(|(bit, &id)| {
                let side = if mask & (1 << bit) != 0 { ChildSide::Left } else { ChildSide::Right };
                (id, side)
            })
            .collect();
        Labeling::new(taken)
    }

    fn better(objective: Objective, a: (f64, u64), b: (f64, u64)) -> (f64, u64) {
        let a_wins = match objective {
            Objective::Min => a.0 < b.0 || (a.0 == b.0 && a.1 < b.1),
            Objective::Max => a.0 > b.0 || (a.0 == b.0 && a.1 < b.1),
        };
        if a_wins {
            a
        } else {
            b
        }
    }

    fn run_sequential(
        &self,
        _tree: &DecisionTree,
        model: &SurrogateModel,
        objective: Objective,
    ) -> (Labeling, f64) {
        let identity = match objective {
            Objective::Min => (f64::INFINITY, u64::MAX),
            Objective::Max => (f64::NEG_INFINITY, u64::MAX),
        };
        let best = (0..1u64 << self.inner.len())
            .map(|mask| (self.cost(model, mask), mask))
            .fold(identity, |acc, item| Self::better(objective, acc, item));
        (self.decode(best.1), best.0)
    }

    #[cfg(feature = "parallel")]
    fn run_parallel(
        &self,
        _tree: &DecisionTree,
        model: &SurrogateModel,
        objective: Objective,
    ) -> (Labeling, f64) {
        use rayon::prelude::*;
        let identity = match objective {
            Objective::Min => (f64::INFINITY, u64::MAX),
            Objective::Max => (f64::NEG_INFINITY, u64::MAX),
        };
        let best = (0..1u64 << self.inner.len())
            .into_par_iter()
            .map(|mask| (self.cost(model, mask), mask))
            .reduce(|| identity, |a, b| Self::better(objective, a, b));
        (self.decode(best.1), best.0)
    }
}
