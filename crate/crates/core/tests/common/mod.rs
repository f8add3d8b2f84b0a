//! Shared helpers for the integration tests.
//!
//! `random_tree` grows trees by splitting random leaves, so it covers chains
//! and lopsided shapes the synthetic generator's depth rule never produces.
//! It is deliberately independent of `wcdt_core::synthesis`.

#![allow(dead_code)]

use wcdt_core::synthesis::SplitMix64;
use wcdt_core::tree::{DecisionTree, Node};
use wcdt_core::SurrogateModel;

pub const TEST_FEATURES: usize = 3;

/// Random full binary tree with exactly `inner_target` inner nodes.
pub fn random_tree(inner_target: usize, seed: u64) -> DecisionTree {
    let mut rng = SplitMix64::new(seed);
    let mut nodes = vec![Node::leaf(0.0)];
    let mut leaves = vec![0usize];
    for _ in 0..inner_target {
        let slot = rng.next_below(leaves.len() as u64) as usize;
        let id = leaves.swap_remove(slot);
        let feature = rng.next_below(TEST_FEATURES as u64) as usize;
        let threshold = rng.next_f64();
        let left = nodes.len();
        let right = nodes.len() + 1;
        nodes.push(Node::leaf(0.0));
        nodes.push(Node::leaf(0.0));
        nodes[id] = Node::inner(feature, threshold, left, right);
        leaves.push(left);
        leaves.push(right);
    }
    // Distinct predictions so leaves are distinguishable end to end.
    let mut next = 0.0;
    for node in &mut nodes {
        if let Node::Leaf { prediction, .. } = node {
            *prediction = next;
            next += 1.0;
        }
    }
    DecisionTree::new(nodes, 0, TEST_FEATURES).expect("grown trees are well formed")
}

/// Random model with non-negative per-edge and per-taken costs, so the
/// greedy optimality precondition holds.
pub fn random_model(seed: u64) -> SurrogateModel {
    let mut rng = SplitMix64::new(seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    SurrogateModel::new(0, rng.next_f64() * 300.0, rng.next_f64() * 30.0, rng.next_f64() * 15.0)
}

/// The walkthrough fixture: root splits feature 0 at 0.5, its right child
/// splits at 0.8, three leaves. Ids: 0 root, 1 left leaf, 2 right inner,
/// 3 and 4 its leaves.
pub fn walkthrough_tree() -> DecisionTree {
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

/// Quadratic-time tau-b straight from the pair definition; the oracle the
/// merge-based implementation is checked against.
pub fn tau_b_reference(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut tied_a_only = 0i64;
    let mut tied_b_only = 0i64;
    let mut tied_both = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i].partial_cmp(&a[j]).unwrap();
            let db = b[i].partial_cmp(&b[j]).unwrap();
            match (da.is_eq(), db.is_eq()) {
                (true, true) => tied_both += 1,
                (true, false) => tied_a_only += 1,
                (false, true) => tied_b_only += 1,
                (false, false) => {
                    if da == db {
                        concordant += 1;
                    } else {
                        discordant += 1;
                    }
                }
            }
        }
    }
    let _ = tied_both;
    let pairs_a = concordant + discordant + tied_b_only;
    let pairs_b = concordant + discordant + tied_a_only;
    let denominator = (pairs_a as f64) * (pairs_b as f64);
    if denominator <= 0.0 {
        return 0.0;
    }
    ((concordant - discordant) as f64 / denominator.sqrt()).clamp(-1.0, 1.0)
}
