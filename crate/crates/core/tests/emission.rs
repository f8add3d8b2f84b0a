//! Cross-module checks: emitted branch structure against tree inference,
//! trace bookkeeping against path statistics, and the timing model's
//! response to labeling changes.

mod common;

use common::{random_model, random_tree};
use wcdt_core::codegen::{interpret_emitted, trace_taken_count, EmitConfig};
use wcdt_core::optimizer::{inverted_opt, standard_labeling, surrogate_opt};
use wcdt_core::oracle::{path_cycles, CostModelConfig};
use wcdt_core::synthesis::{generate_tree, synthesize_input, GenConfig, SplitMix64};
use wcdt_core::tree::{ChildSide, Labeling};

fn seeded_labeling(tree: &wcdt_core::DecisionTree, seed: u64) -> Labeling {
    let mut rng = SplitMix64::new(seed);
    Labeling::from_fn(tree, |_| {
        if rng.next_u64() & 1 == 0 {
            ChildSide::Left
        } else {
            ChildSide::Right
        }
    })
}

/// For every leaf of generated trees and several labelings: the emitted
/// branch structure returns what the tree returns, and its false-condition
/// count equals the path's taken count.
#[test]
fn emitted_structure_preserves_semantics_per_leaf() {
    for seed in 0..25u64 {
        let tree = generate_tree(&GenConfig::new(8, 3, seed).unwrap());
        let model = random_model(seed);
        let labelings = [
            standard_labeling(&tree),
            surrogate_opt(&tree, &model),
            inverted_opt(&tree, &model),
            seeded_labeling(&tree, seed),
        ];
        for labeling in &labelings {
            let stats = tree.enumerate_paths(labeling).unwrap();
            for s in &stats {
                let x = synthesize_input(&tree, s.leaf).unwrap();
                let (expected, path) = tree.infer(&x).unwrap();
                assert_eq!(*path.last().unwrap(), s.leaf);
                let (got, trace) = interpret_emitted(&tree, labeling, &x).unwrap();
                assert_eq!(got, expected, "seed {seed} leaf {}", s.leaf);
                assert_eq!(
                    trace_taken_count(&trace),
                    s.taken,
                    "seed {seed} leaf {} taken count",
                    s.leaf
                );
                assert_eq!(trace.len(), s.depth);
            }
        }
    }
}

/// The emitted text is structurally sound: balanced braces, one return per
/// leaf, one condition per inner node.
#[test]
fn emitted_text_counts_match_tree_shape() {
    for seed in [2u64, 11, 40] {
        let tree = generate_tree(&GenConfig::new(6, 2, seed).unwrap());
        let labeling = standard_labeling(&tree);
        let source = wcdt_core::codegen::emit_c(&tree, &labeling, &EmitConfig::default()).unwrap();
        let opens = source.matches('{').count();
        let closes = source.matches('}').count();
        assert_eq!(opens, closes);
        assert_eq!(source.matches("return ").count(), tree.leaves().len());
        assert_eq!(source.matches("if (").count(), tree.inner_nodes().len());
    }
}

/// Inverting a condition must not move the boundary: inputs equal to a
/// threshold stay on the left side under every labeling.
#[test]
fn thresholds_keep_boundary_inputs_left_under_flips() {
    for seed in 0..10u64 {
        let tree = random_tree(10, seed);
        let thresholds: Vec<(usize, f64)> = tree
            .inner_nodes()
            .iter()
            .map(|&id| match tree.node(id) {
                wcdt_core::Node::Inner { feature, threshold, .. } => (*feature, *threshold),
                _ => unreachable!(),
            })
            .collect();
        for (feature, threshold) in thresholds {
            let mut x = vec![0.5; tree.num_features()];
            x[feature] = threshold;
            let (expected, _) = tree.infer(&x).unwrap();
            for label_seed in 0..4u64 {
                let labeling = seeded_labeling(&tree, label_seed);
                let (got, _) = interpret_emitted(&tree, &labeling, &x).unwrap();
                assert_eq!(got, expected);
            }
        }
    }
}

/// Every traversal in the crate is iterative; a thousand-deep chain must
/// flow through validation, labeling, costing, emission, and the cycle
/// model without touching the call stack.
#[test]
fn thousand_deep_chain_survives_every_stage() {
    let depth = 1000usize;
    let mut nodes = Vec::with_capacity(2 * depth + 1);
    for i in 0..depth {
        let left = if i + 1 == depth { 2 * depth } else { 2 * (i + 1) };
        nodes.push(wcdt_core::Node::inner(0, 1.0 / (i + 2) as f64, left, 2 * i + 1));
        nodes.push(wcdt_core::Node::leaf(i as f64));
    }
    nodes.push(wcdt_core::Node::leaf(depth as f64));
    let tree = wcdt_core::DecisionTree::new(nodes, 0, 1).unwrap();
    assert_eq!(tree.depth(), depth);

    let table = wcdt_core::ModelTable::default();
    let model = table.select_for_tree(&tree);
    assert_eq!(model.target_depth, 18);

    let opt = surrogate_opt(&tree, model);
    let (opt_cost, _) = model.tree_cost(&tree, &opt).unwrap();
    let (std_cost, _) = model.tree_cost(&tree, &standard_labeling(&tree)).unwrap();
    assert!(opt_cost <= std_cost);

    let source = wcdt_core::codegen::emit_c(&tree, &opt, &EmitConfig::default()).unwrap();
    assert_eq!(source.matches("return ").count(), depth + 1);

    let x = synthesize_input(&tree, 2 * depth).unwrap();
    let (prediction, trace) = interpret_emitted(&tree, &opt, &x).unwrap();
    assert_eq!(prediction, depth as f64);
    assert_eq!(trace.len(), depth);

    let cycles = path_cycles(&tree, &opt, 2 * depth, &CostModelConfig::default()).unwrap();
    assert!(cycles >= 235.0 + 25.0 * depth as f64);
}

/// Re-labeling one edge from untaken to taken never makes its own path
/// cheaper under the default cycle model.
#[test]
fn taking_an_edge_never_speeds_up_its_path() {
    let config = CostModelConfig::default();
    for seed in 0..15u64 {
        let tree = random_tree(10, seed);
        let labeling = seeded_labeling(&tree, seed * 3 + 1);
        let stats = tree.enumerate_paths(&labeling).unwrap();
        for s in &stats {
            let before = path_cycles(&tree, &labeling, s.leaf, &config).unwrap();
            let path = tree.path_to(s.leaf).unwrap();
            for pair in path.windows(2) {
                let (node, child) = (pair[0], pair[1]);
                if labeling.taken_child(&tree, node) == Some(child) {
                    continue;
                }
                // Flip this node so the on-path edge becomes taken.
                let flipped: std::collections::BTreeMap<_, _> = labeling
                    .iter()
                    .map(|(id, side)| (id, if id == node { side.opposite() } else { side }))
                    .collect();
                let after = path_cycles(&tree, &Labeling::new(flipped), s.leaf, &config).unwrap();
                assert!(
                    after >= before,
                    "seed {seed} leaf {} node {node}: {after} < {before}",
                    s.leaf
                );
            }
        }
    }
}
