//! Per-tree strategy comparison and its table/CSV/JSON renderings.

use anyhow::Result;
use serde::Serialize;
use wcdt_core::optimizer::{inverted_opt, standard_labeling, surrogate_opt, swap_labeling};
use wcdt_core::{DecisionTree, Labeling, SurrogateModel};

/// Absolute estimated cost and its ratio to the optimized labeling's cost.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StrategyCost {
    pub cost: f64,
    pub normalized: f64,
}

/// One tree's costs under every applicable strategy.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub tree: String,
    pub tree_depth: usize,
    pub leaf_count: usize,
    pub model_depth: usize,
    pub surrogate_opt: StrategyCost,
    pub standard: StrategyCost,
    /// Absent (not zero) when the tree carries no probabilities.
    pub swap: Option<StrategyCost>,
    pub inverted: StrategyCost,
}

/// Normalized-cost geometric means over a set of trees.
#[derive(Debug, Clone, Serialize)]
pub struct GeomeanSummary {
    pub surrogate_opt: f64,
    pub standard: f64,
    pub swap: Option<f64>,
    pub inverted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutput {
    pub trees: Vec<CompareReport>,
    pub geomean: GeomeanSummary,
}

pub fn compare_tree(
    name: &str,
    tree: &DecisionTree,
    model: &SurrogateModel,
) -> Result<CompareReport> {
    let cost = |labeling: &Labeling| -> Result<f64> { Ok(model.tree_cost(tree, labeling)?.0) };
    let opt_cost = cost(&surrogate_opt(tree, model))?;
    let standard_cost = cost(&standard_labeling(tree))?;
    let inverted_cost = cost(&inverted_opt(tree, model))?;
    let swap_cost = match swap_labeling(tree) {
        Ok(labeling) => Some(cost(&labeling)?),
        Err(wcdt_core::Error::MissingProbability { .. }) => None,
        Err(other) => return Err(other.into()),
    };
    let normalized = |c: f64| StrategyCost { cost: c, normalized: c / opt_cost };
    Ok(CompareReport {
        tree: name.to_string(),
        tree_depth: tree.depth(),
        leaf_count: tree.leaves().len(),
        model_depth: model.target_depth,
        surrogate_opt: normalized(opt_cost),
        standard: normalized(standard_cost),
        swap: swap_cost.map(normalized),
        inverted: normalized(inverted_cost),
    })
}

fn geomean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut log_sum, mut count) = (0.0f64, 0usize);
    for v in values {
        log_sum += v.ln();
        count += 1;
    }
    (count > 0).then(|| (log_sum / count as f64).exp())
}

pub fn summarize(reports: &[CompareReport]) -> GeomeanSummary {
    GeomeanSummary {
        surrogate_opt: geomean(reports.iter().map(|r| r.surrogate_opt.normalized)).unwrap_or(1.0),
        standard: geomean(reports.iter().map(|r| r.standard.normalized)).unwrap_or(1.0),
        swap: geomean(reports.iter().filter_map(|r| r.swap.map(|s| s.normalized))),
        inverted: geomean(reports.iter().map(|r| r.inverted.normalized)).unwrap_or(1.0),
    }
}

pub fn render_table(output: &CompareOutput) -> String {
    let mut text = format!(
        "{:<24} {:>5} {:>6} {:>5} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>9}\n",
        "tree",
        "depth",
        "leaves",
        "model",
        "opt",
        "standard",
        "swap",
        "inverted",
        "std/opt",
        "swap/opt",
        "inv/opt"
    );
    for r in &output.trees {
        let (swap_cost, swap_norm) = match r.swap {
            Some(s) => (format!("{:.2}", s.cost), format!("{:.4}", s.normalized)),
            None => ("-".to_string(), "-".to_string()),
        };
        text.push_str(&format!(
            "{:<24} {:>5} {:>6} {:>5} {:>10.2} {:>10.2} {:>10} {:>10.2} {:>9.4} {:>9} {:>9.4}\n",
            r.tree,
            r.tree_depth,
            r.leaf_count,
            r.model_depth,
            r.surrogate_opt.cost,
            r.standard.cost,
            swap_cost,
            r.inverted.cost,
            r.standard.normalized,
            swap_norm,
            r.inverted.normalized,
        ));
    }
    if output.trees.len() > 1 {
        let swap =
            output.geomean.swap.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".to_string());
        text.push_str(&format!(
            "{:<24} {:>5} {:>6} {:>5} {:>10} {:>10} {:>10} {:>10} {:>9.4} {:>9} {:>9.4}\n",
            "geomean",
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            output.geomean.standard,
            swap,
            output.geomean.inverted,
        ));
    }
    text
}

pub fn render_csv(output: &CompareOutput) -> String {
    let mut text = String::from(
        "tree,tree_depth,leaf_count,model_depth,surrogate_opt,standard,swap,inverted,standard_norm,swap_norm,inverted_norm\n",
    );
    for r in &output.trees {
        let (swap_cost, swap_norm) = match r.swap {
            Some(s) => (s.cost.to_string(), s.normalized.to_string()),
            None => (String::new(), String::new()),
        };
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.tree,
            r.tree_depth,
            r.leaf_count,
            r.model_depth,
            r.surrogate_opt.cost,
            r.standard.cost,
            swap_cost,
            r.inverted.cost,
            r.standard.normalized,
            swap_norm,
            r.inverted.normalized,
        ));
    }
    if output.trees.len() > 1 {
        let swap = output.geomean.swap.map(|v| v.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "geomean,,,,,,,,{},{},{}\n",
            output.geomean.standard, swap, output.geomean.inverted
        ));
    }
    text
}

pub fn render_json(output: &CompareOutput) -> String {
    let mut text = serde_json::to_string_pretty(output).expect("report serialization");
    text.push('\n');
    text
}
