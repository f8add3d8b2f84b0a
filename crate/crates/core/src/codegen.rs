//! C source emission for a tree under a labeling, plus an interpreter that
//! walks the exact branch structure of the emitted code.
//!
//! The untaken child's block always comes first (the fall-through position)
//! and the taken child's block follows as the else-branch. When the taken
//! child is the left one, the emitted comparison is inverted from `<=` to
//! strict `>`, so equality with the threshold keeps selecting the left
//! child in both layouts.

use std::fmt::Write as _;

use crate::error::Error;
use crate::tree::{ChildSide, DecisionTree, Labeling, Node, NodeId};

/// C type of the feature array elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureType {
    Float32,
    Float64,
    Int32,
}

impl FeatureType {
    pub fn c_name(self) -> &'static str {
        match self {
            FeatureType::Float32 => "float",
            FeatureType::Float64 => "double",
            FeatureType::Int32 => "int",
        }
    }
}

/// C type of the prediction returned by the emitted function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnType {
    Int32,
    Float64,
}

impl ReturnType {
    pub fn c_name(self) -> &'static str {
        match self {
            ReturnType::Int32 => "int",
            ReturnType::Float64 => "double",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmitConfig {
    pub function_name: String,
    pub feature_type: FeatureType,
    pub return_type: ReturnType,
    /// Also emit a `main` reading features from argv and printing the
    /// prediction, for compile-and-run smoke tests.
    pub include_main: bool,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            function_name: "predict".to_string(),
            feature_type: FeatureType::Float64,
            return_type: ReturnType::Float64,
            include_main: false,
        }
    }
}

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while",
];

fn check_identifier(name: &str) -> Result<(), Error> {
    let mut chars = name.chars();
    let valid_start = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    let valid_rest = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid_start || !valid_rest || C_KEYWORDS.contains(&name) {
        return Err(Error::InvalidIdentifier { name: name.to_string() });
    }
    Ok(())
}

/// Shortest decimal text that parses back to exactly the same value in the
/// chosen feature type. A trailing `.0` keeps integral values recognizable
/// as floating literals.
fn format_threshold(threshold: f64, feature_type: FeatureType) -> String {
    match feature_type {
        FeatureType::Float32 => {
            let mut text = format!("{}", threshold as f32);
            if !text.contains('.') && !text.contains('e') {
                text.push_str(".0");
            }
            text.push('f');
            text
        }
        // Integer features compare against a double literal; the usual
        // arithmetic conversions keep the boundary exact.
        FeatureType::Float64 | FeatureType::Int32 => {
            let mut text = format!("{threshold}");
            if !text.contains('.') && !text.contains('e') {
                text.push_str(".0");
            }
            text
        }
    }
}

fn format_prediction(prediction: f64, return_type: ReturnType) -> String {
    match return_type {
        ReturnType::Int32 if prediction.fract() == 0.0 && prediction.abs() < 2e9 => {
            format!("{}", prediction as i64)
        }
        ReturnType::Int32 | ReturnType::Float64 => {
            let mut text = format!("{prediction}");
            if !text.contains('.') && !text.contains('e') {
                text.push_str(".0");
            }
            text
        }
    }
}

/// Renders the tree as one C99 function of nested if-else blocks honoring
/// the labeling. Deterministic: identical inputs produce byte-identical
/// source. Nesting is handled iteratively, so depth is not limited by the
/// emitter's own stack.
pub fn emit_c(
    tree: &DecisionTree,
    labeling: &Labeling,
    config: &EmitConfig,
) -> Result<String, Error> {
    check_identifier(&config.function_name)?;
    labeling.validate_for(tree)?;

    let mut out = String::new();
    if config.include_main {
        out.push_str("#include <stdio.h>\n#include <stdlib.h>\n\n");
    }
    let _ = writeln!(
        out,
        "{} {}(const {} *x) {{",
        config.return_type.c_name(),
        config.function_name,
        config.feature_type.c_name()
    );

    enum Item {
        Node { id: NodeId, indent: usize },
        Text(&'static str, usize),
    }
    let mut stack = vec![Item::Node { id: tree.root(), indent: 1 }];
    while let Some(item) = stack.pop() {
        match item {
            Item::Text(text, indent) => {
                let _ = writeln!(out, "{}{}", "  ".repeat(indent), text);
            }
            Item::Node { id, indent } => {
                let pad = "  ".repeat(indent);
                match tree.node(id) {
                    Node::Leaf { prediction, .. } => {
                        let _ = writeln!(
                            out,
                            "{pad}return {};",
                            format_prediction(*prediction, config.return_type)
                        );
                    }
                    Node::Inner { feature, threshold, left, right, .. } => {
                        let taken = labeling.taken_side(id).expect("validated domain");
                        let literal = format_threshold(*threshold, config.feature_type);
                        let (condition, untaken_child, taken_child) = match taken {
                            ChildSide::Right => {
                                (format!("x[{feature}] <= {literal}"), *left, *right)
                            }
                            ChildSide::Left => (format!("x[{feature}] > {literal}"), *right, *left),
                        };
                        let _ = writeln!(out, "{pad}if ({condition}) {{");
                        stack.push(Item::Text("}", indent));
                        stack.push(Item::Node { id: taken_child, indent: indent + 1 });
                        stack.push(Item::Text("} else {", indent));
                        stack.push(Item::Node { id: untaken_child, indent: indent + 1 });
                    }
                }
            }
        }
    }
    out.push_str("}\n");

    if config.include_main {
        let n = tree.num_features();
        let array_len = n.max(1);
        let feat = config.feature_type.c_name();
        out.push('\n');
        out.push_str("int main(int argc, char **argv) {\n");
        let _ = writeln!(out, "  {feat} x[{array_len}];");
        out.push_str("  int i;\n");
        let _ = writeln!(out, "  for (i = 0; i < {n} && i + 1 < argc; i++) {{");
        let read = match config.feature_type {
            FeatureType::Float32 => "x[i] = (float) atof(argv[i + 1]);",
            FeatureType::Float64 => "x[i] = atof(argv[i + 1]);",
            FeatureType::Int32 => "x[i] = atoi(argv[i + 1]);",
        };
        let _ = writeln!(out, "    {read}");
        out.push_str("  }\n");
        let print = match config.return_type {
            ReturnType::Int32 => format!("  printf(\"%d\\n\", {}(x));\n", config.function_name),
            ReturnType::Float64 => format!("  printf(\"%g\\n\", {}(x));\n", config.function_name),
        };
        out.push_str(&print);
        out.push_str("  return 0;\n}\n");
    }

    Ok(out)
}

/// One evaluated branch condition in the emitted code: `condition_true`
/// means execution fell through into the untaken block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub node: NodeId,
    pub condition_true: bool,
}

/// Executes the branch structure [`emit_c`] would emit, without a compiler.
///
/// Returns the prediction and the per-node condition outcomes; the number of
/// false outcomes is the path's taken-branch count.
pub fn interpret_emitted(
    tree: &DecisionTree,
    labeling: &Labeling,
    x: &[f64],
) -> Result<(f64, Vec<TraceStep>), Error> {
    labeling.validate_for(tree)?;
    if x.len() != tree.num_features() {
        return Err(Error::DimensionMismatch { expected: tree.num_features(), got: x.len() });
    }
    let mut trace = Vec::new();
    let mut current = tree.root();
    loop {
        match tree.node(current) {
            Node::Leaf { prediction, .. } => return Ok((*prediction, trace)),
            Node::Inner { feature, threshold, left, right, .. } => {
                let taken = labeling.taken_side(current).expect("validated domain");
                let (condition_true, untaken_child, taken_child) = match taken {
                    ChildSide::Right => (x[*feature] <= *threshold, *left, *right),
                    ChildSide::Left => (x[*feature] > *threshold, *right, *left),
                };
                trace.push(TraceStep { node: current, condition_true });
                current = if condition_true { untaken_child } else { taken_child };
            }
        }
    }
}

/// Taken-branch count of a trace: conditions that evaluated false.
pub fn trace_taken_count(trace: &[TraceStep]) -> usize {
    trace.iter().filter(|step| !step.condition_true).count()
}
