//! Crate-wide error type.

use std::fmt;

use crate::tree::{NodeId, Violation};

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Structural validation failed; carries every violation found.
    MalformedTree {
        violations: Vec<Violation>,
    },
    /// Feature vector length does not match the tree's feature count.
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    /// Labeling domain differs from the tree's inner-node set.
    LabelingMismatch {
        reason: String,
    },
    /// Model table has no entries.
    EmptyTable,
    /// Model table entries are not strictly increasing in target depth.
    InvalidTable {
        reason: String,
    },
    /// Probability-driven labeling requested on a tree with an unannotated node.
    MissingProbability {
        node: NodeId,
    },
    /// Exhaustive labeling search refused: too many inner nodes.
    TooLarge {
        inner_nodes: usize,
        limit: usize,
    },
    TooFewSamples {
        got: usize,
        need: usize,
    },
    /// Design matrix is rank deficient in a way the depth-constant rule does not cover.
    Underdetermined,
    LengthMismatch {
        left: usize,
        right: usize,
    },
    Empty,
    TooShort {
        got: usize,
    },
    /// Malformed sample CSV; `line` is 1-based.
    Csv {
        line: usize,
        reason: String,
    },
    /// No input reaches this leaf: the path's feature constraints are contradictory.
    InfeasiblePath {
        leaf: NodeId,
        feature: usize,
    },
    NotALeaf {
        node: NodeId,
    },
    InvalidIdentifier {
        name: String,
    },
    InvalidConfig {
        reason: String,
    },
    Json {
        reason: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MalformedTree { violations } => {
                write!(f, "malformed tree ({} violation(s)):", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "feature vector has {got} entries, tree expects {expected}")
            }
            Error::LabelingMismatch { reason } => write!(f, "labeling mismatch: {reason}"),
            Error::EmptyTable => write!(f, "model table is empty"),
            Error::InvalidTable { reason } => write!(f, "invalid model table: {reason}"),
            Error::MissingProbability { node } => {
                write!(f, "node {node} carries no probability (required by this strategy)")
            }
            Error::TooLarge { inner_nodes, limit } => write!(
                f,
                "tree has {inner_nodes} inner nodes; exhaustive search limited to {limit}"
            ),
            Error::TooFewSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
            Error::Underdetermined => {
                write!(f, "design matrix is rank deficient; parameters are not identifiable")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} != {right}")
            }
            Error::Empty => write!(f, "empty input"),
            Error::TooShort { got } => write!(f, "need at least 2 values, got {got}"),
            Error::Csv { line, reason } => write!(f, "csv line {line}: {reason}"),
            Error::InfeasiblePath { leaf, feature } => {
                write!(f, "path to leaf {leaf} is infeasible: empty interval for feature {feature}")
            }
            Error::NotALeaf { node } => write!(f, "node {node} is not a leaf"),
            Error::InvalidIdentifier { name } => {
                write!(f, "'{name}' is not a valid C identifier")
            }
            Error::InvalidConfig { reason } => write!(f, "invalid configuration: {reason}"),
            Error::Json { reason } => write!(f, "json: {reason}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json { reason: e.to_string() }
    }
}
