//! Abstraction axes and spaces.
//!
//! An axis is a designer-chosen sequence of representations. Steps along
//! it may remove, add, or replace information; axes that touch disjoint
//! sets of visual attributes combine into a space. Axes that start from
//! the same representations and then part ways are reported as forks.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum change in information (bits) that counts as a change.
pub const INFORMATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AxisError {
    #[error("an axis needs at least 2 nodes, got {0}")]
    TooShort(usize),
    #[error("duplicate node id '{0}'")]
    DuplicateNode(String),
    #[error("node '{node}' has invalid information {value}")]
    InvalidInformation { node: String, value: f64 },
    #[error("node '{node}' declares {declared} bits but its alphabet has entropy {entropy}")]
    InformationMismatch { node: String, declared: f64, entropy: f64 },
    #[error("transition index {index} out of range for an axis of {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("a space needs at least 2 axes, got {0}")]
    TooFewAxes(usize),
    #[error("attribute '{tag}' is used by both axis '{axis_a}' and axis '{axis_b}'")]
    OverlappingAttributes {
        tag: String,
        axis_a: String,
        axis_b: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Data,
    Visual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationNode {
    pub id: String,
    pub kind: NodeKind,
    pub alphabet: Option<String>,
    /// Bits; the entropy of `alphabet` when one is modelled.
    pub information: f64,
    pub attributes: BTreeSet<String>,
}

impl RepresentationNode {
    pub fn new(
        id: impl Into<String>,
        kind: NodeKind,
        information: f64,
        attributes: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        RepresentationNode {
            id: id.into(),
            kind,
            alphabet: None,
            information,
            attributes: attributes.into_iter().map(Into::into).collect(),
        }
    }

    /// Attaches a modelled alphabet, checking the declared information against its entropy.
    pub fn with_alphabet(mut self, alphabet: impl Into<String>, entropy: f64) -> Result<Self, AxisError> {
        if (self.information - entropy).abs() > INFORMATION_TOLERANCE {
            return Err(AxisError::InformationMismatch {
                node: self.id,
                declared: self.information,
                entropy,
            });
        }
        self.alphabet = Some(alphabet.into());
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbstractionAxis {
    pub id: String,
    pub purpose: String,
    pub nodes: Vec<RepresentationNode>,
}

impl AbstractionAxis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Every attribute tag carried by any node.
    pub fn attributes(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .flat_map(|n| n.attributes.iter().map(String::as_str))
            .collect()
    }

    pub fn transitions(&self) -> Vec<Transition> {
        (0..self.nodes.len() - 1)
            .map(|i| classify(&self.nodes[i], &self.nodes[i + 1]))
            .collect()
    }

    /// Whether information strictly decreases at every step.
    pub fn is_monotone_decreasing(&self) -> bool {
        self.nodes
            .windows(2)
            .all(|w| w[1].information < w[0].information - INFORMATION_TOLERANCE)
    }
}

pub fn build_axis(
    id: impl Into<String>,
    nodes: Vec<RepresentationNode>,
    purpose: impl Into<String>,
) -> Result<AbstractionAxis, AxisError> {
    if nodes.len() < 2 {
        return Err(AxisError::TooShort(nodes.len()));
    }
    if let Some(dup) = nodes.iter().map(|n| &n.id).duplicates().next() {
        return Err(AxisError::DuplicateNode(dup.clone()));
    }
    if let Some(n) = nodes.iter().find(|n| !n.information.is_finite() || n.information < 0.0) {
        return Err(AxisError::InvalidInformation {
            node: n.id.clone(),
            value: n.information,
        });
    }
    Ok(AbstractionAxis {
        id: id.into(),
        purpose: purpose.into(),
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    Removes,
    Adds,
    RemovesAndAdds,
    Preserves,
}

fn classify(a: &RepresentationNode, b: &RepresentationNode) -> Transition {
    let decreases = b.information < a.information - INFORMATION_TOLERANCE;
    let increases = b.information > a.information + INFORMATION_TOLERANCE;
    let has_attributes = !a.attributes.is_empty() && !b.attributes.is_empty();
    let lost = has_attributes && a.attributes.difference(&b.attributes).next().is_some();
    let gained = has_attributes && b.attributes.difference(&a.attributes).next().is_some();
    match (lost, gained) {
        (true, true) => Transition::RemovesAndAdds,
        // Attributes dropped while the total held or grew: detail was replaced.
        (true, false) if decreases => Transition::Removes,
        (true, false) => Transition::RemovesAndAdds,
        (false, true) if increases => Transition::Adds,
        (false, true) => Transition::RemovesAndAdds,
        (false, false) if decreases => Transition::Removes,
        (false, false) if increases => Transition::Adds,
        (false, false) => Transition::Preserves,
    }
}

/// Classifies the step from node `i` to node `i + 1`.
pub fn classify_transition(axis: &AbstractionAxis, i: usize) -> Result<Transition, AxisError> {
    if i + 1 >= axis.nodes.len() {
        return Err(AxisError::IndexOutOfRange {
            index: i,
            len: axis.nodes.len(),
        });
    }
    Ok(classify(&axis.nodes[i], &axis.nodes[i + 1]))
}

/// Independent axes; a point picks one node index per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbstractionSpace {
    pub axes: Vec<AbstractionAxis>,
}

impl AbstractionSpace {
    pub fn dimensions(&self) -> Vec<usize> {
        self.axes.iter().map(AbstractionAxis::len).collect()
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(AbstractionAxis::len).product()
    }

    /// All points, the last axis varying fastest.
    pub fn points(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.axes.iter().map(|a| 0..a.len()).multi_cartesian_product()
    }

    pub fn node_ids(&self, point: &[usize]) -> Vec<&str> {
        self.axes
            .iter()
            .zip(point)
            .map(|(a, &i)| a.nodes[i].id.as_str())
            .collect()
    }
}

pub fn combine_space(axes: Vec<AbstractionAxis>) -> Result<AbstractionSpace, AxisError> {
    if axes.len() < 2 {
        return Err(AxisError::TooFewAxes(axes.len()));
    }
    for (i, j) in (0..axes.len()).tuple_combinations() {
        let (a, b) = (axes[i].attributes(), axes[j].attributes());
        if let Some(tag) = a.intersection(&b).next() {
            return Err(AxisError::OverlappingAttributes {
                tag: tag.to_string(),
                axis_a: axes[i].id.clone(),
                axis_b: axes[j].id.clone(),
            });
        }
    }
    Ok(AbstractionSpace { axes })
}

/// Two axes sharing their first `shared` nodes before diverging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForkPoint {
    pub axis_a: String,
    pub axis_b: String,
    pub shared: usize,
    /// The last shared node.
    pub node: String,
}

/// Pairwise forks: a non-empty shared node-id prefix after which both axes continue differently.
pub fn detect_fork(axes: &[AbstractionAxis]) -> Vec<ForkPoint> {
    (0..axes.len())
        .tuple_combinations()
        .filter_map(|(i, j)| {
            let (a, b) = (&axes[i], &axes[j]);
            let shared = a.nodes.iter().zip(&b.nodes).take_while(|(x, y)| x.id == y.id).count();
            let diverges = shared < a.len() && shared < b.len();
            (shared >= 1 && diverges).then(|| ForkPoint {
                axis_a: a.id.clone(),
                axis_b: b.id.clone(),
                shared,
                node: a.nodes[shared - 1].id.clone(),
            })
        })
        .collect()
}
