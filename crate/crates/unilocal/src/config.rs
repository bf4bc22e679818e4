//! Configurations: a graph plus one input record per node, and the output
//! values nodes produce.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{induced_subgraph_with_map, Graph};

/// A strong list-coloring list: the rectangle `[1, classes] x [1, copies]`
/// minus the elements in `removed`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorList {
    classes: u64,
    copies: u64,
    removed: BTreeSet<(u64, u64)>,
}

impl ColorList {
    pub fn full(classes: u64, copies: u64) -> Self {
        ColorList { classes, copies, removed: BTreeSet::new() }
    }

    /// Exactly the given elements; all must lie inside the rectangle.
    pub fn from_elements(classes: u64, copies: u64, elements: &[(u64, u64)]) -> Self {
        let keep: BTreeSet<_> = elements.iter().copied().collect();
        let mut list = ColorList::full(classes, copies);
        for k in 1..=classes {
            for j in 1..=copies {
                if !keep.contains(&(k, j)) {
                    list.removed.insert((k, j));
                }
            }
        }
        list
    }

    pub fn classes(&self) -> u64 {
        self.classes
    }

    pub fn copies(&self) -> u64 {
        self.copies
    }

    pub fn contains(&self, (k, j): (u64, u64)) -> bool {
        (1..=self.classes).contains(&k) && (1..=self.copies).contains(&j) && !self.removed.contains(&(k, j))
    }

    pub fn remove(&mut self, c: (u64, u64)) {
        if self.contains(c) {
            self.removed.insert(c);
        }
    }

    /// Number of `j` with `(k, j)` in the list.
    pub fn copies_of(&self, k: u64) -> u64 {
        if !(1..=self.classes).contains(&k) {
            return 0;
        }
        let gone = self.removed.range((k, 0)..=(k, u64::MAX)).count() as u64;
        self.copies - gone
    }

    /// Smallest `j` with `(k, j)` in the list.
    pub fn first_copy(&self, k: u64) -> Option<u64> {
        if !(1..=self.classes).contains(&k) {
            return None;
        }
        (1..=self.copies).find(|&j| !self.removed.contains(&(k, j)))
    }

    pub fn len(&self) -> u64 {
        self.classes * self.copies - self.removed.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (1..=self.classes)
            .flat_map(move |k| (1..=self.copies).map(move |j| (k, j)))
            .filter(move |c| !self.removed.contains(c))
    }
}

/// A node's output, a tentative output, or a phase result.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Int(u64),
    Pair(u64, u64),
    /// Result of a pruning round at one node: whether it was pruned, the
    /// value it keeps if so, and the list elements its residual list loses.
    Verdict { pruned: bool, keep: Box<Value>, strip: Vec<(u64, u64)> },
}

impl Value {
    /// The default output of a node that has not produced one.
    pub fn zero() -> Self {
        Value::Int(0)
    }

    pub fn as_int(&self) -> Option<u64> {
        match *self {
            Value::Int(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(u64, u64)> {
        match *self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// 0/1 reading used by set problems: only `Int(1)` counts as selected.
    pub fn selected(&self) -> bool {
        *self == Value::Int(1)
    }
}

impl Default for Value {
    fn default() -> Self {
        Value::zero()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Pair(a, b) => write!(f, "({a},{b})"),
            Value::Verdict { pruned, keep, strip } => write!(f, "verdict({pruned},{keep},{})", strip.len()),
        }
    }
}

/// Per-node input record. The identity is part of the input.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Input {
    pub id: u64,
    /// An initial proper coloring, when the problem provides one.
    pub color: Option<u64>,
    /// Shared upper bound on the maximum degree (strong list-coloring).
    pub delta_hat: Option<u64>,
    pub lists: Option<ColorList>,
    /// Output handed over from the previous phase of a composition.
    pub carried: Option<Value>,
}

impl Input {
    pub fn plain(id: u64) -> Self {
        Input { id, ..Input::default() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("expected {expected} input records, got {got}")]
    Length { expected: usize, got: usize },
    #[error("input of node {node} carries identity {found}, graph says {expected}")]
    IdMismatch { node: usize, expected: u64, found: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub graph: Graph,
    pub inputs: Vec<Input>,
}

impl Configuration {
    pub fn new(graph: Graph, inputs: Vec<Input>) -> Result<Self, ConfigError> {
        if inputs.len() != graph.n() {
            return Err(ConfigError::Length { expected: graph.n(), got: inputs.len() });
        }
        for (v, inp) in inputs.iter().enumerate() {
            if inp.id != graph.id(v) {
                return Err(ConfigError::IdMismatch { node: v, expected: graph.id(v), found: inp.id });
            }
        }
        Ok(Configuration { graph, inputs })
    }

    /// Inputs carrying only the identities.
    pub fn plain(graph: Graph) -> Self {
        let inputs = graph.ids().iter().map(|&id| Input::plain(id)).collect();
        Configuration { graph, inputs }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Induced sub-configuration on `keep`, with the origin index of each kept node.
    pub fn restrict_to(&self, keep: &[usize]) -> (Configuration, Vec<usize>) {
        let (graph, origin) = induced_subgraph_with_map(&self.graph, keep);
        let inputs = origin.iter().map(|&v| self.inputs[v].clone()).collect();
        (Configuration { graph, inputs }, origin)
    }

    /// Same configuration with `inputs[v].carried = Some(values[v])`.
    pub fn with_carried(&self, values: &[Value]) -> Configuration {
        let mut c = self.clone();
        for (inp, v) in c.inputs.iter_mut().zip(values) {
            inp.carried = Some(v.clone());
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_list_counts() {
        let mut l = ColorList::full(3, 4);
        assert_eq!(l.len(), 12);
        l.remove((2, 1));
        l.remove((2, 3));
        l.remove((9, 9));
        assert_eq!(l.copies_of(2), 2);
        assert_eq!(l.first_copy(2), Some(2));
        assert!(!l.contains((2, 1)));
        assert!(!l.contains((4, 1)));
        assert_eq!(l.elements().count(), 10);
        let e = ColorList::from_elements(2, 2, &[(1, 2)]);
        assert_eq!(e.elements().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn configuration_checks_ids() {
        let g = Graph::with_sequential_ids(2, &[(0, 1)]).unwrap();
        assert!(Configuration::new(g.clone(), vec![Input::plain(1)]).is_err());
        assert!(Configuration::new(g.clone(), vec![Input::plain(1), Input::plain(3)]).is_err());
        let c = Configuration::new(g, vec![Input::plain(1), Input::plain(2)]).unwrap();
        let (sub, origin) = c.restrict_to(&[1]);
        assert_eq!(origin, vec![1]);
        assert_eq!(sub.inputs[0].id, 2);
    }
}
