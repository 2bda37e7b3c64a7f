//! Qualitative temporal constraint networks and path consistency.

use std::collections::VecDeque;
use std::fmt;

use crate::allen::{classify, compose_sets, BaseRelation, RelationSet};
use crate::error::{Error, Result};
use crate::hypergraph::{EventId, Interval};

/// What a network node stands for: a graph event (walks) or a body atom (rules).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Event(EventId),
    Atom(usize),
}

impl NodeKey {
    fn same_kind(self, other: NodeKey) -> bool {
        matches!((self, other), (NodeKey::Event(_), NodeKey::Event(_)) | (NodeKey::Atom(_), NodeKey::Atom(_)))
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Event(e) => write!(f, "{e}"),
            NodeKey::Atom(i) => write!(f, "{i}"),
        }
    }
}

/// Dense matrix of relation sets with `m[i][i] == {EQUAL}` and `m[j][i] == inverse(m[i][j])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IANetwork {
    keys: Vec<NodeKey>,
    cells: Vec<RelationSet>,
}

impl IANetwork {
    /// Network with every off-diagonal cell unconstrained.
    pub fn unconstrained(keys: Vec<NodeKey>) -> Self {
        let n = keys.len();
        let mut cells = vec![RelationSet::FULL; n * n];
        for i in 0..n {
            cells[i * n + i] = BaseRelation::Equal.into();
        }
        IANetwork { keys, cells }
    }

    pub fn empty() -> Self {
        Self::unconstrained(Vec::new())
    }

    /// Singleton network of concrete intervals.
    pub fn from_observed(events: &[(NodeKey, Interval)]) -> Self {
        let mut net = Self::unconstrained(events.iter().map(|(k, _)| *k).collect());
        for (i, (_, a)) in events.iter().enumerate() {
            for (j, (_, b)) in events.iter().enumerate().skip(i + 1) {
                net.set(i, j, classify(*a, *b).into());
            }
        }
        net
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[NodeKey] {
        &self.keys
    }

    pub fn index_of(&self, key: NodeKey) -> Option<usize> {
        self.keys.iter().position(|&k| k == key)
    }

    pub fn get(&self, i: usize, j: usize) -> RelationSet {
        self.cells[i * self.len() + j]
    }

    /// Sets `m[i][j]` and its inverse cell. Diagonal cells are ignored.
    pub fn set(&mut self, i: usize, j: usize, s: RelationSet) {
        if i == j {
            return;
        }
        let n = self.len();
        self.cells[i * n + j] = s;
        self.cells[j * n + i] = s.inverse();
    }

    pub fn is_consistent(&self) -> bool {
        self.cells.iter().all(|c| !c.is_empty())
    }

    pub fn is_singleton(&self) -> bool {
        self.cells.iter().all(|c| c.is_singleton())
    }

    /// `m[i][j] ⊆ m[i][k] ∘ m[k][j]` for every triple.
    pub fn is_path_consistent(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            (0..n).all(|j| (0..n).all(|k| self.get(i, j).is_subset(compose_sets(self.get(i, k), self.get(k, j)))))
        })
    }

    /// Standard path consistency. Returns the consistency verdict and the refined network;
    /// refinement stops at the first empty cell.
    pub fn resolve_time(&self) -> (bool, IANetwork) {
        let mut net = self.clone();
        let ok = net.resolve_in_place();
        (ok, net)
    }

    /// In-place variant of [`IANetwork::resolve_time`].
    pub fn resolve_in_place(&mut self) -> bool {
        let n = self.len();
        if !self.is_consistent() {
            return false;
        }
        let mut queued = vec![false; n * n];
        let mut queue = VecDeque::new();
        for i in 0..n {
            for j in i + 1..n {
                queue.push_back((i, j));
                queued[i * n + j] = true;
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            queued[i * n + j] = false;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // i -> k through j
                let ik = self.get(i, k);
                let refined = ik.intersect(compose_sets(self.get(i, j), self.get(j, k)));
                if refined != ik {
                    if refined.is_empty() {
                        self.set(i, k, refined);
                        return false;
                    }
                    self.set(i, k, refined);
                    let (a, b) = (i.min(k), i.max(k));
                    if !queued[a * n + b] {
                        queued[a * n + b] = true;
                        queue.push_back((a, b));
                    }
                }
                // k -> j through i
                let kj = self.get(k, j);
                let refined = kj.intersect(compose_sets(self.get(k, i), self.get(i, j)));
                if refined != kj {
                    if refined.is_empty() {
                        self.set(k, j, refined);
                        return false;
                    }
                    self.set(k, j, refined);
                    let (a, b) = (k.min(j), k.max(j));
                    if !queued[a * n + b] {
                        queued[a * n + b] = true;
                        queue.push_back((a, b));
                    }
                }
            }
        }
        true
    }

    /// Appends a node related to existing nodes by `rel(existing_index)`.
    pub fn push_node(&mut self, key: NodeKey, rel: impl Fn(usize) -> RelationSet) {
        let n = self.len();
        let mut next = IANetwork::unconstrained(self.keys.iter().copied().chain([key]).collect());
        for i in 0..n {
            for j in i + 1..n {
                next.set(i, j, self.get(i, j));
            }
            next.set(i, n, rel(i));
        }
        *self = next;
    }

    /// Network restricted to the given node indices, in that order.
    pub fn select(&self, indices: &[usize]) -> IANetwork {
        let mut out = IANetwork::unconstrained(indices.iter().map(|&i| self.keys[i]).collect());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a + 1) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// Same network with node keys replaced, one for one.
    pub fn rekeyed(&self, keys: Vec<NodeKey>) -> Result<IANetwork> {
        if keys.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: keys.len() });
        }
        Ok(IANetwork { keys, cells: self.cells.clone() })
    }

    /// Every off-diagonal cell set to the full relation set.
    pub fn widened(&self) -> IANetwork {
        IANetwork::unconstrained(self.keys.clone())
    }

    /// Textual triples for constrained pairs `i < j`, e.g. `e0 {BEFORE} e3`.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let c = self.get(i, j);
                if !c.is_full() {
                    parts.push(format!("{} {} {}", self.keys[i], c, self.keys[j]));
                }
            }
        }
        parts.join(" ; ")
    }
}

/// Joins two path networks that share `shared` keys and runs path consistency on the result.
///
/// Nodes are identified by key. Cells present in both inputs are intersected and
/// cells between nodes of different paths start unconstrained.
pub fn merge_paths(a: &IANetwork, b: &IANetwork, shared: &[NodeKey]) -> Result<(bool, IANetwork)> {
    if let (Some(&ka), Some(&kb)) = (a.keys.first(), b.keys.first()) {
        if !ka.same_kind(kb) {
            return Err(Error::KeyMismatch("cannot merge event-keyed and atom-keyed networks".into()));
        }
    }
    for &k in shared {
        if a.index_of(k).is_none() || b.index_of(k).is_none() {
            return Err(Error::KeyMismatch(format!("shared key {k} missing from one of the paths")));
        }
    }
    let mut keys = a.keys.clone();
    keys.extend(b.keys.iter().copied().filter(|k| a.index_of(*k).is_none()));
    let mut merged = IANetwork::unconstrained(keys);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            merged.set(i, j, a.get(i, j));
        }
    }
    let b_pos: Vec<usize> = b.keys.iter().map(|k| merged.index_of(*k).expect("key inserted above")).collect();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let (x, y) = (b_pos[i], b_pos[j]);
            let cell = merged.get(x, y).intersect(b.get(i, j));
            merged.set(x, y, cell);
        }
    }
    Ok(merged.resolve_time())
}

/// Widens `rule` so that it admits every relation in `observed`, then closes under path consistency.
pub fn generalize(rule: &IANetwork, observed: &IANetwork) -> Result<IANetwork> {
    if rule.keys != observed.keys {
        return Err(Error::KeyMismatch("generalize needs identical node keys".into()));
    }
    let cells = rule.cells.iter().zip(&observed.cells).map(|(a, b)| a.union(*b)).collect();
    let joined = IANetwork { keys: rule.keys.clone(), cells };
    Ok(joined.resolve_time().1)
}
