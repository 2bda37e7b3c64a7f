use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hypergraph::{EntityId, EventId, TemporalHypergraph};

/// Number of earliest events whose heads seed a classification walk.
pub const DEFAULT_START_EVENTS: usize = 3;

/// A query against one graph.
///
/// Event queries (`P(x_h, x_t, t)`) carry a target tail and the id of the event
/// itself, which walks and groundings never use. Classification queries ask
/// whether a whole graph carries `predicate` as its label; they have no target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub predicate: String,
    pub heads: Vec<EntityId>,
    pub tail: Option<EntityId>,
    pub event: Option<EventId>,
}

impl Query {
    pub fn for_event(graph: &TemporalHypergraph, id: EventId) -> Result<Query> {
        let e = graph.get_event(id)?;
        if !e.is_b_edge() {
            return Err(Error::NotBGraph(id));
        }
        Ok(Query {
            predicate: graph.predicate_name(e.predicate).to_string(),
            heads: e.heads.clone(),
            tail: Some(e.tail()),
            event: Some(id),
        })
    }

    /// Starts from the head entities of the `k` earliest-starting events.
    pub fn classification(graph: &TemporalHypergraph, label: &str, k: usize) -> Query {
        let mut heads = BTreeSet::new();
        for id in graph.events_by_start().into_iter().take(k) {
            heads.extend(graph.event(id).heads.iter().copied());
        }
        Query { predicate: label.to_string(), heads: heads.into_iter().collect(), tail: None, event: None }
    }

    pub fn is_classification(&self) -> bool {
        self.tail.is_none()
    }

    /// Head and tail counts of the rule head this query induces.
    pub fn arity(&self) -> (usize, usize) {
        if self.is_classification() {
            (0, 0)
        } else {
            (self.heads.len(), 1)
        }
    }
}

/// A query tied to a graph by index into a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphQuery {
    pub graph: usize,
    pub query: Query,
}

/// Positive and negative queries over one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySet {
    pub positives: Vec<GraphQuery>,
    pub negatives: Vec<GraphQuery>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
