//! In-memory temporal hypergraph.
//!
//! Entities and predicates are interned into dense ids. Events keep their
//! head and tail sets sorted by entity id, and the graph maintains head,
//! tail and predicate indices that the walk and the rule matcher read.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub usize);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Closed interval of integer ticks. Point intervals (`start == end`) are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub start: i64,
    pub end: i64,
}

impl Interval {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Interval { start, end })
    }

    pub fn point(t: i64) -> Self {
        Interval { start: t, end: t }
    }

    pub fn duration(&self) -> i64 {
        self.end - self.start
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadArity {
    Exactly(usize),
    Variadic,
}

/// Class predicates label a single entity (`heads == tails == {x}`), e.g. `Oil`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PredicateKind {
    #[default]
    Relation,
    Class,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateInfo {
    pub name: String,
    pub head_arity: HeadArity,
    pub tail_arity: usize,
    pub kind: PredicateKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub predicate: PredicateId,
    pub heads: Vec<EntityId>,
    pub tails: Vec<EntityId>,
    pub interval: Interval,
}

impl Event {
    pub fn is_b_edge(&self) -> bool {
        self.tails.len() == 1
    }

    /// The single tail of a B-edge.
    pub fn tail(&self) -> EntityId {
        self.tails[0]
    }

    pub fn is_unary(&self) -> bool {
        self.heads.len() == 1 && self.heads == self.tails
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl SymbolTable {
    fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    fn get(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }
}

pub(crate) fn validate_name(name: &str) -> Result<()> {
    if name.is_empty()
        || name.trim() != name
        || name.contains(['|', ',', '\n', '\r', '#', '(', ')'])
        || name.contains(char::is_whitespace)
    {
        return Err(Error::ReservedName(name.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct TemporalHypergraph {
    entities: SymbolTable,
    predicates: SymbolTable,
    predicate_info: Vec<PredicateInfo>,
    events: Vec<Event>,
    head_index: Vec<Vec<EventId>>,
    tail_index: Vec<Vec<EventId>>,
    predicate_index: Vec<Vec<EventId>>,
    label: Option<String>,
}

impl PartialEq for TemporalHypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.predicate_info == other.predicate_info
            && self.entities.names == other.entities.names
            && self.events == other.events
    }
}

impl TemporalHypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: Option<String>) {
        self.label = label;
    }

    pub fn intern_entity(&mut self, name: &str) -> Result<EntityId> {
        validate_name(name)?;
        let id = self.entities.intern(name);
        if id == self.head_index.len() {
            self.head_index.push(Vec::new());
            self.tail_index.push(Vec::new());
        }
        Ok(EntityId(id))
    }

    /// Marks `name` as a class predicate. Must happen before any event uses it.
    pub fn declare_class(&mut self, name: &str) -> Result<PredicateId> {
        validate_name(name)?;
        if let Some(id) = self.predicates.get(name) {
            let info = &mut self.predicate_info[id];
            if info.kind != PredicateKind::Class && !self.predicate_index[id].is_empty() {
                return Err(Error::ArityMismatch {
                    name: name.to_string(),
                    detail: "already used as a relation".into(),
                });
            }
            info.kind = PredicateKind::Class;
            return Ok(PredicateId(id));
        }
        let id = self.predicates.intern(name);
        self.predicate_info.push(PredicateInfo {
            name: name.to_string(),
            head_arity: HeadArity::Exactly(1),
            tail_arity: 1,
            kind: PredicateKind::Class,
        });
        self.predicate_index.push(Vec::new());
        Ok(PredicateId(id))
    }

    fn intern_predicate(&mut self, name: &str, heads: usize, tails: usize) -> Result<PredicateId> {
        validate_name(name)?;
        if let Some(id) = self.predicates.get(name) {
            let info = &mut self.predicate_info[id];
            let fresh = self.predicate_index[id].is_empty() && info.kind == PredicateKind::Relation;
            if fresh {
                info.head_arity = HeadArity::Exactly(heads);
                info.tail_arity = tails;
                return Ok(PredicateId(id));
            }
            if info.tail_arity != tails {
                return Err(Error::ArityMismatch {
                    name: name.to_string(),
                    detail: format!("declared {} tails, event has {}", info.tail_arity, tails),
                });
            }
            if let HeadArity::Exactly(n) = info.head_arity {
                if n != heads {
                    if info.kind == PredicateKind::Class {
                        return Err(Error::ArityMismatch {
                            name: name.to_string(),
                            detail: "class facts take exactly one entity".into(),
                        });
                    }
                    info.head_arity = HeadArity::Variadic;
                }
            }
            return Ok(PredicateId(id));
        }
        let id = self.predicates.intern(name);
        self.predicate_info.push(PredicateInfo {
            name: name.to_string(),
            head_arity: HeadArity::Exactly(heads),
            tail_arity: tails,
            kind: PredicateKind::Relation,
        });
        self.predicate_index.push(Vec::new());
        Ok(PredicateId(id))
    }

    /// Adds an event by names, interning unseen entities and predicates.
    pub fn add_event(
        &mut self,
        predicate: &str,
        heads: &[&str],
        tails: &[&str],
        interval: Interval,
    ) -> Result<EventId> {
        check_names(heads, "head")?;
        check_names(tails, "tail")?;
        if interval.start > interval.end {
            return Err(Error::InvalidInterval { start: interval.start, end: interval.end });
        }
        for name in heads.iter().chain(tails) {
            validate_name(name)?;
        }
        validate_name(predicate)?;
        let head_ids = heads.iter().map(|h| self.intern_entity(h)).collect::<Result<Vec<_>>>()?;
        let tail_ids = tails.iter().map(|t| self.intern_entity(t)).collect::<Result<Vec<_>>>()?;
        self.add_event_ids(predicate, head_ids, tail_ids, interval)
    }

    /// Adds an event over already-interned entities.
    pub fn add_event_ids(
        &mut self,
        predicate: &str,
        mut heads: Vec<EntityId>,
        mut tails: Vec<EntityId>,
        interval: Interval,
    ) -> Result<EventId> {
        if heads.is_empty() {
            return Err(Error::EmptyEntitySet("head"));
        }
        if tails.is_empty() {
            return Err(Error::EmptyEntitySet("tail"));
        }
        if interval.start > interval.end {
            return Err(Error::InvalidInterval { start: interval.start, end: interval.end });
        }
        for &x in heads.iter().chain(&tails) {
            if x.0 >= self.entities.names.len() {
                return Err(Error::UnknownEntityId(x.0));
            }
        }
        heads.sort_unstable();
        tails.sort_unstable();
        if let Some(w) = heads.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEntity { side: "head", name: self.entity_name(w[0]).to_string() });
        }
        if let Some(w) = tails.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEntity { side: "tail", name: self.entity_name(w[0]).to_string() });
        }
        if let Some(id) = self.predicates.get(predicate) {
            if self.predicate_info[id].kind == PredicateKind::Class && !(heads.len() == 1 && heads == tails) {
                return Err(Error::ArityMismatch {
                    name: predicate.to_string(),
                    detail: "class facts need heads == tails == {x}".into(),
                });
            }
        }
        let pred = self.intern_predicate(predicate, heads.len(), tails.len())?;
        let id = EventId(self.events.len());
        for &h in &heads {
            self.head_index[h.0].push(id);
        }
        for &t in &tails {
            self.tail_index[t.0].push(id);
        }
        self.predicate_index[pred.0].push(id);
        self.events.push(Event { id, predicate: pred, heads, tails, interval });
        Ok(id)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.names.len()
    }

    pub fn num_predicates(&self) -> usize {
        self.predicates.names.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id.0]
    }

    pub fn get_event(&self, id: EventId) -> Result<&Event> {
        self.events.get(id.0).ok_or(Error::UnknownEvent(id))
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities.names[id.0]
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entities.names.len()).map(EntityId)
    }

    pub fn predicate_id(&self, name: &str) -> Option<PredicateId> {
        self.predicates.get(name).map(PredicateId)
    }

    pub fn predicate_name(&self, id: PredicateId) -> &str {
        &self.predicates.names[id.0]
    }

    pub fn predicate_info(&self, id: PredicateId) -> &PredicateInfo {
        &self.predicate_info[id.0]
    }

    pub fn predicates(&self) -> &[PredicateInfo] {
        &self.predicate_info
    }

    pub fn is_class_event(&self, id: EventId) -> bool {
        self.predicate_info[self.events[id.0].predicate.0].kind == PredicateKind::Class
    }

    pub fn head_events(&self, x: EntityId) -> &[EventId] {
        &self.head_index[x.0]
    }

    pub fn tail_events(&self, x: EntityId) -> &[EventId] {
        &self.tail_index[x.0]
    }

    pub fn predicate_events(&self, p: PredicateId) -> &[EventId] {
        &self.predicate_index[p.0]
    }

    /// Number of distinct events with `x` in the head set.
    pub fn out_degree(&self, x: EntityId) -> Result<usize> {
        self.head_index.get(x.0).map(Vec::len).ok_or(Error::UnknownEntityId(x.0))
    }

    pub fn out_degree_by_name(&self, name: &str) -> Result<usize> {
        let id = self.entity_id(name).ok_or_else(|| Error::UnknownEntity(name.to_string()))?;
        self.out_degree(id)
    }

    pub fn is_b_graph(&self) -> bool {
        self.events.iter().all(Event::is_b_edge)
    }

    pub fn first_non_b_edge(&self) -> Option<EventId> {
        self.events.iter().find(|e| !e.is_b_edge()).map(|e| e.id)
    }

    /// Events not yet traversed whose whole head set is reached, in ascending id order.
    pub fn enabled_edges(&self, reached: &BTreeSet<EntityId>, traversed: &BTreeSet<EventId>) -> Vec<EventId> {
        self.enabled_edges_with(|x| reached.contains(&x), |e| traversed.contains(&e))
    }

    pub fn enabled_edges_with(
        &self,
        reached: impl Fn(EntityId) -> bool,
        traversed: impl Fn(EventId) -> bool,
    ) -> Vec<EventId> {
        self.events
            .iter()
            .filter(|e| !traversed(e.id) && e.heads.iter().all(|&h| reached(h)))
            .map(|e| e.id)
            .collect()
    }

    /// Earliest start and latest end over all events.
    pub fn span(&self) -> Option<Interval> {
        let start = self.events.iter().map(|e| e.interval.start).min()?;
        let end = self.events.iter().map(|e| e.interval.end).max()?;
        Some(Interval { start, end })
    }

    /// Event ids sorted by (start, id).
    pub fn events_by_start(&self) -> Vec<EventId> {
        let mut ids: Vec<EventId> = self.events.iter().map(|e| e.id).collect();
        ids.sort_by_key(|&id| (self.events[id.0].interval.start, id));
        ids
    }

    /// Rebuilds head and tail indices from the event list alone.
    pub fn rebuilt_indices(&self) -> (Vec<Vec<EventId>>, Vec<Vec<EventId>>) {
        let mut heads = vec![Vec::new(); self.num_entities()];
        let mut tails = vec![Vec::new(); self.num_entities()];
        for e in &self.events {
            for h in &e.heads {
                heads[h.0].push(e.id);
            }
            for t in &e.tails {
                tails[t.0].push(e.id);
            }
        }
        (heads, tails)
    }

    pub fn indices(&self) -> (&[Vec<EventId>], &[Vec<EventId>]) {
        (&self.head_index, &self.tail_index)
    }
}

fn check_names(names: &[&str], side: &'static str) -> Result<()> {
    if names.is_empty() {
        return Err(Error::EmptyEntitySet(side));
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(*n) {
            return Err(Error::DuplicateEntity { side, name: n.to_string() });
        }
    }
    Ok(())
}
