//! Multi-start random B-walks.
//!
//! A walk starts from a set of jointly reached entities and only traverses
//! B-edges whose whole head set is already reached. Each enabled edge `e`
//! carries the score `min_{h ∈ heads(e)} mass(h) / out_degree(h)`; the sampler
//! picks among enabled edges proportionally to that score, and the tail's
//! arrival mass records the unnormalized score.
//!
//! Every start entity roots its own path. Events are attached to the path(s)
//! of their heads; when an edge joins two paths their temporal networks are
//! merged with [`merge_paths`] and closed under path consistency. A walk whose
//! merge is inconsistent is discarded.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allen::{classify, RelationSet};
use crate::constraints::{merge_paths, IANetwork, NodeKey};
use crate::error::{Error, Result};
use crate::hypergraph::{EntityId, EventId, TemporalHypergraph};
use crate::query::Query;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkParams {
    pub max_steps: usize,
    pub num_walks: usize,
    pub seed: u64,
    pub record_temporal: bool,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { max_steps: 4, num_walks: 200, seed: 0, record_temporal: true }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
        }
        if self.num_walks == 0 {
            return Err(Error::InvalidParameter("num_walks must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct WalkState {
    pub reached: BTreeSet<EntityId>,
    pub arrival_mass: BTreeMap<EntityId, f64>,
    pub trace: Vec<EventId>,
    pub step: usize,
    traversed: BTreeSet<EventId>,
    record_temporal: bool,
    // path bookkeeping: entity -> path it was first reached on, union-find over paths
    origin: BTreeMap<EntityId, usize>,
    parent: Vec<usize>,
    path_nets: Vec<IANetwork>,
    merged: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved(EventId),
    DeadEnd,
    Inconsistent,
}

/// Starts a walk with unit mass on every start entity.
pub fn init_walk(graph: &TemporalHypergraph, starts: &[EntityId], record_temporal: bool) -> Result<WalkState> {
    if starts.is_empty() {
        return Err(Error::EmptyStartSet);
    }
    if let Some(e) = graph.first_non_b_edge() {
        return Err(Error::NotBGraph(e));
    }
    for &s in starts {
        if s.0 >= graph.num_entities() {
            return Err(Error::UnknownEntityId(s.0));
        }
    }
    let reached: BTreeSet<EntityId> = starts.iter().copied().collect();
    let origin: BTreeMap<EntityId, usize> = reached.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = reached.len();
    Ok(WalkState {
        arrival_mass: reached.iter().map(|&s| (s, 1.0)).collect(),
        reached,
        trace: Vec::new(),
        step: 0,
        traversed: BTreeSet::new(),
        record_temporal,
        origin,
        parent: (0..n).collect(),
        path_nets: vec![IANetwork::empty(); n],
        merged: vec![false; n],
    })
}

impl WalkState {
    /// Marks an event as unavailable without traversing it (e.g. the query event itself).
    pub fn exclude(&mut self, e: EventId) {
        self.traversed.insert(e);
    }

    pub fn is_traversed(&self, e: EventId) -> bool {
        self.traversed.contains(&e)
    }

    pub fn enabled_edges(&self, graph: &TemporalHypergraph) -> Vec<EventId> {
        let mut out: Vec<EventId> = self
            .reached
            .iter()
            .flat_map(|&x| graph.head_events(x).iter().copied())
            .filter(|e| !self.traversed.contains(e))
            .filter(|&e| graph.event(e).heads.iter().all(|h| self.reached.contains(h)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn find(&mut self, mut p: usize) -> usize {
        while self.parent[p] != p {
            self.parent[p] = self.parent[self.parent[p]];
            p = self.parent[p];
        }
        p
    }

    /// Temporal network over the trace, nodes in trace order. `None` unless temporal
    /// recording is on.
    pub fn time_net(&self) -> Option<IANetwork> {
        if !self.record_temporal {
            return None;
        }
        let mut roots: Vec<usize> = (0..self.parent.len()).filter(|&p| self.parent[p] == p).collect();
        roots.retain(|&r| !self.path_nets[r].is_empty());
        let mut acc = IANetwork::empty();
        for r in roots {
            let (_, m) = merge_paths(&acc, &self.path_nets[r], &[]).expect("event keys throughout");
            acc = m;
        }
        let order: Vec<usize> = self
            .trace
            .iter()
            .map(|&e| acc.index_of(NodeKey::Event(e)).expect("every traversed event is on a path"))
            .collect();
        Some(acc.select(&order))
    }
}

/// `min_{h ∈ heads(e)} mass(h) / out_degree(h)` for an enabled edge.
pub fn edge_weight(graph: &TemporalHypergraph, state: &WalkState, e: EventId) -> Result<f64> {
    let ev = graph.get_event(e)?;
    if state.traversed.contains(&e) || !ev.heads.iter().all(|h| state.reached.contains(h)) {
        return Err(Error::DisabledEdge(e));
    }
    Ok(raw_weight(graph, &state.arrival_mass, e))
}

fn raw_weight(graph: &TemporalHypergraph, mass: &BTreeMap<EntityId, f64>, e: EventId) -> f64 {
    graph
        .event(e)
        .heads
        .iter()
        .map(|h| mass.get(h).copied().unwrap_or(0.0) / graph.head_events(*h).len() as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Samples one enabled edge with probability proportional to its weight and traverses it.
pub fn step<R: Rng + ?Sized>(graph: &TemporalHypergraph, state: &mut WalkState, rng: &mut R) -> Result<StepOutcome> {
    let enabled = state.enabled_edges(graph);
    if enabled.is_empty() {
        return Ok(StepOutcome::DeadEnd);
    }
    let weights: Vec<f64> = enabled.iter().map(|&e| raw_weight(graph, &state.arrival_mass, e)).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = enabled.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            pick = i;
            break;
        }
        u -= w;
    }
    let e = enabled[pick];
    if !traverse(graph, state, e, weights[pick])? {
        return Ok(StepOutcome::Inconsistent);
    }
    Ok(StepOutcome::Moved(e))
}

/// Traverses `e` deterministically. Returns `false` when merging path networks is inconsistent.
pub fn traverse_edge(graph: &TemporalHypergraph, state: &mut WalkState, e: EventId) -> Result<bool> {
    let w = edge_weight(graph, state, e)?;
    traverse(graph, state, e, w)
}

fn traverse(graph: &TemporalHypergraph, state: &mut WalkState, e: EventId, weight: f64) -> Result<bool> {
    let ev = graph.event(e);
    let tail = ev.tail();
    let mut touched: Vec<usize> = ev.heads.iter().map(|h| state.origin[h]).collect();
    if let Some(&p) = state.origin.get(&tail) {
        touched.push(p);
    }
    let mut roots: Vec<usize> = touched.into_iter().map(|p| state.find(p)).collect();
    roots.sort_unstable();
    roots.dedup();
    let primary = roots[0];

    if state.record_temporal {
        let interval = ev.interval;
        let extended: Vec<IANetwork> = roots
            .iter()
            .map(|&r| {
                let mut net = state.path_nets[r].clone();
                let observed: Vec<RelationSet> = net
                    .keys()
                    .iter()
                    .map(|k| match k {
                        NodeKey::Event(other) => classify(graph.event(*other).interval, interval).into(),
                        NodeKey::Atom(_) => RelationSet::FULL,
                    })
                    .collect();
                net.push_node(NodeKey::Event(e), |i| observed[i]);
                net
            })
            .collect();
        let mut acc = extended[0].clone();
        let mut refine = roots.iter().any(|&r| state.merged[r]);
        for net in &extended[1..] {
            let (ok, m) = merge_paths(&acc, net, &[NodeKey::Event(e)])?;
            if !ok {
                return Ok(false);
            }
            acc = m;
            refine = false;
        }
        if refine && !acc.resolve_in_place() {
            return Ok(false);
        }
        state.path_nets[primary] = acc;
        for &r in &roots[1..] {
            state.path_nets[r] = IANetwork::empty();
        }
    }
    for &r in &roots[1..] {
        state.parent[r] = primary;
    }
    if roots.len() > 1 {
        state.merged[primary] = true;
    }

    state.traversed.insert(e);
    state.trace.push(e);
    state.reached.insert(tail);
    state.origin.entry(tail).or_insert(primary);
    state.arrival_mass.insert(tail, weight);
    state.step += 1;
    Ok(true)
}

/// Analytic reach score of `target` after breadth-order expansion for `horizon` levels.
///
/// Each level expands every enabled, unexpanded edge at once, using the masses of the
/// previous level; the score sums the weights of all expanded edges into `target`.
/// The value is a score and can exceed 1.
pub fn reach_probability(
    graph: &TemporalHypergraph,
    starts: &[EntityId],
    target: EntityId,
    horizon: usize,
) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let mut state = init_walk(graph, starts, false)?;
    let mut score = 0.0;
    for _ in 0..horizon {
        let enabled = state.enabled_edges(graph);
        if enabled.is_empty() {
            break;
        }
        let mut arrivals: BTreeMap<EntityId, f64> = BTreeMap::new();
        for &e in &enabled {
            let w = raw_weight(graph, &state.arrival_mass, e);
            let tail = graph.event(e).tail();
            if tail == target {
                score += w;
            }
            if !state.reached.contains(&tail) {
                *arrivals.entry(tail).or_insert(0.0) += w;
            }
        }
        state.traversed.extend(enabled);
        for (x, m) in arrivals {
            state.reached.insert(x);
            state.arrival_mass.insert(x, m);
        }
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub trace: Vec<EventId>,
    pub time_net: Option<IANetwork>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkDiagnostics {
    pub walks: usize,
    pub dead_ended: usize,
    pub inconsistent: usize,
    pub missed_target: usize,
    pub kept: usize,
}

impl WalkDiagnostics {
    pub fn add(&mut self, other: &WalkDiagnostics) {
        self.walks += other.walks;
        self.dead_ended += other.dead_ended;
        self.inconsistent += other.inconsistent;
        self.missed_target += other.missed_target;
        self.kept += other.kept;
    }
}

#[derive(Debug, Clone, Default)]
pub struct WalkOutput {
    pub walks: Vec<Walk>,
    pub diagnostics: WalkDiagnostics,
}

enum WalkEnd {
    Kept(Walk),
    DeadEnd,
    Inconsistent,
    Missed,
}

fn walk_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_one(graph: &TemporalHypergraph, query: &Query, params: &WalkParams, index: usize) -> Result<WalkEnd> {
    let mut rng = walk_rng(params.seed, index);
    let mut state = init_walk(graph, &query.heads, params.record_temporal)?;
    if let Some(e) = query.event {
        state.exclude(e);
    }
    while state.step < params.max_steps {
        match step(graph, &mut state, &mut rng)? {
            StepOutcome::Moved(e) => {
                if query.tail == Some(graph.event(e).tail()) {
                    return Ok(WalkEnd::Kept(Walk { time_net: state.time_net(), trace: state.trace }));
                }
            }
            StepOutcome::DeadEnd => {
                if query.is_classification() && state.step > 0 {
                    break;
                }
                return Ok(WalkEnd::DeadEnd);
            }
            StepOutcome::Inconsistent => return Ok(WalkEnd::Inconsistent),
        }
    }
    if query.is_classification() {
        Ok(WalkEnd::Kept(Walk { time_net: state.time_net(), trace: state.trace }))
    } else {
        Ok(WalkEnd::Missed)
    }
}

/// Runs `num_walks` independently seeded walks from the query's heads.
///
/// With a target, walks stop at the first edge into it and only those are kept.
/// Without one, every walk that moved at least once is kept, truncated at its
/// dead end or at `max_steps`. Results are in walk-index order.
pub fn mrbw(graph: &TemporalHypergraph, query: &Query, params: &WalkParams) -> Result<WalkOutput> {
    params.validate()?;
    let ends: Vec<WalkEnd> =
        (0..params.num_walks).into_par_iter().map(|i| run_one(graph, query, params, i)).collect::<Result<_>>()?;
    let mut out = WalkOutput::default();
    out.diagnostics.walks = params.num_walks;
    for end in ends {
        match end {
            WalkEnd::Kept(w) => {
                out.diagnostics.kept += 1;
                out.walks.push(w);
            }
            WalkEnd::DeadEnd => out.diagnostics.dead_ended += 1,
            WalkEnd::Inconsistent => out.diagnostics.inconsistent += 1,
            WalkEnd::Missed => out.diagnostics.missed_target += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Interval;

    fn iv(s: i64, e: i64) -> Interval {
        Interval::new(s, e).unwrap()
    }

    fn chain() -> TemporalHypergraph {
        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        g.add_event("Q", &["b"], &["c"], iv(2, 3)).unwrap();
        g
    }

    fn ids(g: &TemporalHypergraph, names: &[&str]) -> Vec<EntityId> {
        names.iter().map(|n| g.entity_id(n).unwrap()).collect()
    }

    #[test]
    fn init_assigns_unit_mass() {
        let g = chain();
        let s = init_walk(&g, &ids(&g, &["a"]), true).unwrap();
        assert_eq!(s.arrival_mass[&g.entity_id("a").unwrap()], 1.0);
        let s = init_walk(&g, &ids(&g, &["a", "b"]), true).unwrap();
        assert!(s.arrival_mass.values().all(|&m| m == 1.0));
        assert_eq!(s.step, 0);
        assert!(s.trace.is_empty());
        assert!(matches!(init_walk(&g, &[EntityId(99)], true), Err(Error::UnknownEntityId(99))));
        assert!(matches!(init_walk(&g, &[], true), Err(Error::EmptyStartSet)));
    }

    #[test]
    fn init_rejects_non_b_graph() {
        let mut g = chain();
        g.add_event("R", &["a"], &["b", "c"], iv(0, 1)).unwrap();
        assert!(matches!(init_walk(&g, &ids(&g, &["a"]), true), Err(Error::NotBGraph(_))));
    }

    #[test]
    fn edge_weight_examples() {
        let g = chain();
        let s = init_walk(&g, &ids(&g, &["a"]), true).unwrap();
        assert_eq!(edge_weight(&g, &s, EventId(0)).unwrap(), 1.0);
        assert!(matches!(edge_weight(&g, &s, EventId(1)), Err(Error::DisabledEdge(_))));

        // heads {a, b} with out-degrees 2 and 4
        let mut g = TemporalHypergraph::new();
        let two_head = g.add_event("Mix", &["a", "b"], &["c"], iv(0, 1)).unwrap();
        g.add_event("P", &["a"], &["d"], iv(0, 1)).unwrap();
        for i in 0..3 {
            g.add_event("Q", &["b"], &[&format!("y{i}")], iv(0, 1)).unwrap();
        }
        let s = init_walk(&g, &ids(&g, &["a", "b"]), true).unwrap();
        assert_eq!(edge_weight(&g, &s, two_head).unwrap(), 0.25);

        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        g.add_event("Q", &["a"], &["c"], iv(0, 1)).unwrap();
        let e = g.add_event("R", &["b"], &["d"], iv(0, 1)).unwrap();
        g.add_event("S", &["b"], &["f"], iv(0, 1)).unwrap();
        let mut s = init_walk(&g, &ids(&g, &["a"]), true).unwrap();
        assert!(traverse_edge(&g, &mut s, EventId(0)).unwrap());
        assert_eq!(s.arrival_mass[&g.entity_id("b").unwrap()], 0.5);
        assert_eq!(edge_weight(&g, &s, e).unwrap(), 0.25);
    }

    #[test]
    fn chain_walk_reaches_end() {
        let g = chain();
        let mut s = init_walk(&g, &ids(&g, &["a"]), true).unwrap();
        let mut rng = walk_rng(1, 0);
        assert_eq!(step(&g, &mut s, &mut rng).unwrap(), StepOutcome::Moved(EventId(0)));
        assert_eq!(step(&g, &mut s, &mut rng).unwrap(), StepOutcome::Moved(EventId(1)));
        assert_eq!(s.reached.len(), 3);
        assert_eq!(s.trace.len(), 2);
        assert_eq!(step(&g, &mut s, &mut rng).unwrap(), StepOutcome::DeadEnd);
        let net = s.time_net().unwrap();
        assert_eq!(net.get(0, 1), crate::allen::BaseRelation::Before.into());
    }

    #[test]
    fn b_edge_waits_for_all_heads() {
        let mut g = TemporalHypergraph::new();
        let mix = g.add_event("Mix", &["onion", "garlic", "oil"], &["bowl"], iv(5, 6)).unwrap();
        g.add_event("Cut", &["onion"], &["garlic"], iv(0, 1)).unwrap();
        for seed in 0..50 {
            let mut s = init_walk(&g, &ids(&g, &["onion"]), true).unwrap();
            let mut rng = walk_rng(seed, 0);
            while let StepOutcome::Moved(_) = step(&g, &mut s, &mut rng).unwrap() {}
            assert!(!s.trace.contains(&mix));
        }
    }

    #[test]
    fn no_edges_dead_ends_immediately() {
        let mut g = TemporalHypergraph::new();
        let a = g.intern_entity("a").unwrap();
        let mut s = init_walk(&g, &[a], true).unwrap();
        assert_eq!(step(&g, &mut s, &mut walk_rng(0, 0)).unwrap(), StepOutcome::DeadEnd);
    }

    #[test]
    fn reach_probability_examples() {
        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        assert_eq!(reach_probability(&g, &ids(&g, &["a"]), g.entity_id("b").unwrap(), 1).unwrap(), 1.0);

        g.add_event("P", &["a"], &["c"], iv(0, 1)).unwrap();
        assert_eq!(reach_probability(&g, &ids(&g, &["a"]), g.entity_id("b").unwrap(), 1).unwrap(), 0.5);
        assert!(reach_probability(&g, &ids(&g, &["a"]), g.entity_id("b").unwrap(), 0).is_err());

        let mut g = TemporalHypergraph::new();
        g.add_event("Mix", &["a", "b"], &["c"], iv(0, 1)).unwrap();
        g.add_event("P", &["a"], &["d"], iv(0, 1)).unwrap();
        for i in 0..3 {
            g.add_event("Q", &["b"], &[&format!("y{i}")], iv(0, 1)).unwrap();
        }
        let c = g.entity_id("c").unwrap();
        assert_eq!(reach_probability(&g, &ids(&g, &["a", "b"]), c, 1).unwrap(), 0.25);
    }

    #[test]
    fn reach_probability_multi_level() {
        // a -> b (1.0), b -> c and b -> d (0.5 each), c -> d (0.5)
        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        g.add_event("P", &["b"], &["c"], iv(0, 1)).unwrap();
        g.add_event("P", &["b"], &["d"], iv(0, 1)).unwrap();
        g.add_event("P", &["c"], &["d"], iv(0, 1)).unwrap();
        let a = ids(&g, &["a"]);
        let d = g.entity_id("d").unwrap();
        assert_eq!(reach_probability(&g, &a, d, 1).unwrap(), 0.0);
        assert_eq!(reach_probability(&g, &a, d, 2).unwrap(), 0.5);
        assert_eq!(reach_probability(&g, &a, d, 3).unwrap(), 1.0);
    }

    #[test]
    fn mrbw_finds_unique_path() {
        let mut g = chain();
        let q_ev = g.add_event("Target", &["a"], &["c"], iv(0, 3)).unwrap();
        let q = Query::for_event(&g, q_ev).unwrap();
        let out = mrbw(&g, &q, &WalkParams { max_steps: 3, num_walks: 20, seed: 3, record_temporal: true }).unwrap();
        assert!(!out.walks.is_empty());
        assert!(out.walks.iter().all(|w| w.trace == vec![EventId(0), EventId(1)]));
        assert_eq!(out.diagnostics.kept + out.diagnostics.missed_target + out.diagnostics.dead_ended, 20);
    }

    #[test]
    fn mrbw_blocked_by_unreachable_head() {
        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        g.add_event("Mix", &["a", "x"], &["c"], iv(2, 3)).unwrap();
        let q = Query { predicate: "Q".into(), heads: ids(&g, &["a"]), tail: g.entity_id("c"), event: None };
        let out = mrbw(&g, &q, &WalkParams { max_steps: 4, num_walks: 50, seed: 1, record_temporal: true }).unwrap();
        assert!(out.walks.is_empty());
    }

    #[test]
    fn mrbw_is_deterministic() {
        let mut g = TemporalHypergraph::new();
        for i in 0..6 {
            g.add_event("P", &[&format!("n{i}")], &[&format!("n{}", i + 1)], iv(i, i + 1)).unwrap();
            g.add_event("Q", &[&format!("n{i}")], &[&format!("n{}", (i + 3) % 7)], iv(i, i + 2)).unwrap();
        }
        let q = Query::classification(&g, "L", 2);
        let p = WalkParams { max_steps: 4, num_walks: 64, seed: 9, record_temporal: true };
        let a = mrbw(&g, &q, &p).unwrap();
        let b = mrbw(&g, &q, &p).unwrap();
        assert_eq!(a.walks, b.walks);
        assert_eq!(a.diagnostics, b.diagnostics);
    }

    #[test]
    fn joining_paths_merges_networks() {
        // two starts, each with its own event, joined by a B-edge
        let mut g = TemporalHypergraph::new();
        let e0 = g.add_event("P", &["a"], &["c"], iv(0, 2)).unwrap();
        let e1 = g.add_event("Q", &["b"], &["d"], iv(5, 6)).unwrap();
        let e2 = g.add_event("Mix", &["c", "d"], &["f"], iv(8, 9)).unwrap();
        let mut s = init_walk(&g, &ids(&g, &["a", "b"]), true).unwrap();
        assert!(traverse_edge(&g, &mut s, e0).unwrap());
        assert!(traverse_edge(&g, &mut s, e1).unwrap());
        let before = s.time_net().unwrap();
        assert!(before.get(0, 1).is_full());
        assert!(traverse_edge(&g, &mut s, e2).unwrap());
        let net = s.time_net().unwrap();
        use crate::allen::BaseRelation::*;
        assert_eq!(net.get(0, 2), Before.into());
        assert_eq!(net.get(1, 2), Before.into());
        // P vs Q is only known through the joining event
        assert!(net.get(0, 1).contains(Before) && net.get(0, 1).len() > 1);
        assert!(net.is_path_consistent());
    }
}
