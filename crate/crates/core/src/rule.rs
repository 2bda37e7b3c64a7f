//! Chain rules with pairwise interval constraints between body atoms.
//!
//! Text form, one rule per line:
//!
//! ```text
//! w=<weight> <Head>(<vars>) <- <P1>(<vars>) , <P2>(<vars>) | <i> {REL,...} <j> ; ...
//! ```
//!
//! Atom variables list the heads then the single tail, so `Put(X0,X1)` is
//! `Put({X0} -> X1)` and a unary fact renders as `Oil(X2,X2)`. A classification
//! rule has a head without variables. The temporal block lists only constrained
//! body-atom pairs and is omitted when nothing is constrained.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::allen::{classify, RelationSet};
use crate::constraints::{IANetwork, NodeKey};
use crate::error::{Error, Result};
use crate::hypergraph::{EntityId, EventId, TemporalHypergraph};
use crate::query::Query;

/// Backtracking steps allowed per evaluation before giving up.
pub const DEFAULT_MATCH_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub head_vars: Vec<usize>,
    pub tail_vars: Vec<usize>,
}

impl Atom {
    pub fn new(predicate: &str, head_vars: Vec<usize>, tail_vars: Vec<usize>) -> Atom {
        Atom { predicate: predicate.to_string(), head_vars, tail_vars }
    }

    fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.head_vars.iter().chain(&self.tail_vars).copied()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.vars().map(|v| format!("X{v}")).join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRule {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub time_net: IANetwork,
    pub signature: String,
    pub weight: f64,
}

fn atom_keys(n: usize) -> Vec<NodeKey> {
    (0..n).map(NodeKey::Atom).collect()
}

impl TemporalRule {
    /// Builds a rule and canonicalizes its variables by first appearance.
    pub fn new(head: Atom, body: Vec<Atom>, time_net: IANetwork) -> Result<TemporalRule> {
        if body.is_empty() {
            return Err(Error::Rule("rule body is empty".into()));
        }
        if time_net.len() != body.len() {
            return Err(Error::Rule(format!(
                "temporal network has {} nodes for {} body atoms",
                time_net.len(),
                body.len()
            )));
        }
        if body.iter().any(|a| a.head_vars.is_empty() || a.tail_vars.is_empty()) {
            return Err(Error::Rule("body atoms need head and tail variables".into()));
        }
        let time_net = time_net.rekeyed(atom_keys(body.len()))?;
        let (head, body) = canonicalize(head, body);
        let signature = relational_text(&head, &body);
        Ok(TemporalRule { head, body, time_net, signature, weight: 0.0 })
    }

    pub fn unconstrained(head: Atom, body: Vec<Atom>) -> Result<TemporalRule> {
        let n = body.len();
        Self::new(head, body, IANetwork::unconstrained(atom_keys(n)))
    }

    pub fn with_weight(mut self, w: f64) -> TemporalRule {
        self.weight = w;
        self
    }

    pub fn widened(&self) -> TemporalRule {
        TemporalRule { time_net: self.time_net.widened(), ..self.clone() }
    }

    pub fn num_vars(&self) -> usize {
        self.head.vars().chain(self.body.iter().flat_map(Atom::vars)).max().map_or(0, |m| m + 1)
    }

    /// Each body atom after the first shares a variable with the head or an earlier atom.
    pub fn is_connected(&self) -> bool {
        let mut seen: Vec<usize> = self.head.vars().collect();
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 && !a.vars().any(|v| seen.contains(&v)) {
                return false;
            }
            seen.extend(a.vars());
        }
        true
    }

    fn temporal_text(&self) -> String {
        let mut parts = Vec::new();
        for i in 0..self.body.len() {
            for j in i + 1..self.body.len() {
                let c = self.time_net.get(i, j);
                if !c.is_full() {
                    parts.push(format!("{i} {c} {j}"));
                }
            }
        }
        parts.join(" ; ")
    }
}

fn relational_text(head: &Atom, body: &[Atom]) -> String {
    format!("{} <- {}", head, body.iter().map(Atom::to_string).join(" , "))
}

fn canonicalize(head: Atom, body: Vec<Atom>) -> (Atom, Vec<Atom>) {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    let assign = |v: usize, map: &mut BTreeMap<usize, usize>| -> usize {
        let next = map.len();
        *map.entry(v).or_insert(next)
    };
    let head = Atom {
        head_vars: head.head_vars.iter().map(|&v| assign(v, &mut map)).collect(),
        tail_vars: head.tail_vars.iter().map(|&v| assign(v, &mut map)).collect(),
        predicate: head.predicate,
    };
    let body = body
        .into_iter()
        .map(|a| {
            // heads are a set: bound variables first (by canonical id), then fresh ones
            let (mut bound, fresh): (Vec<usize>, Vec<usize>) = a.head_vars.iter().partition(|v| map.contains_key(v));
            bound.sort_by_key(|v| map[v]);
            let mut head_vars: Vec<usize> =
                bound.into_iter().chain(fresh).map(|v| assign(v, &mut map)).collect();
            head_vars.sort_unstable();
            let tail_vars = a.tail_vars.iter().map(|&v| assign(v, &mut map)).collect();
            Atom { predicate: a.predicate, head_vars, tail_vars }
        })
        .collect();
    (head, body)
}

impl fmt::Display for TemporalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w={} {}", self.weight, self.signature)?;
        let t = self.temporal_text();
        if !t.is_empty() {
            write!(f, " | {t}")?;
        }
        Ok(())
    }
}

fn parse_atom(text: &str, allow_empty: bool) -> Result<Atom> {
    let text = text.trim();
    let open = text.find('(').ok_or_else(|| Error::Rule(format!("missing `(` in atom `{text}`")))?;
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Rule(format!("missing `)` in atom `{text}`")))?;
    let predicate = &text[..open];
    crate::hypergraph::validate_name(predicate).map_err(|_| Error::Rule(format!("bad predicate `{predicate}`")))?;
    let vars: Vec<usize> = inner
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.strip_prefix('X')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Rule(format!("bad variable `{v}`")))
        })
        .collect::<Result<_>>()?;
    match vars.len() {
        0 if allow_empty => Ok(Atom::new(predicate, vec![], vec![])),
        0 | 1 => Err(Error::Rule(format!("atom `{text}` needs at least two variables"))),
        n => Ok(Atom::new(predicate, vars[..n - 1].to_vec(), vec![vars[n - 1]])),
    }
}

impl FromStr for TemporalRule {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let line = line.trim();
        let rest = line.strip_prefix("w=").ok_or_else(|| Error::Rule("missing `w=` weight".into()))?;
        let (w, rest) = rest.split_once(' ').ok_or_else(|| Error::Rule("missing rule after weight".into()))?;
        let weight: f64 = w.parse().map_err(|_| Error::Rule(format!("bad weight `{w}`")))?;
        let (head, rest) = rest.split_once(" <- ").ok_or_else(|| Error::Rule("missing ` <- `".into()))?;
        let (body_text, temporal) = match rest.split_once(" | ") {
            Some((b, t)) => (b, Some(t)),
            None => (rest, None),
        };
        let head = parse_atom(head, true)?;
        let body: Vec<Atom> = body_text.split(" , ").map(|a| parse_atom(a, false)).collect::<Result<_>>()?;
        let mut net = IANetwork::unconstrained(atom_keys(body.len()));
        if let Some(t) = temporal {
            for triple in t.split(" ; ") {
                let mut it = triple.trim().splitn(3, ' ');
                let (i, rel, j) = (it.next(), it.next(), it.next());
                let (Some(i), Some(rel), Some(j)) = (i, rel, j) else {
                    return Err(Error::Rule(format!("bad temporal triple `{triple}`")));
                };
                let i: usize = i.parse().map_err(|_| Error::Rule(format!("bad atom index `{i}`")))?;
                let j: usize = j.parse().map_err(|_| Error::Rule(format!("bad atom index `{j}`")))?;
                if i >= body.len() || j >= body.len() || i == j {
                    return Err(Error::Rule(format!("atom index out of range in `{triple}`")));
                }
                let rel: RelationSet = rel.parse().map_err(|e| Error::Rule(format!("{e}")))?;
                net.set(i, j, net.get(i, j).intersect(rel));
            }
        }
        Ok(TemporalRule::new(head, body, net)?.with_weight(weight))
    }
}

/// Converts a walk trace into a rule by replacing entities with variables.
///
/// Query heads (then the query tail) take the first variables. Class-label events
/// are moved to the end of the body, at most one per variable, and left
/// temporally unconstrained.
pub fn trace_to_rule(
    graph: &TemporalHypergraph,
    trace: &[EventId],
    time_net: Option<&IANetwork>,
    query: &Query,
) -> Result<TemporalRule> {
    if trace.is_empty() {
        return Err(Error::Rule("empty trace".into()));
    }
    if let Some(net) = time_net {
        if net.len() != trace.len() {
            return Err(Error::DimensionMismatch { expected: trace.len(), got: net.len() });
        }
    }
    let mut vars: BTreeMap<EntityId, usize> = BTreeMap::new();
    let var_of = |x: EntityId, vars: &mut BTreeMap<EntityId, usize>| -> usize {
        let next = vars.len();
        *vars.entry(x).or_insert(next)
    };
    let head = Atom::new(
        &query.predicate,
        query.heads.iter().filter(|_| !query.is_classification()).map(|&x| var_of(x, &mut vars)).collect(),
        query.tail.iter().map(|&x| var_of(x, &mut vars)).collect(),
    );
    let mut body = Vec::new();
    let mut order = Vec::new();
    for (pos, &e) in trace.iter().enumerate() {
        if graph.is_class_event(e) {
            continue;
        }
        let ev = graph.event(e);
        let head_vars = ev.heads.iter().map(|&x| var_of(x, &mut vars)).collect();
        let tail_vars = ev.tails.iter().map(|&x| var_of(x, &mut vars)).collect();
        body.push(Atom { predicate: graph.predicate_name(ev.predicate).to_string(), head_vars, tail_vars });
        order.push(pos);
    }
    let relational = body.len();
    let mut labelled = Vec::new();
    for (pos, &e) in trace.iter().enumerate() {
        if !graph.is_class_event(e) {
            continue;
        }
        let ev = graph.event(e);
        let v = var_of(ev.heads[0], &mut vars);
        if labelled.contains(&v) {
            continue;
        }
        labelled.push(v);
        body.push(Atom::new(graph.predicate_name(ev.predicate), vec![v], vec![v]));
        order.push(pos);
    }
    let mut net = match time_net {
        Some(net) => net.select(&order),
        None => IANetwork::unconstrained(atom_keys(order.len())),
    };
    for i in relational..order.len() {
        for j in 0..order.len() {
            net.set(i, j, RelationSet::FULL);
        }
    }
    TemporalRule::new(head, body, net.rekeyed(atom_keys(order.len()))?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grounding {
    pub vars: BTreeMap<usize, EntityId>,
    pub events: Vec<EventId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub grounding: Option<Grounding>,
    pub steps: usize,
    pub budget_exhausted: bool,
}

impl MatchOutcome {
    pub fn matched(&self) -> bool {
        self.grounding.is_some()
    }
}

struct Matcher<'a, F> {
    rule: &'a TemporalRule,
    graph: &'a TemporalHypergraph,
    candidates: Vec<&'a [EventId]>,
    excluded: Option<EventId>,
    binding: Vec<Option<EntityId>>,
    events: Vec<EventId>,
    steps: usize,
    budget: usize,
    accept: F,
}

impl<F: FnMut(&[EventId], &[Option<EntityId>]) -> bool> Matcher<'_, F> {
    fn bind(&mut self, v: usize, x: EntityId, undo: &mut Vec<usize>) -> bool {
        match self.binding[v] {
            Some(y) => y == x,
            None => {
                self.binding[v] = Some(x);
                undo.push(v);
                true
            }
        }
    }

    // Assigns atom head variables to the event's head set (any order), then continues.
    fn match_heads(&mut self, atom_idx: usize, vars: &[usize], pool: &mut Vec<EntityId>) -> Option<bool> {
        let Some((&v, rest)) = vars.split_first() else {
            return self.match_atom(atom_idx + 1);
        };
        for k in 0..pool.len() {
            let x = pool[k];
            let mut undo = Vec::new();
            if self.bind(v, x, &mut undo) {
                pool.swap_remove(k);
                let r = self.match_heads(atom_idx, rest, pool);
                pool.push(x);
                let last = pool.len() - 1;
                pool.swap(k, last);
                for u in undo {
                    self.binding[u] = None;
                }
                match r {
                    Some(false) => {}
                    other => return other,
                }
            }
        }
        Some(false)
    }

    /// `Some(true)` on success, `Some(false)` when exhausted without a match, `None` on budget.
    fn match_atom(&mut self, i: usize) -> Option<bool> {
        if i == self.rule.body.len() {
            return Some((self.accept)(&self.events, &self.binding));
        }
        let atom = &self.rule.body[i];
        let candidates = self.candidates[i];
        for &e in candidates {
            self.steps += 1;
            if self.steps > self.budget {
                return None;
            }
            if Some(e) == self.excluded || self.events.contains(&e) {
                continue;
            }
            let ev = self.graph.event(e);
            if ev.heads.len() != atom.head_vars.len() || ev.tails.len() != atom.tail_vars.len() {
                continue;
            }
            let temporal_ok = self
                .events
                .iter()
                .enumerate()
                .all(|(j, &prev)| self.rule.time_net.get(j, i).contains(classify(self.graph.event(prev).interval, ev.interval)));
            if !temporal_ok {
                continue;
            }
            let mut undo = Vec::new();
            let mut r = Some(false);
            if atom.tail_vars.len() == 1 && self.bind(atom.tail_vars[0], ev.tails[0], &mut undo) {
                self.events.push(e);
                let mut pool = ev.heads.clone();
                r = self.match_heads(i, &atom.head_vars.clone(), &mut pool);
                self.events.pop();
            }
            for u in undo {
                self.binding[u] = None;
            }
            if r != Some(false) {
                return r;
            }
        }
        Some(false)
    }
}

/// Searches for a grounding of the rule body consistent with the query binding and
/// accepted by `accept`. Body atoms are matched in order, candidate events in
/// ascending id order; distinct atoms use distinct events and the query's own event
/// is never used.
pub fn find_grounding<F>(
    rule: &TemporalRule,
    graph: &TemporalHypergraph,
    query: &Query,
    budget: usize,
    mut accept: F,
) -> MatchOutcome
where
    F: FnMut(&Grounding) -> bool,
{
    let no_match = |steps, exhausted| MatchOutcome { grounding: None, steps, budget_exhausted: exhausted };
    let (qh, qt) = query.arity();
    if rule.head.head_vars.len() != qh || rule.head.tail_vars.len() != qt {
        return no_match(0, false);
    }
    let mut candidates = Vec::with_capacity(rule.body.len());
    for atom in &rule.body {
        match graph.predicate_id(&atom.predicate) {
            Some(p) => candidates.push(graph.predicate_events(p)),
            None => return no_match(0, false),
        }
    }
    let nvars = rule.num_vars();
    let head_orders: Vec<Vec<EntityId>> = if query.is_classification() {
        vec![vec![]]
    } else {
        query.heads.iter().copied().permutations(query.heads.len()).collect()
    };
    let mut total_steps = 0;
    for heads in head_orders {
        let mut binding = vec![None; nvars];
        let mut ok = true;
        for (&v, &x) in rule.head.head_vars.iter().zip(&heads).chain(rule.head.tail_vars.iter().zip(&query.tail)) {
            match binding[v] {
                Some(y) if y != x => ok = false,
                _ => binding[v] = Some(x),
            }
        }
        if !ok {
            continue;
        }
        let mut found = None;
        let accept_ref = &mut accept;
        let mut matcher = Matcher {
            rule,
            graph,
            candidates: candidates.clone(),
            excluded: query.event,
            binding,
            events: Vec::new(),
            steps: 0,
            budget: budget.saturating_sub(total_steps),
            accept: |events: &[EventId], binding: &[Option<EntityId>]| {
                let g = Grounding {
                    vars: binding.iter().enumerate().filter_map(|(v, x)| x.map(|x| (v, x))).collect(),
                    events: events.to_vec(),
                };
                if accept_ref(&g) {
                    found = Some(g);
                    true
                } else {
                    false
                }
            },
        };
        let r = matcher.match_atom(0);
        total_steps += matcher.steps;
        drop(matcher);
        match r {
            Some(true) => return MatchOutcome { grounding: found, steps: total_steps, budget_exhausted: false },
            Some(false) => {}
            None => return no_match(total_steps, true),
        }
    }
    no_match(total_steps, false)
}

/// True iff some grounding of the body satisfies the rule under the query's binding.
pub fn evaluate(rule: &TemporalRule, graph: &TemporalHypergraph, query: &Query) -> bool {
    find_grounding(rule, graph, query, DEFAULT_MATCH_BUDGET, |_| true).matched()
}

/// Earliest start and latest end over the grounded events.
pub fn coverage_span(grounding: &Grounding, graph: &TemporalHypergraph) -> (i64, i64) {
    let start = grounding.events.iter().map(|&e| graph.event(e).interval.start).min().unwrap_or(0);
    let end = grounding.events.iter().map(|&e| graph.event(e).interval.end).max().unwrap_or(0);
    (start, end)
}

/// True iff one grounding spans at least `rho` of the graph's full event span.
pub fn coverage_filter(rule: &TemporalRule, graph: &TemporalHypergraph, rho: f64) -> bool {
    let Some(span) = graph.span() else {
        return false;
    };
    let need = rho * span.duration() as f64;
    let free = Query { predicate: rule.head.predicate.clone(), heads: vec![], tail: None, event: None };
    let unbound = TemporalRule {
        head: Atom::new(&rule.head.predicate, vec![], vec![]),
        ..rule.clone()
    };
    find_grounding(&unbound, graph, &free, DEFAULT_MATCH_BUDGET, |g| {
        let (s, e) = coverage_span(g, graph);
        (e - s) as f64 >= need
    })
    .matched()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allen::BaseRelation::*;
    use crate::hypergraph::Interval;
    use crate::walk::{init_walk, traverse_edge};

    fn iv(s: i64, e: i64) -> Interval {
        Interval::new(s, e).unwrap()
    }

    fn cooking(put: Interval, fry: Interval) -> (TemporalHypergraph, Query) {
        let mut g = TemporalHypergraph::new();
        g.add_event("Put", &["bacon"], &["pan"], put).unwrap();
        g.add_event("Fry", &["pan"], &["pan"], fry).unwrap();
        let q = Query {
            predicate: "Cooked".into(),
            heads: vec![g.entity_id("bacon").unwrap()],
            tail: g.entity_id("pan"),
            event: None,
        };
        (g, q)
    }

    fn walked_rule(g: &TemporalHypergraph, q: &Query, trace: &[EventId]) -> TemporalRule {
        let mut s = init_walk(g, &q.heads, true).unwrap();
        for &e in trace {
            assert!(traverse_edge(g, &mut s, e).unwrap());
        }
        trace_to_rule(g, &s.trace, s.time_net().as_ref(), q).unwrap()
    }

    #[test]
    fn trace_becomes_chain_rule() {
        let (g, q) = cooking(iv(3, 5), iv(6, 9));
        let rule = walked_rule(&g, &q, &[EventId(0), EventId(1)]);
        assert_eq!(rule.to_string(), "w=0 Cooked(X0,X1) <- Put(X0,X1) , Fry(X1,X1) | 0 {BEFORE} 1");
        assert_eq!(rule.time_net.get(0, 1), Before.into());
        assert!(rule.is_connected());
        let again = walked_rule(&g, &q, &[EventId(0), EventId(1)]);
        assert_eq!(rule.signature, again.signature);
    }

    #[test]
    fn single_edge_trace() {
        let (g, q) = cooking(iv(3, 5), iv(6, 9));
        let rule = walked_rule(&g, &q, &[EventId(0)]);
        assert_eq!(rule.body.len(), 1);
        assert_eq!(rule.time_net.len(), 1);
        assert_eq!(rule.time_net.get(0, 0), Equal.into());
    }

    #[test]
    fn evaluate_checks_time_order() {
        let (g, q) = cooking(iv(3, 5), iv(6, 9));
        let rule = walked_rule(&g, &q, &[EventId(0), EventId(1)]);
        assert!(evaluate(&rule, &g, &q));
        let (swapped, q2) = cooking(iv(6, 9), iv(3, 5));
        assert!(!evaluate(&rule, &swapped, &q2));
        assert!(evaluate(&rule.widened(), &swapped, &q2));
    }

    #[test]
    fn signature_ignores_entity_names() {
        let (g, q) = cooking(iv(3, 5), iv(6, 9));
        let mut h = TemporalHypergraph::new();
        h.add_event("Put", &["egg"], &["pot"], iv(0, 1)).unwrap();
        h.add_event("Fry", &["pot"], &["pot"], iv(4, 9)).unwrap();
        let qh = Query { predicate: "Cooked".into(), heads: vec![h.entity_id("egg").unwrap()], tail: h.entity_id("pot"), event: None };
        assert_eq!(
            walked_rule(&g, &q, &[EventId(0), EventId(1)]).signature,
            walked_rule(&h, &qh, &[EventId(0), EventId(1)]).signature
        );
    }

    #[test]
    fn coverage_examples() {
        let mut g = TemporalHypergraph::new();
        g.add_event("A", &["a"], &["b"], iv(0, 30)).unwrap();
        g.add_event("B", &["b"], &["c"], iv(40, 60)).unwrap();
        g.add_event("Noise", &["z"], &["y"], iv(0, 100)).unwrap();
        let rule = TemporalRule::unconstrained(
            Atom::new("L", vec![], vec![]),
            vec![Atom::new("A", vec![0], vec![1]), Atom::new("B", vec![1], vec![2])],
        )
        .unwrap();
        let grounding = find_grounding(&rule, &g, &Query::classification(&g, "L", 0), 100, |_| true)
            .grounding
            .unwrap();
        assert_eq!(coverage_span(&grounding, &g), (0, 60));
        assert!(!coverage_filter(&rule, &g, 1.0));
        assert!(coverage_filter(&rule, &g, 0.5));
        let full = TemporalRule::unconstrained(Atom::new("L", vec![], vec![]), vec![Atom::new("Noise", vec![0], vec![1])]).unwrap();
        assert!(coverage_filter(&full, &g, 1.0));
    }

    #[test]
    fn coverage_span_examples() {
        let mut g = TemporalHypergraph::new();
        g.add_event("P", &["a"], &["b"], iv(1, 10)).unwrap();
        g.add_event("P", &["b"], &["c"], iv(4, 5)).unwrap();
        g.add_event("P", &["c"], &["d"], iv(2, 2)).unwrap();
        let gr = |events: Vec<usize>| Grounding { vars: BTreeMap::new(), events: events.into_iter().map(EventId).collect() };
        assert_eq!(coverage_span(&gr(vec![0, 1]), &g), (1, 10));
        assert_eq!(coverage_span(&gr(vec![2]), &g), (2, 2));
    }

    #[test]
    fn text_round_trip() {
        let line = "w=0.5 Cooked(X0,X1) <- Put(X0,X1) , Mix(X1,X2,X3) , Oil(X2,X2) | 0 {BEFORE,MEETS} 1 ; 1 {DURING} 2";
        let rule: TemporalRule = line.parse().unwrap();
        assert_eq!(rule.to_string(), line);
        assert_eq!(rule.body[1].head_vars, vec![1, 2]);
        let cls: TemporalRule = "w=0 Dish() <- A(X0,X1)".parse().unwrap();
        assert!(cls.head.head_vars.is_empty());
        assert!("w=0 Dish() <- A(X0)".parse::<TemporalRule>().is_err());
        assert!("w=0 Dish() <- A(X0,X1) | 0 {SOON} 1".parse::<TemporalRule>().is_err());
        assert!("Dish() <- A(X0,X1)".parse::<TemporalRule>().is_err());
    }

    #[test]
    fn class_events_are_appended_once_per_variable() {
        let mut g = TemporalHypergraph::new();
        g.declare_class("Oil").unwrap();
        g.declare_class("Liquid").unwrap();
        g.add_event("Oil", &["o"], &["o"], iv(0, 20)).unwrap();
        g.add_event("Liquid", &["o"], &["o"], iv(0, 20)).unwrap();
        g.add_event("Pour", &["o"], &["pan"], iv(2, 3)).unwrap();
        let q = Query::classification(&g, "Dish", 1);
        let mut s = init_walk(&g, &[g.entity_id("o").unwrap()], true).unwrap();
        for e in [0, 2, 1] {
            assert!(traverse_edge(&g, &mut s, EventId(e)).unwrap());
        }
        let rule = trace_to_rule(&g, &s.trace, s.time_net().as_ref(), &q).unwrap();
        assert_eq!(rule.signature, "Dish() <- Pour(X0,X1) , Oil(X0,X0)");
        assert!(rule.time_net.get(0, 1).is_full());
        assert!(evaluate(&rule, &g, &q));
    }

    #[test]
    fn multi_head_atoms_match_in_any_order() {
        let mut g = TemporalHypergraph::new();
        g.add_event("Cut", &["b"], &["a"], iv(0, 1)).unwrap();
        g.add_event("Mix", &["a", "b"], &["c"], iv(2, 3)).unwrap();
        // X0 is the cut tail, X1 its head; Mix heads {X0, X1}
        let rule = TemporalRule::unconstrained(
            Atom::new("L", vec![], vec![]),
            vec![Atom::new("Cut", vec![1], vec![0]), Atom::new("Mix", vec![1, 0], vec![2])],
        )
        .unwrap();
        assert!(evaluate(&rule, &g, &Query::classification(&g, "L", 0)));
    }

    #[test]
    fn query_event_is_never_grounded() {
        let mut g = TemporalHypergraph::new();
        let e = g.add_event("P", &["a"], &["b"], iv(0, 1)).unwrap();
        let q = Query::for_event(&g, e).unwrap();
        let rule = TemporalRule::unconstrained(Atom::new("P", vec![0], vec![1]), vec![Atom::new("P", vec![0], vec![1])]).unwrap();
        assert!(!evaluate(&rule, &g, &q));
        g.add_event("P", &["a"], &["b"], iv(3, 4)).unwrap();
        assert!(evaluate(&rule, &g, &q));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut g = TemporalHypergraph::new();
        for i in 0..30 {
            g.add_event("P", &[&format!("a{i}")], &[&format!("b{i}")], iv(0, 1)).unwrap();
        }
        // three disconnected P atoms with an impossible constraint on the last pair
        let mut net = IANetwork::unconstrained(atom_keys(3));
        net.set(1, 2, Before.into());
        let body = (0..3).map(|i| Atom::new("P", vec![2 * i], vec![2 * i + 1])).collect();
        let rule = TemporalRule::new(Atom::new("L", vec![], vec![]), body, net).unwrap();
        let out = find_grounding(&rule, &g, &Query::classification(&g, "L", 0), 500, |_| true);
        assert!(out.budget_exhausted);
        assert!(!out.matched());
    }
}
