//! Brute-force oracles and random instance builders shared by integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hyperrule_core::allen::{classify, BaseRelation, RelationSet};
use hyperrule_core::constraints::IANetwork;
use hyperrule_core::hypergraph::{EntityId, EventId, Interval, TemporalHypergraph};
use hyperrule_core::query::Query;
use hyperrule_core::rule::{Atom, TemporalRule};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn intervals(max: i64) -> Vec<Interval> {
    (0..=max).flat_map(|s| (s..=max).map(move |e| Interval { start: s, end: e })).collect()
}

/// Endpoint definitions of the base relations, stated independently of `classify`.
pub fn holds(r: BaseRelation, a: Interval, b: Interval) -> bool {
    use BaseRelation::*;
    let (s1, e1, s2, e2) = (a.start, a.end, b.start, b.end);
    match r {
        Before => e1 < s2,
        After => e2 < s1,
        Meets => e1 == s2,
        MetBy => e2 == s1,
        Overlaps => s1 < s2 && s2 < e1 && e1 < e2,
        OverlappedBy => s2 < s1 && s1 < e2 && e2 < e1,
        Starts => s1 == s2 && e1 < e2,
        StartedBy => s1 == s2 && e2 < e1,
        During => s2 < s1 && e1 < e2,
        Contains => s1 < s2 && e2 < e1,
        Finishes => e1 == e2 && s2 < s1,
        FinishedBy => e1 == e2 && s1 < s2,
        Equal => s1 == s2 && e1 == e2,
    }
}

/// Composition table by enumerating every interval triple with endpoints in `0..=max`.
pub fn composition_oracle(max: i64) -> [[RelationSet; 13]; 13] {
    let ivs = intervals(max);
    let mut t = [[RelationSet::EMPTY; 13]; 13];
    for &a in &ivs {
        for &b in &ivs {
            let r1 = classify(a, b).index();
            for &c in &ivs {
                let r2 = classify(b, c).index();
                t[r1][r2] = t[r1][r2].with(classify(a, c));
            }
        }
    }
    t
}

/// Whether integer intervals with endpoints in `0..=max` realize every cell.
pub fn realizable(net: &IANetwork, max: i64) -> bool {
    fn go(net: &IANetwork, ivs: &[Interval], chosen: &mut Vec<Interval>) -> bool {
        let i = chosen.len();
        if i == net.len() {
            return true;
        }
        for &iv in ivs {
            if (0..i).all(|j| net.get(j, i).contains(classify(chosen[j], iv))) {
                chosen.push(iv);
                if go(net, ivs, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(net, &intervals(max), &mut Vec::new())
}

fn permutations(xs: &[EntityId]) -> Vec<Vec<EntityId>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn bind_all(map: &mut BTreeMap<usize, EntityId>, vars: &[usize], xs: &[EntityId]) -> bool {
    for (&v, &x) in vars.iter().zip(xs) {
        if *map.entry(v).or_insert(x) != x {
            return false;
        }
    }
    true
}

fn assign(rule: &TemporalRule, graph: &TemporalHypergraph, tuple: &[EventId], i: usize, map: &BTreeMap<usize, EntityId>) -> bool {
    if i == tuple.len() {
        return true;
    }
    let atom = &rule.body[i];
    let ev = graph.event(tuple[i]);
    if ev.heads.len() != atom.head_vars.len() || ev.tails.len() != atom.tail_vars.len() {
        return false;
    }
    for perm in permutations(&ev.heads) {
        let mut m = map.clone();
        if bind_all(&mut m, &atom.head_vars, &perm) && bind_all(&mut m, &atom.tail_vars, &ev.tails) && assign(rule, graph, tuple, i + 1, &m) {
            return true;
        }
    }
    false
}

/// Enumerates every k-tuple of distinct events (k = body length) and checks it.
pub fn brute_evaluate(rule: &TemporalRule, graph: &TemporalHypergraph, query: &Query) -> bool {
    let k = rule.body.len();
    let n = graph.num_events();
    let (qh, qt) = query.arity();
    if rule.head.head_vars.len() != qh || rule.head.tail_vars.len() != qt {
        return false;
    }
    let mut starts = Vec::new();
    if query.is_classification() {
        starts.push(BTreeMap::new());
    } else {
        for perm in permutations(&query.heads) {
            let mut m = BTreeMap::new();
            if bind_all(&mut m, &rule.head.head_vars, &perm) && bind_all(&mut m, &rule.head.tail_vars, &[query.tail.unwrap()]) {
                starts.push(m);
            }
        }
    }
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut c = code;
        let tuple: Vec<EventId> = (0..k)
            .map(|_| {
                let e = EventId(c % n);
                c /= n;
                e
            })
            .collect();
        let distinct = (0..k).all(|i| (0..i).all(|j| tuple[i] != tuple[j]));
        if !distinct || tuple.iter().any(|&e| Some(e) == query.event) {
            continue;
        }
        let preds_ok = tuple.iter().zip(&rule.body).all(|(&e, a)| graph.predicate_name(graph.event(e).predicate) == a.predicate);
        let time_ok = (0..k).all(|i| {
            (0..i).all(|j| rule.time_net.get(j, i).contains(classify(graph.event(tuple[j]).interval, graph.event(tuple[i]).interval)))
        });
        if preds_ok && time_ok && starts.iter().any(|m| assign(rule, graph, &tuple, 0, m)) {
            return true;
        }
    }
    false
}

/// Random B-graph over `nodes` entities named `v0..`, heads of size 1..=max_heads.
pub fn random_b_graph<R: Rng>(rng: &mut R, nodes: usize, events: usize, predicates: usize, max_heads: usize, horizon: i64) -> TemporalHypergraph {
    let mut g = TemporalHypergraph::new();
    let names: Vec<String> = (0..nodes).map(|i| format!("v{i}")).collect();
    for _ in 0..events {
        let mut pool: Vec<&String> = names.iter().collect();
        pool.shuffle(rng);
        let nh = rng.random_range(1..=max_heads.min(nodes - 1));
        let heads: Vec<&str> = pool[..nh].iter().map(|s| s.as_str()).collect();
        let tail = if rng.random_bool(0.15) { pool[0].as_str() } else { pool[nh].as_str() };
        let p = format!("P{}", rng.random_range(0..predicates));
        let a = rng.random_range(0..=horizon);
        let b = rng.random_range(0..=horizon);
        let _ = g.add_event(&p, &heads, &[tail], Interval { start: a.min(b), end: a.max(b) });
    }
    g
}

/// Random relation set: usually the observed relation plus a few others, sometimes full.
pub fn random_set<R: Rng>(rng: &mut R, observed: Option<BaseRelation>) -> RelationSet {
    if rng.random_bool(0.3) {
        return RelationSet::FULL;
    }
    let mut s = RelationSet::from_bits(rng.random_range(0..(1u16 << 13)) & rng.random_range(0..(1u16 << 13)));
    if let Some(r) = observed {
        if rng.random_bool(0.7) {
            s = s.with(r);
        }
    }
    s
}

/// Random rule over the graph's predicates with up to `max_body` atoms.
pub fn random_rule<R: Rng>(rng: &mut R, graph: &TemporalHypergraph, max_body: usize, head: Atom) -> Option<TemporalRule> {
    let k = rng.random_range(1..=max_body);
    let vars = head.head_vars.len() + head.tail_vars.len() + 3;
    let mut body = Vec::new();
    let mut sample = Vec::new();
    for _ in 0..k {
        let e = graph.event(EventId(rng.random_range(0..graph.num_events())));
        sample.push(e.interval);
        let nh = e.heads.len();
        let mut vs: Vec<usize> = (0..vars).collect();
        vs.shuffle(rng);
        let heads = vs[..nh.min(vars - 1)].to_vec();
        let tail = if rng.random_bool(0.2) { heads[0] } else { vs[nh.min(vars - 1)] };
        body.push(Atom::new(graph.predicate_name(e.predicate), heads, vec![tail]));
    }
    let mut net = IANetwork::unconstrained((0..k).map(hyperrule_core::constraints::NodeKey::Atom).collect());
    for i in 0..k {
        for j in i + 1..k {
            net.set(i, j, random_set(rng, Some(classify(sample[i], sample[j]))));
        }
    }
    TemporalRule::new(head, body, net).ok()
}
