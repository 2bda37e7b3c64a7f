//! Planted-rule corpus generator.
//!
//! Positive graphs hold one grounding of the planted rule with intervals satisfying
//! its constraint network plus random noise events. Negative graphs hold the same
//! chain with intervals that break at least one constraint.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allen::classify;
use crate::constraints::IANetwork;
use crate::error::{Error, Result};
use crate::hypergraph::{Interval, TemporalHypergraph};
use crate::query::Query;
use crate::rule::{evaluate, TemporalRule};

const NOISE_PREDICATES: usize = 5;
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub num_pos: usize,
    pub num_neg: usize,
    pub planted: TemporalRule,
    pub noise_events: usize,
    pub seed: u64,
    /// Label of negative graphs; positives carry the planted head predicate.
    pub negative_label: String,
    /// Endpoints of planted intervals are drawn from `0..=horizon`.
    pub horizon: i64,
}

impl SynthSpec {
    pub fn new(planted: TemporalRule, num_pos: usize, num_neg: usize, noise_events: usize, seed: u64) -> SynthSpec {
        SynthSpec { num_pos, num_neg, planted, noise_events, seed, negative_label: "background".into(), horizon: 40 }
    }
}

/// The three-atom chain used by the planted-rule experiment.
pub fn default_planted_rule() -> TemporalRule {
    "w=0 planted() <- A(X0,X1) , B(X1,X2) , C(X2,X3) | 0 {BEFORE} 1 ; 1 {MEETS,OVERLAPS} 2"
        .parse()
        .expect("built-in rule parses")
}

fn satisfies(net: &IANetwork, ivs: &[Interval]) -> bool {
    (0..ivs.len()).all(|i| (0..i).all(|j| net.get(j, i).contains(classify(ivs[j], ivs[i]))))
}

fn all_intervals(horizon: i64) -> Vec<Interval> {
    (0..=horizon).flat_map(|s| (s..=horizon).map(move |e| Interval { start: s, end: e })).collect()
}

fn backtrack(net: &IANetwork, grid: &[Interval], rng: &mut ChaCha8Rng, chosen: &mut Vec<Interval>) -> bool {
    let i = chosen.len();
    if i == net.len() {
        return true;
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(rng);
    for k in order {
        let iv = grid[k];
        if (0..i).all(|j| net.get(j, i).contains(classify(chosen[j], iv))) {
            chosen.push(iv);
            if backtrack(net, grid, rng, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Random intervals realizing `net` on the integer grid `0..=horizon`.
pub fn sample_satisfying(net: &IANetwork, horizon: i64, rng: &mut ChaCha8Rng) -> Result<Vec<Interval>> {
    let (ok, resolved) = net.resolve_time();
    if !ok {
        return Err(Error::Unsatisfiable);
    }
    let mut chosen = Vec::new();
    if backtrack(&resolved, &all_intervals(horizon), rng, &mut chosen) {
        Ok(chosen)
    } else {
        Err(Error::Unsatisfiable)
    }
}

fn random_interval(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Interval {
    let a = rng.random_range(lo..=hi);
    let b = rng.random_range(lo..=hi);
    Interval { start: a.min(b), end: a.max(b) }
}

fn build_graph(
    spec: &SynthSpec,
    intervals: &[Interval],
    label: &str,
    rng: &mut ChaCha8Rng,
) -> Result<TemporalHypergraph> {
    let rule = &spec.planted;
    let mut g = TemporalHypergraph::new();
    let var = |v: usize| format!("x{v}");
    for (atom, &iv) in rule.body.iter().zip(intervals) {
        let heads: Vec<String> = atom.head_vars.iter().map(|&v| var(v)).collect();
        let tails: Vec<String> = atom.tail_vars.iter().map(|&v| var(v)).collect();
        if heads == tails {
            g.declare_class(&atom.predicate)?;
        }
        let h: Vec<&str> = heads.iter().map(String::as_str).collect();
        let t: Vec<&str> = tails.iter().map(String::as_str).collect();
        g.add_event(&atom.predicate, &h, &t, iv)?;
    }
    let span = g.span().unwrap_or(Interval { start: 0, end: spec.horizon });
    let chain: Vec<String> = (0..rule.num_vars()).map(var).collect();
    let noise: Vec<String> = (0..spec.noise_events.max(2)).map(|i| format!("n{i}")).collect();
    for _ in 0..spec.noise_events {
        let p = format!("N{}", rng.random_range(0..NOISE_PREDICATES));
        let pool = chain.len() + noise.len();
        let h = rng.random_range(0..pool);
        let head = if h < chain.len() { &chain[h] } else { &noise[h - chain.len()] };
        let tail = loop {
            let t = &noise[rng.random_range(0..noise.len())];
            if t != head {
                break t;
            }
        };
        g.add_event(&p, &[head], &[tail], random_interval(rng, span.start, span.end))?;
    }
    g.set_label(Some(label.to_string()));
    Ok(g)
}

/// Generates `num_pos` positive graphs followed by `num_neg` negatives.
pub fn synth_generate(spec: &SynthSpec) -> Result<Vec<TemporalHypergraph>> {
    let rule = &spec.planted;
    if rule.time_net.widened() == rule.time_net {
        return Err(Error::InvalidParameter("planted rule has no temporal constraints".into()));
    }
    if spec.horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let label = rule.head.predicate.clone();
    if label == spec.negative_label {
        return Err(Error::InvalidParameter("positive and negative labels coincide".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (ok, net) = rule.time_net.resolve_time();
    if !ok {
        return Err(Error::Unsatisfiable);
    }
    let mut graphs = Vec::with_capacity(spec.num_pos + spec.num_neg);
    for positive in std::iter::repeat_n(true, spec.num_pos).chain(std::iter::repeat_n(false, spec.num_neg)) {
        let mut made = None;
        for _ in 0..MAX_ATTEMPTS {
            let ivs = if positive {
                sample_satisfying(&net, spec.horizon, &mut rng)?
            } else {
                let ivs: Vec<Interval> =
                    (0..net.len()).map(|_| random_interval(&mut rng, 0, spec.horizon)).collect();
                if satisfies(&net, &ivs) {
                    continue;
                }
                ivs
            };
            let g = build_graph(spec, &ivs, if positive { &label } else { &spec.negative_label }, &mut rng)?;
            if evaluate(rule, &g, &Query::classification(&g, &label, 0)) == positive {
                made = Some(g);
                break;
            }
        }
        graphs.push(made.ok_or_else(|| {
            Error::InvalidParameter(format!("could not generate a {} graph", if positive { "positive" } else { "negative" }))
        })?);
    }
    Ok(graphs)
}
