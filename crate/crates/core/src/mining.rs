//! Rule mining: walk from each positive query, turn traces into rules, aggregate by
//! relational signature and rank by frequency.

use std::collections::BTreeMap;

use crate::constraints::{generalize, IANetwork};
use crate::error::{Error, Result};
use crate::hypergraph::TemporalHypergraph;
use crate::query::{GraphQuery, QuerySet};
use crate::rule::{coverage_filter, trace_to_rule, TemporalRule};
use crate::walk::{mrbw, WalkDiagnostics, WalkParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MiningMode {
    /// Relational rules only; every temporal cell is left unconstrained.
    Mrbw,
    /// Temporal networks of all occurrences are unioned and re-propagated.
    MrbwPc,
}

impl std::str::FromStr for MiningMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrbw" => Ok(MiningMode::Mrbw),
            "mrbw_pc" | "mrbw-pc" | "pc" => Ok(MiningMode::MrbwPc),
            _ => Err(Error::InvalidParameter(format!("unknown mining mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningParams {
    pub walk: WalkParams,
    /// Minimum fraction of a positive graph's span some grounding must cover.
    /// Only applied to classification queries; `None` disables the filter.
    pub rho: Option<f64>,
    /// Keep at most this many rules after ranking.
    pub max_rules: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams { walk: WalkParams::default(), rho: Some(1.0), max_rules: 50 }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        if let Some(rho) = self.rho {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")));
            }
        }
        if self.max_rules == 0 {
            return Err(Error::InvalidParameter("max_rules must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedRule {
    pub rule: TemporalRule,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MiningOutput {
    pub rules: Vec<MinedRule>,
    pub diagnostics: WalkDiagnostics,
    pub candidates: usize,
    pub filtered: usize,
}

/// Per-query walk seed, so each positive gets an independent stream family.
pub fn query_seed(seed: u64, query_index: usize) -> u64 {
    let mut z = seed ^ (query_index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Candidate {
    rule: TemporalRule,
    net: IANetwork,
    count: usize,
}

fn graph_of<'a>(graphs: &'a [TemporalHypergraph], q: &GraphQuery) -> Result<&'a TemporalHypergraph> {
    graphs
        .get(q.graph)
        .ok_or_else(|| Error::InvalidParameter(format!("query refers to graph {} of {}", q.graph, graphs.len())))
}

/// Mines rules from the positive queries. Classification walks contribute one
/// rule per trace prefix; targeted walks contribute their full trace.
pub fn mine_rules(
    graphs: &[TemporalHypergraph],
    queries: &QuerySet,
    params: &MiningParams,
    mode: MiningMode,
) -> Result<MiningOutput> {
    params.validate()?;
    let mut walk = params.walk.clone();
    walk.record_temporal = mode == MiningMode::MrbwPc;
    let mut out = MiningOutput::default();
    let mut table: BTreeMap<String, Candidate> = BTreeMap::new();
    let mut classification = false;
    for (qi, gq) in queries.positives.iter().enumerate() {
        let graph = graph_of(graphs, gq)?;
        classification |= gq.query.is_classification();
        walk.seed = query_seed(params.walk.seed, qi);
        let walks = mrbw(graph, &gq.query, &walk)?;
        out.diagnostics.add(&walks.diagnostics);
        for w in walks.walks {
            let lengths: Vec<usize> =
                if gq.query.is_classification() { (1..=w.trace.len()).collect() } else { vec![w.trace.len()] };
            for k in lengths {
                let prefix_net = w.time_net.as_ref().map(|n| n.select(&(0..k).collect::<Vec<_>>()));
                let rule = trace_to_rule(graph, &w.trace[..k], prefix_net.as_ref(), &gq.query)?;
                match table.get_mut(&rule.signature) {
                    Some(c) => {
                        c.count += 1;
                        if mode == MiningMode::MrbwPc {
                            c.net = generalize(&c.net, &rule.time_net)?;
                        }
                    }
                    None => {
                        let net = match mode {
                            MiningMode::Mrbw => rule.time_net.widened(),
                            MiningMode::MrbwPc => rule.time_net.clone(),
                        };
                        table.insert(rule.signature.clone(), Candidate { rule, net, count: 1 });
                    }
                }
            }
        }
    }
    out.candidates = table.len();
    let mut ranked: Vec<Candidate> = table.into_values().collect();
    // BTreeMap order is by signature, so a stable sort on count keeps ties lexicographic
    ranked.sort_by_key(|c| std::cmp::Reverse(c.count));
    let rho = params.rho.filter(|_| classification);
    for c in ranked {
        if out.rules.len() == params.max_rules {
            break;
        }
        // multi-start walks can join unrelated chains
        if !c.rule.is_connected() {
            out.filtered += 1;
            continue;
        }
        let rule = TemporalRule { time_net: c.net, weight: c.count as f64, ..c.rule };
        if let Some(rho) = rho {
            let covers = queries
                .positives
                .iter()
                .all(|gq| graph_of(graphs, gq).map(|g| coverage_filter(&rule, g, rho)).unwrap_or(false));
            if !covers {
                out.filtered += 1;
                continue;
            }
        }
        out.rules.push(MinedRule { rule, count: c.count });
    }
    Ok(out)
}
