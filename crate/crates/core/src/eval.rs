//! Query-set construction, train/test splitting and ranking metrics.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::TemporalHypergraph;
use crate::query::{GraphQuery, Query, QuerySet, DEFAULT_START_EVENTS};

/// One query per graph: graphs labelled `target` are positive, the rest negative.
pub fn build_classification_queries(graphs: &[TemporalHypergraph], target: &str) -> Result<QuerySet> {
    let mut qs = QuerySet::default();
    for (i, g) in graphs.iter().enumerate() {
        let gq = GraphQuery { graph: i, query: Query::classification(g, target, DEFAULT_START_EVENTS) };
        if g.label() == Some(target) {
            qs.positives.push(gq);
        } else {
            qs.negatives.push(gq);
        }
    }
    if qs.positives.is_empty() {
        return Err(Error::DegenerateLabels(format!("no graph is labelled `{target}`")));
    }
    if qs.negatives.is_empty() {
        return Err(Error::DegenerateLabels(format!("every graph is labelled `{target}`")));
    }
    Ok(qs)
}

/// Every event of `graph` becomes a query, positive iff its predicate is listed.
pub fn build_event_queries(graph: &TemporalHypergraph, graph_index: usize, positive: &[&str]) -> Result<QuerySet> {
    let mut qs = QuerySet::default();
    for e in graph.events() {
        let q = GraphQuery { graph: graph_index, query: Query::for_event(graph, e.id)? };
        if positive.contains(&graph.predicate_name(e.predicate)) {
            qs.positives.push(q);
        } else {
            qs.negatives.push(q);
        }
    }
    Ok(qs)
}

/// Distinct labels over a corpus, sorted.
pub fn labels(graphs: &[TemporalHypergraph]) -> Vec<String> {
    graphs.iter().filter_map(|g| g.label().map(str::to_string)).collect::<BTreeSet<_>>().into_iter().collect()
}

fn split_list(items: &[GraphQuery], rng: &mut ChaCha8Rng, frac: f64) -> (Vec<GraphQuery>, Vec<GraphQuery>) {
    let mut v = items.to_vec();
    v.shuffle(rng);
    let n = v.len();
    let mut k = (n as f64 * frac).round() as usize;
    if n >= 2 {
        k = k.clamp(1, n - 1);
    }
    let test = v.split_off(k.min(n));
    (v, test)
}

/// Seeded shuffle of positives and negatives, each split at `frac` into train/test.
pub fn split(qs: &QuerySet, seed: u64, frac: f64) -> Result<(QuerySet, QuerySet)> {
    if !(0.0..=1.0).contains(&frac) {
        return Err(Error::InvalidParameter(format!("train fraction must lie in [0, 1], got {frac}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tp, sp) = split_list(&qs.positives, &mut rng, frac);
    let (tn, sn) = split_list(&qs.negatives, &mut rng, frac);
    Ok((QuerySet { positives: tp, negatives: tn }, QuerySet { positives: sp, negatives: sn }))
}

/// 1-based rank of `scores[index]` under descending order; ties take the mean
/// rank of their block.
pub fn rank_positive(scores: &[f64], index: usize) -> f64 {
    let s = scores[index];
    let above = scores.iter().filter(|&&x| x > s).count();
    let tied = scores.iter().filter(|&&x| x == s).count();
    above as f64 + (tied as f64 + 1.0) / 2.0
}

pub fn mrr(ranks: &[f64]) -> Result<f64> {
    check_ranks(ranks)?;
    Ok(ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64)
}

/// Percentage of ranks at most `k`.
pub fn hits_at_k(ranks: &[f64], k: usize) -> Result<f64> {
    check_ranks(ranks)?;
    Ok(100.0 * ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / ranks.len() as f64)
}

fn check_ranks(ranks: &[f64]) -> Result<()> {
    if ranks.is_empty() {
        return Err(Error::EmptyRanks);
    }
    if let Some(r) = ranks.iter().find(|&&r| r.is_nan() || r < 1.0) {
        return Err(Error::InvalidParameter(format!("rank {r} is below 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub mrr: f64,
    #[serde(rename = "hits@3")]
    pub hits3: f64,
    #[serde(rename = "hits@10")]
    pub hits10: f64,
    pub n_queries: usize,
    pub mode: String,
    pub seed: u64,
}

impl MetricsRecord {
    pub fn from_ranks(ranks: &[f64], mode: &str, seed: u64) -> Result<MetricsRecord> {
        Ok(MetricsRecord {
            mrr: mrr(ranks)?,
            hits3: hits_at_k(ranks, 3)?,
            hits10: hits_at_k(ranks, 10)?,
            n_queries: ranks.len(),
            mode: mode.to_string(),
            seed,
        })
    }

    /// Unweighted mean of the metrics; query counts are summed.
    pub fn macro_average(records: &[MetricsRecord], mode: &str, seed: u64) -> Result<MetricsRecord> {
        if records.is_empty() {
            return Err(Error::EmptyRanks);
        }
        let n = records.len() as f64;
        Ok(MetricsRecord {
            mrr: records.iter().map(|r| r.mrr).sum::<f64>() / n,
            hits3: records.iter().map(|r| r.hits3).sum::<f64>() / n,
            hits10: records.iter().map(|r| r.hits10).sum::<f64>() / n,
            n_queries: records.iter().map(|r| r.n_queries).sum(),
            mode: mode.to_string(),
            seed,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }

    pub fn table(&self) -> String {
        format!(
            "{:<14} {:>8} {:>8} {:>8} {:>9}\n{:<14} {:>8.4} {:>8.2} {:>8.2} {:>9}\n",
            "mode", "mrr", "hits@3", "hits@10", "queries", self.mode, self.mrr, self.hits3, self.hits10, self.n_queries
        )
    }
}

impl fmt::Display for MetricsRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}
